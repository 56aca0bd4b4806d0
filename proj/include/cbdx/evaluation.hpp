#pragma once
// Calibration experiment: causal model vs. a naive-independence model built
// from the same path likelihoods.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "cbdx/error.hpp"
#include "cbdx/inference.hpp"
#include "cbdx/json_io.hpp"
#include "cbdx/simulate.hpp"

namespace cbdx {

// Each in-tree symptom is treated as caused directly by the disease with its
// path-product likelihood; symptoms are independent given the disease. The
// external-cause rule is the same as in the causal model.
inline double independence_likelihood(const DiseaseDef& disease, const FindingSet& findings, double t,
                                      const BaseRates& rates) {
    double r = 1.0;
    for (const auto& id : descendant_symptoms(disease.tree)) {
        const Finding v = findings.value(id);
        if (v == Finding::unknown) continue;
        r *= detail::leaf_factor(v, path_likelihood(disease, id, t), rates(id));
    }
    return r;
}

inline double independence_likelihood(const KnowledgeBase& kb, std::string_view disease_id,
                                      const FindingSet& findings, double t, const PatientContext& patient) {
    return independence_likelihood(kb.disease(disease_id), findings, t, BaseRates(kb, patient));
}

inline PosteriorReport independence_posterior(const KnowledgeBase& kb, const PatientContext& patient,
                                              const FindingSet& findings, const ProbabilityMap& priors) {
    check_findings(kb, findings);
    const BaseRates rates(kb, patient);
    const double t = findings.measurement_time;
    return posterior_from(
        kb, priors, [&](const DiseaseDef& d) { return independence_likelihood(d, findings, t, rates); },
        [&](const std::string& id) { return detail::external_factor(findings.value(id), rates(id)); }, t);
}

// ---------------------------------------------------------------------------
// Calibration (reliability term of the probability score)

struct ForecastOutcome {
    double forecast = 0.0;
    int outcome = 0; // 1 if the target disease was the true one
    std::uint64_t case_id = 0;
};

struct CalibrationBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
    double mean_forecast = 0.0; // 0 when the bin is empty
    double observed_frequency = 0.0;
};

struct CalibrationResult {
    double score = 0.0;
    std::vector<CalibrationBin> bins;
};

inline std::size_t bin_index(double forecast, std::size_t bins) {
    const double scaled = std::floor(forecast * static_cast<double>(bins));
    if (!(scaled >= 0.0)) return 0;
    return std::min(static_cast<std::size_t>(scaled), bins - 1);
}

// score = (1/N) * sum_b n_b (mean forecast_b - observed frequency_b)^2 over
// equal-width bins on [0, 1].
inline CalibrationResult calibration_score(const std::vector<ForecastOutcome>& data, std::size_t bins = 10) {
    if (data.empty()) throw Error(ErrorKind::invalid_argument, "calibration needs at least one forecast");
    if (bins == 0) throw Error(ErrorKind::invalid_argument, "calibration needs at least one bin");
    CalibrationResult r;
    r.bins.resize(bins);
    std::vector<double> sum_f(bins, 0.0), sum_o(bins, 0.0);
    for (const auto& d : data) {
        if (!(d.forecast >= 0.0 && d.forecast <= 1.0))
            throw Error(ErrorKind::invalid_argument, "forecast outside [0, 1]");
        const std::size_t b = bin_index(d.forecast, bins);
        ++r.bins[b].n;
        sum_f[b] += d.forecast;
        sum_o[b] += d.outcome;
    }
    double acc = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        auto& bin = r.bins[b];
        bin.lo = static_cast<double>(b) / static_cast<double>(bins);
        bin.hi = static_cast<double>(b + 1) / static_cast<double>(bins);
        if (bin.n == 0) continue;
        const double n = static_cast<double>(bin.n);
        bin.mean_forecast = sum_f[b] / n;
        bin.observed_frequency = sum_o[b] / n;
        const double gap = bin.mean_forecast - bin.observed_frequency;
        acc += n * gap * gap;
    }
    r.score = acc / static_cast<double>(data.size());
    return r;
}

// ---------------------------------------------------------------------------
// Quadratic-regression calibration area

struct QuadraticFit {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double operator()(double x) const { return c0 + x * (c1 + x * c2); }
};

inline QuadraticFit fit_quadratic(const std::vector<ForecastOutcome>& data) {
    if (data.size() < 3) throw Error(ErrorKind::invalid_argument, "quadratic fit needs at least 3 cases");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(data.size()), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const double x = data[i].forecast;
        X(row, 0) = 1.0;
        X(row, 1) = x;
        X(row, 2) = x * x;
        y(row) = data[i].outcome;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-12);
    if (qr.rank() < 3)
        throw Error(ErrorKind::undefined_fit, "quadratic fit is undefined: fewer than 3 distinct forecast values");
    const Eigen::Vector3d c = qr.solve(y);
    return {c(0), c(1), c(2)};
}

// Trapezoid rule for the integral of |fit(x) - x| over [0, 1], step 1e-3.
inline double regression_area(const std::vector<ForecastOutcome>& data) {
    const QuadraticFit fit = fit_quadratic(data);
    constexpr int kSteps = 1000;
    double area = 0.0;
    double prev = std::abs(fit(0.0));
    for (int i = 1; i <= kSteps; ++i) {
        const double x = static_cast<double>(i) / kSteps;
        const double cur = std::abs(fit(x) - x);
        area += 0.5 * (prev + cur) / kSteps;
        prev = cur;
    }
    return area;
}

// ---------------------------------------------------------------------------
// Jackknife on the paired calibration-score difference

struct PairedForecast {
    double causal = 0.0;
    double independence = 0.0;
    int outcome = 0;
};

struct JackknifeResult {
    double delta = 0.0;          // score(independence) - score(causal), full sample
    double jackknife_mean = 0.0; // mean of the pseudo-values
    double standard_error = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0; // two-sided, N-1 degrees of freedom
    bool tie = false;     // pseudo-values have zero variance; no test possible
};

namespace detail {

// Binned sums supporting leave-one-out recomputation of the score.
struct BinnedScore {
    std::vector<double> n, f, o;
    std::size_t bins;

    BinnedScore(const std::vector<double>& forecasts, const std::vector<int>& outcomes, std::size_t bins_)
        : n(bins_, 0.0), f(bins_, 0.0), o(bins_, 0.0), bins(bins_) {
        for (std::size_t i = 0; i < forecasts.size(); ++i) {
            const std::size_t b = bin_index(forecasts[i], bins);
            n[b] += 1.0;
            f[b] += forecasts[i];
            o[b] += outcomes[i];
        }
    }

    static double term(double n, double f, double o) { return n > 0.0 ? (f - o) * (f - o) / n : 0.0; }

    double total() const {
        double s = 0.0;
        for (std::size_t b = 0; b < bins; ++b) s += term(n[b], f[b], o[b]);
        return s;
    }

    // Sum of bin terms with case (forecast, outcome) removed.
    double total_without(double total_all, double forecast, int outcome) const {
        const std::size_t b = bin_index(forecast, bins);
        return total_all - term(n[b], f[b], o[b]) + term(n[b] - 1.0, f[b] - forecast, o[b] - outcome);
    }
};

} // namespace detail

inline JackknifeResult jackknife_compare(const std::vector<PairedForecast>& paired, std::size_t bins = 10) {
    const std::size_t n = paired.size();
    if (n < 10) throw Error(ErrorKind::invalid_argument, "jackknife comparison needs at least 10 cases");
    std::vector<double> fc(n), fi(n);
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        fc[i] = paired[i].causal;
        fi[i] = paired[i].independence;
        out[i] = paired[i].outcome;
    }
    const detail::BinnedScore causal(fc, out, bins), indep(fi, out, bins);
    const double tc = causal.total(), ti = indep.total();
    const double N = static_cast<double>(n);

    JackknifeResult r;
    r.delta = (ti - tc) / N;
    std::vector<double> pseudo(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double loo =
            (indep.total_without(ti, fi[i], out[i]) - causal.total_without(tc, fc[i], out[i])) / (N - 1.0);
        pseudo[i] = N * r.delta - (N - 1.0) * loo;
        mean += pseudo[i];
    }
    mean /= N;
    double ss = 0.0;
    for (double v : pseudo) ss += (v - mean) * (v - mean);
    r.jackknife_mean = mean;
    r.standard_error = std::sqrt(ss / (N - 1.0) / N);
    if (!(r.standard_error > 1e-15 * std::max(1.0, std::abs(mean)))) {
        r.tie = true;
        r.p_value = 1.0;
        return r;
    }
    r.t_statistic = mean / r.standard_error;
    const boost::math::students_t dist(N - 1.0);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_statistic)));
    return r;
}

// ---------------------------------------------------------------------------
// Benchmark

struct ModelCalibration {
    CalibrationResult calibration;
    std::optional<double> regression_area; // unset when the fit is undefined
};

struct CalibrationReport {
    std::string target;
    std::size_t n = 0;
    std::size_t bins = 10;
    std::optional<ProbabilityMap> priors_override;
    ModelCalibration causal;
    ModelCalibration independence;
    std::optional<JackknifeResult> jackknife; // needs >= 10 cases
    std::vector<ForecastOutcome> causal_forecasts;
    std::vector<ForecastOutcome> independence_forecasts;
};

inline ModelCalibration calibrate_model(const std::vector<ForecastOutcome>& data, std::size_t bins) {
    ModelCalibration m;
    m.calibration = calibration_score(data, bins);
    try {
        m.regression_area = regression_area(data);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::undefined_fit && e.kind() != ErrorKind::invalid_argument) throw;
    }
    return m;
}

// Forecasts are P(target) from each model at the first measurement of each
// case. With an override, fixed priors replace the patient-conditioned ones.
inline CalibrationReport run_benchmark(const KnowledgeBase& kb, const std::vector<CaseRecord>& cases,
                                       const std::string& target,
                                       const std::optional<ProbabilityMap>& priors_override = std::nullopt,
                                       std::size_t bins = 10) {
    kb.disease(target);
    if (cases.empty()) throw Error(ErrorKind::invalid_argument, "benchmark needs at least one case");
    CalibrationReport rep;
    rep.target = target;
    rep.n = cases.size();
    rep.bins = bins;
    rep.priors_override = priors_override;
    std::optional<ProbabilityMap> fixed;
    if (priors_override) fixed = override_priors(kb, *priors_override);

    std::vector<PairedForecast> paired;
    for (const auto& c : cases) {
        const ProbabilityMap priors = fixed ? *fixed : eval_priors(kb, c.patient);
        const double pc = posterior(kb, c.patient, c.findings, priors).term(target).posterior;
        const double pi = independence_posterior(kb, c.patient, c.findings, priors).term(target).posterior;
        const int outcome = c.true_disease == target ? 1 : 0;
        rep.causal_forecasts.push_back({pc, outcome, c.case_id});
        rep.independence_forecasts.push_back({pi, outcome, c.case_id});
        paired.push_back({pc, pi, outcome});
    }
    rep.causal = calibrate_model(rep.causal_forecasts, bins);
    rep.independence = calibrate_model(rep.independence_forecasts, bins);
    if (paired.size() >= 10) rep.jackknife = jackknife_compare(paired, bins);
    return rep;
}

inline Json calibration_to_json(const ModelCalibration& m) {
    Json j;
    j["score"] = m.calibration.score;
    j["regression_area"] = m.regression_area ? Json(*m.regression_area) : Json(nullptr);
    Json bins = Json::array();
    for (const auto& b : m.calibration.bins) {
        bins.push_back({{"lo", b.lo},
                        {"hi", b.hi},
                        {"n", b.n},
                        {"mean_forecast", b.mean_forecast},
                        {"observed_frequency", b.observed_frequency}});
    }
    j["bins"] = bins;
    return j;
}

inline Json report_to_json(const CalibrationReport& r) {
    Json j;
    j["target"] = r.target;
    j["n"] = r.n;
    j["bins"] = r.bins;
    j["priors_override"] = r.priors_override ? probability_map_to_json(*r.priors_override) : Json(nullptr);
    j["causal"] = calibration_to_json(r.causal);
    j["independence"] = calibration_to_json(r.independence);
    if (r.jackknife) {
        const auto& jk = *r.jackknife;
        j["jackknife"] = {{"delta", jk.delta},
                          {"jackknife_mean", jk.jackknife_mean},
                          {"standard_error", jk.standard_error},
                          {"t", jk.t_statistic},
                          {"p_value", jk.p_value},
                          {"tie", jk.tie}};
    } else {
        j["jackknife"] = nullptr;
    }
    return j;
}

inline std::string report_to_text(const CalibrationReport& r) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << "target: " << r.target << "   cases: " << r.n << "\n";
    if (r.priors_override) {
        os << "priors:";
        for (const auto& [id, p] : *r.priors_override) os << " " << id << "=" << p;
        os << "\n";
    }
    os << "\n  bin            causal n  mean   obs     indep n  mean   obs\n";
    for (std::size_t b = 0; b < r.causal.calibration.bins.size(); ++b) {
        const auto& c = r.causal.calibration.bins[b];
        const auto& i = r.independence.calibration.bins[b];
        char line[160];
        std::snprintf(line, sizeof line, "  [%.2f, %.2f)  %8zu  %.3f  %.3f  %8zu  %.3f  %.3f\n", c.lo, c.hi, c.n,
                      c.mean_forecast, c.observed_frequency, i.n, i.mean_forecast, i.observed_frequency);
        os << line;
    }
    os << "\ncalibration score   causal " << r.causal.calibration.score << "   independence "
       << r.independence.calibration.score << "\n";
    auto area = [](const std::optional<double>& a) { return a ? format_decimal(std::round(*a * 1e4) / 1e4) : "n/a"; };
    os << "regression area     causal " << area(r.causal.regression_area) << "   independence "
       << area(r.independence.regression_area) << "\n";
    if (r.jackknife) {
        const auto& jk = *r.jackknife;
        os << "jackknife           delta " << jk.delta << "   se " << jk.standard_error;
        if (jk.tie)
            os << "   (tie: no difference)\n";
        else
            os << "   t " << jk.t_statistic << "   p " << std::scientific << std::setprecision(3) << jk.p_value
               << "\n";
    }
    return os.str();
}

} // namespace cbdx
