// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>

#include "support.hpp"

using namespace cbdx;
using namespace cbdx::testing;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Random suite shared by the tree criteria.
struct Suite {
    std::vector<RandomCase> cases;
    std::vector<FindingSet> findings;
};

const Suite& suite() {
    static const Suite s = [] {
        Suite s;
        TreeGen gen(20240601);
        for (int i = 0; i < 250; ++i) {
            s.cases.push_back(gen.tree(8, 4));
            s.findings.push_back(gen.findings(s.cases.back().symptoms, s.cases.back().t));
        }
        return s;
    }();
    return s;
}

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    double worst = 0;
    const auto& s = suite();
    for (std::size_t i = 0; i < s.cases.size(); ++i) {
        const auto& rc = s.cases[i];
        const auto jd = enumerate_joint(rc.tree, rc.t, rc.rates);
        worst = std::max(worst, std::abs(detail::hood_rev(rc.tree, s.findings[i], rc.t, rc.rates) - jd.marginal(s.findings[i])));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && secs < 30 && s.cases.size() >= 200,
            fmt("%.0f trees, max |diff| %.3g, %.2f s", static_cast<double>(s.cases.size()), worst, secs)};
}

Outcome reduction() {
    double worst = 0;
    const auto& s = suite();
    for (std::size_t i = 0; i < s.cases.size(); ++i) {
        const auto& rc = s.cases[i];
        worst = std::max(worst, std::abs(detail::hood_rev(rc.tree, s.findings[i], rc.t, BaseRates::zero()) -
                                         hood_basic(rc.tree, s.findings[i], rc.t)));
    }
    return {worst <= 1e-15, fmt("max |diff| %.3g", worst)};
}

Outcome pqr_contrast() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad = 0;
    double worst_ratio = 0;
    for (int i = 0; i < 100; ++i) {
        const double p = u(rng), q = u(rng), r = u(rng);
        DiseaseDef d;
        d.id = "x";
        d.tree = pqr_tree(p, q, r);
        FindingSet f;
        f.set("s1", Finding::present).set("s2", Finding::present);
        const double causal = detail::hood_rev(d.tree, f, 0, BaseRates::zero());
        const double indep = independence_likelihood(d, f, 0, BaseRates::zero());
        if (causal != p * (q * r) || indep != (p * q) * (p * r)) ++bad;
        // The two products round independently, so the ratio carries a few ulp.
        worst_ratio = std::max(worst_ratio, std::abs(indep / causal - p) / p);
    }
    return {bad == 0 && worst_ratio <= 8 * std::numeric_limits<double>::epsilon(),
            fmt("%.0f mismatches, max relative ratio error %.3g", bad, worst_ratio)};
}

Outcome distribution() {
    double worst = 0;
    for (const auto& rc : suite().cases) {
        double total = 0;
        for (const auto& f : all_configurations(rc.symptoms, rc.t)) total += detail::hood_rev(rc.tree, f, rc.t, rc.rates);
        worst = std::max(worst, std::abs(total - 1.0));
    }
    return {worst <= 1e-12, fmt("max |sum - 1| %.3g", worst)};
}

Outcome synthetic_replication() {
    const auto t0 = Clock::now();
    DatasetConfig cfg;
    cfg.n_per_class = 1000;
    cfg.classes = {"appendicitis", "nsap"};
    cfg.seed = 42;
    const auto cases = generate_dataset(fixture(), cfg);
    const auto rep = run_benchmark(fixture(), cases, "appendicitis", ProbabilityMap{{"appendicitis", 0.5}, {"nsap", 0.5}});
    const double secs = seconds_since(t0);
    const double sc = rep.causal.calibration.score, si = rep.independence.calibration.score;
    const bool areas = rep.causal.regression_area && rep.independence.regression_area &&
                       *rep.causal.regression_area < *rep.independence.regression_area;
    const double p = rep.jackknife ? rep.jackknife->p_value : 1.0;
    Outcome o{sc < si && p < 0.05 && areas && secs < 60 && cases.size() == 2000,
              fmt("score causal %.5f vs independence %.5f, jackknife p %.3g", sc, si, p)};
    if (rep.causal.regression_area && rep.independence.regression_area)
        o.detail += fmt(", area %.4f vs %.4f, %.1f s", *rep.causal.regression_area, *rep.independence.regression_area, secs);
    return o;
}

Outcome temporal() {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_sum = 0;
    int nonzero = 0;
    for (int i = 0; i < 1000; ++i) {
        const double q1 = u(rng), q2 = u(rng);
        const auto pp = temporal_pattern_probs(q1, q2);
        worst_sum = std::max(worst_sum, std::abs(pp.yes_yes + pp.yes_no + pp.no_yes + pp.no_no - 1.0));
        if ((q1 < q2 ? pp.yes_no : q2 < q1 ? pp.no_yes : pp.yes_no + pp.no_yes) != 0.0) ++nonzero;
    }

    // Equal findings at both times with constant curves.
    TreeGen gen(13);
    double worst_post = 0;
    int compared = 0;
    while (compared < 100) {
        std::vector<CausalNode> trees;
        BaseRates rates;
        for (int i = 0; i < 3; ++i) {
            auto rc = gen.tree(5, 3);
            rc.tree.id = "d" + std::to_string(i);
            auto freeze = [&](auto& self, CausalNode& n) -> void {
                for (auto& e : n.children) {
                    e.link = flat(e.link(rc.t));
                    self(self, e.child);
                }
            };
            freeze(freeze, rc.tree);
            for (const auto& s : rc.symptoms) rates.set(s, 0.3 * gen.unit());
            trees.push_back(rc.tree);
        }
        const auto kb = kb_for(trees, rates);
        std::vector<std::string> vocab;
        for (const auto& s : kb.symptoms) vocab.push_back(s.id);
        const auto f1 = gen.findings(vocab, 5.0);
        auto f2 = f1;
        f2.measurement_time = 50.0;
        try {
            const auto one = posterior(kb, PatientContext{}, f1);
            const auto two = two_time_posterior(kb, PatientContext{}, f1, f2);
            for (std::size_t i = 0; i < one.terms.size(); ++i)
                worst_post = std::max(worst_post, std::abs(one.terms[i].posterior - two.terms[i].posterior));
            ++compared;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::inconsistent_evidence) throw;
        }
    }
    return {worst_sum <= 1e-12 && nonzero == 0 && worst_post <= 1e-12,
            fmt("max |sum - 1| %.3g, %.0f nonzero impossible patterns, max posterior diff %.3g", worst_sum, nonzero,
                worst_post)};
}

Outcome severity() {
    const auto& kb = fixture();
    const auto& d = kb.disease("appendicitis");
    CounterRng rng(99);
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        PatientContext p;
        p.age = rng.uniform(10, 70);
        const auto w = sample_world(kb, d, p, rng.uniform(0, 132), rng);
        for (const auto& n : w.nodes)
            if (n.parent >= 0 && n.caused && !w.nodes[static_cast<std::size_t>(n.parent)].caused) ++violations;
    }
    return {violations == 0, fmt("%.0f violations in 10000 worlds", violations)};
}

Outcome decision() {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> days(0.0, 20.0);
    int checked = 0, bad = 0;
    while (checked < 500) {
        UtilityTable u;
        u.morbidity["d"] = {days(rng), days(rng)};
        u.morbidity["c"] = {days(rng), days(rng)};
        const auto th = switch_threshold(u, "d", u.morbidity.at("c"));
        if (!th.probability || *th.probability < 1e-9 || *th.probability > 1 - 1e-9) continue;
        const double p = *th.probability;
        const auto below = recommend({{"d", p - 1e-12}, {"c", 1 - (p - 1e-12)}}, u).recommended;
        const auto above = recommend({{"d", p + 1e-12}, {"c", 1 - (p + 1e-12)}}, u).recommended;
        if (below == above || above != th.above) ++bad;
        ++checked;
    }
    return {bad == 0, fmt("%.0f of 500 tables fail to flip", bad)};
}

Outcome format() {
    const std::string text = read_file(data_path("fixture.pkb"));
    const auto parsed = parse_kb(text);
    const bool round_trip = parsed.ok() && serialize_kb(*parsed.kb) == text;

    std::mt19937_64 rng(15);
    std::uniform_int_distribution<int> len(0, 200), byte(0, 255), pick(0, 3);
    const std::string alphabet = "{}(),.-0123456789 \n\"abcdefghijklmnopqrstuvwxyz_#";
    std::size_t with_diagnostics = 0, crashes = 0;
    for (int i = 0; i < 100000; ++i) {
        std::string s;
        const int n = len(rng);
        const bool structured = pick(rng) != 0;
        for (int k = 0; k < n; ++k)
            s.push_back(structured ? alphabet[static_cast<std::size_t>(byte(rng)) % alphabet.size()]
                                   : static_cast<char>(byte(rng)));
        try {
            const auto r = parse_kb(s);
            with_diagnostics += !r.diagnostics.empty();
            if (!r.ok() && r.error_count() == 0) ++crashes;
        } catch (...) {
            ++crashes;
        }
    }
    return {round_trip && crashes == 0,
            std::string("round trip ") + (round_trip ? "ok" : "FAILED") +
                fmt(", 100000 fuzz inputs, %.0f crashed, %.0f with diagnostics", static_cast<double>(crashes),
                    static_cast<double>(with_diagnostics))};
}

Outcome calibration_metric() {
    const double perfect = calibration_score({{0.0, 0, 0}, {1.0, 1, 1}, {0.0, 0, 2}, {1.0, 1, 3}}).score;
    const double hand = (3 * (0.8 - 2.0 / 3.0) * (0.8 - 2.0 / 3.0) + 0.2 * 0.2) / 4;
    const double four = calibration_score({{0.8, 1, 0}, {0.8, 1, 1}, {0.8, 0, 2}, {0.2, 0, 3}}).score;
    return {perfect == 0.0 && std::abs(four - hand) <= 1e-15,
            fmt("perfect %.3g, four-case %.17g vs %.17g", perfect, four, hand)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"reduction to the base-rate-free likelihood", reduction},
        {"shared-cause contrast", pqr_contrast},
        {"likelihood is a distribution", distribution},
        {"synthetic calibration replication", synthetic_replication},
        {"temporal patterns", temporal},
        {"severity invariant", severity},
        {"decision threshold", decision},
        {"format round trip and fuzzing", format},
        {"calibration metric", calibration_metric},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.ok ? "PASS" : "FAIL") << "  " << name << "  (" << o.detail << ")\n" << std::flush;
        failed += !o.ok;
    }
    std::cout << (failed ? "FAILED: " + std::to_string(failed) + " criteria" : std::string("all criteria passed")) << "\n";
    return failed ? 1 : 0;
}
