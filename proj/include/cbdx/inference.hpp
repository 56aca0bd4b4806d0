#pragma once
// Likelihood and posterior computation over causal disease trees.
//
// A tree is evaluated at a single time since onset: every link curve is read
// at that time, pathstates are latent binary variables marginalized exactly
// by recursion, and each symptom may additionally be produced by a cause
// outside the hypothesis pool with its age/sex base rate (noisy-OR).

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbdx/error.hpp"
#include "cbdx/kb_model.hpp"

namespace cbdx {

enum class Finding { present, absent, unknown };

inline std::string_view to_string(Finding f) {
    switch (f) {
    case Finding::present: return "present";
    case Finding::absent: return "absent";
    case Finding::unknown: return "unknown";
    }
    return "unknown";
}

inline std::optional<Finding> parse_finding(std::string_view s) {
    if (s == "present") return Finding::present;
    if (s == "absent") return Finding::absent;
    if (s == "unknown") return Finding::unknown;
    return std::nullopt;
}

struct FindingSet {
    std::map<std::string, Finding> values; // unlisted symptoms are unknown
    double measurement_time = 0.0;         // hours since onset

    Finding value(const std::string& symptom_id) const {
        auto it = values.find(symptom_id);
        return it == values.end() ? Finding::unknown : it->second;
    }

    FindingSet& set(const std::string& symptom_id, Finding v) {
        values[symptom_id] = v;
        return *this;
    }

    bool operator==(const FindingSet&) const = default;
};

// External-cause probability per symptom for one patient.
class BaseRates {
public:
    BaseRates() = default;

    BaseRates(const KnowledgeBase& kb, const PatientContext& patient) {
        for (const auto& s : kb.symptoms) rates_[s.id] = s.base_rate_at(patient.sex, patient.age);
    }

    static BaseRates zero() { return BaseRates{}; }

    double operator()(const std::string& symptom_id) const {
        auto it = rates_.find(symptom_id);
        return it == rates_.end() ? 0.0 : it->second;
    }

    void set(const std::string& symptom_id, double b) { rates_[symptom_id] = b; }

private:
    std::map<std::string, double> rates_;
};

inline void check_findings(const KnowledgeBase& kb, const FindingSet& findings) {
    for (const auto& [id, v] : findings.values) {
        if (!kb.find_symptom(id))
            throw Error(ErrorKind::unresolved_reference, "finding refers to unknown symptom '" + id + "'");
    }
    if (!(findings.measurement_time >= 0.0))
        throw Error(ErrorKind::invalid_argument, "measurement time must be >= 0");
}

namespace detail {

// Noisy-OR of an in-tree cause (q) and an external cause (b).
inline double leaf_factor(Finding v, double q, double b) {
    switch (v) {
    case Finding::present: return q + b - q * b;
    case Finding::absent: return (1.0 - q) * (1.0 - b);
    case Finding::unknown: return 1.0;
    }
    return 1.0;
}

inline double external_factor(Finding v, double b) {
    switch (v) {
    case Finding::present: return b;
    case Finding::absent: return 1.0 - b;
    case Finding::unknown: return 1.0;
    }
    return 1.0;
}

// Probability of the findings below `node` when nothing in the tree caused
// them, i.e. only external causes act.
inline double external_below(const CausalNode& node, const FindingSet& findings, const BaseRates& rates) {
    if (node.is_symptom()) return external_factor(findings.value(*node.symptom_id), rates(*node.symptom_id));
    double r = 1.0;
    for (const auto& e : node.children) r *= external_below(e.child, findings, rates);
    return r;
}

inline double hood_rev(const CausalNode& node, const FindingSet& findings, double t, const BaseRates& rates) {
    double r = 1.0;
    for (const auto& e : node.children) {
        const double q = eval_time_curve(e.link, t);
        const CausalNode& y = e.child;
        if (y.is_symptom()) {
            r *= leaf_factor(findings.value(*y.symptom_id), q, rates(*y.symptom_id));
        } else {
            r *= q * hood_rev(y, findings, t, rates) + (1.0 - q) * external_below(y, findings, rates);
        }
    }
    return r;
}

} // namespace detail

// Likelihood of the findings below `node` given that it is caused, with no
// external causes. A pathstate that fails to be caused leaves all of its
// descendants absent, so such a branch contributes only when none of them is
// observed present.
inline double hood_basic(const CausalNode& node, const FindingSet& findings, double t) {
    double r = 1.0;
    for (const auto& e : node.children) {
        const double q = eval_time_curve(e.link, t);
        const CausalNode& y = e.child;
        if (y.is_symptom()) {
            switch (findings.value(*y.symptom_id)) {
            case Finding::present: r *= q; break;
            case Finding::absent: r *= 1.0 - q; break;
            case Finding::unknown: break;
            }
        } else {
            const double none_present = detail::external_below(y, findings, BaseRates::zero());
            r *= q * hood_basic(y, findings, t) + (1.0 - q) * none_present;
        }
    }
    return r;
}

inline double external_only_likelihood(const std::vector<std::string>& symptom_ids, const FindingSet& findings,
                                       const KnowledgeBase& kb, const PatientContext& patient) {
    double r = 1.0;
    for (const auto& id : symptom_ids) {
        const SymptomDef* s = kb.find_symptom(id);
        if (!s) throw Error(ErrorKind::unresolved_reference, "unknown symptom '" + id + "'");
        r *= detail::external_factor(findings.value(id), s->base_rate_at(patient.sex, patient.age));
    }
    return r;
}

inline double hood_rev(const CausalNode& node, const FindingSet& findings, double t, const KnowledgeBase& kb,
                       const PatientContext& patient) {
    return detail::hood_rev(node, findings, t, BaseRates(kb, patient));
}

// ---------------------------------------------------------------------------
// Posterior

struct DiseaseTerm {
    std::string disease_id;
    double prior = 0.0;
    double in_tree_likelihood = 0.0; // hood of the disease's own symptoms
    double external_factor = 0.0;    // base-rate product over the other symptoms
    double numerator = 0.0;
    double posterior = 0.0;
};

struct PosteriorReport {
    std::vector<DiseaseTerm> terms; // knowledge-base order
    double measurement_time = 0.0;
    std::optional<double> first_measurement_time; // set for two-time reports

    ProbabilityMap posteriors() const {
        ProbabilityMap m;
        for (const auto& t : terms) m[t.disease_id] = t.posterior;
        return m;
    }

    ProbabilityMap priors() const {
        ProbabilityMap m;
        for (const auto& t : terms) m[t.disease_id] = t.prior;
        return m;
    }

    const DiseaseTerm& term(std::string_view disease_id) const {
        for (const auto& t : terms)
            if (t.disease_id == disease_id) return t;
        throw Error(ErrorKind::unresolved_reference, "no posterior for disease '" + std::string(disease_id) + "'");
    }
};

// Bayes over the mutually exclusive disease pool with a pluggable in-tree
// likelihood. Symptoms outside a disease's tree contribute their external
// (base-rate) probability. `ExternalFn(symptom_id, b)` returns the factor
// for one out-of-tree symptom.
template <class TreeLikelihood, class ExternalFn>
PosteriorReport posterior_from(const KnowledgeBase& kb, const ProbabilityMap& priors, TreeLikelihood&& in_tree,
                               ExternalFn&& external, double measurement_time) {
    PosteriorReport report;
    report.measurement_time = measurement_time;
    double total = 0.0;
    for (const auto& d : kb.diseases) {
        DiseaseTerm term;
        term.disease_id = d.id;
        auto it = priors.find(d.id);
        term.prior = it == priors.end() ? 0.0 : it->second;
        term.in_tree_likelihood = in_tree(d);
        const auto own = descendant_symptoms(d.tree);
        double ext = 1.0;
        for (const auto& s : kb.symptoms) {
            if (std::find(own.begin(), own.end(), s.id) == own.end()) ext *= external(s.id);
        }
        term.external_factor = ext;
        term.numerator = term.prior * term.in_tree_likelihood * term.external_factor;
        total += term.numerator;
        report.terms.push_back(std::move(term));
    }
    if (!(total > 0.0))
        throw Error(ErrorKind::inconsistent_evidence,
                    "no disease in the pool can account for the findings (all numerators are zero)");
    for (auto& term : report.terms) term.posterior = term.numerator / total;
    return report;
}

inline PosteriorReport posterior(const KnowledgeBase& kb, const PatientContext& patient, const FindingSet& findings,
                                 const ProbabilityMap& priors) {
    check_findings(kb, findings);
    const BaseRates rates(kb, patient);
    const double t = findings.measurement_time;
    return posterior_from(
        kb, priors, [&](const DiseaseDef& d) { return detail::hood_rev(d.tree, findings, t, rates); },
        [&](const std::string& id) { return detail::external_factor(findings.value(id), rates(id)); }, t);
}

inline PosteriorReport posterior(const KnowledgeBase& kb, const PatientContext& patient, const FindingSet& findings) {
    return posterior(kb, patient, findings, eval_priors(kb, patient));
}

// ---------------------------------------------------------------------------
// Path products and the coherency check

namespace detail {

inline bool path_to(const CausalNode& node, const std::string& symptom_id, std::vector<const TimeCurve*>& path) {
    for (const auto& e : node.children) {
        path.push_back(&e.link);
        if (e.child.is_symptom() ? e.child.symptom_id == symptom_id : path_to(e.child, symptom_id, path))
            return true;
        path.pop_back();
    }
    return false;
}

} // namespace detail

// Links on the root-to-symptom path, root side first.
inline std::vector<const TimeCurve*> causal_path(const DiseaseDef& disease, const std::string& symptom_id) {
    std::vector<const TimeCurve*> path;
    if (!detail::path_to(disease.tree, symptom_id, path))
        throw Error(ErrorKind::not_caused,
                    "symptom '" + symptom_id + "' is not caused by disease '" + disease.id + "'");
    return path;
}

inline double path_likelihood(const DiseaseDef& disease, const std::string& symptom_id, double t) {
    double p = 1.0;
    for (const TimeCurve* link : causal_path(disease, symptom_id)) p *= eval_time_curve(*link, t);
    return p;
}

inline double path_likelihood(const KnowledgeBase& kb, std::string_view disease_id, const std::string& symptom_id,
                              double t) {
    return path_likelihood(kb.disease(disease_id), symptom_id, t);
}

struct CoherencyRow {
    std::string symptom_id;
    double t = 0.0;
    double model_p = 0.0;
    double direct_p = 0.0;
    double delta = 0.0; // model - direct
};

inline std::vector<CoherencyRow> coherency_report(const KnowledgeBase& kb, std::string_view disease_id,
                                                  const std::vector<double>& grid, double tol) {
    const DiseaseDef& d = kb.disease(disease_id);
    std::vector<CoherencyRow> rows;
    for (const auto& dc : d.direct) {
        for (double t : grid) {
            CoherencyRow row;
            row.symptom_id = dc.symptom_id;
            row.t = t;
            row.model_p = path_likelihood(d, dc.symptom_id, t);
            row.direct_p = eval_time_curve(dc.curve, t);
            row.delta = row.model_p - row.direct_p;
            if (std::abs(row.delta) > tol) rows.push_back(std::move(row));
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const CoherencyRow& a, const CoherencyRow& b) {
        return std::abs(a.delta) > std::abs(b.delta);
    });
    return rows;
}

} // namespace cbdx
