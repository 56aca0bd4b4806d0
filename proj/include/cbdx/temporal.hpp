#pragma once
// Two-measurement inference. A link that fires at the time it is less likely
// to fire must also fire at the more likely time, so a link's behaviour over
// two times is one of four patterns with probabilities fixed by the two link
// values. External causes are persistent: present at both times or neither.

#include <algorithm>
#include <array>
#include <string>

#include "cbdx/inference.hpp"

namespace cbdx {

struct PatternProbabilities {
    double yes_yes = 0.0;
    double yes_no = 0.0; // present at t1, absent at t2
    double no_yes = 0.0; // absent at t1, present at t2
    double no_no = 0.0;
};

inline PatternProbabilities temporal_pattern_probs(double q_t1, double q_t2) {
    const double lo = std::min(q_t1, q_t2);
    const double hi = std::max(q_t1, q_t2);
    PatternProbabilities p;
    p.yes_yes = lo;
    p.no_no = 1.0 - hi;
    if (q_t1 <= q_t2)
        p.no_yes = hi - lo;
    else
        p.yes_no = hi - lo;
    return p;
}

namespace detail {

// Two-bit pattern: bit 0 = caused at t1, bit 1 = caused at t2.
using PatternVec = std::array<double, 4>;
constexpr unsigned kNeither = 0, kFirstOnly = 1, kSecondOnly = 2, kBoth = 3;

inline PatternVec pattern_vec(const PatternProbabilities& p) {
    return {p.no_no, p.yes_no, p.no_yes, p.yes_yes};
}

inline bool matches(Finding v, bool on) {
    return v == Finding::unknown || (v == Finding::present) == on;
}

inline bool matches(Finding v1, Finding v2, unsigned observed) {
    return matches(v1, (observed & 1u) != 0) && matches(v2, (observed & 2u) != 0);
}

// Observation likelihood of one symptom whose in-tree causation has pattern
// `caused`, OR-combined with a persistent external cause of probability b.
inline double symptom_two_time(Finding v1, Finding v2, unsigned caused, double b) {
    double r = 0.0;
    if (matches(v1, v2, caused)) r += 1.0 - b;
    if (matches(v1, v2, caused | kBoth)) r += b;
    return r;
}

struct TwoTimeEval {
    const FindingSet& first;
    const FindingSet& second;
    const BaseRates& rates;

    // Likelihood of the observations below `node` for each causation pattern
    // of `node` itself.
    PatternVec below(const CausalNode& node) const {
        if (node.is_symptom()) {
            const std::string& id = *node.symptom_id;
            PatternVec h{};
            for (unsigned pi = 0; pi < 4; ++pi) h[pi] = symptom_two_time(first.value(id), second.value(id), pi, rates(id));
            return h;
        }
        PatternVec h{1.0, 1.0, 1.0, 1.0};
        for (const auto& e : node.children) {
            const PatternVec link = pattern_vec(temporal_pattern_probs(eval_time_curve(e.link, first.measurement_time),
                                                                       eval_time_curve(e.link, second.measurement_time)));
            const PatternVec child = below(e.child);
            for (unsigned parent = 0; parent < 4; ++parent) {
                double c = 0.0;
                for (unsigned l = 0; l < 4; ++l) c += link[l] * child[parent & l];
                h[parent] *= c;
            }
        }
        return h;
    }
};

} // namespace detail

// Likelihood of both finding sets given the disease at the root is present
// at both times.
inline double hood_two_time(const CausalNode& root, const FindingSet& first, const FindingSet& second,
                            const BaseRates& rates) {
    return detail::TwoTimeEval{first, second, rates}.below(root)[detail::kBoth];
}

inline PosteriorReport two_time_posterior(const KnowledgeBase& kb, const PatientContext& patient,
                                          const FindingSet& first, const FindingSet& second,
                                          const ProbabilityMap& priors) {
    check_findings(kb, first);
    check_findings(kb, second);
    if (!(first.measurement_time < second.measurement_time))
        throw Error(ErrorKind::invalid_argument, "second measurement must be later than the first");
    const BaseRates rates(kb, patient);
    auto report = posterior_from(
        kb, priors, [&](const DiseaseDef& d) { return hood_two_time(d.tree, first, second, rates); },
        [&](const std::string& id) {
            return detail::symptom_two_time(first.value(id), second.value(id), detail::kNeither, rates(id));
        },
        second.measurement_time);
    report.first_measurement_time = first.measurement_time;
    return report;
}

inline PosteriorReport two_time_posterior(const KnowledgeBase& kb, const PatientContext& patient,
                                          const FindingSet& first, const FindingSet& second) {
    return two_time_posterior(kb, patient, first, second, eval_priors(kb, patient));
}

} // namespace cbdx
