#pragma once
// Treatment choice by expected morbidity (hospital days).

#include <cmath>
#include <optional>
#include <string>

#include "cbdx/error.hpp"
#include "cbdx/kb_model.hpp"

namespace cbdx {

inline double expected_morbidity(const ProbabilityMap& posteriors, const UtilityTable& utilities, Treatment t) {
    double days = 0.0;
    for (const auto& [disease, p] : posteriors) days += p * utilities.at(disease).days(t);
    return days;
}

// Which treatment wins regardless of the designated disease's probability.
enum class Dominance { none, symptomatic, operation, indifferent };

inline std::string_view to_string(Dominance d) {
    switch (d) {
    case Dominance::none: return "none";
    case Dominance::symptomatic: return "symptomatic";
    case Dominance::operation: return "operation";
    case Dominance::indifferent: return "indifferent";
    }
    return "none";
}

struct SwitchThreshold {
    std::optional<double> probability; // set when the lines cross inside [0, 1]
    Dominance dominance = Dominance::none;
    // Treatment preferred above the threshold (only meaningful with a crossing).
    Treatment above = Treatment::operation;
};

// Probability of `disease_id` at which both treatments have equal expected
// morbidity, treating every other disease as one complement hypothesis with
// the given morbidities.
inline SwitchThreshold switch_threshold(const UtilityTable& utilities, const std::string& disease_id,
                                        const Morbidity& complement) {
    const Morbidity& d = utilities.at(disease_id);
    // Symptomatic minus operation days, as a line in p: p*gain_d + (1-p)*gain_c.
    const double gain_d = d.symptomatic - d.operation;
    const double gain_c = complement.symptomatic - complement.operation;
    SwitchThreshold out;
    if (gain_d == gain_c) {
        out.dominance = gain_d > 0.0 ? Dominance::operation
                        : gain_d < 0.0 ? Dominance::symptomatic
                                       : Dominance::indifferent;
        return out;
    }
    const double p = gain_c / (gain_c - gain_d);
    if (p >= 0.0 && p <= 1.0) {
        out.probability = p;
        out.above = gain_d > gain_c ? Treatment::operation : Treatment::symptomatic;
        return out;
    }
    // No crossing: the sign at p = 0 holds over the whole interval.
    out.dominance = gain_c > 0.0 ? Dominance::operation : Dominance::symptomatic;
    return out;
}

// Complement morbidities weighted by the renormalized posteriors of the other
// diseases. Falls back to an unweighted mean when they carry no mass.
inline Morbidity complement_morbidity(const ProbabilityMap& posteriors, const UtilityTable& utilities,
                                      const std::string& disease_id) {
    Morbidity m;
    double mass = 0.0;
    std::size_t n = 0;
    Morbidity plain;
    for (const auto& [id, p] : posteriors) {
        if (id == disease_id) continue;
        const Morbidity& u = utilities.at(id);
        m.symptomatic += p * u.symptomatic;
        m.operation += p * u.operation;
        plain.symptomatic += u.symptomatic;
        plain.operation += u.operation;
        mass += p;
        ++n;
    }
    if (mass > 0.0) return {m.symptomatic / mass, m.operation / mass};
    if (n == 0) throw Error(ErrorKind::configuration, "no complement hypothesis for '" + disease_id + "'");
    return {plain.symptomatic / static_cast<double>(n), plain.operation / static_cast<double>(n)};
}

struct TreatmentAssessment {
    double symptomatic_days = 0.0;
    double operation_days = 0.0;
    Treatment recommended = Treatment::symptomatic;
    double margin = 0.0; // days saved by the recommendation
    std::optional<std::string> threshold_disease;
    std::optional<SwitchThreshold> threshold;
};

// Ties go to symptomatic treatment, the non-invasive option.
inline TreatmentAssessment recommend(const ProbabilityMap& posteriors, const UtilityTable& utilities) {
    TreatmentAssessment a;
    a.symptomatic_days = expected_morbidity(posteriors, utilities, Treatment::symptomatic);
    a.operation_days = expected_morbidity(posteriors, utilities, Treatment::operation);
    a.recommended = a.operation_days < a.symptomatic_days ? Treatment::operation : Treatment::symptomatic;
    a.margin = std::abs(a.symptomatic_days - a.operation_days);
    return a;
}

inline TreatmentAssessment recommend(const ProbabilityMap& posteriors, const UtilityTable& utilities,
                                     const std::string& threshold_disease) {
    TreatmentAssessment a = recommend(posteriors, utilities);
    a.threshold_disease = threshold_disease;
    a.threshold = switch_threshold(utilities, threshold_disease,
                                   complement_morbidity(posteriors, utilities, threshold_disease));
    return a;
}

} // namespace cbdx
