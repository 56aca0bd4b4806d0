#pragma once
// Causal knowledge base: symptoms with external-cause base rates, diseases as
// trees of pathstates, age/sex/cycle conditioned priors, and morbidity
// utilities per disease-treatment pair.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cbdx/curve.hpp"
#include "cbdx/error.hpp"

namespace cbdx {

enum class Sex { male, female };

inline std::string_view to_string(Sex s) { return s == Sex::male ? "male" : "female"; }

inline std::optional<Sex> parse_sex(std::string_view s) {
    if (s == "male") return Sex::male;
    if (s == "female") return Sex::female;
    return std::nullopt;
}

template <class C>
struct PerSex {
    std::optional<C> male;
    std::optional<C> female;

    const std::optional<C>& get(Sex s) const { return s == Sex::male ? male : female; }
    std::optional<C>& get(Sex s) { return s == Sex::male ? male : female; }

    bool operator==(const PerSex&) const = default;
};

struct SymptomDef {
    std::string id;
    std::string label;
    PerSex<AgeCurve> base_rate; // probability of an external cause, by age

    // A missing curve for a sex means no external causation is modelled.
    double base_rate_at(Sex sex, double age) const {
        const auto& c = base_rate.get(sex);
        return c ? (*c)(age) : 0.0;
    }

    bool operator==(const SymptomDef&) const = default;
};

enum class NodeKind { disease_root, pathstate, symptom_ref };

inline std::string_view to_string(NodeKind k) {
    switch (k) {
    case NodeKind::disease_root: return "disease";
    case NodeKind::pathstate: return "pathstate";
    case NodeKind::symptom_ref: return "symptom";
    }
    return "?";
}

struct CausalEdge;

struct CausalNode {
    std::string id;
    NodeKind kind = NodeKind::pathstate;
    std::optional<std::string> symptom_id; // set iff kind == symptom_ref
    std::vector<CausalEdge> children;

    bool is_symptom() const { return kind == NodeKind::symptom_ref; }

    bool operator==(const CausalNode& other) const;
};

// Link from a parent to a child: the probability that the child is caused,
// given the parent is, as a function of time since onset.
struct CausalEdge {
    TimeCurve link;
    CausalNode child;

    bool operator==(const CausalEdge&) const = default;
};

inline bool CausalNode::operator==(const CausalNode& other) const {
    return id == other.id && kind == other.kind && symptom_id == other.symptom_id &&
           children == other.children;
}

inline CausalNode make_symptom_node(std::string symptom_id) {
    CausalNode n;
    n.id = symptom_id;
    n.kind = NodeKind::symptom_ref;
    n.symptom_id = std::move(symptom_id);
    return n;
}

inline CausalNode make_pathstate(std::string id, std::vector<CausalEdge> children = {}) {
    CausalNode n;
    n.id = std::move(id);
    n.kind = NodeKind::pathstate;
    n.children = std::move(children);
    return n;
}

struct DirectCurve {
    std::string symptom_id;
    TimeCurve curve;
    bool operator==(const DirectCurve&) const = default;
};

struct DiseaseDef {
    std::string id;
    std::string label;
    bool female_only = false;
    PerSex<AgeCurve> prior;
    std::optional<CycleCurve> cycle_weight;
    CausalNode tree; // kind == disease_root
    std::vector<DirectCurve> direct; // expert's direct symptom likelihoods

    const TimeCurve* direct_curve(std::string_view symptom_id) const {
        for (const auto& d : direct)
            if (d.symptom_id == symptom_id) return &d.curve;
        return nullptr;
    }

    bool operator==(const DiseaseDef&) const = default;
};

enum class Treatment { symptomatic, operation };

inline std::string_view to_string(Treatment t) {
    return t == Treatment::symptomatic ? "symptomatic" : "operation";
}

// Expected hospital days for one disease under each treatment.
struct Morbidity {
    double symptomatic = 0.0;
    double operation = 0.0;

    double days(Treatment t) const { return t == Treatment::symptomatic ? symptomatic : operation; }
    bool operator==(const Morbidity&) const = default;
};

struct UtilityTable {
    std::map<std::string, Morbidity> morbidity;

    const Morbidity& at(const std::string& disease_id) const {
        auto it = morbidity.find(disease_id);
        if (it == morbidity.end())
            throw Error(ErrorKind::configuration, "no utility entry for disease '" + disease_id + "'");
        return it->second;
    }

    bool operator==(const UtilityTable&) const = default;
};

struct KnowledgeBase {
    std::string name;
    std::string version;
    std::vector<SymptomDef> symptoms;
    std::vector<DiseaseDef> diseases;
    UtilityTable utilities;

    const SymptomDef* find_symptom(std::string_view id) const {
        for (const auto& s : symptoms)
            if (s.id == id) return &s;
        return nullptr;
    }

    const DiseaseDef* find_disease(std::string_view id) const {
        for (const auto& d : diseases)
            if (d.id == id) return &d;
        return nullptr;
    }

    const DiseaseDef& disease(std::string_view id) const {
        if (const auto* d = find_disease(id)) return *d;
        throw Error(ErrorKind::unresolved_reference, "unknown disease '" + std::string(id) + "'");
    }

    bool operator==(const KnowledgeBase&) const = default;
};

struct PatientContext {
    double age = 30.0;
    Sex sex = Sex::male;
    std::optional<int> cycle_day; // 1..28, female patients only
    double onset_time = 0.0;      // hours since first observed symptom

    bool operator==(const PatientContext&) const = default;
};

using ProbabilityMap = std::map<std::string, double>;

// Depth-first, declaration-ordered list of symptom ids below a node.
inline void collect_descendant_symptoms(const CausalNode& node, std::vector<std::string>& out) {
    if (node.is_symptom()) {
        if (node.symptom_id &&
            std::find(out.begin(), out.end(), *node.symptom_id) == out.end())
            out.push_back(*node.symptom_id);
        return;
    }
    for (const auto& e : node.children) collect_descendant_symptoms(e.child, out);
}

inline std::vector<std::string> descendant_symptoms(const CausalNode& node) {
    std::vector<std::string> out;
    collect_descendant_symptoms(node, out);
    return out;
}

inline std::size_t count_pathstates(const CausalNode& node) {
    std::size_t n = node.kind == NodeKind::pathstate ? 1 : 0;
    for (const auto& e : node.children) n += count_pathstates(e.child);
    return n;
}

inline std::size_t count_nodes(const CausalNode& node) {
    std::size_t n = 1;
    for (const auto& e : node.children) n += count_nodes(e.child);
    return n;
}

// Raw prior = age curve for the patient's sex, times the cycle weight when the
// disease has one and the patient's cycle day is known. Normalized over the
// disease pool.
inline ProbabilityMap eval_priors(const KnowledgeBase& kb, const PatientContext& patient) {
    ProbabilityMap raw;
    double total = 0.0;
    for (const auto& d : kb.diseases) {
        double p = 0.0;
        if (!(d.female_only && patient.sex == Sex::male)) {
            if (const auto& c = d.prior.get(patient.sex)) p = (*c)(patient.age);
            if (d.cycle_weight && patient.sex == Sex::female && patient.cycle_day)
                p *= (*d.cycle_weight)(static_cast<double>(*patient.cycle_day));
        }
        raw[d.id] = p;
        total += p;
    }
    if (!(total > 0.0))
        throw Error(ErrorKind::degenerate_prior,
                    "all disease priors evaluate to zero for this patient");
    for (auto& [id, p] : raw) p /= total;
    return raw;
}

// Replaces patient-conditioned priors with fixed values. Diseases not listed
// get prior 0, so an override also restricts the hypothesis pool.
inline ProbabilityMap override_priors(const KnowledgeBase& kb, const ProbabilityMap& fixed) {
    ProbabilityMap out;
    double total = 0.0;
    for (const auto& [id, p] : fixed) {
        if (!kb.find_disease(id))
            throw Error(ErrorKind::unresolved_reference, "prior override names unknown disease '" + id + "'");
        if (!(p >= 0.0) || !std::isfinite(p))
            throw Error(ErrorKind::invalid_argument, "prior override for '" + id + "' must be >= 0");
    }
    for (const auto& d : kb.diseases) {
        auto it = fixed.find(d.id);
        const double p = it == fixed.end() ? 0.0 : it->second;
        out[d.id] = p;
        total += p;
    }
    if (!(total > 0.0))
        throw Error(ErrorKind::degenerate_prior, "prior override sums to zero");
    for (auto& [id, p] : out) p /= total;
    return out;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationIssue {
    std::string disease_id; // empty for symptom- or KB-level issues
    std::string node_path;  // slash-separated ids from the root
    std::string field;
    std::string message;

    std::string to_string() const {
        std::string loc;
        auto add = [&loc](const std::string& s) {
            if (s.empty()) return;
            if (!loc.empty()) loc += ": ";
            loc += s;
        };
        add(disease_id.empty() ? std::string{} : "disease " + disease_id);
        add(node_path);
        add(field);
        return loc.empty() ? message : loc + ": " + message;
    }
};

struct ValidationReport {
    std::vector<ValidationIssue> errors;
    std::vector<ValidationIssue> warnings;
    std::size_t disease_count = 0;
    std::size_t pathstate_count = 0;
    std::size_t symptom_count = 0;
    std::size_t node_count = 0;

    bool ok() const { return errors.empty(); }
};

namespace detail {

template <class Axis>
void check_curve_into(const Curve<Axis>& curve, const std::string& disease, const std::string& path,
                      const std::string& field, std::vector<ValidationIssue>& errors) {
    for (const auto& issue : check_curve(curve)) {
        std::string f = field;
        if (issue.field != CurveIssue::Field::shape) {
            const auto& pt = curve.points[issue.point];
            f += "[" + std::to_string(issue.point) + "]";
            f += issue.field == CurveIssue::Field::x ? ".x=" + format_decimal(pt.x)
                                                     : ".p=" + format_decimal(pt.p);
        }
        errors.push_back({disease, path, f, issue.message});
    }
}

struct TreeWalk {
    const KnowledgeBase& kb;
    const std::string& disease;
    ValidationReport& report;
    std::set<std::string> node_ids;
    std::set<std::string> symptoms_seen;

    void error(const std::string& path, const std::string& field, const std::string& msg) {
        report.errors.push_back({disease, path, field, msg});
    }
    void warn(const std::string& path, const std::string& field, const std::string& msg) {
        report.warnings.push_back({disease, path, field, msg});
    }

    void visit(const CausalNode& node, const std::string& path, bool is_root) {
        if (is_root) {
            if (node.kind != NodeKind::disease_root) error(path, "kind", "tree root must be a disease node");
        } else if (node.kind == NodeKind::disease_root) {
            error(path, "kind", "disease node may only appear as the tree root");
        }
        if (node.id.empty()) error(path, "id", "node id is empty");
        if (!node_ids.insert(node.id).second && !node.is_symptom())
            error(path, "id", "duplicate node id '" + node.id + "' in disease tree");

        if (node.is_symptom()) {
            if (!node.symptom_id) {
                error(path, "symptom", "symptom node has no symptom id");
            } else {
                if (!kb.find_symptom(*node.symptom_id))
                    error(path, "symptom", "unresolved reference to undeclared symptom '" + *node.symptom_id + "'");
                if (node.id != *node.symptom_id)
                    error(path, "id", "symptom node id must equal its symptom id");
                if (!symptoms_seen.insert(*node.symptom_id).second)
                    error(path, "symptom", "symptom '" + *node.symptom_id + "' appears more than once in the tree");
            }
            if (!node.children.empty()) error(path, "children", "symptom nodes must be leaves");
            return;
        }
        if (node.symptom_id) error(path, "symptom", "only symptom nodes may carry a symptom id");
        if (node.children.empty()) {
            warn(path, "children", node.kind == NodeKind::disease_root ? "disease has no causal children"
                                                                       : "pathstate has no children");
        }
        for (const auto& edge : node.children) {
            const std::string child_path = path + "/" + edge.child.id;
            check_curve_into(edge.link, disease, child_path, "link", report.errors);
            visit(edge.child, child_path, false);
        }
    }
};

} // namespace detail

inline ValidationReport validate_kb(const KnowledgeBase& kb) {
    ValidationReport r;
    r.disease_count = kb.diseases.size();
    r.symptom_count = kb.symptoms.size();

    std::set<std::string> symptom_ids;
    for (const auto& s : kb.symptoms) {
        const std::string where = "symptom " + s.id;
        if (s.id.empty()) r.errors.push_back({"", where, "id", "symptom id is empty"});
        if (!symptom_ids.insert(s.id).second)
            r.errors.push_back({"", where, "id", "duplicate symptom id '" + s.id + "'"});
        for (Sex sex : {Sex::male, Sex::female}) {
            const auto& c = s.base_rate.get(sex);
            const std::string field = "base " + std::string(to_string(sex));
            if (c)
                detail::check_curve_into(*c, "", where, field, r.errors);
            else
                r.warnings.push_back({"", where, field, "no base rate; treated as 0"});
        }
    }

    std::set<std::string> disease_ids;
    for (const auto& d : kb.diseases) {
        if (d.id.empty()) r.errors.push_back({d.id, "", "id", "disease id is empty"});
        if (!disease_ids.insert(d.id).second)
            r.errors.push_back({d.id, "", "id", "duplicate disease id '" + d.id + "'"});
        if (d.tree.id != d.id)
            r.errors.push_back({d.id, d.tree.id, "id", "tree root id must equal the disease id"});

        for (Sex sex : {Sex::male, Sex::female}) {
            const auto& c = d.prior.get(sex);
            const std::string field = "prior " + std::string(to_string(sex));
            if (c) {
                if (d.female_only && sex == Sex::male)
                    r.errors.push_back({d.id, "", field, "female-only disease cannot have a male prior"});
                detail::check_curve_into(*c, d.id, "", field, r.errors);
            } else if (!(d.female_only && sex == Sex::male)) {
                r.warnings.push_back({d.id, "", field, "no prior curve; treated as 0"});
            }
        }
        if (d.cycle_weight) {
            if (!d.female_only)
                r.errors.push_back({d.id, "", "cycle", "cycle weight is only allowed on female-only diseases"});
            detail::check_curve_into(*d.cycle_weight, d.id, "", "cycle", r.errors);
        }

        detail::TreeWalk walk{kb, d.id, r, {}, {}};
        walk.visit(d.tree, d.tree.id, true);
        r.pathstate_count += count_pathstates(d.tree);
        r.node_count += count_nodes(d.tree);

        std::set<std::string> direct_seen;
        for (const auto& dc : d.direct) {
            const std::string field = "direct " + dc.symptom_id;
            if (!kb.find_symptom(dc.symptom_id))
                r.errors.push_back({d.id, "", field, "unresolved reference to undeclared symptom '" + dc.symptom_id + "'"});
            else if (!walk.symptoms_seen.count(dc.symptom_id))
                r.errors.push_back({d.id, "", field, "direct curve for a symptom the disease does not cause"});
            if (!direct_seen.insert(dc.symptom_id).second)
                r.errors.push_back({d.id, "", field, "duplicate direct curve"});
            detail::check_curve_into(dc.curve, d.id, "", field, r.errors);
        }

        auto it = kb.utilities.morbidity.find(d.id);
        if (it == kb.utilities.morbidity.end()) {
            r.errors.push_back({d.id, "", "utilities", "missing morbidity entry"});
        } else {
            for (Treatment t : {Treatment::symptomatic, Treatment::operation}) {
                const double v = it->second.days(t);
                if (!std::isfinite(v) || v < 0.0)
                    r.errors.push_back({d.id, "", "utilities " + std::string(to_string(t)),
                                        "expected hospital days must be >= 0"});
            }
        }
    }
    for (const auto& [id, m] : kb.utilities.morbidity) {
        if (!disease_ids.count(id))
            r.errors.push_back({"", "", "utilities " + id, "utility entry for undeclared disease '" + id + "'"});
    }
    return r;
}

} // namespace cbdx
