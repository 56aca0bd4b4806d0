#pragma once
// Forward sampling from the causal model and exact enumeration oracles.
//
// Random numbers come from SplitMix64 driven by an explicit counter: draw n
// of the stream with key k is mix64(k + n * 0x9e3779b97f4a7c15). A child
// stream for index i has key mix64(k ^ mix64(i)). Uniform doubles take the
// top 53 bits. All distributions below are mapped by hand from those
// uniforms, so datasets are bit-identical across platforms.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbdx/error.hpp"
#include "cbdx/inference.hpp"
#include "cbdx/json_io.hpp"
#include "cbdx/kb_model.hpp"

namespace cbdx {

class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() { return mix64(key_ + kGamma * ++counter_); }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [lo, hi].
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<int>(next() % span);
    }

    CounterRng split(std::uint64_t index) const { return CounterRng(mix64(key_ ^ mix64(index + kGamma))); }

    std::uint64_t key() const { return key_; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// One causal world drawn for a disease tree, in preorder (index 0 = root).
struct SampledNode {
    const CausalNode* node = nullptr;
    int parent = -1;
    bool caused = false;
};

struct SampledWorld {
    std::vector<SampledNode> nodes;
    std::map<std::string, bool> external; // per KB symptom
};

namespace detail {

inline void sample_below(const CausalNode& node, int index, double t, CounterRng& rng, SampledWorld& world) {
    for (const auto& e : node.children) {
        const bool parent_caused = world.nodes[static_cast<std::size_t>(index)].caused;
        // Draw unconditionally so the stream layout does not depend on outcomes.
        const bool fires = rng.bernoulli(eval_time_curve(e.link, t));
        world.nodes.push_back({&e.child, index, parent_caused && fires});
        sample_below(e.child, static_cast<int>(world.nodes.size() - 1), t, rng, world);
    }
}

} // namespace detail

inline SampledWorld sample_world(const KnowledgeBase& kb, const DiseaseDef& disease, const PatientContext& patient,
                                 double t, CounterRng& rng) {
    SampledWorld w;
    w.nodes.push_back({&disease.tree, -1, true});
    detail::sample_below(disease.tree, 0, t, rng, w);
    for (const auto& s : kb.symptoms) w.external[s.id] = rng.bernoulli(s.base_rate_at(patient.sex, patient.age));
    return w;
}

inline FindingSet observe(const KnowledgeBase& kb, const SampledWorld& world, double t) {
    FindingSet f;
    f.measurement_time = t;
    for (const auto& s : kb.symptoms) f.values[s.id] = world.external.at(s.id) ? Finding::present : Finding::absent;
    for (const auto& n : world.nodes) {
        if (n.node->is_symptom() && n.caused) f.values[*n.node->symptom_id] = Finding::present;
    }
    return f;
}

struct CaseRecord {
    std::uint64_t case_id = 0;
    std::string true_disease;
    PatientContext patient;
    FindingSet findings;
    std::optional<FindingSet> second; // optional later measurement
    std::uint64_t seed = 0;

    bool operator==(const CaseRecord&) const = default;
};

// Fully observed synthetic case; deterministic in `seed`.
inline CaseRecord sample_case(const KnowledgeBase& kb, const PatientContext& patient, const std::string& disease_id,
                              double t, std::uint64_t seed) {
    const DiseaseDef& d = kb.disease(disease_id);
    CounterRng rng(seed);
    CaseRecord c;
    c.true_disease = disease_id;
    c.patient = patient;
    c.patient.onset_time = t;
    c.seed = seed;
    c.findings = observe(kb, sample_world(kb, d, patient, t, rng), t);
    return c;
}

// ---------------------------------------------------------------------------
// Exact joint over the observed configurations of one tree's symptoms.

inline constexpr std::size_t kMaxOracleVariables = 20;

struct JointDistribution {
    std::vector<std::string> symptoms; // bit i of a configuration = symptoms[i] present
    std::vector<double> probability;   // indexed by configuration, size 2^k

    double total() const {
        double s = 0.0;
        for (double p : probability) s += p;
        return s;
    }

    // Probability of the findings, marginalizing unknown symptoms.
    double marginal(const FindingSet& findings) const {
        std::uint32_t care = 0, want = 0;
        for (std::size_t i = 0; i < symptoms.size(); ++i) {
            const Finding v = findings.value(symptoms[i]);
            if (v == Finding::unknown) continue;
            care |= 1u << i;
            if (v == Finding::present) want |= 1u << i;
        }
        double s = 0.0;
        for (std::uint32_t cfg = 0; cfg < probability.size(); ++cfg)
            if ((cfg & care) == want) s += probability[cfg];
        return s;
    }
};

// Sums over every world: each link fires or not, each tree symptom has an
// external cause or not. A symptom is observed present iff its whole causal
// chain fired or it was caused externally.
inline JointDistribution enumerate_joint(const CausalNode& tree, double t, const BaseRates& rates) {
    struct Link {
        int parent; // index into links, -1 = root
        double q;
        int symptom; // index into symptoms, -1 for pathstates
    };
    JointDistribution jd;
    jd.symptoms = descendant_symptoms(tree);
    std::vector<Link> links;
    auto flatten = [&](auto& self, const CausalNode& node, int parent) -> void {
        for (const auto& e : node.children) {
            int sym = -1;
            if (e.child.is_symptom()) {
                for (std::size_t i = 0; i < jd.symptoms.size(); ++i)
                    if (jd.symptoms[i] == *e.child.symptom_id) sym = static_cast<int>(i);
            }
            links.push_back({parent, eval_time_curve(e.link, t), sym});
            self(self, e.child, static_cast<int>(links.size() - 1));
        }
    };
    flatten(flatten, tree, -1);

    const std::size_t n_links = links.size();
    const std::size_t n_sym = jd.symptoms.size();
    if (n_links + n_sym > kMaxOracleVariables)
        throw Error(ErrorKind::oracle_too_large,
                    "enumeration needs " + std::to_string(n_links + n_sym) + " binary variables; the limit is " +
                        std::to_string(kMaxOracleVariables));

    std::vector<double> b(n_sym);
    for (std::size_t i = 0; i < n_sym; ++i) b[i] = rates(jd.symptoms[i]);

    jd.probability.assign(std::size_t{1} << n_sym, 0.0);
    std::vector<char> caused(n_links);
    for (std::uint64_t lm = 0; lm < (std::uint64_t{1} << n_links); ++lm) {
        double p_links = 1.0;
        std::uint32_t chain = 0;
        for (std::size_t i = 0; i < n_links; ++i) {
            const bool fires = (lm >> i) & 1u;
            p_links *= fires ? links[i].q : 1.0 - links[i].q;
            const bool parent_caused = links[i].parent < 0 || caused[static_cast<std::size_t>(links[i].parent)];
            caused[i] = parent_caused && fires;
            if (caused[i] && links[i].symptom >= 0) chain |= 1u << links[i].symptom;
        }
        if (p_links == 0.0) continue;
        for (std::uint32_t em = 0; em < (1u << n_sym); ++em) {
            double p = p_links;
            for (std::size_t i = 0; i < n_sym; ++i) p *= ((em >> i) & 1u) ? b[i] : 1.0 - b[i];
            jd.probability[chain | em] += p;
        }
    }
    return jd;
}

inline JointDistribution enumerate_joint(const CausalNode& tree, double t, const KnowledgeBase& kb,
                                         const PatientContext& patient) {
    return enumerate_joint(tree, t, BaseRates(kb, patient));
}

// ---------------------------------------------------------------------------
// Datasets

struct DatasetConfig {
    std::size_t n_per_class = 100;
    std::vector<std::string> classes;
    double t_min = 0.0; // measurement time, uniform on [t_min, t_max]
    double t_max = TimeAxis::hi;
    double age_min = 10.0;
    double age_max = 70.0;
    double female_fraction = 0.5; // female-only classes always draw female patients
    std::uint64_t seed = 0;
};

inline std::uint64_t case_seed(std::uint64_t dataset_seed, std::uint64_t index) {
    return CounterRng(dataset_seed).split(index).key();
}

// Cases are ordered class by class; case i uses the stream case_seed(seed, i).
inline std::vector<CaseRecord> generate_dataset(const KnowledgeBase& kb, const DatasetConfig& cfg) {
    if (cfg.classes.empty()) throw Error(ErrorKind::invalid_argument, "dataset needs at least one class");
    for (const auto& c : cfg.classes) kb.disease(c);
    if (!(cfg.t_min >= 0.0 && cfg.t_min <= cfg.t_max && cfg.t_max <= TimeAxis::hi))
        throw Error(ErrorKind::invalid_argument, "measurement time range must lie within [0, 132]");
    if (!(cfg.age_min >= AgeAxis::lo && cfg.age_min <= cfg.age_max && cfg.age_max <= AgeAxis::hi))
        throw Error(ErrorKind::invalid_argument, "age range must lie within [0, 120]");

    std::vector<CaseRecord> out;
    out.reserve(cfg.n_per_class * cfg.classes.size());
    std::uint64_t index = 0;
    for (const auto& cls : cfg.classes) {
        const DiseaseDef& d = kb.disease(cls);
        for (std::size_t k = 0; k < cfg.n_per_class; ++k, ++index) {
            const std::uint64_t seed = case_seed(cfg.seed, index);
            CounterRng draws = CounterRng(seed).split(1);
            PatientContext p;
            const bool female = draws.bernoulli(cfg.female_fraction);
            p.sex = (female || d.female_only) ? Sex::female : Sex::male;
            p.age = draws.uniform(cfg.age_min, cfg.age_max);
            const int day = draws.uniform_int(1, 28);
            if (p.sex == Sex::female) p.cycle_day = day;
            const double t = draws.uniform(cfg.t_min, cfg.t_max);
            CaseRecord c = sample_case(kb, p, cls, t, seed);
            c.case_id = index;
            out.push_back(std::move(c));
        }
    }
    return out;
}

// Hides each finding with probability `fraction`, deterministically per case.
inline void mask_findings(std::vector<CaseRecord>& cases, double fraction, std::uint64_t seed) {
    for (auto& c : cases) {
        CounterRng rng = CounterRng(seed).split(c.case_id);
        for (auto& [id, v] : c.findings.values)
            if (rng.bernoulli(fraction)) v = Finding::unknown;
    }
}

// ---------------------------------------------------------------------------
// JSON lines case files

inline Json case_to_json(const CaseRecord& c) {
    Json j;
    j["case_id"] = c.case_id;
    j["true_disease"] = c.true_disease;
    j["seed"] = c.seed;
    j["patient"] = patient_to_json(c.patient);
    j["onset_time"] = c.findings.measurement_time;
    j["findings"] = findings_to_json(c.findings);
    if (c.second) j["second"] = {{"time", c.second->measurement_time}, {"findings", findings_to_json(*c.second)}};
    return j;
}

inline CaseRecord case_from_json(const Json& j, const std::string& at = "") {
    using namespace json_detail;
    CaseRecord c;
    const Json& id = member(j, "case_id", at);
    if (!id.is_number_unsigned()) throw SchemaError(at + "/case_id", "expected a non-negative integer");
    c.case_id = id.get<std::uint64_t>();
    c.true_disease = string(member(j, "true_disease", at), at + "/true_disease");
    if (const Json* s = optional_member(j, "seed")) {
        if (!s->is_number_unsigned()) throw SchemaError(at + "/seed", "expected a non-negative integer");
        c.seed = s->get<std::uint64_t>();
    }
    c.patient = patient_from_json(member(j, "patient", at), at + "/patient");
    const double t = non_negative(member(j, "onset_time", at), at + "/onset_time");
    c.patient.onset_time = t;
    c.findings = findings_from_json(member(j, "findings", at), t, at + "/findings");
    if (const Json* s = optional_member(j, "second")) {
        const double t2 = non_negative(member(*s, "time", at + "/second"), at + "/second/time");
        c.second = findings_from_json(member(*s, "findings", at + "/second"), t2, at + "/second/findings");
    }
    return c;
}

inline std::string write_cases_jsonl(const std::vector<CaseRecord>& cases) {
    std::string out;
    for (const auto& c : cases) {
        out += case_to_json(c).dump();
        out += '\n';
    }
    return out;
}

inline std::vector<CaseRecord> read_cases_jsonl(const std::string& text) {
    std::vector<CaseRecord> cases;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        const std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string at = "line " + std::to_string(line_no);
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(at, std::string("malformed JSON: ") + e.what());
        }
        cases.push_back(case_from_json(j, at));
    }
    return cases;
}

} // namespace cbdx
