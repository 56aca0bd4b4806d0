#pragma once
// Shared helpers for the unit, property and acceptance tests.

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cbdx/cbdx.hpp"

#ifndef CBDX_DATA_DIR
#define CBDX_DATA_DIR "data"
#endif
#ifndef CBDX_GOLDEN_DIR
#define CBDX_GOLDEN_DIR "tests/golden"
#endif

namespace cbdx::testing {

inline std::string data_path(const std::string& name) { return std::string(CBDX_DATA_DIR) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(CBDX_GOLDEN_DIR) + "/" + name; }

inline const KnowledgeBase& fixture() {
    static const KnowledgeBase kb = load_kb(data_path("fixture.pkb"));
    return kb;
}

inline TimeCurve flat(double p) { return TimeCurve::constant(p); }

inline CausalEdge edge(double q, CausalNode child) { return {flat(q), std::move(child)}; }

inline CausalNode root(std::string id, std::vector<CausalEdge> children) {
    CausalNode n;
    n.id = std::move(id);
    n.kind = NodeKind::disease_root;
    n.children = std::move(children);
    return n;
}

// Root -p-> pathstate y -q-> s1, -r-> s2: the two-symptom shape where the
// symptoms share a cause.
inline CausalNode pqr_tree(double p, double q, double r) {
    return root("x", {edge(p, make_pathstate("y", {edge(q, make_symptom_node("s1")), edge(r, make_symptom_node("s2"))}))});
}

// Symptom registry with constant base rates, so tree-level helpers can be
// driven through the KB-level API.
inline KnowledgeBase kb_for(const std::vector<CausalNode>& trees, const BaseRates& rates) {
    KnowledgeBase kb;
    kb.name = "test";
    std::vector<std::string> seen;
    for (const auto& t : trees)
        for (const auto& id : descendant_symptoms(t))
            if (std::find(seen.begin(), seen.end(), id) == seen.end()) seen.push_back(id);
    for (const auto& id : seen) {
        SymptomDef s;
        s.id = id;
        s.base_rate.male = AgeCurve::constant(rates(id));
        s.base_rate.female = AgeCurve::constant(rates(id));
        kb.symptoms.push_back(s);
    }
    for (std::size_t i = 0; i < trees.size(); ++i) {
        DiseaseDef d;
        d.id = trees[i].id;
        d.prior.male = AgeCurve::constant(0.5);
        d.prior.female = AgeCurve::constant(0.5);
        d.tree = trees[i];
        kb.diseases.push_back(d);
        kb.utilities.morbidity[d.id] = {1.0 + static_cast<double>(i), 2.0};
    }
    return kb;
}

struct RandomCase {
    CausalNode tree;
    BaseRates rates;
    std::vector<std::string> symptoms;
    double t = 0.0;
};

class TreeGen {
public:
    explicit TreeGen(std::uint64_t seed) : rng_(seed) {}

    double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    // Probabilities with some mass exactly on 0 and 1.
    double prob() {
        const int r = pick(0, 9);
        if (r == 0) return 0.0;
        if (r == 1) return 1.0;
        return unit();
    }

    TimeCurve curve() {
        TimeCurve c;
        const int n = pick(1, 3);
        std::vector<double> xs;
        while (static_cast<int>(xs.size()) < n) {
            const double x = std::round(unit() * 132.0);
            if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
        }
        std::sort(xs.begin(), xs.end());
        for (double x : xs) c.points.push_back({x, prob()});
        return c;
    }

    // Depth <= 4, 1..max_symptoms symptoms, 0..max_pathstates pathstates.
    RandomCase tree(int max_symptoms = 8, int max_pathstates = 4) {
        struct Slot {
            std::vector<int> path; // child indices from the root
            int depth;
        };
        RandomCase rc;
        rc.tree.id = "d";
        rc.tree.kind = NodeKind::disease_root;
        std::vector<Slot> internal{{{}, 0}};
        auto at = [&](const std::vector<int>& path) -> CausalNode& {
            CausalNode* n = &rc.tree;
            for (int i : path) n = &n->children[static_cast<std::size_t>(i)].child;
            return *n;
        };
        const int n_path = pick(0, max_pathstates);
        for (int i = 0; i < n_path; ++i) {
            std::vector<Slot> open;
            for (const auto& s : internal)
                if (s.depth < 3) open.push_back(s);
            const Slot parent = open[static_cast<std::size_t>(pick(0, static_cast<int>(open.size()) - 1))];
            CausalNode& p = at(parent.path);
            p.children.push_back({curve(), make_pathstate("p" + std::to_string(i))});
            Slot child{parent.path, parent.depth + 1};
            child.path.push_back(static_cast<int>(p.children.size()) - 1);
            internal.push_back(child);
        }
        const int n_sym = pick(1, max_symptoms);
        for (int i = 0; i < n_sym; ++i) {
            const Slot parent = internal[static_cast<std::size_t>(pick(0, static_cast<int>(internal.size()) - 1))];
            const std::string id = "s" + std::to_string(i);
            at(parent.path).children.push_back({curve(), make_symptom_node(id)});
            rc.symptoms.push_back(id);
            rc.rates.set(id, pick(0, 3) == 0 ? 0.0 : 0.5 * unit());
        }
        rc.t = std::round(unit() * 140.0);
        return rc;
    }

    FindingSet findings(const std::vector<std::string>& symptoms, double t, bool allow_unknown = true) {
        FindingSet f;
        f.measurement_time = t;
        for (const auto& id : symptoms) {
            const int r = pick(0, allow_unknown ? 2 : 1);
            f.set(id, r == 0 ? Finding::present : r == 1 ? Finding::absent : Finding::unknown);
        }
        return f;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// All 2^k fully observed finding sets over the given symptoms.
inline std::vector<FindingSet> all_configurations(const std::vector<std::string>& symptoms, double t) {
    std::vector<FindingSet> out;
    for (std::uint32_t m = 0; m < (1u << symptoms.size()); ++m) {
        FindingSet f;
        f.measurement_time = t;
        for (std::size_t i = 0; i < symptoms.size(); ++i)
            f.set(symptoms[i], (m >> i) & 1u ? Finding::present : Finding::absent);
        out.push_back(f);
    }
    return out;
}

// Brute-force likelihood of two measurements given the disease. Each link
// fires at time k iff one shared uniform U falls below its value at k, so
// its four behaviours have the lengths of the intervals that U can fall in.
// External causes persist across both times.
inline double two_time_oracle(const CausalNode& tree, const FindingSet& first, const FindingSet& second,
                              const BaseRates& rates) {
    struct Link {
        int parent;
        double q1, q2;
        std::string symptom;
    };
    std::vector<Link> links;
    auto flatten = [&](auto& self, const CausalNode& n, int parent) -> void {
        for (const auto& e : n.children) {
            links.push_back({parent, e.link(first.measurement_time), e.link(second.measurement_time),
                             e.child.is_symptom() ? *e.child.symptom_id : ""});
            self(self, e.child, static_cast<int>(links.size()) - 1);
        }
    };
    flatten(flatten, tree, -1);
    const auto symptoms = descendant_symptoms(tree);

    // P(fires at t1 = a, fires at t2 = b) for U ~ Uniform(0,1).
    auto behaviour = [](double q1, double q2, bool a, bool b) {
        auto len = [](double lo, double hi) { return std::max(0.0, hi - lo); };
        const double lo = std::min(q1, q2), hi = std::max(q1, q2);
        double p = 0.0;
        // U in [0, lo): fires at both; [lo, hi): fires only where q is hi;
        // [hi, 1): fires at neither.
        if (a && b) p += len(0.0, lo);
        if (!a && !b) p += len(hi, 1.0);
        if (a != b && ((a && q1 > q2) || (b && q2 > q1))) p += len(lo, hi);
        return p;
    };

    double total = 0.0;
    const std::size_t n = links.size();
    std::vector<int> state(n, 0); // 2-bit behaviour per link
    std::vector<int> caused(n, 0);
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << (2 * n)); ++code) {
        double p = 1.0;
        std::map<std::string, int> chain;
        for (std::size_t i = 0; i < n && p > 0.0; ++i) {
            const int s = static_cast<int>((code >> (2 * i)) & 3u);
            p *= behaviour(links[i].q1, links[i].q2, s & 1, s & 2);
            const int parent = links[i].parent < 0 ? 3 : caused[static_cast<std::size_t>(links[i].parent)];
            caused[i] = parent & s;
            if (!links[i].symptom.empty()) chain[links[i].symptom] = caused[i];
        }
        if (p == 0.0) continue;
        for (std::uint32_t em = 0; em < (1u << symptoms.size()); ++em) {
            double w = p;
            bool ok = true;
            for (std::size_t k = 0; k < symptoms.size() && ok; ++k) {
                const bool ext = (em >> k) & 1u;
                const double b = rates(symptoms[k]);
                w *= ext ? b : 1.0 - b;
                const int obs = chain[symptoms[k]] | (ext ? 3 : 0);
                const Finding v1 = first.value(symptoms[k]), v2 = second.value(symptoms[k]);
                if (v1 != Finding::unknown && (v1 == Finding::present) != bool(obs & 1)) ok = false;
                if (v2 != Finding::unknown && (v2 == Finding::present) != bool(obs & 2)) ok = false;
            }
            if (ok) total += w;
        }
    }
    return total;
}

} // namespace cbdx::testing
