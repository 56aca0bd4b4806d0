#pragma once
// Request handling shared by the CLI and the HTTP service. The service is a
// pure function of (knowledge base, request); transport lives in cli.hpp.

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "cbdx/decision.hpp"
#include "cbdx/error.hpp"
#include "cbdx/inference.hpp"
#include "cbdx/json_io.hpp"
#include "cbdx/kb_format.hpp"
#include "cbdx/temporal.hpp"

namespace cbdx {

struct InferRequest {
    PatientContext patient;
    FindingSet findings;              // measured at onset_time
    std::optional<FindingSet> second; // later measurement
    std::optional<ProbabilityMap> priors_override;
    std::optional<std::string> target; // disease for the switch threshold
};

// Shape errors throw SchemaError; unknown symptom or disease ids throw
// Error(unresolved_reference) carrying the JSON location.
inline InferRequest infer_request_from_json(const Json& j, const KnowledgeBase& kb) {
    using namespace json_detail;
    if (!j.is_object()) throw SchemaError("", "request must be a JSON object");
    InferRequest r;
    r.patient = patient_from_json(member(j, "patient", ""), "/patient");
    r.patient.onset_time = non_negative(member(j, "onset_time", ""), "/onset_time");
    r.findings = findings_from_json(member(j, "findings", ""), r.patient.onset_time, "/findings", &kb);
    if (const Json* s = optional_member(j, "second")) {
        const double t2 = non_negative(member(*s, "time", "/second"), "/second/time");
        r.second = findings_from_json(member(*s, "findings", "/second"), t2, "/second/findings", &kb);
        if (!(t2 > r.patient.onset_time))
            throw SchemaError("/second/time", "second measurement must be later than onset_time");
    }
    if (const Json* po = optional_member(j, "priors_override")) {
        if (!po->is_object()) throw SchemaError("/priors_override", "expected an object of disease -> prior");
        ProbabilityMap m;
        for (auto it = po->begin(); it != po->end(); ++it) {
            const std::string at = "/priors_override/" + it.key();
            if (!kb.find_disease(it.key()))
                throw Error(ErrorKind::unresolved_reference, at + ": unknown disease '" + it.key() + "'");
            m[it.key()] = non_negative(it.value(), at);
        }
        r.priors_override = std::move(m);
    }
    if (const Json* t = optional_member(j, "target")) {
        r.target = string(*t, "/target");
        if (!kb.find_disease(*r.target))
            throw Error(ErrorKind::unresolved_reference, "/target: unknown disease '" + *r.target + "'");
    }
    return r;
}

struct InferResponse {
    PosteriorReport report;
    TreatmentAssessment treatment;
    ProbabilityMap effective_priors;
};

inline InferResponse handle_infer(const KnowledgeBase& kb, const InferRequest& req) {
    if (kb.diseases.empty()) throw Error(ErrorKind::configuration, "knowledge base has no diseases");
    InferResponse resp;
    resp.effective_priors =
        req.priors_override ? override_priors(kb, *req.priors_override) : eval_priors(kb, req.patient);
    resp.report = req.second ? two_time_posterior(kb, req.patient, req.findings, *req.second, resp.effective_priors)
                             : posterior(kb, req.patient, req.findings, resp.effective_priors);
    const std::string target = req.target ? *req.target : kb.diseases.front().id;
    resp.treatment = recommend(resp.report.posteriors(), kb.utilities, target);
    return resp;
}

inline Json infer_response_to_json(const InferResponse& r) {
    Json j;
    j["measurement_time"] = r.report.measurement_time;
    if (r.report.first_measurement_time) j["first_measurement_time"] = *r.report.first_measurement_time;
    Json post = Json::object();
    Json decomposition = Json::array();
    for (const auto& t : r.report.terms) {
        post[t.disease_id] = t.posterior;
        decomposition.push_back({{"disease_id", t.disease_id},
                                 {"prior", t.prior},
                                 {"in_tree_likelihood", t.in_tree_likelihood},
                                 {"external_factor", t.external_factor},
                                 {"numerator", t.numerator},
                                 {"posterior", t.posterior}});
    }
    j["posteriors"] = post;
    j["decomposition"] = decomposition;
    const auto& a = r.treatment;
    Json tr;
    tr["expected_morbidity"] = {{"symptomatic", a.symptomatic_days}, {"operation", a.operation_days}};
    tr["recommended"] = std::string(to_string(a.recommended));
    tr["margin"] = a.margin;
    if (a.threshold && a.threshold_disease) {
        Json th;
        th["disease"] = *a.threshold_disease;
        th["probability"] = a.threshold->probability ? Json(*a.threshold->probability) : Json(nullptr);
        th["above"] = a.threshold->probability ? Json(std::string(to_string(a.threshold->above))) : Json(nullptr);
        th["dominance"] = std::string(to_string(a.threshold->dominance));
        tr["threshold"] = th;
    } else {
        tr["threshold"] = nullptr;
    }
    j["treatment"] = tr;
    Json priors = Json::object();
    for (const auto& d : r.report.terms) priors[d.disease_id] = r.effective_priors.at(d.disease_id);
    j["effective_priors"] = priors;
    return j;
}

struct CoherencyRequest {
    std::string disease;
    std::vector<double> grid{0.0, 24.0, 72.0, 132.0};
    double tol = 0.05;
};

inline Json coherency_to_json(const std::vector<CoherencyRow>& rows) {
    Json arr = Json::array();
    for (const auto& r : rows) {
        arr.push_back({{"symptom_id", r.symptom_id},
                       {"t", r.t},
                       {"model_p", r.model_p},
                       {"direct_p", r.direct_p},
                       {"delta", r.delta}});
    }
    return arr;
}

// ---------------------------------------------------------------------------
// HTTP routing without a transport

struct HttpResult {
    int status = 200;
    std::string body; // JSON
};

class Service {
public:
    explicit Service(KnowledgeBase kb) : kb_(std::move(kb)) {}

    const KnowledgeBase& kb() const { return kb_; }

    HttpResult handle(std::string_view method, std::string_view path, std::string_view body) const {
        try {
            if (path == "/health") return get_only(method, [] { return Json{{"status", "ok"}}; });
            if (path == "/kb") return get_only(method, [this] { return export_json(kb_); });
            if (path == "/diseases") return get_only(method, [this] { return diseases(); });
            if (path == "/infer") return post_only(method, body, [this](const Json& j) { return infer(j); });
            if (path == "/coherency") return post_only(method, body, [this](const Json& j) { return coherency(j); });
            return error(404, "no such endpoint: " + std::string(path));
        } catch (const SchemaError& e) {
            Json j{{"error", e.what()}, {"pointer", e.pointer()}};
            return {400, j.dump()};
        } catch (const Error& e) {
            Json j{{"error", e.what()}, {"kind", std::string(to_string(e.kind()))}};
            return {422, j.dump()};
        } catch (const std::exception& e) {
            return error(500, std::string("internal error: ") + e.what());
        }
    }

private:
    static HttpResult error(int status, const std::string& msg) { return {status, Json{{"error", msg}}.dump()}; }

    template <class F>
    HttpResult get_only(std::string_view method, F&& f) const {
        if (method != "GET") return error(405, "method not allowed");
        return {200, f().dump()};
    }

    template <class F>
    HttpResult post_only(std::string_view method, std::string_view body, F&& f) const {
        if (method != "POST") return error(405, "method not allowed");
        Json j;
        try {
            j = Json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            Json err{{"error", std::string("malformed JSON: ") + e.what()}, {"byte", e.byte}};
            return {400, err.dump()};
        }
        return {200, f(j).dump()};
    }

    Json diseases() const {
        Json arr = Json::array();
        for (const auto& d : kb_.diseases)
            arr.push_back({{"id", d.id}, {"label", d.label}, {"female_only", d.female_only}});
        return arr;
    }

    Json infer(const Json& j) const { return infer_response_to_json(handle_infer(kb_, infer_request_from_json(j, kb_))); }

    Json coherency(const Json& j) const {
        using namespace json_detail;
        CoherencyRequest req;
        req.disease = string(member(j, "disease", ""), "/disease");
        if (const Json* g = optional_member(j, "grid")) {
            if (!g->is_array()) throw SchemaError("/grid", "expected an array of hours");
            req.grid.clear();
            for (std::size_t i = 0; i < g->size(); ++i)
                req.grid.push_back(non_negative((*g)[i], "/grid/" + std::to_string(i)));
        }
        if (const Json* t = optional_member(j, "tol")) req.tol = non_negative(*t, "/tol");
        return Json{{"disease", req.disease}, {"rows", coherency_to_json(coherency_report(kb_, req.disease, req.grid, req.tol))}};
    }

    KnowledgeBase kb_;
};

// ---------------------------------------------------------------------------
// Loading

class KbLoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw KbLoadError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline KnowledgeBase load_kb(const std::string& path) {
    const ParseResult r = parse_kb(read_file(path));
    if (!r.ok()) {
        std::string msg;
        for (const auto& d : r.diagnostics)
            if (d.severity == Severity::error) msg += d.to_string(path) + "\n";
        if (!msg.empty()) msg.pop_back();
        throw KbLoadError(msg);
    }
    return *r.kb;
}

} // namespace cbdx
