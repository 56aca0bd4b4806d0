#pragma once
// JSON shapes shared by the case file, the CLI and the HTTP service.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cbdx/inference.hpp"
#include "cbdx/kb_model.hpp"

namespace cbdx {

using Json = nlohmann::ordered_json;

// Request/record does not have the expected shape. `pointer` is a JSON
// pointer to the offending value.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string pointer, const std::string& message)
        : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

namespace json_detail {

inline const Json& member(const Json& obj, const std::string& key, const std::string& at) {
    if (!obj.is_object()) throw SchemaError(at, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(at + "/" + key, "missing required field");
    return *it;
}

inline const Json* optional_member(const Json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
}

inline double number(const Json& v, const std::string& at) {
    if (!v.is_number()) throw SchemaError(at, "expected a number");
    return v.get<double>();
}

inline double non_negative(const Json& v, const std::string& at) {
    const double x = number(v, at);
    if (!(x >= 0.0) || !std::isfinite(x)) throw SchemaError(at, "expected a finite number >= 0");
    return x;
}

inline std::string string(const Json& v, const std::string& at) {
    if (!v.is_string()) throw SchemaError(at, "expected a string");
    return v.get<std::string>();
}

} // namespace json_detail

inline Json patient_to_json(const PatientContext& p) {
    Json j;
    j["age"] = p.age;
    j["sex"] = std::string(to_string(p.sex));
    if (p.cycle_day) j["cycle_day"] = *p.cycle_day;
    return j;
}

inline PatientContext patient_from_json(const Json& j, const std::string& at) {
    using namespace json_detail;
    PatientContext p;
    p.age = non_negative(member(j, "age", at), at + "/age");
    const auto sex = parse_sex(string(member(j, "sex", at), at + "/sex"));
    if (!sex) throw SchemaError(at + "/sex", "expected \"male\" or \"female\"");
    p.sex = *sex;
    if (const Json* cd = optional_member(j, "cycle_day")) {
        if (!cd->is_number_integer() || cd->get<std::int64_t>() < 1 || cd->get<std::int64_t>() > 28)
            throw SchemaError(at + "/cycle_day", "expected an integer in 1..28");
        if (p.sex != Sex::female) throw SchemaError(at + "/cycle_day", "cycle_day is only valid for female patients");
        p.cycle_day = static_cast<int>(cd->get<std::int64_t>());
    }
    return p;
}

inline Json findings_to_json(const FindingSet& f) {
    Json arr = Json::array();
    for (const auto& [id, v] : f.values) arr.push_back({{"symptom_id", id}, {"value", std::string(to_string(v))}});
    return arr;
}

// Parses [{symptom_id, value}, ...]. When `kb` is given, ids must resolve
// (reported as a domain error with the JSON location).
inline FindingSet findings_from_json(const Json& arr, double measurement_time, const std::string& at,
                                     const KnowledgeBase* kb = nullptr) {
    using namespace json_detail;
    if (!arr.is_array()) throw SchemaError(at, "expected an array of findings");
    FindingSet f;
    f.measurement_time = measurement_time;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string here = at + "/" + std::to_string(i);
        const std::string id = string(member(arr[i], "symptom_id", here), here + "/symptom_id");
        const auto v = parse_finding(string(member(arr[i], "value", here), here + "/value"));
        if (!v) throw SchemaError(here + "/value", "expected \"present\", \"absent\" or \"unknown\"");
        if (kb && !kb->find_symptom(id))
            throw Error(ErrorKind::unresolved_reference, here + "/symptom_id: unknown symptom '" + id + "'");
        if (f.values.count(id)) throw SchemaError(here + "/symptom_id", "duplicate finding for '" + id + "'");
        f.values[id] = *v;
    }
    return f;
}

inline Json probability_map_to_json(const ProbabilityMap& m) {
    Json j = Json::object();
    for (const auto& [id, p] : m) j[id] = p;
    return j;
}

} // namespace cbdx
