#pragma once
// Command-line entry point. Exit codes: 0 success, 1 domain error, 2 usage.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbdx/evaluation.hpp"
#include "cbdx/interface.hpp"
#include "cbdx/kb_format.hpp"
#include "cbdx/simulate.hpp"

// After Eigen: <resolv.h> defines a _res macro that collides with it.
#include <httplib.h>

namespace cbdx {

namespace cli_detail {

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

inline double parse_number_arg(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw CLI::ValidationError(what, "'" + s + "' is not a number");
}

// --priors accepts "0.5,0.5" (target first, then the other case classes in
// order of first appearance) or "id=0.5,id=0.5".
inline ProbabilityMap parse_priors(const std::string& spec, const std::string& target,
                                   const std::vector<CaseRecord>& cases) {
    std::vector<std::string> order{target};
    for (const auto& c : cases)
        if (std::find(order.begin(), order.end(), c.true_disease) == order.end()) order.push_back(c.true_disease);
    ProbabilityMap m;
    const auto items = split_commas(spec);
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto eq = items[i].find('=');
        if (eq != std::string::npos) {
            m[items[i].substr(0, eq)] = parse_number_arg(items[i].substr(eq + 1), "--priors");
        } else {
            if (i >= order.size())
                throw CLI::ValidationError("--priors", "more values than classes in the case file");
            m[order[i]] = parse_number_arg(items[i], "--priors");
        }
    }
    return m;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw KbLoadError("cannot write '" + path + "'");
    out << text;
}

// Routes the service over HTTP. The service must outlive the server.
inline std::unique_ptr<httplib::Server> make_server(const Service& service, const std::string& static_dir = "") {
    auto svr = std::make_unique<httplib::Server>();
    auto relay = [&service](const httplib::Request& req, httplib::Response& res) {
        const HttpResult r = service.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json; charset=utf-8");
    };
    if (!static_dir.empty() && !svr->set_mount_point("/", static_dir))
        throw KbLoadError("cannot serve static files from '" + static_dir + "'");
    for (const char* path : {"/health", "/kb", "/diseases", "/infer", "/coherency"}) {
        svr->Get(path, relay);
        svr->Post(path, relay);
    }
    return svr;
}

inline int serve(const KnowledgeBase& kb, int port, const std::string& static_dir, std::ostream& out) {
    const Service service(kb);
    const auto svr = make_server(service, static_dir);
    out << "serving " << kb.name << " on http://0.0.0.0:" << port << "\n" << std::flush;
    if (!svr->listen("0.0.0.0", port)) throw KbLoadError("cannot listen on port " + std::to_string(port));
    return 0;
}

} // namespace cli_detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using namespace cli_detail;
    CLI::App app{"Causal Bayesian diagnosis engine"};
    app.require_subcommand(1);

    std::string kb_path, case_path, cases_path, out_path, target, disease, priors_spec, json_path, static_dir;
    std::string grid_spec = "0,24,72,132", classes_spec;
    double tol = 0.05, t_min = 0.0, t_max = TimeAxis::hi;
    std::size_t n = 100, bins = 10;
    std::uint64_t seed = 0;
    int port = 8080;

    auto* validate = app.add_subcommand("validate", "Check a knowledge base and print its size");
    validate->add_option("kb", kb_path, "Knowledge base (.pkb)")->required();

    auto* coherency = app.add_subcommand("coherency", "Compare path-product likelihoods with direct curves");
    coherency->add_option("kb", kb_path, "Knowledge base (.pkb)")->required();
    coherency->add_option("--disease", disease, "Disease id")->required();
    coherency->add_option("--tol", tol, "Report rows with |delta| above this");
    coherency->add_option("--grid", grid_spec, "Comma-separated hours");

    auto* infer = app.add_subcommand("infer", "Posterior and treatment for one case");
    infer->add_option("--kb", kb_path, "Knowledge base (.pkb)")->required();
    infer->add_option("--case", case_path, "Request JSON file")->required();

    auto* simulate = app.add_subcommand("simulate", "Sample synthetic cases as JSON lines");
    simulate->add_option("--kb", kb_path, "Knowledge base (.pkb)")->required();
    simulate->add_option("--n", n, "Cases per class");
    simulate->add_option("--classes", classes_spec, "Comma-separated disease ids (default: first two)");
    simulate->add_option("--seed", seed, "Dataset seed");
    simulate->add_option("--t-min", t_min, "Earliest measurement time (hours)");
    simulate->add_option("--t-max", t_max, "Latest measurement time (hours)");
    simulate->add_option("--out", out_path, "Output file (default: stdout)");

    auto* calibrate = app.add_subcommand("calibrate", "Calibration of causal vs. independence models");
    calibrate->add_option("--kb", kb_path, "Knowledge base (.pkb)")->required();
    calibrate->add_option("--cases", cases_path, "Case file (JSON lines)")->required();
    calibrate->add_option("--target", target, "Disease whose probability is scored")->required();
    calibrate->add_option("--priors", priors_spec, "Fixed priors, e.g. 0.5,0.5");
    calibrate->add_option("--bins", bins, "Number of calibration bins")->check(CLI::PositiveNumber);
    calibrate->add_option("--json", json_path, "Also write the report as JSON");

    auto* serve_cmd = app.add_subcommand("serve", "HTTP JSON service");
    serve_cmd->add_option("--kb", kb_path, "Knowledge base (.pkb)")->required();
    serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--static", static_dir, "Directory of UI assets to serve at /");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (*validate) {
            const ParseResult r = parse_kb(read_file(kb_path));
            for (const auto& d : r.diagnostics) err << d.to_string(kb_path) << "\n";
            if (!r.ok()) {
                err << kb_path << ": " << r.error_count() << " error(s)\n";
                return 1;
            }
            const ValidationReport rep = validate_kb(*r.kb);
            out << kb_path << ": ok\n"
                << "diseases: " << rep.disease_count << "\n"
                << "pathstates: " << rep.pathstate_count << "\n"
                << "symptoms: " << rep.symptom_count << "\n"
                << "nodes: " << rep.node_count << "\n"
                << "warnings: " << rep.warnings.size() << "\n";
            return 0;
        }

        const KnowledgeBase kb = load_kb(kb_path);

        if (*coherency) {
            std::vector<double> grid;
            for (const auto& g : split_commas(grid_spec)) grid.push_back(parse_number_arg(g, "--grid"));
            const auto rows = coherency_report(kb, disease, grid, tol);
            out << std::left << std::setw(24) << "symptom" << std::right << std::setw(8) << "hours" << std::setw(10)
                << "model" << std::setw(10) << "direct" << std::setw(10) << "delta" << "\n";
            out << std::fixed << std::setprecision(4);
            for (const auto& r : rows) {
                out << std::left << std::setw(24) << r.symptom_id << std::right << std::setw(8) << std::setprecision(1)
                    << r.t << std::setprecision(4) << std::setw(10) << r.model_p << std::setw(10) << r.direct_p
                    << std::setw(10) << r.delta << "\n";
            }
            out << rows.size() << " row(s) with |delta| > " << tol << "\n";
            return 0;
        }

        if (*infer) {
            Json j;
            try {
                j = Json::parse(read_file(case_path));
            } catch (const nlohmann::json::parse_error& e) {
                err << case_path << ": malformed JSON at byte " << e.byte << "\n";
                return 1;
            }
            try {
                out << infer_response_to_json(handle_infer(kb, infer_request_from_json(j, kb))).dump(2) << "\n";
            } catch (const SchemaError& e) {
                err << case_path << ": " << e.what() << "\n";
                return 1;
            } catch (const Error& e) {
                err << case_path << ": " << e.what() << "\n";
                return 1;
            }
            return 0;
        }

        if (*simulate) {
            DatasetConfig cfg;
            cfg.n_per_class = n;
            cfg.seed = seed;
            cfg.t_min = t_min;
            cfg.t_max = t_max;
            cfg.classes = split_commas(classes_spec);
            if (cfg.classes.empty())
                for (std::size_t i = 0; i < kb.diseases.size() && i < 2; ++i) cfg.classes.push_back(kb.diseases[i].id);
            const std::string text = write_cases_jsonl(generate_dataset(kb, cfg));
            if (out_path.empty())
                out << text;
            else
                write_text(out_path, text);
            return 0;
        }

        if (*calibrate) {
            const auto cases = read_cases_jsonl(read_file(cases_path));
            std::optional<ProbabilityMap> priors;
            if (!priors_spec.empty()) priors = parse_priors(priors_spec, target, cases);
            const CalibrationReport rep = run_benchmark(kb, cases, target, priors, bins);
            out << report_to_text(rep);
            if (!json_path.empty()) write_text(json_path, report_to_json(rep).dump(2) + "\n");
            return 0;
        }

        if (*serve_cmd) return serve(kb, port, static_dir, out);
    } catch (const CLI::ValidationError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const KbLoadError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const SchemaError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace cbdx
