// SPDX-License-Identifier: Apache-2.0
#include "ellopt/artifacts.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ellopt/improve.hpp"
#include "ellopt/util.hpp"

namespace ellopt {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    return out.str();
}

std::string field_csv(const Mesh& mesh, const StateField& field) {
    std::vector<std::vector<double>> rows;
    rows.reserve(field.size());
    for (int i = 0; i < mesh.node_count(); ++i)
        rows.push_back({static_cast<double>(i), mesh.nodes[static_cast<std::size_t>(i)][0],
                        mesh.nodes[static_cast<std::size_t>(i)][1], field[static_cast<std::size_t>(i)]});
    return csv_table({"node", "x", "y", "value"}, rows);
}

std::vector<double> element_values_from_nodal(const Mesh& mesh, const StateField& field) {
    std::vector<double> vals(static_cast<std::size_t>(mesh.element_count()));
    for (int e = 0; e < mesh.element_count(); ++e) vals[static_cast<std::size_t>(e)] = centroid_value(mesh, field, e);
    return vals;
}

std::vector<double> element_gradient_norms(const Mesh& mesh, const StateField& field) {
    std::vector<double> vals(static_cast<std::size_t>(mesh.element_count()));
    for (int e = 0; e < mesh.element_count(); ++e) vals[static_cast<std::size_t>(e)] = element_gradient(mesh, field, e).norm();
    return vals;
}

namespace {

std::string svg_coord(double v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string color_of(double t) {
    // 256-step linear blue -> red ramp.
    int step = static_cast<int>(t * 256.0);
    step = std::clamp(step, 0, 255);
    const int r = step;
    const int g = 0;
    const int b = 255 - step;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

std::string field_svg(const Mesh& mesh, const std::vector<double>& element_values,
                      const std::string& title) {
    double lo = 0.0, hi = 0.0;
    if (!element_values.empty()) {
        lo = *std::min_element(element_values.begin(), element_values.end());
        hi = *std::max_element(element_values.begin(), element_values.end());
    }
    const double span = hi - lo;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"540\" height=\"560\" "
           "viewBox=\"0 0 540 560\">\n";
    out << "<title>" << title << "</title>\n";
    out << "<text x=\"10\" y=\"20\">" << title << " min=" << format_double(lo)
        << " max=" << format_double(hi) << "</text>\n";
    out << "<g transform=\"translate(14,546) scale(512,-512)\">\n";
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto& tri = mesh.elements[static_cast<std::size_t>(e)];
        const double t = span > 0.0 ? (element_values[static_cast<std::size_t>(e)] - lo) / span : 0.5;
        out << "<polygon points=\"";
        for (int k = 0; k < 3; ++k) {
            const auto& p = mesh.nodes[static_cast<std::size_t>(tri[k])];
            out << (k ? " " : "") << svg_coord(p[0]) << ',' << svg_coord(p[1]);
        }
        out << "\" fill=\"" << color_of(t) << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

json to_json(const SocReport& report) {
    json j;
    j["value"] = report.value;
    j["terms"] = {{"hamiltonian_ratio", report.ratio_term},
                  {"hy_difference", report.hy_term},
                  {"hyy", report.hyy_term},
                  {"coefficient_pairing", report.pairing_term}};
    j["tol"] = report.tol;
    j["pass"] = report.pass;
    j["warning"] = report.warning;
    return j;
}

json to_json(const PontryaginCheck& check) {
    return json{{"max_violation", check.max_violation},
                {"worst_element", check.worst_element},
                {"worst_label", check.worst_label}};
}

json to_json(const SingularityReport& report) {
    json j;
    j["tol_sing"] = report.tol_sing;
    j["max_violation"] = report.max_violation;
    j["global"] = report.global;
    j["trivial_candidate_seen"] = report.trivial_candidate_seen;
    j["candidates"] = json::array();
    for (const CandidateClassification& cc : report.candidates) {
        json jc;
        jc["name"] = cc.name;
        jc["trivial"] = cc.trivial;
        jc["singular"] = cc.singular;
        jc["weakly_singular"] = cc.weakly_singular;
        jc["orthogonality"] = cc.orthogonality;
        jc["counts"] = {{"singular", cc.singular_count},
                        {"weakly_singular", cc.weak_count},
                        {"strict", cc.strict_count},
                        {"agrees", cc.agree_count}};
        jc["max_abs_h_gap"] = cc.max_abs_h_gap;
        jc["max_foc_violation"] = cc.max_foc_violation;
        std::string statuses;
        statuses.reserve(cc.elements.size());
        json dirs = json::array();
        for (const ElementClassification& ec : cc.elements) {
            switch (ec.status) {
                case ElementStatus::agrees: statuses.push_back('a'); break;
                case ElementStatus::singular: statuses.push_back('s'); break;
                case ElementStatus::weakly_singular: statuses.push_back('w'); break;
                default: statuses.push_back('x'); break;
            }
            dirs.push_back(json::array({ec.direction.dim() > 0 ? ec.direction[0] : 0.0,
                                        ec.direction.dim() > 1 ? ec.direction[1] : 0.0}));
        }
        jc["element_status"] = statuses;
        jc["directions"] = dirs;
        j["candidates"].push_back(std::move(jc));
    }
    return j;
}

std::string expansion_csv(const ExpansionTable& table) {
    std::ostringstream out;
    out << "alpha,j_alpha,first_order_ratio,second_order_ratio,richardson_estimate,solver_ok\n";
    const ExpansionRow* prev = nullptr;
    for (const ExpansionRow& row : table.rows) {
        // Running extrapolation from the previous healthy row.
        double richardson = row.second_ratio;
        if (row.solver_ok && prev) {
            const double a1 = prev->alpha, a2 = row.alpha;
            richardson = (a1 * row.second_ratio - a2 * prev->second_ratio) / (a1 - a2);
        }
        out << format_double(row.alpha) << ',' << format_double(row.j_alpha) << ','
            << format_double(row.first_ratio) << ',' << format_double(row.second_ratio) << ','
            << format_double(richardson) << ',' << (row.solver_ok ? 1 : 0) << '\n';
        if (row.solver_ok) prev = &row;
    }
    return out.str();
}

json singularity_report_schema() {
    return json::parse(R"({
      "type": "object",
      "required": ["tol_sing", "max_violation", "global", "candidates"],
      "additionalProperties": false,
      "properties": {
        "tol_sing": {"type": "number", "minimum": 0.0},
        "max_violation": {"type": "number", "minimum": 0.0},
        "global": {"type": "string",
                   "enum": ["nonsingular", "partially singular", "fully singular",
                            "partially weakly singular", "fully weakly singular"]},
        "trivial_candidate_seen": {"type": "boolean"},
        "candidates": {
          "type": "array",
          "items": {
            "type": "object",
            "required": ["name", "singular", "weakly_singular", "element_status"],
            "additionalProperties": false,
            "properties": {
              "name": {"type": "string"},
              "trivial": {"type": "boolean"},
              "singular": {"type": "boolean"},
              "weakly_singular": {"type": "boolean"},
              "orthogonality": {"type": "boolean"},
              "counts": {"type": "object"},
              "max_abs_h_gap": {"type": "number"},
              "max_foc_violation": {"type": "number"},
              "element_status": {"type": "string"},
              "directions": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
            }
          }
        }
      }
    })");
}

json soc_report_schema() {
    return json::parse(R"({
      "type": "object",
      "required": ["weak", "expansion"],
      "additionalProperties": false,
      "properties": {
        "candidate": {"type": "string"},
        "weak": {
          "type": "object",
          "required": ["value", "terms", "tol", "pass"],
          "additionalProperties": false,
          "properties": {
            "value": {"type": "number"},
            "terms": {"type": "object"},
            "tol": {"type": "number"},
            "pass": {"type": "boolean"},
            "warning": {"type": "string"}
          }
        },
        "singular": {"type": "object"},
        "expansion": {
          "type": "object",
          "required": ["j_ubar", "j1", "second_order_limit"],
          "additionalProperties": false,
          "properties": {
            "j_ubar": {"type": "number"},
            "j1": {"type": "number"},
            "second_order_limit": {"type": "number"},
            "limit_valid": {"type": "boolean"}
          }
        }
      }
    })");
}

json manifest_schema() {
    return json::parse(R"({
      "type": "object",
      "required": ["config_hash", "version", "stages", "artifacts"],
      "additionalProperties": false,
      "properties": {
        "config_hash": {"type": "string"},
        "version": {"type": "string"},
        "stages": {"type": "object"},
        "artifacts": {"type": "array", "items": {"type": "string"}}
      }
    })");
}

namespace {

struct PipelineState {
    json stages = json::object();
    std::vector<std::string> artifacts;
    std::filesystem::path out;

    void emit(const std::string& name, const std::string& content) {
        write_text_file((out / name).string(), content);
        artifacts.push_back(name);
    }

    bool stage(const std::string& name, const std::function<void()>& body) {
        log_info("stage " + name);
        try {
            body();
            stages[name] = "ok";
            return true;
        } catch (const std::exception& ex) {
            stages[name] = std::string("failed: ") + ex.what();
            log_info("stage " + name + " failed: " + ex.what());
            return false;
        }
    }
};

}  // namespace

json run_pipeline(const RunConfig& cfg) {
    PipelineState st;
    st.out = cfg.out_dir;
    std::filesystem::create_directories(st.out);

    ProblemBundle bundle;
    bool have_problem = st.stage("problem", [&] {
        bundle = build_problem(cfg.problem_name, cfg.problem_params, cfg.mesh_m);
    });

    ControlField incumbent;
    bool have_incumbent = have_problem && st.stage("incumbent", [&] {
        if (cfg.incumbent.kind == "catalog") {
            incumbent = bundle.incumbent;
        } else if (cfg.incumbent.kind == "improve") {
            GeneratorSpec start{"constant", cfg.incumbent.params.value("start", json{{"label", 0}})};
            const ControlField u0 = generate_control(start, bundle, bundle.incumbent, cfg.seed);
            const ImproveResult res = improve_control(bundle.problem, u0, cfg.improve_rounds,
                                                      cfg.solver, cfg.tol_j);
            incumbent = res.control;
            st.stages["incumbent_improve"] =
                json{{"status", to_string(res.status)},
                     {"rounds", res.rounds},
                     {"final_violation", res.final_violation},
                     {"cost_history", res.cost_history}};
        } else {
            incumbent = generate_control(cfg.incumbent, bundle, bundle.incumbent, cfg.seed);
        }
    });

    StateField ybar, psibar;
    bool have_fields = have_incumbent && st.stage("state_adjoint", [&] {
        ybar = solve_state(bundle.problem, incumbent, cfg.solver);
        psibar = solve_adjoint(bundle.problem, incumbent, ybar, cfg.solver);
        const Mesh& mesh = bundle.problem.mesh;
        st.emit("state.csv", field_csv(mesh, ybar));
        st.emit("adjoint.csv", field_csv(mesh, psibar));
        st.emit("heatmap_state.svg", field_svg(mesh, element_values_from_nodal(mesh, ybar), "state"));
        st.emit("heatmap_adjoint.svg",
                field_svg(mesh, element_values_from_nodal(mesh, psibar), "adjoint"));
        st.emit("heatmap_gradnorm.svg",
                field_svg(mesh, element_gradient_norms(mesh, ybar), "state-gradient-norm"));
    });

    // Candidate generation is shared by classification and probes.
    std::vector<ProbeCandidate> probes;
    bool have_candidates = have_fields && st.stage("candidates", [&] {
        for (const CandidateSpec& spec : cfg.candidates) {
            ProbeCandidate probe;
            probe.name = spec.name;
            probe.control = generate_control(spec.control, bundle, incumbent, cfg.seed);
            if (spec.direction)
                probe.direction = generate_direction(*spec.direction, bundle, incumbent,
                                                     probe.control, cfg.solver);
            probes.push_back(std::move(probe));
        }
    });

    if (have_candidates && !probes.empty()) {
        SingularityReport report;
        const bool have_report = st.stage("classify", [&] {
            report = classify(bundle.problem, incumbent, probes, cfg.solver);
            const json jr = to_json(report);
            validate_schema(singularity_report_schema(), jr);
            st.emit("singularity_report.json", jr.dump(2) + "\n");
        });

        for (std::size_t ci = 0; ci < probes.size(); ++ci) {
            const ProbeCandidate& probe = probes[ci];
            if (!probe.direction) continue;
            st.stage("probe_" + probe.name, [&] {
                const ExpansionTable table =
                    expansion_probe(bundle.problem, incumbent, probe.control, *probe.direction,
                                    cfg.alphas, cfg.solver, cfg.threads);
                st.emit("expansion_" + probe.name + ".csv", expansion_csv(table));

                json jsoc;
                jsoc["candidate"] = probe.name;
                jsoc["weak"] = to_json(soc_value(bundle.problem, incumbent, ybar, psibar,
                                                 probe.control, *probe.direction, cfg.solver));
                if (have_report && report.candidates[ci].singular)
                    jsoc["singular"] = to_json(soc_value_singular(bundle.problem, incumbent, ybar,
                                                                  psibar, probe.control, cfg.solver));
                jsoc["expansion"] = {{"j_ubar", table.j_ubar},
                                     {"j1", table.j1},
                                     {"second_order_limit", table.second_order_limit},
                                     {"limit_valid", table.limit_valid}};
                validate_schema(soc_report_schema(), jsoc);
                st.emit("soc_" + probe.name + ".json", jsoc.dump(2) + "\n");
            });
        }
    }

    if (cfg.laminate && have_problem) {
        st.stage("homogenize", [&] {
            const LaminateConfig& L = *cfg.laminate;
            Laminate lam;
            lam.phase_b = SMat::identity(2) * L.b;
            lam.phase_c = SMat::identity(2) * L.c;
            lam.alpha = L.alpha;
            lam.directions.push_back({L.num, L.den});
            const Mesh& mesh = bundle.problem.mesh;
            const ElementScalarField g(static_cast<std::size_t>(mesh.element_count()), L.g);
            const std::vector<SweepRow> rows =
                epsilon_sweep(lam, mesh, g, cfg.epsilons, cfg.solver.cg_rtol, cfg.threads);
            std::vector<std::vector<double>> table;
            for (const SweepRow& r : rows) table.push_back({r.eps, r.l2_error, r.h1_semi_error});
            st.emit("sweep.csv", csv_table({"eps", "l2_error", "h1_semi_error"}, table));
        });
    }

    json manifest;
    manifest["config_hash"] = config_hash(cfg);
    manifest["version"] = "0.1.0";
    manifest["stages"] = st.stages;
    manifest["artifacts"] = st.artifacts;
    validate_schema(manifest_schema(), manifest);
    write_text_file((st.out / "manifest.json").string(), manifest.dump(2) + "\n");
    return manifest;
}

}  // namespace ellopt
