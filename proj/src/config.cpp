// SPDX-License-Identifier: Apache-2.0
#include "ellopt/config.hpp"

#include <fstream>
#include <random>

#include "ellopt/optimality.hpp"

namespace ellopt {

namespace {

const char* json_type_name(const json& v) {
    if (v.is_null()) return "null";
    if (v.is_boolean()) return "boolean";
    if (v.is_number_integer()) return "integer";
    if (v.is_number()) return "number";
    if (v.is_string()) return "string";
    if (v.is_array()) return "array";
    return "object";
}

bool matches_type(const std::string& t, const json& v) {
    if (t == "number") return v.is_number();
    if (t == "integer") return v.is_number_integer();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "array") return v.is_array();
    if (t == "object") return v.is_object();
    if (t == "null") return v.is_null();
    return false;
}

}  // namespace

void validate_schema(const json& schema, const json& value, const std::string& path) {
    if (schema.contains("type")) {
        const std::string t = schema["type"].get<std::string>();
        if (!matches_type(t, value))
            throw ConfigError(path + ": expected " + t + ", got " + json_type_name(value));
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const json& cand : schema["enum"]) ok = ok || cand == value;
        if (!ok) throw ConfigError(path + ": value not in enum");
    }
    if (value.is_number()) {
        const double x = value.get<double>();
        if (schema.contains("minimum") && x < schema["minimum"].get<double>())
            throw ConfigError(path + ": below minimum");
        if (schema.contains("maximum") && x > schema["maximum"].get<double>())
            throw ConfigError(path + ": above maximum");
    }
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const json& key : schema["required"])
                if (!value.contains(key.get<std::string>()))
                    throw ConfigError(path + ": missing required key '" + key.get<std::string>() + "'");
        const json props = schema.value("properties", json::object());
        for (auto it = value.begin(); it != value.end(); ++it) {
            if (props.contains(it.key())) {
                validate_schema(props[it.key()], it.value(), path + "." + it.key());
            } else if (schema.contains("additionalProperties") &&
                       schema["additionalProperties"].is_boolean() &&
                       !schema["additionalProperties"].get<bool>()) {
                throw ConfigError(path + ": unexpected key '" + it.key() + "'");
            }
        }
    }
    if (value.is_array() && schema.contains("items")) {
        int i = 0;
        for (const json& item : value)
            validate_schema(schema["items"], item, path + "[" + std::to_string(i++) + "]");
    }
}

json runconfig_schema() {
    return json::parse(R"({
      "type": "object",
      "required": ["problem", "mesh"],
      "additionalProperties": false,
      "properties": {
        "problem": {
          "type": "object",
          "required": ["name"],
          "additionalProperties": false,
          "properties": {
            "name": {"type": "string",
                     "enum": ["laplace-ms", "two-phase", "region-free", "rank-one-gap"]},
            "params": {"type": "object"}
          }
        },
        "mesh": {"type": "integer", "minimum": 2, "maximum": 1024},
        "incumbent": {
          "type": "object",
          "required": ["kind"],
          "additionalProperties": false,
          "properties": {
            "kind": {"type": "string", "enum": ["constant", "flip", "region-flip", "random", "catalog", "improve"]},
            "params": {"type": "object"}
          }
        },
        "improve_rounds": {"type": "integer", "minimum": 1, "maximum": 1000},
        "candidates": {
          "type": "array",
          "items": {
            "type": "object",
            "required": ["name", "control"],
            "additionalProperties": false,
            "properties": {
              "name": {"type": "string"},
              "control": {
                "type": "object",
                "required": ["kind"],
                "additionalProperties": false,
                "properties": {
                  "kind": {"type": "string", "enum": ["constant", "flip", "region-flip", "random", "catalog"]},
                  "params": {"type": "object"}
                }
              },
              "direction": {
                "type": "object",
                "required": ["kind"],
                "additionalProperties": false,
                "properties": {
                  "kind": {"type": "string", "enum": ["select", "constant", "catalog"]},
                  "params": {"type": "object"}
                }
              }
            }
          }
        },
        "alphas": {"type": "array", "items": {"type": "number", "minimum": 0.0, "maximum": 1.0}},
        "epsilons": {"type": "array", "items": {"type": "number", "minimum": 0.0}},
        "laminate": {
          "type": "object",
          "additionalProperties": false,
          "properties": {
            "b": {"type": "number", "minimum": 0.0},
            "c": {"type": "number", "minimum": 0.0},
            "alpha": {"type": "number", "minimum": 0.0, "maximum": 1.0},
            "num": {"type": "array", "items": {"type": "integer"}},
            "den": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            "g": {"type": "number"}
          }
        },
        "tolerances": {
          "type": "object",
          "additionalProperties": false,
          "properties": {
            "cg_rtol": {"type": "number", "minimum": 0.0},
            "newton_rtol": {"type": "number", "minimum": 0.0},
            "newton_atol": {"type": "number", "minimum": 0.0},
            "newton_max_iter": {"type": "integer", "minimum": 1},
            "tol_j": {"type": "number", "minimum": 0.0}
          }
        },
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1, "maximum": 256},
        "out": {"type": "string"}
      }
    })");
}

RunConfig parse_config(const json& j) {
    validate_schema(runconfig_schema(), j);
    RunConfig cfg;
    cfg.problem_name = j["problem"]["name"].get<std::string>();
    cfg.problem_params = j["problem"].value("params", json::object());
    cfg.mesh_m = j["mesh"].get<int>();
    if (j.contains("incumbent")) {
        cfg.incumbent.kind = j["incumbent"]["kind"].get<std::string>();
        cfg.incumbent.params = j["incumbent"].value("params", json::object());
    }
    cfg.improve_rounds = j.value("improve_rounds", 30);
    if (j.contains("candidates"))
        for (const json& c : j["candidates"]) {
            CandidateSpec spec;
            spec.name = c["name"].get<std::string>();
            spec.control.kind = c["control"]["kind"].get<std::string>();
            spec.control.params = c["control"].value("params", json::object());
            if (c.contains("direction")) {
                GeneratorSpec d;
                d.kind = c["direction"]["kind"].get<std::string>();
                d.params = c["direction"].value("params", json::object());
                spec.direction = d;
            }
            cfg.candidates.push_back(std::move(spec));
        }
    if (j.contains("alphas")) cfg.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("epsilons")) cfg.epsilons = j["epsilons"].get<std::vector<double>>();
    if (j.contains("laminate")) {
        LaminateConfig lam;
        const json& L = j["laminate"];
        lam.b = L.value("b", lam.b);
        lam.c = L.value("c", lam.c);
        lam.alpha = L.value("alpha", lam.alpha);
        if (L.contains("num")) lam.num = L["num"].get<std::vector<long>>();
        if (L.contains("den")) lam.den = L["den"].get<std::vector<long>>();
        lam.g = L.value("g", lam.g);
        cfg.laminate = lam;
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        cfg.solver.cg_rtol = t.value("cg_rtol", cfg.solver.cg_rtol);
        cfg.solver.newton_rtol = t.value("newton_rtol", cfg.solver.newton_rtol);
        cfg.solver.newton_atol = t.value("newton_atol", cfg.solver.newton_atol);
        cfg.solver.newton_max_iter = t.value("newton_max_iter", cfg.solver.newton_max_iter);
        cfg.tol_j = t.value("tol_j", cfg.tol_j);
    }
    cfg.seed = j.value("seed", 0ULL);
    cfg.threads = j.value("threads", 1);
    cfg.out_dir = j.value("out", std::string("out"));
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw ConfigError("config parse error: " + std::string(ex.what()));
    }
    return parse_config(j);
}

json config_to_json(const RunConfig& cfg) {
    json j;
    j["problem"] = {{"name", cfg.problem_name}, {"params", cfg.problem_params}};
    j["mesh"] = cfg.mesh_m;
    j["incumbent"] = {{"kind", cfg.incumbent.kind}, {"params", cfg.incumbent.params}};
    j["improve_rounds"] = cfg.improve_rounds;
    j["candidates"] = json::array();
    for (const CandidateSpec& c : cfg.candidates) {
        json jc = {{"name", c.name},
                   {"control", {{"kind", c.control.kind}, {"params", c.control.params}}}};
        if (c.direction)
            jc["direction"] = {{"kind", c.direction->kind}, {"params", c.direction->params}};
        j["candidates"].push_back(jc);
    }
    j["alphas"] = cfg.alphas;
    j["epsilons"] = cfg.epsilons;
    if (cfg.laminate) {
        j["laminate"] = {{"b", cfg.laminate->b},   {"c", cfg.laminate->c},
                         {"alpha", cfg.laminate->alpha}, {"num", cfg.laminate->num},
                         {"den", cfg.laminate->den},     {"g", cfg.laminate->g}};
    }
    j["tolerances"] = {{"cg_rtol", cfg.solver.cg_rtol},
                       {"newton_rtol", cfg.solver.newton_rtol},
                       {"newton_atol", cfg.solver.newton_atol},
                       {"newton_max_iter", cfg.solver.newton_max_iter},
                       {"tol_j", cfg.tol_j}};
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["out"] = cfg.out_dir;
    return j;
}

std::string config_hash(const RunConfig& cfg) {
    const std::string s = config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ProblemBundle build_problem(const std::string& name, const json& params, int m) {
    ProblemBundle bundle;
    if (name == "laplace-ms") {
        LaplaceMsParams p;
        p.semilinear = params.value("semilinear", p.semilinear);
        p.ax = params.value("ax", p.ax);
        p.ay = params.value("ay", p.ay);
        bundle.problem = make_laplace_ms(m, p);
    } else if (name == "two-phase") {
        TwoPhaseParams p;
        p.a = params.value("a", p.a);
        p.b = params.value("b", p.b);
        p.anisotropic = params.value("anisotropic", p.anisotropic);
        p.reaction = params.value("reaction", p.reaction);
        p.g_scale = params.value("g_scale", p.g_scale);
        p.yd_scale = params.value("yd_scale", p.yd_scale);
        p.yd_step = params.value("yd_step", p.yd_step);
        p.beta0 = params.value("beta0", p.beta0);
        p.beta1 = params.value("beta1", p.beta1);
        bundle.problem = make_two_phase(m, p);
    } else if (name == "region-free") {
        RegionFreeParams p;
        if (params.contains("box")) {
            const auto box = params["box"].get<std::vector<double>>();
            if (box.size() != 4) throw ConfigError("region-free: box needs 4 entries");
            std::copy(box.begin(), box.end(), p.box.begin());
        }
        p.a_gap = params.value("a_gap", p.a_gap);
        p.beta_out = params.value("beta_out", p.beta_out);
        p.reaction = params.value("reaction", p.reaction);
        p.g_scale = params.value("g_scale", p.g_scale);
        p.yd_scale = params.value("yd_scale", p.yd_scale);
        bundle.problem = make_region_free(m, p);
    } else if (name == "rank-one-gap") {
        RankOneGapParams p;
        p.qx = params.value("qx", p.qx);
        p.qy = params.value("qy", p.qy);
        p.gap = params.value("gap", p.gap);
        p.a0 = params.value("a0", p.a0);
        p.a1 = params.value("a1", p.a1);
        p.reaction = params.value("reaction", p.reaction);
        p.g_scale = params.value("g_scale", p.g_scale);
        p.delta = params.value("delta", p.delta);
        p.maximizer_mode = params.value("maximizer_mode", p.maximizer_mode);
        RankOneGapInstance inst = make_rank_one_gap(m, p);
        bundle.problem = std::move(inst.problem);
        bundle.incumbent = std::move(inst.incumbent);
        bundle.catalog_candidate = std::move(inst.candidate);
        bundle.catalog_direction = std::move(inst.direction);
        return bundle;
    } else {
        throw ConfigError("unknown problem: " + name);
    }
    bundle.incumbent.assign(static_cast<std::size_t>(bundle.problem.mesh.element_count()), 0);
    return bundle;
}

ControlField generate_control(const GeneratorSpec& spec, const ProblemBundle& bundle,
                              const ControlField& incumbent, std::uint64_t seed) {
    const Problem& pb = bundle.problem;
    const int ne = pb.mesh.element_count();
    ControlField u(static_cast<std::size_t>(ne), 0);

    if (spec.kind == "constant") {
        const int label = spec.params.value("label", 0);
        if (label < 0 || label >= pb.label_count) throw ConfigError("constant control: label out of range");
        std::fill(u.begin(), u.end(), label);
    } else if (spec.kind == "flip") {
        for (int e = 0; e < ne; ++e)
            u[static_cast<std::size_t>(e)] =
                (incumbent[static_cast<std::size_t>(e)] + 1) % pb.label_count;
    } else if (spec.kind == "region-flip") {
        std::vector<double> box = spec.params.value("box", std::vector<double>{0.25, 0.75, 0.25, 0.75});
        if (box.size() != 4) throw ConfigError("region-flip: box needs 4 entries");
        for (int e = 0; e < ne; ++e) {
            const auto& c = pb.mesh.centroid[static_cast<std::size_t>(e)];
            const bool inside = c[0] >= box[0] && c[0] <= box[1] && c[1] >= box[2] && c[1] <= box[3];
            u[static_cast<std::size_t>(e)] =
                inside ? (incumbent[static_cast<std::size_t>(e)] + 1) % pb.label_count
                       : incumbent[static_cast<std::size_t>(e)];
        }
    } else if (spec.kind == "random") {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::uniform_int_distribution<int> dist(0, pb.label_count - 1);
        for (int e = 0; e < ne; ++e) u[static_cast<std::size_t>(e)] = dist(rng);
    } else if (spec.kind == "catalog") {
        if (!bundle.catalog_candidate) throw ConfigError("catalog control: problem has no catalog candidate");
        u = *bundle.catalog_candidate;
    } else {
        throw ConfigError("unknown control generator: " + spec.kind);
    }
    return u;
}

DirectionField generate_direction(const GeneratorSpec& spec, const ProblemBundle& bundle,
                                  const ControlField& incumbent, const ControlField& candidate,
                                  const SolverOptions& opts) {
    const Problem& pb = bundle.problem;
    const int ne = pb.mesh.element_count();
    DirectionField ell(static_cast<std::size_t>(ne), Vec{1.0, 0.0});

    if (spec.kind == "constant") {
        std::vector<double> d = spec.params.value("vector", std::vector<double>{1.0, 0.0});
        if (d.size() != 2) throw ConfigError("constant direction: vector needs 2 entries");
        const Vec v = Vec{d[0], d[1]}.normalized();
        std::fill(ell.begin(), ell.end(), v);
    } else if (spec.kind == "select") {
        const StateField ybar = solve_state(pb, incumbent, opts);
        const StateField psibar = solve_adjoint(pb, incumbent, ybar, opts);
        const std::vector<CellData> cells = make_cells(pb, incumbent, ybar, psibar);
        for (int e = 0; e < ne; ++e)
            ell[static_cast<std::size_t>(e)] =
                select_direction(cells[static_cast<std::size_t>(e)], candidate[static_cast<std::size_t>(e)]);
    } else if (spec.kind == "catalog") {
        if (!bundle.catalog_direction) throw ConfigError("catalog direction: problem has no catalog direction");
        ell = *bundle.catalog_direction;
    } else {
        throw ConfigError("unknown direction generator: " + spec.kind);
    }
    return ell;
}

}  // namespace ellopt
