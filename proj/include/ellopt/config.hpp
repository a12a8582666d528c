// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellopt/problem.hpp"
#include "ellopt/semilinear.hpp"

namespace ellopt {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Minimal JSON-schema checker covering the subset used by the shipped
/// schemas: type, properties, required, items, enum, additionalProperties,
/// minimum/maximum.  Throws ConfigError with a path-qualified message.
void validate_schema(const json& schema, const json& value, const std::string& path = "$");

struct GeneratorSpec {
    std::string kind;  // control: constant | flip | region-flip | random | catalog
                       // direction: select | constant | catalog
    json params;
};

struct CandidateSpec {
    std::string name;
    GeneratorSpec control;
    std::optional<GeneratorSpec> direction;
};

struct LaminateConfig {
    double b = 1.0;          // scalar phase B = b I
    double c = 4.0;          // scalar phase C = c I
    double alpha = 0.5;
    std::vector<long> num{1, 0};
    std::vector<long> den{1, 1};
    double g = 1.0;          // constant load
};

struct RunConfig {
    std::string problem_name = "two-phase";
    json problem_params = json::object();
    int mesh_m = 32;
    GeneratorSpec incumbent{"constant", json{{"label", 0}}};
    int improve_rounds = 30;
    std::vector<CandidateSpec> candidates;
    std::vector<double> alphas{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    std::vector<double> epsilons;
    std::optional<LaminateConfig> laminate;
    SolverOptions solver;
    double tol_j = 1e-9;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir = "out";
};

json runconfig_schema();

RunConfig parse_config(const json& j);           // validates against runconfig_schema()
RunConfig load_config(const std::string& path);  // reads + parses a file

json config_to_json(const RunConfig& cfg);       // canonical round-trip form

/// FNV-1a 64-bit over the canonical serialized config.
std::string config_hash(const RunConfig& cfg);

/// Problem instantiation from (name, params, mesh); for "rank-one-gap" the
/// catalog candidate and direction fields are returned alongside.
struct ProblemBundle {
    Problem problem;
    ControlField incumbent;                    // catalog default, generators may override
    std::optional<ControlField> catalog_candidate;
    std::optional<DirectionField> catalog_direction;
};

ProblemBundle build_problem(const std::string& name, const json& params, int m);

ControlField generate_control(const GeneratorSpec& spec, const ProblemBundle& bundle,
                              const ControlField& incumbent, std::uint64_t seed);

DirectionField generate_direction(const GeneratorSpec& spec, const ProblemBundle& bundle,
                                  const ControlField& incumbent, const ControlField& candidate,
                                  const SolverOptions& opts);

}  // namespace ellopt
