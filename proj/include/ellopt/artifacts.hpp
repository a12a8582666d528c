// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ellopt/config.hpp"
#include "ellopt/homogenize.hpp"
#include "ellopt/optimality.hpp"
#include "ellopt/relaxation.hpp"

namespace ellopt {

/// Shortest round-trip decimal form of a double ("%.17g" fallback), used for
/// byte-stable CSV/JSON output.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

std::string field_csv(const Mesh& mesh, const StateField& field);

/// Flat-shaded per-element heatmap with a 256-step linear colormap; min and
/// max are annotated inside the file.  No timestamps, byte-stable output.
std::string field_svg(const Mesh& mesh, const std::vector<double>& element_values,
                      const std::string& title);

std::vector<double> element_values_from_nodal(const Mesh& mesh, const StateField& field);
std::vector<double> element_gradient_norms(const Mesh& mesh, const StateField& field);

json to_json(const SocReport& report);
json to_json(const SingularityReport& report);
json to_json(const PontryaginCheck& check);
std::string expansion_csv(const ExpansionTable& table);

json singularity_report_schema();
json soc_report_schema();
json manifest_schema();

/// Orchestrated run: solves, classifies, probes and serializes everything
/// into cfg.out_dir.  Stage failures are recorded in the manifest and later
/// independent stages still run.  Returns the manifest.
json run_pipeline(const RunConfig& cfg);

}  // namespace ellopt
