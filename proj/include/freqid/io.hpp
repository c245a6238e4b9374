#pragma once

#include <string>

#include <json.hpp>

#include "freqid/bounds.hpp"
#include "freqid/harness.hpp"
#include "freqid/lnnm_solver.hpp"
#include "freqid/realization.hpp"
#include "freqid/sysmodel.hpp"

namespace freqid {

using json = nlohmann::json;

/// {"num", "den"} or {"A", "B", "C", "D"} with A as a list of rows.
json model_to_json(const Model &m);
Model model_from_json(const json &j);

/// {"z": [[re, im], ...], "W": [[[re, im] x N] x M]}. Reading derives the
/// grid angles from z; each point must lie on the upper unit semicircle.
json measurements_to_json(const MeasurementSet &ms);
MeasurementSet measurements_from_json(const json &j);

json complex_vector_to_json(const Eigen::VectorXcd &v);
Eigen::VectorXcd complex_vector_from_json(const json &j);

/// {"w_hat", "iterations", "cert_dual_norm", "cert_gap", "converged", ...}.
json solve_result_to_json(const SolveResult &r);
json realization_to_json(const Realization &r);
json bounds_summary_to_json(const BoundsSummary &s);
json validation_to_json(const ValidationReport &r);
json sweep_summary_to_json(const SweepResult &r);

/// Throws IoError or ParseError.
json read_json_file(const std::string &path);
void write_json_file(const std::string &path, const json &j);

} // namespace freqid
