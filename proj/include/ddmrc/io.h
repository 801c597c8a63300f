#pragma once

// Matrix CSV, JSON encodings of the problem and result types, and trajectory
// CSV output.

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "ddmrc/approx_mrc.h"
#include "ddmrc/exact_mrc.h"
#include "ddmrc/simulate.h"
#include "ddmrc/stability.h"
#include "ddmrc/verify_oracle.h"

namespace ddmrc {

using Json = nlohmann::ordered_json;

/// Thrown for malformed files and schema violations.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// First line "rows,cols", then one comma-separated row per line with 17
/// significant digits.
void write_matrix_csv(std::ostream& os, const MatrixXd& m);
MatrixXd read_matrix_csv(std::istream& is);
std::string matrix_to_csv(const MatrixXd& m);
MatrixXd matrix_from_csv(const std::string& text);

/// Nested row arrays; matrices with a zero dimension become {"rows", "cols"}.
/// Decoding also accepts {"csv": "..."}.
Json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j);

Json to_json(const QmiSpec& spec);
QmiSpec qmi_from_json(const Json& j);

Json to_json(const DataSet& data);
DataSet dataset_from_json(const Json& j);

Json to_json(const ReferenceModel& model);
ReferenceModel model_from_json(const Json& j);

Json to_json(const NumericConfig& cfg);
/// Missing keys keep their defaults.
NumericConfig numeric_config_from_json(const Json& j);

Json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const Json& j);

SdpStatus sdp_status_from_string(const std::string& s);

/// Synthesis input. A missing "noise" means noiseless data. `tolerance` holds Gamma_A, Gamma_B and, in fixed mode,
/// D_A and D_B.
struct ProblemBundle {
  DataSet data;
  NoiseModel noise;
  ReferenceModel model;
  std::optional<MatrixXd> D_A;
  std::optional<MatrixXd> D_B;
  MatrixXd Gamma_A;
  MatrixXd Gamma_B;
  /// "fixed" or "minimize".
  std::string mode = "fixed";
  NumericConfig numeric;
  std::uint64_t seed = 0;
  /// Generator settings when the data were simulated.
  std::optional<Json> generator;

  bool operator==(const ProblemBundle& o) const;
};

Json to_json(const ProblemBundle& b);
ProblemBundle bundle_from_json(const Json& j);

Json to_json(const SynthesisResult& r);
SynthesisResult synthesis_from_json(const Json& j);

Json to_json(const StabilityCheck& s);
StabilityCheck stability_check_from_json(const Json& j);

Json to_json(const StableSynthesisResult& r);
StableSynthesisResult stable_result_from_json(const Json& j);

Json to_json(const ExactResult& r);
Json to_json(const ExactLmiResult& r);

Json to_json(const OracleReport& r);
OracleReport oracle_report_from_json(const Json& j);

/// Variables, bounds, constraint matrices and equalities as plain arrays, for
/// cross-checking a problem with an external solver.
Json sdp_dump(const SdpProblem& p);

/// Columns t, x_1..x_n, u_1..u_m, r_1..r_p (the state row at t = T has empty
/// input cells).
void write_trajectory_csv(std::ostream& os, const DataSet& data, const MatrixXd& r);
/// As above plus e_1..e_n.
void write_tracking_csv(std::ostream& os, const TrackingRun& run);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace ddmrc
