#include "ddmrc/problem.h"

#include <stdexcept>

#include "ddmrc/linalg.h"

namespace ddmrc {

DataSet::DataSet(MatrixXd x, MatrixXd u_minus) : x_(std::move(x)), u_(std::move(u_minus)) {
  require_finite(x_, "DataSet X");
  require_finite(u_, "DataSet U_minus");
  if (x_.cols() < 2) throw std::invalid_argument("DataSet: X needs at least two columns");
  if (x_.cols() != u_.cols() + 1) {
    throw std::invalid_argument("DataSet: X has " + std::to_string(x_.cols()) +
                                " columns, U_minus has " + std::to_string(u_.cols()) +
                                "; expected cols(X) = cols(U_minus) + 1");
  }
  if (x_.rows() == 0 || u_.rows() == 0) throw std::invalid_argument("DataSet: empty state or input");
}

ReferenceModel::ReferenceModel(MatrixXd a_m, MatrixXd b_m) : a_(std::move(a_m)), b_(std::move(b_m)) {
  require_finite(a_, "ReferenceModel A_m");
  require_finite(b_, "ReferenceModel B_m");
  if (a_.rows() != a_.cols() || a_.rows() == 0) {
    throw std::invalid_argument("ReferenceModel: A_m must be square and non-empty");
  }
  if (b_.rows() != a_.rows()) throw std::invalid_argument("ReferenceModel: B_m row count differs from A_m");
  if (spectral_radius(a_) >= 1.0) {
    throw std::invalid_argument("ReferenceModel: A_m is not Schur (spectral radius " +
                                std::to_string(spectral_radius(a_)) + ")");
  }
}

void check_compatible(const DataSet& data, const ReferenceModel& model) {
  if (data.n() != model.n()) {
    throw std::invalid_argument("state dimension of data (" + std::to_string(data.n()) +
                                ") and model (" + std::to_string(model.n()) + ") differ");
  }
  if (model.p() > data.m()) {
    throw std::invalid_argument("reference input dimension exceeds the plant input dimension");
  }
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Informative: return "Informative";
    case Verdict::NotInformative: return "NotInformative";
    case Verdict::Unknown: return "Unknown";
    case Verdict::DegenerateAssumption: return "DegenerateAssumption";
    case Verdict::SolverFailed: return "SolverFailed";
  }
  return "Unknown";
}

Verdict verdict_from_string(const std::string& s) {
  for (Verdict v : {Verdict::Informative, Verdict::NotInformative, Verdict::Unknown,
                    Verdict::DegenerateAssumption, Verdict::SolverFailed}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

}  // namespace ddmrc
