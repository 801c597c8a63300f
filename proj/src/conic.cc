#include "ddmrc/conic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ddmrc/linalg.h"

namespace ddmrc {

void AffineMatrixExpr::add_term(int var, const MatrixXd& coeff) {
  if (coeff.rows() != constant.rows() || coeff.cols() != constant.cols()) {
    throw std::invalid_argument("AffineMatrixExpr: coefficient dimension mismatch");
  }
  for (auto& [v, c] : terms) {
    if (v == var) {
      c += coeff;
      return;
    }
  }
  terms.emplace_back(var, coeff);
}

MatrixXd AffineMatrixExpr::evaluate(const VectorXd& x) const {
  MatrixXd f = constant;
  for (const auto& [v, c] : terms) {
    if (v < 0 || v >= x.size()) {
      throw std::invalid_argument("AffineMatrixExpr: missing value for variable " +
                                  std::to_string(v));
    }
    f += x(v) * c;
  }
  return f;
}

int SdpProblem::add_variable(std::string name, VarKind kind) {
  variables.push_back({std::move(name), kind, std::nullopt, std::nullopt});
  return static_cast<int>(variables.size()) - 1;
}

int SdpProblem::add_constraint(AffineMatrixExpr expr, std::string label) {
  constraints.push_back(std::move(expr));
  constraint_labels.push_back(std::move(label));
  return static_cast<int>(constraints.size()) - 1;
}

void SdpProblem::set_objective(int var, double coeff) {
  if (objective.size() < num_variables()) {
    VectorXd c = VectorXd::Zero(num_variables());
    c.head(objective.size()) = objective;
    objective = c;
  }
  objective(var) = coeff;
}

void SdpProblem::validate() const {
  const int k = num_variables();
  if (objective.size() > k) {
    throw std::invalid_argument("SdpProblem: objective longer than variable list");
  }
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    const auto& c = constraints[j];
    if (c.constant.rows() != c.constant.cols()) {
      throw std::invalid_argument("SdpProblem: constraint " + std::to_string(j) +
                                  " is not square");
    }
    const double scale = std::max(1.0, c.constant.norm());
    if ((c.constant - c.constant.transpose()).norm() > 1e-9 * scale) {
      throw std::invalid_argument("SdpProblem: constraint " + std::to_string(j) +
                                  " has an asymmetric constant");
    }
    for (const auto& [v, m] : c.terms) {
      if (v < 0 || v >= k) {
        throw std::invalid_argument("SdpProblem: constraint " + std::to_string(j) +
                                    " references undeclared variable " +
                                    std::to_string(v));
      }
      if (m.rows() != c.dim() || m.cols() != c.dim()) {
        throw std::invalid_argument("SdpProblem: coefficient size mismatch");
      }
      if ((m - m.transpose()).norm() > 1e-9 * std::max(1.0, m.norm())) {
        throw std::invalid_argument("SdpProblem: asymmetric coefficient of " +
                                    variables[v].name);
      }
    }
  }
  for (const auto& eq : equalities) {
    for (const auto& [v, a] : eq.coeffs) {
      if (v < 0 || v >= k) {
        throw std::invalid_argument("SdpProblem: equality references undeclared variable");
      }
      (void)a;
    }
  }
  for (const auto& var : variables) {
    const auto lo = var.effective_lower();
    if (lo && var.upper && *lo > *var.upper) {
      throw std::invalid_argument("SdpProblem: empty bounds for " + var.name);
    }
  }
}

void restrict_to_face(SdpProblem& problem, int index, const MatrixXd& q) {
  auto& expr = problem.constraints.at(static_cast<std::size_t>(index));
  const Eigen::Index d = expr.dim();
  if (q.rows() != d) throw std::invalid_argument("restrict_to_face: Q has wrong size");
  if (q.cols() == 0) return;
  const MatrixXd q_orth = range_basis(q, 1e-10);
  // F(x) q_c = 0 for every column: d equations per column.
  // Entries at round-off level of their matrix are treated as exact zeros.
  const double zero_rel = 1e-9;
  for (Eigen::Index c = 0; c < q_orth.cols(); ++c) {
    const VectorXd f0q = expr.constant * q_orth.col(c);
    for (Eigen::Index row = 0; row < d; ++row) {
      LinearEquality eq;
      eq.rhs = std::abs(f0q(row)) <= zero_rel * expr.constant.row(row).norm() ? 0.0 : -f0q(row);
      for (const auto& [v, m] : expr.terms) {
        const double a = m.row(row).dot(q_orth.col(c));
        if (std::abs(a) > zero_rel * m.row(row).norm()) eq.coeffs.emplace_back(v, a);
      }
      if (eq.coeffs.empty() && eq.rhs == 0.0) continue;
      problem.add_equality(std::move(eq));
    }
  }
  const MatrixXd p = kernel_basis(q_orth.transpose(), 1e-10);
  AffineMatrixExpr reduced(p.transpose() * expr.constant * p);
  for (const auto& [v, m] : expr.terms) {
    reduced.add_term(v, p.transpose() * m * p);
  }
  expr = std::move(reduced);
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Feasible:
      return "Feasible";
    case SdpStatus::Optimal:
      return "Optimal";
    case SdpStatus::Infeasible:
      return "Infeasible";
    case SdpStatus::Inaccurate:
      return "Inaccurate";
    case SdpStatus::Failed:
      return "Failed";
  }
  return "Unknown";
}

ResidualReport check_point(const SdpProblem& problem, const VectorXd& values,
                           double tol) {
  if (values.size() != problem.num_variables()) {
    throw std::invalid_argument("check_point: expected " +
                                std::to_string(problem.num_variables()) +
                                " values, got " + std::to_string(values.size()));
  }
  if (!values.allFinite()) throw std::invalid_argument("check_point: non-finite value");
  ResidualReport rep;
  rep.worst = std::numeric_limits<double>::infinity();
  for (const auto& c : problem.constraints) {
    if (c.dim() == 0) {
      rep.min_eigenvalues.push_back(0);
      rep.relative.push_back(0);
      continue;
    }
    const MatrixXd f = c.evaluate(values);
    const VectorXd ev = symmetric_eigenvalues((f + f.transpose()) / 2);
    const double lo = ev(0);
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    rep.min_eigenvalues.push_back(lo);
    rep.relative.push_back(lo / scale);
    rep.worst = std::min(rep.worst, lo / scale);
  }
  for (int i = 0; i < problem.num_variables(); ++i) {
    const auto& var = problem.variables[static_cast<std::size_t>(i)];
    if (const auto lo = var.effective_lower()) {
      rep.bound_violation = std::max(rep.bound_violation,
                                     (*lo - values(i)) / std::max(1.0, std::abs(*lo)));
    }
    if (var.upper) {
      rep.bound_violation =
          std::max(rep.bound_violation,
                   (values(i) - *var.upper) / std::max(1.0, std::abs(*var.upper)));
    }
  }
  for (const auto& eq : problem.equalities) {
    double lhs = 0;
    double mag = std::abs(eq.rhs);
    for (const auto& [v, a] : eq.coeffs) {
      lhs += a * values(v);
      mag = std::max(mag, std::abs(a * values(v)));
    }
    rep.equality_residual =
        std::max(rep.equality_residual, std::abs(lhs - eq.rhs) / std::max(1.0, mag));
  }
  rep.worst = std::min({rep.worst, -rep.bound_violation, -rep.equality_residual});
  if (!std::isfinite(rep.worst)) rep.worst = 0;
  rep.feasible = rep.worst >= -tol;
  return rep;
}

namespace {

// Barrier problem over y: matrix blocks C + sum_l y_l A_l >= 0 and scalar rows
// c0 + a^T y >= 0.
struct MatrixBlock {
  MatrixXd constant;
  std::vector<std::pair<int, MatrixXd>> terms;
};

struct Barrier {
  int dim = 0;
  std::vector<MatrixBlock> blocks;
  VectorXd row_const;
  MatrixXd row_coef;  // rows x dim
  VectorXd objective;

  double degree() const {
    double m = static_cast<double>(row_const.size());
    for (const auto& b : blocks) m += static_cast<double>(b.constant.rows());
    return m;
  }
};

// Returns false when y is outside the interior.
bool barrier_eval(const Barrier& bar, const VectorXd& y, double* value,
                  VectorXd* grad, MatrixXd* hess) {
  double val = 0;
  if (grad) grad->setZero(bar.dim);
  if (hess) hess->setZero(bar.dim, bar.dim);
  if (bar.row_const.size() > 0) {
    const VectorXd f = bar.row_const + bar.row_coef * y;
    if ((f.array() <= 0).any() || !f.allFinite()) return false;
    val -= f.array().log().sum();
    if (grad) *grad -= bar.row_coef.transpose() * f.cwiseInverse();
    if (hess) {
      const VectorXd w = f.cwiseInverse();
      const MatrixXd scaled = w.asDiagonal() * bar.row_coef;
      hess->noalias() += scaled.transpose() * scaled;
    }
  }
  std::vector<MatrixXd> g;
  for (const auto& b : bar.blocks) {
    MatrixXd f = b.constant;
    for (const auto& [l, a] : b.terms) f += y(l) * a;
    Eigen::LLT<MatrixXd> llt(f);
    if (llt.info() != Eigen::Success) return false;
    const MatrixXd& lm = llt.matrixL();
    const VectorXd diag = lm.diagonal();
    if ((diag.array() <= 0).any() || !diag.allFinite()) return false;
    val -= 2.0 * diag.array().log().sum();
    if (!grad && !hess) continue;
    const MatrixXd linv =
        lm.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(f.rows(), f.cols()));
    g.clear();
    g.reserve(b.terms.size());
    for (const auto& [l, a] : b.terms) {
      g.push_back(linv * a * linv.transpose());
      if (grad) (*grad)(l) -= g.back().trace();
    }
    if (hess) {
      for (std::size_t i = 0; i < b.terms.size(); ++i) {
        for (std::size_t k = 0; k <= i; ++k) {
          const double h = (g[i].cwiseProduct(g[k])).sum();
          (*hess)(b.terms[i].first, b.terms[k].first) += h;
          if (i != k) (*hess)(b.terms[k].first, b.terms[i].first) += h;
        }
      }
    }
  }
  if (value) *value = val;
  return true;
}

// Congruence F -> T^T F T that balances the scale of every direction of the
// block across the constant and coefficient matrices.
void equilibrate(MatrixXd& constant, std::vector<MatrixXd>& coefs) {
  const Eigen::Index d = constant.rows();
  MatrixXd energy = MatrixXd::Zero(d, d);
  const MatrixXd c = 0.5 * (constant + constant.transpose());
  energy.noalias() += c * c;
  for (const auto& m : coefs) {
    const MatrixXd s = 0.5 * (m + m.transpose());
    energy.noalias() += s * s;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(energy);
  if (es.info() != Eigen::Success) return;
  const double top = es.eigenvalues().maxCoeff();
  if (!(top > 0)) return;
  VectorXd w(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    w(i) = std::pow(std::max(es.eigenvalues()(i), 1e-16 * top), -0.25);
  }
  const MatrixXd t = es.eigenvectors() * w.asDiagonal();
  constant = t.transpose() * c * t;
  for (auto& m : coefs) m = t.transpose() * m * t;
}

VectorXd newton_direction(const MatrixXd& hess, const VectorXd& rhs) {
  VectorXd d = hess.diagonal().cwiseAbs();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d(i) > 0 ? 1.0 / std::sqrt(d(i)) : 1.0;
  MatrixXd hs = d.asDiagonal() * hess * d.asDiagonal();
  Eigen::LDLT<MatrixXd> ldlt(hs);
  VectorXd w;
  if (ldlt.info() == Eigen::Success) {
    w = ldlt.solve(d.asDiagonal() * rhs);
  }
  if (ldlt.info() != Eigen::Success || !w.allFinite()) {
    hs.diagonal().array() += 1e-12;
    w = hs.completeOrthogonalDecomposition().solve(d.asDiagonal() * rhs);
  }
  return d.asDiagonal() * w;
}

struct CenterResult {
  bool ok = true;
  int iterations = 0;
};

// Minimises t * c^T y + phi(y) from an interior y by damped Newton.
CenterResult center(const Barrier& bar, double t, VectorXd& y, int budget) {
  CenterResult res;
  double f0 = 0;
  VectorXd grad;
  MatrixXd hess;
  for (int it = 0; it < budget; ++it) {
    if (!barrier_eval(bar, y, &f0, &grad, &hess)) {
      res.ok = false;
      return res;
    }
    ++res.iterations;
    const VectorXd g = t * bar.objective + grad;
    const VectorXd dy = newton_direction(hess, -g);
    const double dec2 = -g.dot(dy);
    if (!std::isfinite(dec2)) {
      res.ok = false;
      return res;
    }
    if (dec2 / 2 <= 1e-10) return res;
    const double fcur = t * bar.objective.dot(y) + f0;
    double step = 1.0;
    bool moved = false;
    while (step > 1e-10) {
      const VectorXd cand = y + step * dy;
      double fc = 0;
      if (barrier_eval(bar, cand, &fc, nullptr, nullptr)) {
        const double ftot = t * bar.objective.dot(cand) + fc;
        if (ftot <= fcur - 0.25 * step * dec2) {
          y = cand;
          moved = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved) {
      // No sufficient decrease: round-off floor reached.
      res.ok = dec2 < 1.0;
      return res;
    }
  }
  return res;
}

struct Reduced {
  VectorXd xp;
  MatrixXd basis;  // x = xp + basis * z
  bool consistent = true;
  double equality_residual = 0;
};

Reduced eliminate_equalities(const SdpProblem& p, double tol) {
  const int k = p.num_variables();
  Reduced red;
  if (p.equalities.empty()) {
    red.xp = VectorXd::Zero(k);
    red.basis = MatrixXd::Identity(k, k);
    return red;
  }
  MatrixXd a = MatrixXd::Zero(static_cast<Eigen::Index>(p.equalities.size()), k);
  VectorXd b(a.rows());
  for (std::size_t r = 0; r < p.equalities.size(); ++r) {
    for (const auto& [v, c] : p.equalities[r].coeffs) a(static_cast<Eigen::Index>(r), v) += c;
    b(static_cast<Eigen::Index>(r)) = p.equalities[r].rhs;
  }
  // Row-normalise so the residual test is scale free.
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double s = std::max(a.row(r).norm(), std::abs(b(r)));
    if (s > 0) {
      a.row(r) /= s;
      b(r) /= s;
    }
  }
  const double rank_tol = 1e-9;
  red.xp = pinv(a, rank_tol) * b;
  red.equality_residual = (a * red.xp - b).lpNorm<Eigen::Infinity>();
  red.consistent = red.equality_residual <= tol;
  red.basis = kernel_basis(a, rank_tol);
  return red;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const NumericConfig& cfg) {
  problem.validate();
  SdpSolution sol;
  const int k = problem.num_variables();
  const Reduced red = eliminate_equalities(problem, cfg.feas_tol);
  if (!red.consistent) {
    sol.status = SdpStatus::Infeasible;
    sol.values = red.xp;
    sol.margin = -red.equality_residual;
    sol.residual = check_point(problem, sol.values, cfg.feas_tol).worst;
    sol.message = "linear equalities are inconsistent";
    return sol;
  }
  const int nz = static_cast<int>(red.basis.cols());
  const double box = 1e9;

  // User blocks in z, normalised.
  std::vector<MatrixBlock> user;
  for (const auto& c : problem.constraints) {
    if (c.dim() == 0) continue;
    MatrixBlock b;
    b.constant = c.constant;
    std::vector<MatrixXd> zc(static_cast<std::size_t>(nz), MatrixXd::Zero(c.dim(), c.dim()));
    for (const auto& [v, m] : c.terms) {
      b.constant += red.xp(v) * m;
      for (int l = 0; l < nz; ++l) {
        const double w = red.basis(v, l);
        if (w != 0.0) zc[static_cast<std::size_t>(l)] += w * m;
      }
    }
    equilibrate(b.constant, zc);
    double scale = std::max(1.0, b.constant.norm());
    for (int l = 0; l < nz; ++l) {
      const double nrm = zc[static_cast<std::size_t>(l)].norm();
      scale = std::max(scale, nrm);
    }
    b.constant = (b.constant + b.constant.transpose()).eval() / (2 * scale);
    for (int l = 0; l < nz; ++l) {
      MatrixXd& m = zc[static_cast<std::size_t>(l)];
      if (m.norm() <= 1e-14 * scale) continue;
      b.terms.emplace_back(l, (m + m.transpose()) / (2 * scale));
    }
    user.push_back(std::move(b));
  }

  // Scalar rows: bounds (carry the margin in phase 1) and the box (does not).
  std::vector<std::pair<double, VectorXd>> bound_rows;
  std::vector<std::pair<double, VectorXd>> box_rows;
  for (int i = 0; i < k; ++i) {
    const auto& var = problem.variables[static_cast<std::size_t>(i)];
    const VectorXd row = red.basis.row(i).transpose();
    const auto lo = var.effective_lower();
    const double s = std::max({1.0, lo ? std::abs(*lo) : 0.0,
                               var.upper ? std::abs(*var.upper) : 0.0});
    if (lo) {
      bound_rows.emplace_back((red.xp(i) - *lo) / s, row / s);
    } else {
      box_rows.emplace_back((red.xp(i) + box) / box, row / box);
    }
    if (var.upper) {
      bound_rows.emplace_back((*var.upper - red.xp(i)) / s, -row / s);
    } else {
      box_rows.emplace_back((box - red.xp(i)) / box, -row / box);
    }
  }

  auto assemble = [&](bool phase1, double shift) {
    Barrier bar;
    bar.dim = nz + (phase1 ? 1 : 0);
    for (const auto& b : user) {
      MatrixBlock mb;
      mb.constant = b.constant;
      if (shift != 0) mb.constant.diagonal().array() += shift;
      mb.terms = b.terms;
      if (phase1) {
        mb.terms.emplace_back(nz, -MatrixXd::Identity(b.constant.rows(), b.constant.cols()));
      }
      bar.blocks.push_back(std::move(mb));
    }
    const auto nrows = static_cast<Eigen::Index>(bound_rows.size() + box_rows.size() +
                                                 (phase1 ? 1 : 0));
    bar.row_const.resize(nrows);
    bar.row_coef = MatrixXd::Zero(nrows, bar.dim);
    Eigen::Index r = 0;
    for (const auto& [c0, row] : bound_rows) {
      bar.row_const(r) = c0 + shift;
      bar.row_coef.row(r).head(nz) = row.transpose();
      if (phase1) bar.row_coef(r, nz) = -1.0;
      ++r;
    }
    for (const auto& [c0, row] : box_rows) {
      bar.row_const(r) = c0;
      bar.row_coef.row(r).head(nz) = row.transpose();
      ++r;
    }
    if (phase1) {
      bar.row_const(r) = 1.0;  // s <= 1
      bar.row_coef(r, nz) = -1.0;
    }
    bar.objective = VectorXd::Zero(bar.dim);
    return bar;
  };

  // ---- phase 1: maximise the common margin s ----
  Barrier p1 = assemble(true, 0.0);
  p1.objective(nz) = -1.0;
  VectorXd y = VectorXd::Zero(nz + 1);
  {
    double s0 = std::numeric_limits<double>::infinity();
    for (const auto& b : user) {
      const VectorXd ev = symmetric_eigenvalues(b.constant);
      s0 = std::min(s0, ev(0));
    }
    for (const auto& [c0, row] : bound_rows) s0 = std::min(s0, c0);
    if (!std::isfinite(s0)) s0 = 0;
    y(nz) = std::min(s0, 0.0) - 1.0;
  }
  const double m1 = p1.degree();
  const bool want_objective = problem.has_objective();
  double t = 1.0;
  const double mu = 20.0;
  int iters = 0;
  bool p1_ok = true;
  while (true) {
    const CenterResult cr = center(p1, t, y, 80);
    iters += cr.iterations;
    if (!cr.ok) {
      p1_ok = false;
      break;
    }
    const double s = y(nz);
    const double gap = m1 / t;
    if (s + gap < -cfg.feas_tol) break;            // certified: margin < 0
    if (gap < 1e-10) break;                         // converged
    if (want_objective && s > 0 && s >= 0.5 * (s + gap)) break;
    if (!want_objective && s >= 1.0 - 1e-9) break;  // margin cap reached
    if (iters > cfg.max_iter) break;
    t *= mu;
  }
  sol.margin = y(nz);
  VectorXd z = y.head(nz);
  VectorXd x = red.xp + red.basis * z;
  sol.iterations = iters;

  auto finish = [&](SdpStatus ok_status) {
    sol.values = x;
    const ResidualReport rep = check_point(problem, x, cfg.feas_tol);
    sol.residual = rep.worst;
    if (want_objective) sol.objective = problem.objective.dot(x.head(problem.objective.size()));
    if (rep.feasible) {
      sol.status = ok_status;
    } else if (sol.margin < -cfg.feas_tol) {
      sol.status = SdpStatus::Infeasible;
      if (sol.message.empty()) sol.message = "phase 1 margin is negative";
    } else {
      sol.status = SdpStatus::Inaccurate;
      if (sol.message.empty()) sol.message = "returned point violates the tolerance";
    }
    return sol;
  };

  if (!p1_ok && sol.margin <= 0) {
    sol.message = "phase 1 breakdown";
    if (!want_objective) return finish(SdpStatus::Feasible);
    sol.values = x;
    sol.residual = check_point(problem, x, cfg.feas_tol).worst;
    sol.status = sol.margin < -cfg.feas_tol ? SdpStatus::Infeasible : SdpStatus::Failed;
    return sol;
  }
  if (!want_objective || sol.margin < -cfg.feas_tol) {
    return finish(SdpStatus::Feasible);
  }

  // ---- phase 2: minimise the objective from the phase-1 point ----
  const double shift = sol.margin > 0 ? 0.0 : -2.0 * sol.margin + 1e-12;
  Barrier p2 = assemble(false, shift);
  VectorXd cz = red.basis.transpose() * problem.objective.head(k);
  if (problem.objective.size() < k) {
    cz = red.basis.transpose().leftCols(problem.objective.size()) * problem.objective;
  }
  const double cnorm = cz.norm();
  if (cnorm == 0) return finish(SdpStatus::Optimal);
  p2.objective = cz / cnorm;
  const double m2 = p2.degree();
  t = 1.0;
  bool converged = false;
  int p2_iters = 0;
  while (true) {
    const VectorXd z_prev = z;
    const CenterResult cr = center(p2, t, z, 80);
    p2_iters += cr.iterations;
    if (!cr.ok) {
      if (!barrier_eval(p2, z, nullptr, nullptr, nullptr)) z = z_prev;
      break;
    }
    const double obj = p2.objective.dot(z);
    if (m2 / t < cfg.gap_tol * std::max(1.0, std::abs(obj))) {
      converged = true;
      break;
    }
    if (p2_iters > cfg.max_iter) break;
    t *= mu;
  }
  sol.iterations += p2_iters;
  x = red.xp + red.basis * z;
  const double obj = p2.objective.dot(z);
  const double gap = m2 / t;
  if (!converged && gap > 1e-6 * std::max(1.0, std::abs(obj))) {
    sol.message = "phase 2 stopped with relative gap " + std::to_string(gap);
    finish(SdpStatus::Inaccurate);
    if (sol.status == SdpStatus::Optimal) sol.status = SdpStatus::Inaccurate;
    return sol;
  }
  return finish(SdpStatus::Optimal);
}

}  // namespace ddmrc
