#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrd/batch.hpp"
#include "lrd/core_ops.hpp"
#include "lrd/errors.hpp"
#include "lrd/manifold.hpp"
#include "lrd/transform.hpp"
#include "lrd/warp.hpp"

namespace lrd {

enum class Method { Rasl, Meadmm };

inline const char* method_name(Method m) {
  return m == Method::Rasl ? "rasl" : "meadmm";
}

inline Method method_from_name(const std::string& name) {
  if (name == "rasl") return Method::Rasl;
  if (name == "meadmm") return Method::Meadmm;
  throw std::invalid_argument("method_from_name: unknown method '" + name + "'");
}

// Penalty parameter schedule across inner iterations. Decay multiplies mu by
// mu_decay down to mu_floor each step; Growth multiplies by mu_growth up to
// mu_cap (the classic inexact-ALM continuation, much stronger in practice).
enum class MuSchedule { Decay, Growth };

// Which matrix gets projected onto the sample manifold in meadmm mode.
enum class ProjectTarget { VrPlusE, VmLin };

struct SolverConfig {
  Method method = Method::Rasl;

  // Weight of the sparse term; <= 0 picks 1/sqrt(max(pixels, batch)).
  double lambda = 0.0;

  // Penalty parameter. Values <= 0 are resolved from the data: mu0 becomes
  // 1.25 / sigma_max(Vm), mu_floor 1e-7 * mu0 and mu_cap 1e7 * mu0.
  double mu0 = 0.0;
  double mu_floor = 0.0;
  double mu_cap = 0.0;
  double mu_decay = 0.9;
  double mu_growth = 1.5;
  MuSchedule mu_schedule = MuSchedule::Decay;

  double inner_tol = 1e-7;
  int inner_max_iters = 200;
  double outer_tol = 1e-5;
  int outer_max_iters = 50;

  // Inner iterations allowed without residual improvement before the loop
  // stops and returns its best iterate. The decay schedule shrinks the
  // penalty forever, so without this guard a stalled run would drift away
  // from the solution instead of merely wasting time.
  int stall_patience = 15;

  ManifoldParams manifold;
  // Projecting the data columns preserves the manifold's pull on the low-rank
  // term; projecting the running vr + e reconstruction feeds the projection's
  // own output back into itself, which measurably cancels the benefit.
  ProjectTarget project_target = ProjectTarget::VmLin;
  // Build the neighborhood graph once per outer iteration instead of once
  // per inner iteration. Stable neighbor sets keep the reference from
  // flickering while the transforms settle.
  bool freeze_manifold_per_outer = true;
};

inline void validate(const SolverConfig& c) {
  if (c.mu_decay <= 0.0 || c.mu_decay > 1.0)
    throw std::invalid_argument("solver: mu_decay must be in (0, 1]");
  if (c.mu_growth < 1.0)
    throw std::invalid_argument("solver: mu_growth must be >= 1");
  if (c.inner_tol <= 0.0 || c.outer_tol <= 0.0)
    throw std::invalid_argument("solver: tolerances must be positive");
  if (c.inner_max_iters < 1 || c.outer_max_iters < 1)
    throw std::invalid_argument("solver: iteration caps must be positive");
  if (c.stall_patience < 1)
    throw std::invalid_argument("solver: stall_patience must be positive");
  if (c.mu0 > 0.0 && c.mu_floor > c.mu0)
    throw std::invalid_argument("solver: mu_floor must not exceed mu0");
  validate(c.manifold);
}

inline double resolve_lambda(const SolverConfig& c, Eigen::Index pixels,
                             Eigen::Index batch) {
  if (c.lambda > 0.0) return c.lambda;
  return 1.0 / std::sqrt(static_cast<double>(std::max(pixels, batch)));
}

/// Constraint violation of the decomposition: Vr + E - Vm.
inline Matrix residual(const Matrix& vr, const Matrix& e, const Matrix& vm) {
  if (vr.rows() != e.rows() || vr.cols() != e.cols() ||
      vr.rows() != vm.rows() || vr.cols() != vm.cols())
    throw std::invalid_argument("residual: shape mismatch");
  return vr + e - vm;
}

/// Value of the relaxed objective |Vr|_* + lambda |E|_1.
inline double objective(const Matrix& vr, const Matrix& e, double lambda) {
  if (lambda < 0.0)
    throw std::invalid_argument("objective: lambda must be non-negative");
  return nuclear_norm(vr) + lambda * l1_norm(e);
}

struct DecompositionState {
  Matrix vm;    // warped, normalized observations (one unit column per image)
  Matrix vr;    // low-rank part
  Matrix e;     // sparse part
  Matrix y;     // scaled dual variable
  Matrix dtau;  // per-image parameter increments, one column per image
  double mu = 0.0;
  int iter = 0;           // inner iterations actually run
  bool converged = false; // inner stopping tolerance reached
};

struct TraceRecord {
  bool outer_summary = false;
  int outer = 0;
  int inner = 0;
  double residual = 0.0;
  double objective = 0.0;
  double mu = 0.0;
  int rank = 0;
  int manifold_dim = -1;      // only set on meadmm outer summaries
  double max_param_change = 0.0;  // only set on outer summaries
};

using TraceSink = std::function<void(const TraceRecord&)>;

namespace detail {

struct ResolvedPenalty {
  double lambda, mu0, mu_floor, mu_cap;
};

inline ResolvedPenalty resolve_penalty(const SolverConfig& c,
                                       const Matrix& vm) {
  ResolvedPenalty r{};
  r.lambda = resolve_lambda(c, vm.rows(), vm.cols());
  const double sigma1 = singular_values(vm)(0);
  if (!(sigma1 > 0.0))
    throw std::invalid_argument("solver: observation matrix is zero");
  r.mu0 = c.mu0 > 0.0 ? c.mu0 : 1.25 / sigma1;
  r.mu_floor = c.mu_floor > 0.0 ? c.mu_floor : 1e-7 * r.mu0;
  r.mu_cap = c.mu_cap > 0.0 ? c.mu_cap : 1e7 * r.mu0;
  if (r.mu_floor > r.mu0)
    throw std::invalid_argument("solver: mu_floor must not exceed mu0");
  return r;
}

// Per-image least-squares solvers for the parameter step, with an explicit
// conditioning check.
inline std::vector<Eigen::JacobiSVD<Matrix>> jacobian_solvers(
    const std::vector<Matrix>& jacobians) {
  std::vector<Eigen::JacobiSVD<Matrix>> out;
  out.reserve(jacobians.size());
  for (std::size_t i = 0; i < jacobians.size(); ++i) {
    const Matrix& j = jacobians[i];
    if (!j.allFinite())
      throw NumericError("solver: jacobian " + std::to_string(i) +
                         " contains NaN or Inf");
    out.emplace_back(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = out.back().singularValues();
    if (!(s(0) > 0.0) || s(s.size() - 1) < 1e-10 * s(0))
      throw IllConditionedJacobianError(
          "solver: jacobian of image " + std::to_string(i) +
              " is rank deficient",
          static_cast<int>(i));
  }
  return out;
}

}  // namespace detail

/// One inexact augmented-Lagrangian pass on the linearized problem
///   min |Vr|_* + lambda |E|_1  s.t.  Vr + E = Vm + sum_i J_i dtau_i e_i^T.
/// jacobians may be empty, which pins dtau to zero and solves the plain
/// decomposition. init (when given) seeds Vr, E, Y, dtau and mu instead of
/// the cold start.
inline DecompositionState inner_admm(const Matrix& v_warped,
                                     const std::vector<Matrix>& jacobians,
                                     const SolverConfig& cfg,
                                     const TraceSink& trace = {},
                                     int outer_index = 0,
                                     const DecompositionState* init = nullptr) {
  validate(cfg);
  require_finite(v_warped, "inner_admm");
  const Eigen::Index npix = v_warped.rows();
  const Eigen::Index b = v_warped.cols();
  if (npix < 1 || b < 2)
    throw std::invalid_argument("inner_admm: need at least 2 columns");
  const bool with_warp = !jacobians.empty();
  int p = 0;
  if (with_warp) {
    if (static_cast<Eigen::Index>(jacobians.size()) != b)
      throw std::invalid_argument("inner_admm: need one jacobian per column");
    p = static_cast<int>(jacobians.front().cols());
    for (const Matrix& j : jacobians)
      if (j.rows() != npix || j.cols() != p)
        throw std::invalid_argument("inner_admm: jacobian shape mismatch");
  }
  const auto pen = detail::resolve_penalty(cfg, v_warped);
  const auto solvers =
      with_warp ? detail::jacobian_solvers(jacobians)
                : std::vector<Eigen::JacobiSVD<Matrix>>{};

  DecompositionState st;
  st.vm = v_warped;
  if (init) {
    st.vr = init->vr;
    st.e = init->e;
    st.y = init->y;
    st.dtau = init->dtau;
    st.mu = init->mu > 0.0 ? init->mu : pen.mu0;
    if (st.vr.rows() != npix || st.vr.cols() != b || st.e.rows() != npix ||
        st.e.cols() != b || st.y.rows() != npix || st.y.cols() != b)
      throw std::invalid_argument("inner_admm: init shape mismatch");
    if (st.dtau.rows() != p || st.dtau.cols() != (with_warp ? b : 0))
      st.dtau = Matrix::Zero(p, with_warp ? b : 0);
  } else {
    st.vr = Matrix::Zero(npix, b);
    st.e = Matrix::Zero(npix, b);
    // Dual ascent starts from the scaled observations, the standard
    // inexact-ALM warm start.
    const double sigma1 = singular_values(v_warped)(0);
    const double dual_scale =
        std::max(sigma1, v_warped.cwiseAbs().maxCoeff() / pen.lambda);
    st.y = v_warped / dual_scale;
    st.dtau = Matrix::Zero(p, with_warp ? b : 0);
    st.mu = pen.mu0;
  }

  const double vm_fro = v_warped.norm();
  const bool meadmm = cfg.method == Method::Meadmm;

  // Linearized observations under the current parameter increments.
  const auto linearized = [&](const Matrix& dtau) {
    Matrix out = v_warped;
    if (with_warp)
      for (Eigen::Index i = 0; i < b; ++i)
        out.col(i) += jacobians[static_cast<std::size_t>(i)] * dtau.col(i);
    return out;
  };

  Matrix vm_lin = linearized(st.dtau);
  std::optional<ManifoldModel> frozen;
  const auto project_columns = [&](const Matrix& target) {
    if (cfg.freeze_manifold_per_outer) {
      if (!frozen) frozen = build_manifold(target, cfg.manifold);
      return project_batch_with_model(target, *frozen);
    }
    return project_batch(target, cfg.manifold);
  };
  Matrix vm_proj;
  if (meadmm) vm_proj = project_columns(vm_lin);

  DecompositionState best = st;
  double best_rel = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  int stall = 0;

  int k = 0;
  for (; k < cfg.inner_max_iters; ++k) {
    const Matrix& vref = meadmm ? vm_proj : vm_lin;
    int rank = 0;
    st.vr = svt(vref + st.y / st.mu - st.e, 1.0 / st.mu, &rank);
    st.e = soft_threshold(vm_lin + st.y / st.mu - st.vr, pen.lambda / st.mu);
    if (with_warp) {
      const Matrix rhs = st.vr + st.e - v_warped - st.y / st.mu;
      for (Eigen::Index i = 0; i < b; ++i)
        st.dtau.col(i) = solvers[static_cast<std::size_t>(i)].solve(rhs.col(i));
      vm_lin = linearized(st.dtau);
    }
    const Matrix f = residual(st.vr, st.e, vm_lin);
    if (meadmm)
      vm_proj = project_columns(
          cfg.project_target == ProjectTarget::VrPlusE ? st.vr + st.e
                                                       : vm_lin);
    if (!st.vr.allFinite() || !st.e.allFinite() || !f.allFinite())
      throw DivergenceError("inner_admm: iterates are no longer finite at "
                            "inner iteration " + std::to_string(k),
                            k);
    // Dual ascent along the constraint Vm_lin - Vr - E; the svt and
    // shrinkage steps above already read Y under this sign convention.
    st.y -= st.mu * f;
    const double rel = f.norm() / vm_fro;
    if (trace) {
      TraceRecord r;
      r.outer = outer_index;
      r.inner = k;
      r.residual = rel;
      r.objective = objective(st.vr, st.e, pen.lambda);
      r.mu = st.mu;
      r.rank = rank;
      trace(r);
    }
    st.mu = cfg.mu_schedule == MuSchedule::Decay
                ? std::max(cfg.mu_decay * st.mu, pen.mu_floor)
                : std::min(cfg.mu_growth * st.mu, pen.mu_cap);
    if (rel < best_rel * (1.0 - 1e-9)) {
      best_rel = rel;
      best = st;
      best_iter = k + 1;
      stall = 0;
    } else {
      ++stall;
    }
    if (rel < cfg.inner_tol) {
      st.converged = true;
      ++k;
      break;
    }
    // The projection keeps a floor under the residual in meadmm mode and the
    // decay schedule eventually undoes progress in any mode; both cases end
    // here, keeping the best iterate seen.
    if (stall >= cfg.stall_patience) {
      best.converged = false;
      best.iter = best_iter;
      return best;
    }
  }
  st.iter = k;
  return st;
}

struct DecompositionResult {
  Matrix vr;
  Matrix e;
  TransformStack taus;
  std::vector<double> objective_trace;  // one value per outer iteration
  std::vector<int> inner_iters;         // inner iterations per outer pass
  bool converged = false;
};

/// Full alignment loop: relinearize around the current transforms, run the
/// inner solver, fold the increments into the transforms, repeat until the
/// largest per-image parameter change drops below outer_tol.
inline DecompositionResult align_and_decompose(const ImageBatch& batch,
                                               const TransformStack& initial,
                                               const SolverConfig& cfg,
                                               const TraceSink& trace = {}) {
  validate(cfg);
  validate_batch(batch);
  if (batch.height() < 8 || batch.width() < 8)
    throw std::invalid_argument(
        "align_and_decompose: images must be at least 8x8");
  if (initial.count() != batch.count())
    throw std::invalid_argument(
        "align_and_decompose: need one initial transform per image");
  if (cfg.method == Method::Meadmm && batch.count() < cfg.manifold.k + 2)
    throw std::invalid_argument(
        "align_and_decompose: meadmm needs at least k+2 images");
  const int b = batch.count();
  const double lambda =
      resolve_lambda(cfg, static_cast<Eigen::Index>(batch.height()) *
                              batch.width(),
                     b);

  DecompositionResult res;
  res.taus = initial;
  res.taus.group();  // reject mixed stacks
  std::vector<Matrix> jacobians(static_cast<std::size_t>(b));
  for (int outer = 0; outer < cfg.outer_max_iters; ++outer) {
    for (int i = 0; i < b; ++i)
      jacobians[static_cast<std::size_t>(i)] =
          warp_jacobian(batch.images[static_cast<std::size_t>(i)],
                        res.taus.per_image[static_cast<std::size_t>(i)], i);
    const Matrix v_warped = warp_normalize_batch(batch, res.taus);
    const DecompositionState st =
        inner_admm(v_warped, jacobians, cfg, trace, outer);
    res.taus = compose_update(res.taus, st.dtau);
    res.vr = st.vr;
    res.e = st.e;
    res.objective_trace.push_back(objective(st.vr, st.e, lambda));
    res.inner_iters.push_back(st.iter);
    const double max_change = st.dtau.size() ? st.dtau.cwiseAbs().maxCoeff()
                                             : 0.0;
    if (trace) {
      TraceRecord r;
      r.outer_summary = true;
      r.outer = outer;
      r.inner = st.iter;
      r.objective = res.objective_trace.back();
      r.mu = st.mu;
      r.max_param_change = max_change;
      if (cfg.method == Method::Meadmm)
        r.manifold_dim = estimate_intrinsic_dim(v_warped);
      trace(r);
    }
    if (max_change < cfg.outer_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace lrd
