// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Cholesky>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gotd/models.hpp"
#include "gotd/qoi.hpp"
#include "gotd/scaling.hpp"

namespace gotd {

enum class ModelKind { cp, tucker };

/// Parameter-vector layouts. CP packs [vec(A^0), ..., vec(A^{d-1})];
/// Tucker packs [vec(G), vec(A^0), ..., vec(A^{d-1})], all column-major.
struct CpLayout {
  std::vector<std::size_t> dims;
  Eigen::Index rank = 0;
  std::size_t param_count() const;
};

struct TuckerLayout {
  std::vector<std::size_t> dims;
  std::vector<std::size_t> ranks;
  std::size_t param_count() const;
};

Vector flatten_cp(const KruskalModel& m);
KruskalModel unflatten_cp(const Vector& v, const CpLayout& layout);
Vector flatten_tucker(const TuckerModel& m);
TuckerModel unflatten_tucker(const Vector& v, const TuckerLayout& layout);

/// Result of the equal-contribution weight rule: alpha[0] balances the
/// tensor term, alpha[q] each retained QoI term, so the objective at the
/// initial model equals 1. QoIs whose residual at the initial model is
/// below 1e-30 are dropped (already preserved) and reported by name.
struct WeightChoice {
  std::vector<double> alpha;         // Q_kept + 1
  std::vector<std::size_t> kept;     // indices into the input QoI list
  std::vector<std::string> dropped;  // names of dropped QoIs
  double fro_at_init = 0.0;
  std::vector<double> qoi_sse_at_init;  // for kept QoIs
};

WeightChoice choose_weights(const DenseTensor& x_scaled,
                            const ScalingInfo& scaling,
                            const DenseTensor& m0_recon_scaled,
                            const std::vector<QoIDefinition>& qois);

/// The assembled penalty-weighted objective: scaled data, scaling map,
/// retained QoIs with their weights, model layout, and the cached QoI target
/// values evaluated on the unscaled data.
struct GoalProblem {
  DenseTensor x_scaled;
  ScalingInfo scaling;
  std::vector<QoIDefinition> qois;
  std::vector<double> alpha;  // size qois.size() + 1
  ModelKind kind = ModelKind::cp;
  CpLayout cp_layout;
  TuckerLayout tucker_layout;
  std::vector<std::vector<double>> targets;  // per QoI, per time_set entry
  std::vector<std::string> dropped_qois;

  std::size_t qoi_count() const { return qois.size(); }
  std::size_t param_count() const;
  void validate() const;
};

/// Builds the problem around an initial model: computes QoI targets from the
/// unscaled data, applies the weight rule at m0, and drops preserved QoIs.
GoalProblem make_goal_problem(DenseTensor x_scaled, ScalingInfo scaling,
                              std::vector<QoIDefinition> qois,
                              const KruskalModel& m0);
GoalProblem make_goal_problem(DenseTensor x_scaled, ScalingInfo scaling,
                              std::vector<QoIDefinition> qois,
                              const TuckerModel& m0);

/// Same assembly with caller-supplied weights (alpha.size() == Q+1).
GoalProblem make_goal_problem_with_weights(DenseTensor x_scaled,
                                           ScalingInfo scaling,
                                           std::vector<QoIDefinition> qois,
                                           ModelKind kind, CpLayout cp_layout,
                                           TuckerLayout tucker_layout,
                                           std::vector<double> alpha);

/// Block preconditioner from the Frobenius-term Gauss-Newton diagonal.
/// CP: per-mode Cholesky factors of the Hadamard-of-Grams matrices.
/// Tucker: the explicit diagonal, clamped below at 1e-14.
struct Preconditioner {
  ModelKind kind = ModelKind::cp;
  std::vector<std::size_t> dims;
  Eigen::Index rank = 0;
  std::vector<Eigen::LLT<Matrix>> mode_chol;  // CP
  Vector diag;                                // Tucker
  Vector apply(const Vector& r) const;
};

/// Objective, gradient, Gauss-Newton Hessian-vector products, and
/// preconditioner for a GoalProblem, with an internal cache of the latest
/// evaluation point (instances are not thread-safe; the functions are pure
/// with respect to the problem).
class GoalEvaluator {
 public:
  explicit GoalEvaluator(const GoalProblem& problem);

  double objective(const Vector& v);
  Vector gradient(const Vector& v);
  Vector gn_hess_vec(const Vector& v, const Vector& w);
  Preconditioner build_preconditioner(const Vector& v);

  /// (Frobenius term, per-QoI residual sums) at v, unweighted.
  std::pair<double, std::vector<double>> term_breakdown(const Vector& v);

  /// QoI values g_q(S(M_t)) over each QoI's time set at v.
  std::vector<std::vector<double>> qoi_values(const Vector& v);

  const GoalProblem& problem() const { return *problem_; }

 private:
  struct State {
    Vector v;
    KruskalModel cp;
    TuckerModel tucker;
    DenseTensor recon_scaled;
    DenseTensor recon_unscaled;
    double fro = 0.0;                            // ||X~ - M~||_F^2
    std::vector<std::vector<double>> values;     // g_q(S(M~_t))
    std::vector<std::vector<double>> residuals;  // target - value
    bool derivs_ready = false;
    std::vector<std::vector<DenseTensor>> z;  // chain-scaled, slice-shaped
    std::vector<Matrix> grams;                // factor Gram matrices
  };

  const State& state_at(const Vector& v, bool need_derivs);
  Vector project(const DenseTensor& e, const State& s) const;

  const GoalProblem* problem_;
  State cache_;
  bool cache_valid_ = false;
};

}  // namespace gotd
