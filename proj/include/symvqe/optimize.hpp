#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace symvqe {

//=============================================================================
// Objectives
//=============================================================================

/// Callable objective returning (value, std_error); the evaluation counter
/// increments exactly once per call.
class ObjectiveFunction {
 public:
  using Eval =
      std::function<std::pair<double, double>(const Eigen::VectorXd&)>;

  ObjectiveFunction(int arity, Eval fn)
      : arity_(arity), fn_(std::move(fn)) {}

  int arity() const { return arity_; }
  long n_evaluations() const { return n_evals_; }

  std::pair<double, double> evaluate(const Eigen::VectorXd& x) {
    ++n_evals_;
    return fn_(x);
  }

 private:
  int arity_;
  Eval fn_;
  long n_evals_ = 0;
};

struct Bounds {
  std::vector<std::pair<double, double>> dims;

  static Bounds uniform(int arity, double lo, double hi);
  void validate() const;  ///< lo < hi per dimension
};

//=============================================================================
// Results
//=============================================================================

struct TracePoint {
  long eval_index = 0;
  double value = 0.0;
  double std_error = 0.0;
  Eigen::VectorXd params;
};

struct OptimizerResult {
  Eigen::VectorXd best_params;
  double best_value = 0.0;
  long n_evaluations = 0;
  std::vector<TracePoint> trace;
};

/// CSV columns: eval_index, value, std_error, params...
void trace_to_csv(const OptimizerResult& result, const std::string& path);

/// Smallest eval_index whose raw value is <= threshold, or -1.
long evaluations_to_threshold(const OptimizerResult& result, double threshold);

//=============================================================================
// Drivers
//=============================================================================

/// DIviding RECTangles global search on a box: normalize to the unit cube,
/// repeatedly select potentially optimal rectangles via the convex-hull
/// criterion, trisect them along their longest sides, and evaluate the new
/// centers. Stops when the next evaluation batch would exceed the budget;
/// never evaluates outside the bounds.
OptimizerResult direct_minimize(ObjectiveFunction& f, const Bounds& bounds,
                                long budget);

/// Classic simplex reflect/expand/contract/shrink; terminates when the
/// simplex value spread drops below tol or the budget is exhausted.
OptimizerResult nelder_mead_minimize(ObjectiveFunction& f,
                                     const Eigen::VectorXd& x0, double step,
                                     long budget, double tol = 1e-10);

/// Limited-memory BFGS with two-point forward-difference gradients. Counts
/// every objective call, including gradient probes. Refuses stochastic
/// objectives (any evaluation reporting std_error > 0 throws).
OptimizerResult lbfgs_fd_minimize(ObjectiveFunction& f,
                                  const Eigen::VectorXd& x0, long budget,
                                  double grad_step = 1e-6, double tol = 1e-8);

using InnerOptimizer =
    std::function<OptimizerResult(ObjectiveFunction&, const Eigen::VectorXd&)>;

/// Run the inner optimizer from n_starts uniform-random points in the
/// bounds and keep the best outcome; evaluation counts aggregate and the
/// trace carries global evaluation indices.
OptimizerResult multistart(ObjectiveFunction& f, const Bounds& bounds,
                           int n_starts, std::uint64_t seed,
                           const InnerOptimizer& inner);

}  // namespace symvqe
