#include "symvqe/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <random>
#include <stdexcept>

#include "symvqe/measure.hpp"  // derive_seed

namespace symvqe {

Bounds Bounds::uniform(int arity, double lo, double hi) {
  Bounds b;
  b.dims.assign(arity, {lo, hi});
  b.validate();
  return b;
}

void Bounds::validate() const {
  for (const auto& [lo, hi] : dims)
    if (!(lo < hi)) throw std::invalid_argument("bounds need lo < hi");
}

void trace_to_csv(const OptimizerResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  out << "eval_index,value,std_error";
  const int arity =
      result.trace.empty() ? 0 : static_cast<int>(result.trace[0].params.size());
  for (int i = 0; i < arity; ++i) out << ",p" << i;
  out << "\n";
  char buf[64];
  for (const auto& tp : result.trace) {
    out << tp.eval_index;
    std::snprintf(buf, sizeof buf, ",%.12g,%.12g", tp.value, tp.std_error);
    out << buf;
    for (int i = 0; i < arity; ++i) {
      std::snprintf(buf, sizeof buf, ",%.12g", tp.params[i]);
      out << buf;
    }
    out << "\n";
  }
}

long evaluations_to_threshold(const OptimizerResult& result,
                              double threshold) {
  for (const auto& tp : result.trace)
    if (tp.value <= threshold) return tp.eval_index;
  return -1;
}

//=============================================================================
// Shared recording machinery
//=============================================================================

namespace {

struct BudgetExhausted {};

/// Wraps an objective with budget enforcement, tracing, and best tracking.
class Recorder {
 public:
  Recorder(ObjectiveFunction& f, long budget, OptimizerResult& result)
      : f_(f), budget_(budget), result_(result) {}

  double operator()(const Eigen::VectorXd& x) {
    if (result_.n_evaluations >= budget_) throw BudgetExhausted{};
    const auto [value, std_error] = f_.evaluate(x);
    ++result_.n_evaluations;
    result_.trace.push_back(
        {result_.n_evaluations, value, std_error, x});
    if (result_.trace.size() == 1 || value < result_.best_value) {
      result_.best_value = value;
      result_.best_params = x;
    }
    last_std_error = std_error;
    return value;
  }

  long remaining() const { return budget_ - result_.n_evaluations; }
  double last_std_error = 0.0;

 private:
  ObjectiveFunction& f_;
  long budget_;
  OptimizerResult& result_;
};

}  // namespace

//=============================================================================
// DIRECT
//=============================================================================

namespace {

struct DirectRect {
  Eigen::VectorXd center;  // unit-cube coordinates
  std::vector<int> levels; // trisection count per dimension
  double value = 0.0;

  double half_diagonal() const {
    double s = 0.0;
    for (const int l : levels) s += std::pow(9.0, -l);
    return 0.5 * std::sqrt(s);
  }
};

constexpr double kDirectEps = 1e-4;

std::vector<std::size_t> potentially_optimal(
    const std::vector<DirectRect>& rects) {
  const std::size_t n = rects.size();
  std::vector<double> sizes(n);
  double fmin = rects[0].value;
  for (std::size_t i = 0; i < n; ++i) {
    sizes[i] = rects[i].half_diagonal();
    fmin = std::min(fmin, rects[i].value);
  }

  // Distinct size classes, ascending, each with its best value.
  std::vector<std::pair<double, double>> classes;  // (size, best f)
  {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return sizes[a] < sizes[b];
    });
    for (const std::size_t i : order) {
      if (!classes.empty() &&
          std::abs(classes.back().first - sizes[i]) < 1e-12) {
        classes.back().second = std::min(classes.back().second,
                                         rects[i].value);
      } else {
        classes.emplace_back(sizes[i], rects[i].value);
      }
    }
  }

  // Lower-right convex hull from the class holding the global minimum out
  // to the largest size.
  std::size_t start = 0;
  for (std::size_t k = 0; k < classes.size(); ++k)
    if (classes[k].second <= fmin + 1e-13) {
      start = k;
      break;
    }
  std::vector<std::size_t> hull;
  for (std::size_t k = start; k < classes.size(); ++k) {
    while (hull.size() >= 2) {
      const auto& a = classes[hull[hull.size() - 2]];
      const auto& b = classes[hull[hull.size() - 1]];
      const auto& c = classes[k];
      // Drop b when it lies above segment a-c (negative cross product of
      // a->b with a->c); collinear points stay, matching the tie rule.
      const double cross = (b.first - a.first) * (c.second - a.second) -
                           (c.first - a.first) * (b.second - a.second);
      if (cross >= 0) break;
      hull.pop_back();
    }
    hull.push_back(k);
  }

  // Epsilon test: the hull point must undercut fmin - eps|fmin| with the
  // slope toward the next-larger hull point (always true for the largest).
  std::vector<char> accepted_class(classes.size(), 0);
  for (std::size_t h = 0; h < hull.size(); ++h) {
    const auto& [d, fv] = classes[hull[h]];
    if (h + 1 == hull.size()) {
      accepted_class[hull[h]] = 1;
      continue;
    }
    const auto& [dn, fn] = classes[hull[h + 1]];
    const double slope = (fn - fv) / (dn - d);
    if (fv - slope * d <= fmin - kDirectEps * std::abs(fmin) + 1e-13)
      accepted_class[hull[h]] = 1;
  }

  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (!accepted_class[k]) continue;
      if (std::abs(sizes[i] - classes[k].first) < 1e-12 &&
          rects[i].value <= classes[k].second + 1e-13)
        selected.push_back(i);
    }
  }
  return selected;
}

}  // namespace

OptimizerResult direct_minimize(ObjectiveFunction& f, const Bounds& bounds,
                                long budget) {
  bounds.validate();
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  const int dim = static_cast<int>(bounds.dims.size());
  if (f.arity() != dim)
    throw std::invalid_argument("bounds/objective arity mismatch");

  OptimizerResult result;
  Recorder eval(f, budget, result);
  auto denormalize = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i)
      x[i] = bounds.dims[i].first +
             u[i] * (bounds.dims[i].second - bounds.dims[i].first);
    return x;
  };

  std::vector<DirectRect> rects;
  try {
    DirectRect root;
    root.center = Eigen::VectorXd::Constant(dim, 0.5);
    root.levels.assign(dim, 0);
    root.value = eval(denormalize(root.center));
    rects.push_back(std::move(root));

    while (true) {
      const auto selected = potentially_optimal(rects);
      if (selected.empty()) break;
      bool divided_any = false;
      for (const std::size_t idx : selected) {
        // Longest sides of this rectangle.
        const int lmin =
            *std::min_element(rects[idx].levels.begin(),
                              rects[idx].levels.end());
        std::vector<int> dims_to_split;
        for (int i = 0; i < dim; ++i)
          if (rects[idx].levels[i] == lmin) dims_to_split.push_back(i);
        const double delta = std::pow(3.0, -(lmin + 1));
        if (eval.remaining() <
            static_cast<long>(2 * dims_to_split.size()))
          throw BudgetExhausted{};

        // Sample both neighbours along every longest side.
        std::vector<std::pair<double, int>> ranked;  // (min f, dim)
        std::vector<std::pair<double, double>> values(dim);
        for (const int i : dims_to_split) {
          Eigen::VectorXd up = rects[idx].center,
                          down = rects[idx].center;
          up[i] += delta;
          down[i] -= delta;
          const double fu = eval(denormalize(up));
          const double fd = eval(denormalize(down));
          values[i] = {fu, fd};
          ranked.emplace_back(std::min(fu, fd), i);
        }
        std::sort(ranked.begin(), ranked.end());

        // Split best dimension first; children inherit current levels.
        for (const auto& [w, i] : ranked) {
          rects[idx].levels[i] += 1;
          DirectRect up{rects[idx].center, rects[idx].levels, values[i].first};
          up.center[i] += delta;
          DirectRect down{rects[idx].center, rects[idx].levels,
                          values[i].second};
          down.center[i] -= delta;
          rects.push_back(std::move(up));
          rects.push_back(std::move(down));
        }
        divided_any = true;
      }
      if (!divided_any) break;
    }
  } catch (const BudgetExhausted&) {
  }
  return result;
}

//=============================================================================
// Nelder-Mead
//=============================================================================

OptimizerResult nelder_mead_minimize(ObjectiveFunction& f,
                                     const Eigen::VectorXd& x0, double step,
                                     long budget, double tol) {
  const int dim = static_cast<int>(x0.size());
  if (f.arity() != dim) throw std::invalid_argument("arity mismatch");
  if (budget < dim + 1)
    throw std::invalid_argument("budget must cover the initial simplex");

  OptimizerResult result;
  Recorder eval(f, budget, result);
  constexpr double kAlpha = 1.0, kGamma = 2.0, kRho = 0.5, kSigma = 0.5;

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  try {
    xs.push_back(x0);
    fs.push_back(eval(x0));
    for (int i = 0; i < dim; ++i) {
      Eigen::VectorXd xi = x0;
      xi[i] += step;
      xs.push_back(xi);
      fs.push_back(eval(xi));
    }

    while (true) {
      std::vector<int> order(dim + 1);
      for (int i = 0; i <= dim; ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return fs[a] < fs[b]; });
      std::vector<Eigen::VectorXd> xs2;
      std::vector<double> fs2;
      for (const int i : order) {
        xs2.push_back(xs[i]);
        fs2.push_back(fs[i]);
      }
      xs = std::move(xs2);
      fs = std::move(fs2);
      if (fs[dim] - fs[0] < tol) break;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
      for (int i = 0; i < dim; ++i) centroid += xs[i];
      centroid /= dim;

      const Eigen::VectorXd xr = centroid + kAlpha * (centroid - xs[dim]);
      const double fr = eval(xr);
      if (fr < fs[0]) {
        const Eigen::VectorXd xe = centroid + kGamma * (xr - centroid);
        const double fe = eval(xe);
        if (fe < fr) {
          xs[dim] = xe;
          fs[dim] = fe;
        } else {
          xs[dim] = xr;
          fs[dim] = fr;
        }
      } else if (fr < fs[dim - 1]) {
        xs[dim] = xr;
        fs[dim] = fr;
      } else {
        const bool outside = fr < fs[dim];
        const Eigen::VectorXd base = outside ? xr : xs[dim];
        const Eigen::VectorXd xc = centroid + kRho * (base - centroid);
        const double fc = eval(xc);
        if (fc < std::min(fr, fs[dim])) {
          xs[dim] = xc;
          fs[dim] = fc;
        } else {
          for (int i = 1; i <= dim; ++i) {
            xs[i] = xs[0] + kSigma * (xs[i] - xs[0]);
            fs[i] = eval(xs[i]);
          }
        }
      }
    }
  } catch (const BudgetExhausted&) {
  }
  return result;
}

//=============================================================================
// L-BFGS with finite-difference gradients
//=============================================================================

OptimizerResult lbfgs_fd_minimize(ObjectiveFunction& f,
                                  const Eigen::VectorXd& x0, long budget,
                                  double grad_step, double tol) {
  const int dim = static_cast<int>(x0.size());
  if (f.arity() != dim) throw std::invalid_argument("arity mismatch");
  if (budget < dim + 1)
    throw std::invalid_argument("budget must cover one gradient");

  OptimizerResult result;
  Recorder eval(f, budget, result);
  auto strict = [&](const Eigen::VectorXd& x) {
    const double v = eval(x);
    if (eval.last_std_error > 0)
      throw std::invalid_argument(
          "lbfgs_fd_minimize requires a noiseless objective");
    return v;
  };

  const int history = 10;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  try {
    Eigen::VectorXd x = x0;
    double fx = strict(x);
    Eigen::VectorXd grad(dim);
    auto gradient = [&](const Eigen::VectorXd& at, double fat) {
      Eigen::VectorXd g(dim);
      for (int i = 0; i < dim; ++i) {
        Eigen::VectorXd xp = at;
        xp[i] += grad_step;
        g[i] = (strict(xp) - fat) / grad_step;
      }
      return g;
    };
    grad = gradient(x, fx);

    for (int iter = 0; iter < 10000; ++iter) {
      if (grad.lpNorm<Eigen::Infinity>() < tol) break;

      // Two-loop recursion.
      Eigen::VectorXd q = grad;
      std::vector<double> alphas(s_hist.size());
      for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
        alphas[i] = rho_hist[i] * s_hist[i].dot(q);
        q -= alphas[i] * y_hist[i];
      }
      if (!s_hist.empty()) {
        const double gamma = s_hist.back().dot(y_hist.back()) /
                             y_hist.back().squaredNorm();
        q *= gamma;
      }
      for (std::size_t i = 0; i < s_hist.size(); ++i) {
        const double beta = rho_hist[i] * y_hist[i].dot(q);
        q += (alphas[i] - beta) * s_hist[i];
      }
      Eigen::VectorXd direction = -q;
      if (direction.dot(grad) >= 0) direction = -grad;

      // Backtracking Armijo line search.
      double alpha = 1.0;
      const double slope = direction.dot(grad);
      double fnew = fx;
      Eigen::VectorXd xnew = x;
      bool accepted = false;
      for (int ls = 0; ls < 30; ++ls) {
        xnew = x + alpha * direction;
        fnew = strict(xnew);
        if (fnew <= fx + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;

      const Eigen::VectorXd gnew = gradient(xnew, fnew);
      const Eigen::VectorXd s = xnew - x, y = gnew - grad;
      const double sy = s.dot(y);
      if (sy > 1e-12) {
        s_hist.push_back(s);
        y_hist.push_back(y);
        rho_hist.push_back(1.0 / sy);
        if (static_cast<int>(s_hist.size()) > history) {
          s_hist.pop_front();
          y_hist.pop_front();
          rho_hist.pop_front();
        }
      }
      x = xnew;
      fx = fnew;
      grad = gnew;
    }
  } catch (const BudgetExhausted&) {
  }
  return result;
}

//=============================================================================
// Multistart
//=============================================================================

OptimizerResult multistart(ObjectiveFunction& f, const Bounds& bounds,
                           int n_starts, std::uint64_t seed,
                           const InnerOptimizer& inner) {
  if (n_starts < 1) throw std::invalid_argument("n_starts must be >= 1");
  bounds.validate();
  const int dim = static_cast<int>(bounds.dims.size());

  OptimizerResult best;
  long total_evals = 0;
  std::vector<TracePoint> full_trace;
  for (int start = 0; start < n_starts; ++start) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(start)));
    Eigen::VectorXd x0(dim);
    for (int i = 0; i < dim; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      x0[i] = bounds.dims[i].first +
              u * (bounds.dims[i].second - bounds.dims[i].first);
    }
    OptimizerResult r = inner(f, x0);
    for (auto& tp : r.trace) {
      tp.eval_index += total_evals;
      full_trace.push_back(tp);
    }
    total_evals += r.n_evaluations;
    if (start == 0 || r.best_value < best.best_value) {
      best.best_value = r.best_value;
      best.best_params = r.best_params;
    }
  }
  best.n_evaluations = total_evals;
  best.trace = std::move(full_trace);
  return best;
}

}  // namespace symvqe
