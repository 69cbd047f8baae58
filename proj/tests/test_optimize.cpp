#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "symvqe/optimize.hpp"

using namespace symvqe;

namespace {

ObjectiveFunction noiseless(int arity,
                            std::function<double(const Eigen::VectorXd&)> f) {
  return ObjectiveFunction(arity, [f](const Eigen::VectorXd& x) {
    return std::make_pair(f(x), 0.0);
  });
}

double branin(const Eigen::VectorXd& v) {
  const double x = v[0], y = v[1];
  const double a = 1.0, b = 5.1 / (4 * M_PI * M_PI), c = 5.0 / M_PI;
  const double r = 6.0, s = 10.0, t = 1.0 / (8 * M_PI);
  const double inner = y - b * x * x + c * x - r;
  return a * inner * inner + s * (1 - t) * std::cos(x) + s;
}

/// Brute-force grid oracle: coarse scan then a 1e-3-resolution local grid.
double branin_oracle_min() {
  double best = 1e300, bx = 0, by = 0;
  for (double x = -5; x <= 10; x += 0.01)
    for (double y = 0; y <= 15; y += 0.01) {
      Eigen::Vector2d v(x, y);
      const double f = branin(v);
      if (f < best) {
        best = f;
        bx = x;
        by = y;
      }
    }
  for (double x = bx - 0.02; x <= bx + 0.02; x += 0.001)
    for (double y = by - 0.02; y <= by + 0.02; y += 0.001) {
      Eigen::Vector2d v(x, y);
      best = std::min(best, branin(v));
    }
  return best;
}

}  // namespace

TEST_CASE("objective counter") {
  auto f = noiseless(1, [](const Eigen::VectorXd& x) { return x[0] * x[0]; });
  CHECK(f.n_evaluations() == 0);
  f.evaluate(Eigen::VectorXd::Zero(1));
  f.evaluate(Eigen::VectorXd::Ones(1));
  CHECK(f.n_evaluations() == 2);
}

TEST_CASE("direct on a separable quadratic") {
  auto f = noiseless(2, [](const Eigen::VectorXd& x) {
    return (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
  });
  const OptimizerResult r =
      direct_minimize(f, Bounds::uniform(2, 0.0, 1.0), 100);
  CHECK(r.n_evaluations <= 100);
  CHECK(std::abs(r.best_params[0] - 0.5) < 0.02);
  CHECK(std::abs(r.best_params[1] - 0.5) < 0.02);
}

TEST_CASE("direct budget handling") {
  auto f = noiseless(2, [](const Eigen::VectorXd& x) { return x.sum(); });
  const OptimizerResult r = direct_minimize(f, Bounds::uniform(2, 0, 1), 1);
  CHECK(r.n_evaluations == 1);
  CHECK(r.trace.size() == 1);
  CHECK(r.best_value == doctest::Approx(1.0));  // center of the unit square
}

TEST_CASE("direct finds the branin basin within budget") {
  const double oracle = branin_oracle_min();
  CHECK(oracle == doctest::Approx(0.397887).epsilon(1e-3));

  Bounds box;
  box.dims = {{-5.0, 10.0}, {0.0, 15.0}};
  auto f = noiseless(2, branin);
  const OptimizerResult r = direct_minimize(f, box, 300);
  CHECK(r.n_evaluations <= 300);
  CHECK(r.best_value - oracle < 0.05);
}

TEST_CASE("direct running minimum is non-increasing") {
  Bounds box;
  box.dims = {{-2.0, 3.0}, {-1.0, 4.0}};
  auto f = noiseless(2, [](const Eigen::VectorXd& x) {
    return std::sin(3 * x[0]) + x[1] * x[1] * 0.2 + 0.1 * x[0];
  });
  const OptimizerResult r = direct_minimize(f, box, 200);
  double running = r.trace.front().value;
  for (const auto& tp : r.trace) {
    running = std::min(running, tp.value);
    CHECK(running <= tp.value + 1e-15);
  }
  CHECK(r.best_value == doctest::Approx(running));
  CHECK(r.n_evaluations == static_cast<long>(r.trace.size()));
}

TEST_CASE("nelder-mead basics") {
  auto f = noiseless(1, [](const Eigen::VectorXd& x) {
    return (x[0] - 2.0) * (x[0] - 2.0);
  });
  const OptimizerResult r =
      nelder_mead_minimize(f, Eigen::VectorXd::Zero(1), 0.5, 200);
  CHECK(std::abs(r.best_params[0] - 2.0) < 1e-4);

  auto g = noiseless(3, [](const Eigen::VectorXd& x) { return x.squaredNorm(); });
  const OptimizerResult tiny =
      nelder_mead_minimize(g, Eigen::VectorXd::Ones(3), 0.1, 4);
  CHECK(tiny.n_evaluations == 4);  // initial simplex only
  CHECK(tiny.best_value == doctest::Approx(3.0));  // best vertex is x0 itself

  CHECK_THROWS(nelder_mead_minimize(g, Eigen::VectorXd::Ones(3), 0.1, 3));
}

TEST_CASE("nelder-mead on rosenbrock") {
  auto rosen = noiseless(3, [](const Eigen::VectorXd& x) {
    double v = 0;
    for (int i = 0; i < 2; ++i) {
      v += 100 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1 - x[i], 2);
    }
    return v;
  });
  Eigen::VectorXd x0(3);
  x0 << -1.2, 1.0, 0.8;
  const OptimizerResult r = nelder_mead_minimize(rosen, x0, 0.5, 2000, 1e-14);
  CHECK(r.n_evaluations <= 2000);
  CHECK(r.best_value < 1e-2);
}

TEST_CASE("lbfgs converges and counts gradient probes") {
  auto f = noiseless(3, [](const Eigen::VectorXd& x) {
    return (x[0] - 1) * (x[0] - 1) + 2 * (x[1] + 0.5) * (x[1] + 0.5) +
           0.5 * x[2] * x[2];
  });
  const OptimizerResult r =
      lbfgs_fd_minimize(f, Eigen::VectorXd::Zero(3), 500);
  CHECK(r.best_value < 1e-10);
  CHECK(std::abs(r.best_params[0] - 1.0) < 1e-4);
  CHECK(r.n_evaluations > 4);  // more than one gradient's worth
  CHECK(r.n_evaluations <= 500);
}

TEST_CASE("lbfgs refuses stochastic objectives") {
  ObjectiveFunction noisy(2, [](const Eigen::VectorXd& x) {
    return std::make_pair(x.squaredNorm(), 0.1);
  });
  CHECK_THROWS_AS(lbfgs_fd_minimize(noisy, Eigen::VectorXd::Ones(2), 100),
                  std::invalid_argument);
}

TEST_CASE("multistart escapes a local basin") {
  // Global minimum near x = -1, local trap near x = +1.
  auto dwell = [](const Eigen::VectorXd& x) {
    const double v = x[0];
    return (v * v - 1) * (v * v - 1) + 0.3 * v;
  };
  // Grid oracle for the global value.
  double oracle = 1e300;
  for (double v = -2; v <= 2; v += 1e-5) {
    Eigen::VectorXd x(1);
    x << v;
    oracle = std::min(oracle, dwell(x));
  }

  auto f = noiseless(1, dwell);
  const Bounds box = Bounds::uniform(1, -2.0, 2.0);
  const OptimizerResult r = multistart(
      f, box, 8, 42, [](ObjectiveFunction& obj, const Eigen::VectorXd& x0) {
        return nelder_mead_minimize(obj, x0, 0.4, 60);
      });
  CHECK(r.best_value < oracle + 1e-3);
  CHECK(r.n_evaluations == static_cast<long>(r.trace.size()));
  CHECK(r.n_evaluations <= 8 * 60);
}

TEST_CASE("determinism of seeded multistart") {
  auto make = []() {
    return noiseless(2, [](const Eigen::VectorXd& x) {
      return std::sin(x[0]) * std::cos(x[1]) + 0.05 * x.squaredNorm();
    });
  };
  auto run = [&](std::uint64_t seed) {
    auto f = make();
    return multistart(f, Bounds::uniform(2, -3, 3), 4, seed,
                      [](ObjectiveFunction& obj, const Eigen::VectorXd& x0) {
                        return nelder_mead_minimize(obj, x0, 0.3, 80);
                      });
  };
  const OptimizerResult a = run(7), b = run(7), c = run(8);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].value == b.trace[i].value);
    CHECK(a.trace[i].eval_index == b.trace[i].eval_index);
  }
  CHECK(a.best_value == b.best_value);
  CHECK(c.trace.size() > 0);  // different seed still runs
}

TEST_CASE("trace export") {
  auto f = noiseless(2, [](const Eigen::VectorXd& x) { return x.squaredNorm(); });
  const OptimizerResult r = direct_minimize(f, Bounds::uniform(2, -1, 1), 15);
  trace_to_csv(r, "/tmp/symvqe_trace_test.csv");
  std::ifstream in("/tmp/symvqe_trace_test.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "eval_index,value,std_error,p0,p1");
  long lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == r.n_evaluations);
}
