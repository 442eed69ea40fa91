#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "paramflux/error.hpp"
#include "paramflux/registry.hpp"
#include "paramflux/sparsereg.hpp"

using namespace paramflux;
using Catch::Approx;

namespace {

double l1(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

double residual(const Eigen::MatrixXd& D, std::span<const double> p, const std::vector<double>& w) {
  const Eigen::VectorXd r =
      Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())) -
      D * Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return r.norm();
}

Eigen::MatrixXd random_design(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd D(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) D(i, j) = n01(rng);
  }
  return D;
}

}  // namespace

TEST_CASE("uniform partition", "[sparsereg]") {
  const auto b = uniform_partition(100);
  REQUIRE(b.size() == 17);
  CHECK(b.front() == 0);
  CHECK(b.back() == 100);
  for (std::size_t k = 0; k < 16; ++k) CHECK(b[k + 1] - b[k] == (k < 4 ? 7u : 6u));
  CHECK(uniform_partition(12).size() == 3);
  CHECK_THROWS_AS(uniform_partition(11), InvalidArgument);
}

TEST_CASE("partition sizes differ by at most one", "[sparsereg][property]") {
  for (std::size_t n = 12; n < 400; ++n) {
    const auto b = uniform_partition(n);
    CHECK(b.size() - 1 == n / 6);
    std::size_t lo = n, hi = 0;
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
      lo = std::min(lo, b[k + 1] - b[k]);
      hi = std::max(hi, b[k + 1] - b[k]);
      if (k > 0) CHECK(b[k + 1] - b[k] <= b[k] - b[k - 1]);
    }
    CHECK(hi - lo <= 1);
    CHECK(lo >= 6);
  }
}

TEST_CASE("sampled values of a linear parameter sit at the interval midtimes", "[sparsereg]") {
  const auto model = ModelSpec::ode("drift", {"x"}, {"p"}, {"p"});
  const auto tgrid = linspace(0.0, 5.0, 120);
  SparseFit identity;
  identity.atoms = {Atom{AtomFamily::Power, {1.0}, {{0.1, 3.0}}}};
  identity.weights = {1.0};
  const auto truth = ParamSchedule::continuous(0.0, 5.0, {identity});
  const auto data = simulate(model, truth, std::vector<double>{0.0}, tgrid, {Method::Rk4, 20});
  FitConfig cfg;
  cfg.integrator = {Method::Rk4, 4};
  const auto s = sample_parameters(model, data, cfg);
  REQUIRE(s.midtimes.size() == 20);
  for (std::size_t k = 0; k < s.midtimes.size(); ++k) {
    INFO("interval " << k);
    CHECK(std::abs(s.values[k][0] - s.midtimes[k]) <= 0.05);
  }
}

TEST_CASE("dictionary evaluation examples", "[sparsereg]") {
  const std::vector<double> third{1.0 / 3.0};
  Atom sine{AtomFamily::Sinusoid, {3.0, -1.0}, {{0.5, 7.0}, {-4.0, 4.0}}};
  CHECK(eval_dictionary({sine}, third)(0, 0) == Approx(0.0).margin(1e-15));

  const std::vector<double> t{0.0, 0.5, 1.0};
  Atom one{AtomFamily::Constant, {}, {}};
  const auto c = eval_dictionary({one}, t);
  CHECK(c.col(0) == Eigen::Vector3d::Ones());

  Atom power{AtomFamily::Power, {1.0}, {{0.1, 3.0}}};
  const auto p = eval_dictionary({power}, t);
  CHECK(p(0, 0) == 0.0);
  CHECK(p(1, 0) == 0.5);
  CHECK(p(2, 0) == 1.0);

  Atom wild{AtomFamily::StretchedExp, {800.0, 1.0}, {{0.0, 1000.0}, {0.2, 2.0}}};
  try {
    eval_dictionary({one, wild}, t);
    FAIL("expected non_finite_atom");
  } catch (const Error& e) {
    CHECK(e.kind() == "non_finite_atom");
  }
  CHECK_THROWS_AS(eval_dictionary({}, t), InvalidArgument);
}

TEST_CASE("soft threshold closed form", "[sparsereg][property]") {
  CHECK(soft_threshold(1.0, 0.3) == Approx(0.7));
  CHECK(soft_threshold(-1.0, 0.3) == Approx(-0.7));
  CHECK(soft_threshold(0.2, 0.3) == 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng), lam = std::abs(u(rng));
    const double expected = (x > 0 ? 1.0 : -1.0) * std::max(std::abs(x) - lam, 0.0);
    CHECK(soft_threshold(x, lam) == Approx(expected).margin(1e-15));
  }
}

TEST_CASE("lasso on the identity design soft-thresholds each entry", "[sparsereg]") {
  const std::vector<double> p{1.5, -0.2, 0.05, -3.0, 0.7};
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
  const auto w = lasso_weights(I, p, 0.3);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(w[i] == Approx(soft_threshold(p[i], 0.3)).margin(1e-12));
}

TEST_CASE("lasso with zero penalty is least squares", "[sparsereg]") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd D = random_design(rng, 30, 4);
    std::vector<double> p(30);
    for (auto& v : p) v = n01(rng);
    const Eigen::Map<const Eigen::VectorXd> pv(p.data(), 30);
    const Eigen::VectorXd ls = (D.transpose() * D).ldlt().solve(D.transpose() * pv);
    const auto w = lasso_weights(D, p, 0.0);
    for (int j = 0; j < 4; ++j) CHECK(w[static_cast<std::size_t>(j)] == Approx(ls(j)).margin(1e-6));
  }
}

TEST_CASE("lasso rejects an all-zero column", "[sparsereg]") {
  Eigen::MatrixXd D = Eigen::MatrixXd::Ones(4, 2);
  D.col(1).setZero();
  const std::vector<double> p{1, 2, 3, 4};
  try {
    lasso_weights(D, p, 0.1);
    FAIL("expected zero_column");
  } catch (const Error& e) {
    CHECK(e.kind() == "zero_column");
  }
}

TEST_CASE("lasso path is monotone in the penalty", "[sparsereg][property]") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd D = random_design(rng, 25, 6);
    std::vector<double> p(25);
    for (auto& v : p) v = 3.0 * n01(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double lam : {0.0, 0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0}) {
      const double norm = l1(lasso_weights(D, p, lam));
      CHECK(norm <= prev + 1e-7);
      prev = norm;
    }
  }
}

TEST_CASE("sparse fit of a constant keeps only the constant atom", "[sparsereg]") {
  const auto t = linspace(0.1, 5.0, 40);
  const std::vector<double> p(t.size(), 5.0);
  SparseConfig cfg;
  cfg.starts = 4;
  const auto fit = sparse_fit(t, p, default_dictionary(), cfg);
  std::size_t constant = fit.atoms.size();
  for (std::size_t i = 0; i < fit.atoms.size(); ++i) {
    if (fit.atoms[i].family == AtomFamily::Constant) constant = i;
  }
  REQUIRE(constant < fit.atoms.size());
  CHECK(fit.weights[constant] == Approx(5.0).margin(1e-3));
  for (std::size_t i = 0; i < fit.atoms.size(); ++i) {
    if (i != constant) CHECK(std::abs(fit.weights[i]) < fit.prune_threshold);
  }
  CHECK(fit.active_count() == 1);
}

TEST_CASE("sparse fit of a ramp recovers the power atom", "[sparsereg]") {
  const auto t = linspace(0.1, 4.0, 30);
  std::vector<double> p;
  for (double v : t) p.push_back(2.0 * v);
  const std::vector<Atom> atoms{Atom::at_midpoint(AtomFamily::Power, {{0.1, 3.0}}),
                                Atom::at_midpoint(AtomFamily::Constant, {})};
  SparseConfig cfg;
  cfg.lambda = 1e-4;
  const auto fit = sparse_fit(t, p, atoms, cfg);
  CHECK(fit.atoms[0].theta[0] == Approx(1.0).margin(0.05));
  CHECK(fit.weights[0] == Approx(2.0).margin(0.05));
  CHECK(std::abs(fit.weights[1]) <= 0.05);
}

TEST_CASE("alternation never increases the objective", "[sparsereg][property]") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n01;
  const auto t = linspace(0.0, 6.0, 32);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<double> p;
    for (double v : t) p.push_back(1.3 * std::sin(2.0 * v + 0.4) + 0.2 * v + 0.1 * n01(rng));
    SparseConfig cfg;
    cfg.starts = 1;
    const auto fit = sparse_fit(t, p, default_dictionary(), cfg);
    REQUIRE(!fit.objective_history.empty());
    for (std::size_t k = 1; k < fit.objective_history.size(); ++k) {
      CHECK(fit.objective_history[k] <= fit.objective_history[k - 1]);
    }
  }
}

TEST_CASE("sparse residual beats the best single atom", "[sparsereg][property]") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto t = linspace(0.05, 6.0, 36);
  for (int trial = 0; trial < 5; ++trial) {
    const double amp = 0.5 + u(rng), omega = 1.0 + 3.0 * u(rng), offset = u(rng);
    std::vector<double> p;
    for (double v : t) p.push_back(amp * std::sin(omega * v - 1.0) + offset);
    SparseConfig cfg;
    cfg.starts = 4;
    const auto atoms = default_dictionary();
    const auto fit = sparse_fit(t, p, atoms, cfg);
    const Eigen::MatrixXd D = eval_dictionary(fit.atoms, t);
    CHECK(fit.residual == Approx(residual(D, p, fit.weights)).margin(1e-9));
    // oracle: each atom alone at its starting theta with the least-squares weight
    const Eigen::MatrixXd D0 = eval_dictionary(atoms, t);
    const Eigen::Map<const Eigen::VectorXd> pv(p.data(), static_cast<Eigen::Index>(p.size()));
    double best_single = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < D0.cols(); ++j) {
      const double w = D0.col(j).dot(pv) / D0.col(j).squaredNorm();
      best_single = std::min(best_single, (pv - w * D0.col(j)).norm());
    }
    INFO("trial " << trial);
    CHECK(fit.residual <= best_single);
  }
}

TEST_CASE("prune threshold does not change the dominant atom", "[sparsereg][property]") {
  const auto t = linspace(0.1, 3.0, 30);
  std::vector<double> p;
  for (double v : t) p.push_back(0.97 * std::sin(3.0 * v - 1.0) + 0.01 * v);
  SparseConfig cfg;
  cfg.starts = 8;
  const auto base = sparse_fit(t, p, default_dictionary(), cfg);
  const std::size_t dominant = base.dominant_atom(t);
  for (double thr : {1e-8, 1e-4, 1e-2}) {
    cfg.prune_threshold = thr;
    const auto fit = sparse_fit(t, p, default_dictionary(), cfg);
    CHECK(fit.dominant_atom(t) == dominant);
    CHECK(fit.atoms[dominant].family == AtomFamily::Sinusoid);
  }
  CHECK(base.atoms[dominant].family == AtomFamily::Sinusoid);
  CHECK(base.weights[dominant] == Approx(0.97).margin(0.05));
}

TEST_CASE("sparse fit validation", "[sparsereg]") {
  const std::vector<double> t{0.0}, p{1.0};
  CHECK_THROWS_AS(sparse_fit(t, p, default_dictionary(), {}), InvalidArgument);
  const std::vector<double> t2{0.0, 1.0};
  CHECK_THROWS_AS(sparse_fit(t2, p, default_dictionary(), {}), InvalidArgument);
}

TEST_CASE("phase wrapping", "[sparsereg]") {
  CHECK(wrap_phase(11.5) == Approx(11.5 - 4 * M_PI));
  CHECK(wrap_phase(-M_PI) == Approx(M_PI));
  CHECK(wrap_phase(0.3) == 0.3);
}
