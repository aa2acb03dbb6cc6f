#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "irf/engine.hpp"
#include "irf/errors.hpp"
#include "irf/tailstats.hpp"
#include "irf/theory.hpp"

using namespace irf;

TEST_CASE("ecdf examples") {
  const std::vector<double> s = {1, 2, 3, 4};
  const std::vector<double> t = {0.5, 2.5, 10};
  const TailEstimate e = ecdf_survival(s, t);
  CHECK(e.p_hat == std::vector<double>{1.0, 0.5, 0.0});
  CHECK(e.n_exceed == std::vector<double>{4, 2, 0});
  CHECK(e.n_total == 4);
  for (std::size_t j = 0; j < t.size(); ++j) CHECK((e.ci_lo[j] <= e.p_hat[j] && e.p_hat[j] <= e.ci_hi[j]));
  CHECK_THROWS_AS(ecdf_survival(std::vector<double>{}, t), PreconditionError);
  CHECK_THROWS_AS(ecdf_survival(s, std::vector<double>{2, 1}), PreconditionError);
}

TEST_CASE("ecdf on Pareto draws matches the binomial oracle") {
  const TailModel p = TailModel::pareto(2, 1);
  const int n = 1000000;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) {
    RngStream r(2, i);
    x[i] = p.sample(r);
  }
  const std::vector<double> t = {10};
  const TailEstimate e = ecdf_survival(x, t);
  CHECK(std::abs(e.p_hat[0] - 0.01) <= 3 * std::sqrt(0.01 * 0.99 / n));
  CHECK(e.n_exceed[0] == std::round(e.p_hat[0] * n));
}

TEST_CASE("wilson interval") {
  // k = 5, n = 20: centre (0.25 + z^2/40) / (1 + z^2/20).
  const double z = kZ95;
  const Interval i = wilson_interval(5, 20);
  const double c = (0.25 + z * z / 40) / (1 + z * z / 20);
  const double h = z / (1 + z * z / 20) * std::sqrt(0.25 * 0.75 / 20 + z * z / 1600);
  CHECK(i.lo == doctest::Approx(c - h).epsilon(1e-14));
  CHECK(i.hi == doctest::Approx(c + h).epsilon(1e-14));
  CHECK(wilson_interval(0, 100).lo == 0.0);
  CHECK(wilson_interval(100, 100).hi == doctest::Approx(1.0));
}

TEST_CASE("wilson coverage on synthetic Bernoulli data") {
  const double p = 0.02;
  const int n = 2000, reps = 1000;
  int covered = 0;
  for (int r = 0; r < reps; ++r) {
    RngStream s(99, r);
    int k = 0;
    for (int i = 0; i < n; ++i) k += s.uniform() <= p;
    const Interval ci = wilson_interval(k, n);
    covered += ci.lo <= p && p <= ci.hi;
  }
  const double cov = covered / double(reps);
  INFO("coverage " << cov);
  // 95% +- 1% is the target; a binomial sd of 0.7% on 1000 reps is added on top.
  CHECK(cov >= 0.94 - 0.014);
  CHECK(cov <= 0.96 + 0.014);
}

TEST_CASE("ratio curves") {
  TailEstimate e;
  e.t_grid = {1, 2, 4};
  e.p_hat = {0.5, 0.25, 0.125};
  e.ci_lo = {0.4, 0.2, 0.1};
  e.ci_hi = {0.6, 0.3, 0.15};
  e.n_exceed = {500, 250, 125};
  e.n_total = 1000;
  const auto rc = ratio_curve(e, [](double t) { return 0.5 / t; });
  for (double r : rc.ratio) CHECK(r == doctest::Approx(1.0));
  const auto rc2 = ratio_curve(e, [](double t) { return 0.25 / t; });
  for (double r : rc2.ratio) CHECK(r == doctest::Approx(2.0));
  CHECK(rc2.lo[0] == doctest::Approx(1.6));
  CHECK(reliable_index(e, 300) == 0);
  CHECK(reliable_index(e, 100) == 2);
  CHECK(reliable_index(e, 1000) == -1);
  CHECK(last_decade_spread(rc, 2) == doctest::Approx(0.0));
  CHECK_THROWS_AS(ratio_curve(e, [](double) { return 0.0; }), PreconditionError);
}

TEST_CASE("hill estimator") {
  const std::vector<double> s = {std::exp(3.0), std::exp(2.0), std::exp(1.0), 1.0};
  CHECK(hill(s, 3) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_WITH_AS(hill(std::vector<double>(10, 2.0), 3), doctest::Contains("degenerate tail"), PreconditionError);
  CHECK_THROWS_AS(hill(std::vector<double>{3, 2, 1, -1}, 3), PreconditionError);
  CHECK_THROWS_AS(hill(s, 0), PreconditionError);

  const TailModel p = TailModel::pareto(2, 1);
  const auto exact = [&](std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = p.quantile((i + 1.0) / (n + 1.0));
    return x;
  };
  CHECK(std::abs(hill(exact(10000), 100) - 2) <= 0.4);
  double prev = INFINITY;
  for (auto [n, k] : {std::pair{1000, 30}, std::pair{10000, 100}, std::pair{100000, 300}}) {
    const double err = std::abs(hill(exact(n), k) - 2);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("plug-in moments") {
  const std::vector<double> a = {1, 2};
  CHECK(plugin_moment(a, {MomentKind::pow_plus, 2, nullptr}).mean == 2.5);
  const std::vector<double> b = {-1, 1};
  CHECK(plugin_moment(b, {MomentKind::pow_minus, 2, nullptr}).mean == 0.5);
  // Jackknife se of the mean equals sd / sqrt(n).
  const std::vector<double> c = {1, 2, 3, 4, 5};
  const McEstimate m = plugin_moment(c, {MomentKind::pow_plus, 1, nullptr});
  CHECK(m.se == doctest::Approx(std::sqrt(2.5 / 5)).epsilon(1e-14));
  CHECK_THROWS_AS(plugin_moment(c, {MomentKind::f_plus, 2, nullptr}), PreconditionError);
  const std::vector<double> huge = {1e200, 1};
  CHECK_THROWS_AS(plugin_moment(huge, {MomentKind::pow_plus, 2, nullptr}), NumericError);
}

TEST_CASE("plug-in xi_plus against the moment identity") {
  const TailModel lp = TailModel::log_pareto(2, 3, 0.4);
  const MapFamily f = MapFamily::affine(CoeffLaw::make(lp, lp, Dependence::independent, 1, 1.0));
  SimConfig c;
  c.n_samples = 400000;
  c.seed = 8;
  c.method = Method::perpetuity;
  const auto x = sample_perpetuity(f.coeff, c).values;
  const McEstimate xi = plugin_moment(x, {MomentKind::f_plus, 2, &f});
  const double mu = lp.alpha_moment_quadrature(1);
  const AffineMoments am = affine_moments(mu, 0.32, mu, 0.32, mu * mu);
  INFO("xi " << xi.mean << " +- " << xi.se << " vs " << am.ex2 + 1);
  // E[X^2] is finite but X^2 has no second moment, so the se is only indicative; allow 5 se.
  CHECK(std::abs(xi.mean - (am.ex2 + 1)) <= 5 * xi.se);
}

TEST_CASE("quantile grid and csv") {
  std::vector<double> x;
  for (int i = 1; i <= 100000; ++i) x.push_back(i);
  const auto g = quantile_grid(x, 0.99, 300, 20);
  CHECK(g.size() == 20);
  CHECK(g.front() == doctest::Approx(99001));
  // 300 samples strictly above the last point.
  CHECK(std::count_if(x.begin(), x.end(), [&](double v) { return v > g.back(); }) == 300);
  for (std::size_t j = 1; j < g.size(); ++j) CHECK(g[j] > g[j - 1]);
  CHECK_THROWS_AS(quantile_grid(x, 1.5, 300, 20), PreconditionError);

  const std::vector<double> t = {2.5};
  const TailEstimate e = ecdf_survival(std::vector<double>{1, 2, 3, 4}, t);
  std::ostringstream os;
  write_tail_csv(os, e, ratio_curve(e, [](double) { return 0.25; }));
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(header == "t,p_hat,ci_lo,ci_hi,n_exceed,ref_tail,ratio,ratio_ci_lo,ratio_ci_hi");
  CHECK(row.rfind("2.5,0.5,", 0) == 0);
}

TEST_CASE("ks distance") {
  const std::vector<double> a = {1, 2, 3, 4};
  CHECK(ks_distance(a, a) == 0.0);
  const std::vector<double> b = {5, 6, 7, 8};
  CHECK(ks_distance(a, b) == 1.0);
  const std::vector<double> c = {1, 2, 5, 6};
  CHECK(ks_distance(a, c) == doctest::Approx(0.5));
}

TEST_CASE("smoothed estimates convert to a tail estimate") {
  const std::vector<SmoothedPoint> pts = {{1.0, 0.1, 0.01, 81.0}, {2.0, 0.001, 0.001, 0.999}};
  const TailEstimate e = from_smoothed(pts, 1000);
  CHECK(e.ci_lo[0] == doctest::Approx(0.1 - kZ95 * 0.01));
  CHECK(e.ci_lo[1] == 0.0);
  CHECK(e.n_exceed[0] == 81.0);
}
