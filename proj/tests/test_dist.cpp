#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "irf/dist.hpp"
#include "irf/errors.hpp"
#include "irf/rng.hpp"

using namespace irf;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Independent route to E[X^s] for X >= x0 > 0: s t^{s-1} S(t) integrated on [x0, 4^60 x0]
// in geometric pieces.
double moment_oracle(const TailModel& m, double s) {
  using boost::math::quadrature::gauss_kronrod;
  const double x0 = m.support_low();
  double total = std::pow(x0, s);
  double a = x0;
  for (int k = 0; k < 60; ++k) {
    const double b = a * 4.0;
    total += gauss_kronrod<double, 61>::integrate([&](double t) { const double sv = m.survival(t);
      return sv > 0 ? s * std::pow(t, s - 1) * sv : 0.0; },
                                                  a, b, 10, 1e-13);
    a = b;
  }
  return total;
}

}  // namespace

TEST_CASE("survival examples") {
  CHECK(TailModel::pareto(2, 1).survival(10) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(TailModel::log_pareto(2, 3, 0.4).survival(0.4) == 1.0);
  CHECK(TailModel::exp_poly(1, -2, 1).survival(2) == doctest::Approx(0.25 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(TailModel::exp_poly(1, -2, 1).survival(2) == doctest::Approx(0.0919699).epsilon(1e-6));
  CHECK(TailModel::constant(1).survival(0.5) == 1.0);
  CHECK(TailModel::constant(1).survival(1.0) == 0.0);
}

TEST_CASE("survival is non-increasing and equals 1 below the support") {
  const std::vector<TailModel> ms = {TailModel::pareto(2, 1), TailModel::log_pareto(2, 3, 0.4),
                                     TailModel::exp_poly(1, -2, 1), TailModel::exp_stretched(1, 1, 0.5, 1)};
  for (const auto& m : ms) {
    CHECK(m.survival(m.support_low() * 0.5) == 1.0);
    double prev = 1.0;
    for (double t = m.support_low(); t < 1e4; t *= 1.07) {
      const double s = m.survival(t);
      CHECK(s <= prev);
      prev = s;
    }
    CHECK(m.survival(1e30) < 1e-20);
  }
}

TEST_CASE("quantile examples and errors") {
  CHECK(TailModel::pareto(2, 1).quantile(0.01) == doctest::Approx(10).epsilon(1e-14));
  CHECK(TailModel::log_pareto(2, 3, 0.4).quantile(1.0) == doctest::Approx(0.4).epsilon(1e-14));
  const TailModel lp = TailModel::log_pareto(2, 3, 0.4);
  const double t = lp.quantile(1e-4);
  CHECK(std::abs(lp.survival(t) - 1e-4) / 1e-4 < 1e-10);
  CHECK(lp.quantile_bisect(1e-4) == doctest::Approx(t).epsilon(1e-12));
  CHECK_THROWS_AS(lp.quantile(0.0), PreconditionError);
  CHECK_THROWS_AS(lp.quantile(1.5), PreconditionError);
  CHECK_THROWS_AS(lp.quantile(-0.1), PreconditionError);
}

TEST_CASE("inversion invariant on random u in (1e-8, 1]") {
  const std::vector<TailModel> ms = {TailModel::pareto(2, 1), TailModel::log_pareto(2, 3, 0.4),
                                     TailModel::exp_poly(1, -2, 1), TailModel::exp_stretched(1, 1, 0.5, 1),
                                     TailModel::log_pareto(0.7, 1.5, 2.0)};
  RngStream r(5, 0);
  for (const auto& m : ms) {
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const double u = std::exp(std::log(1e-8) * r.uniform());
      const double t = m.quantile(u);
      worst = std::max(worst, std::abs(m.survival(t) - u) / u);
    }
    INFO(m.to_string());
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("sampling examples") {
  RngStream r(1, 2);
  CHECK(TailModel::constant(1).sample(r) == 1.0);
  CHECK(TailModel::pareto(2, 1).quantile(0.25) == doctest::Approx(2).epsilon(1e-15));

  const TailModel lp = TailModel::log_pareto(2, 3, 0.4);
  const int n = 1000000;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    RngStream s(77, i);
    k += lp.sample(s) > 4.0;
  }
  const double p = lp.survival(4.0);
  CHECK(std::abs(k / double(n) - p) <= 3 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("chi-square goodness of fit on 20 quantile bins") {
  const std::vector<TailModel> ms = {TailModel::log_pareto(2, 3, 0.4), TailModel::exp_poly(1, -2, 1),
                                     TailModel::exp_stretched(1, 1, 0.5, 1)};
  for (const auto& m : ms) {
    const int n = 100000, bins = 20;
    std::vector<double> edges;
    for (int j = 1; j < bins; ++j) edges.push_back(m.quantile(1.0 - j / double(bins)));
    std::vector<int> count(bins, 0);
    RngStream r(3, 0);
    for (int i = 0; i < n; ++i) {
      const double x = m.sample(r);
      const auto pos = std::upper_bound(edges.begin(), edges.end(), x) - edges.begin();
      ++count[pos];
    }
    double chi2 = 0;
    const double e = n / double(bins);
    for (int c : count) chi2 += (c - e) * (c - e) / e;
    INFO(m.to_string() << " chi2 = " << chi2);
    // 0.999 quantile of chi-square with 19 degrees of freedom.
    CHECK(chi2 < 43.82);
  }
}

TEST_CASE("alpha moments") {
  CHECK(TailModel::pareto(3, 1).alpha_moment(2) == doctest::Approx(3).epsilon(1e-14));
  CHECK(TailModel::pareto(2, 1).alpha_moment(2) == kInf);
  const TailModel lp = TailModel::log_pareto(2, 3, 0.4);
  CHECK(lp.alpha_moment(2) == doctest::Approx(0.32).epsilon(1e-14));
  CHECK(lp.alpha_moment_quadrature(2) == doctest::Approx(0.32).epsilon(1e-6));
  CHECK(lp.alpha_moment(2.5) == kInf);
  CHECK(lp.alpha_moment(1) == doctest::Approx(moment_oracle(lp, 1)).epsilon(1e-9));
  CHECK(lp.alpha_moment(1) == doctest::Approx(0.5192694724646388).epsilon(1e-9));
  CHECK(TailModel::constant(-2).alpha_moment(2) == 4.0);
  CHECK(TailModel::exp_poly(1, -2, 1).alpha_moment(3) ==
        doctest::Approx(moment_oracle(TailModel::exp_poly(1, -2, 1), 3)).epsilon(1e-8));
}

TEST_CASE("regular variation of the log-Pareto tail improves along t") {
  const TailModel lp = TailModel::log_pareto(2, 3, 0.4);
  double prev = kInf;
  for (double t : {1e2, 1e3, 1e4}) {
    double sup = 0;
    for (double y = 0.5; y <= 10; y *= 1.01) sup = std::max(sup, std::abs(lp.survival(t * y) / lp.survival(t) - std::pow(y, -2.0)));
    CHECK(sup < prev);
    prev = sup;
  }
  const TailModel p = TailModel::pareto(2, 1);
  for (double y : {0.5, 1.5, 7.0}) CHECK(p.survival(100 * y) / p.survival(100) == doctest::Approx(std::pow(y, -2.0)).epsilon(1e-13));
}

TEST_CASE("log view") {
  const LogTail p = LogTail::log_view(TailModel::pareto(2, 1));
  for (double t : {0.0, 0.5, 3.0, 10.0}) CHECK(p.survival(t) == doctest::Approx(std::exp(-2 * t)).epsilon(1e-13));
  const LogTail lp = LogTail::log_view(TailModel::log_pareto(2, 3, 1));
  for (double t : {0.0, 0.5, 3.0, 10.0})
    CHECK(lp.survival(t) == doctest::Approx(std::exp(-2 * t) * std::pow(1 + t, -3.0)).epsilon(1e-13));
  const TailModel ep = TailModel::exp_poly(1, -2, 1);
  const LogTail lv = LogTail::log_view(ep);
  for (int i = 0; i < 100; ++i) {
    const double t = -1.0 + 0.05 * i;
    CHECK(lv.survival(t) == doctest::Approx(ep.survival(std::exp(t))).epsilon(1e-13));
  }
  CHECK_THROWS_AS(LogTail::log_view(TailModel::constant(-1)), PreconditionError);
}

TEST_CASE("grammar round trip and validation") {
  const TailModel m = TailModel::parse("log_pareto(alpha=2.0, beta=3.0, x0=0.4)");
  CHECK(m == TailModel::log_pareto(2, 3, 0.4));
  CHECK(TailModel::parse(m.to_string()) == m);
  CHECK(TailModel::parse("exp_stretched(alpha=1, beta=1, gamma=0.5, t0=1)") == TailModel::exp_stretched(1, 1, 0.5, 1));
  CHECK_THROWS_AS(TailModel::parse("weibull(k=1)"), ConfigError);
  CHECK_THROWS(TailModel::parse("pareto(alpha=2)"));
  CHECK_THROWS(TailModel::log_pareto(2, 1, 0.4));
  CHECK_THROWS(TailModel::exp_poly(1, -0.5, 1));
  CHECK_THROWS(TailModel::exp_stretched(1, 1, 1.0, 1));
  CHECK_THROWS(TailModel::pareto(-1, 1));
}
