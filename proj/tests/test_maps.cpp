#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "irf/errors.hpp"
#include "irf/maps.hpp"

using namespace irf;

namespace {

const TailModel kLp = TailModel::log_pareto(2, 3, 0.4);

MapFamily affine(TailModel a, TailModel b, Dependence d, double p = 1.0, std::optional<double> cb = std::nullopt) {
  return MapFamily::affine(CoeffLaw::make(a, b, d, p, cb));
}

}  // namespace

TEST_CASE("realized maps") {
  CHECK(RealizedMap(MapKind::affine, {0.5, 2, 0})(3) == 3.5);
  CHECK(RealizedMap(MapKind::max_affine, {2, 10, 0})(1) == 10);
  const double e2 = std::exp(2.0);
  CHECK(RealizedMap(MapKind::sqrt_log, {1, 1, 1})(e2) == doctest::Approx(e2 + std::exp(1.0) * 2 + 1).epsilon(1e-14));
  CHECK(RealizedMap(MapKind::pos_part_affine, {2, 1, 0}, 0.5)(-3) == 1);
  CHECK(RealizedMap(MapKind::affine, {-0.7, 1, 0}).lipschitz() == 0.7);
}

TEST_CASE("coefficient laws") {
  const CoeffLaw eq = CoeffLaw::make(kLp, TailModel::pareto(3, 1), Dependence::equal);
  CHECK(eq.c_b == 1.0);
  CHECK(eq.marginal_b == kLp);
  const CoeffLaw ind = CoeffLaw::make(kLp, kLp, Dependence::independent);
  CHECK(ind.c_b == doctest::Approx(1.0));
  CHECK(CoeffLaw::make(kLp, TailModel::constant(1), Dependence::independent).c_b == 0.0);
  const CoeffLaw sg = CoeffLaw::make(kLp, kLp, Dependence::signed_a, 0.75);
  CHECK(sg.mu_plus(2) == doctest::Approx(0.24).epsilon(1e-13));
  CHECK(sg.mu_minus(2) == doctest::Approx(0.08).epsilon(1e-13));
  CHECK(sg.reference_survival(5.0) == doctest::Approx(0.75 * kLp.survival(5.0)));
  CHECK_THROWS_AS(CoeffLaw::make(kLp, kLp, Dependence::signed_a, 1.5), PreconditionError);
  CHECK_THROWS_AS(CoeffLaw::make(kLp, kLp, Dependence::independent, 1, -1.0), PreconditionError);

  double p = 0;
  CHECK(parse_dependence("signed(p_plus=0.75)", p) == Dependence::signed_a);
  CHECK(p == 0.75);
  CHECK(parse_dependence("equal", p) == Dependence::equal);
  CHECK_THROWS(parse_dependence("copula", p));
}

TEST_CASE("closed-form f_plus / f_minus") {
  const MapFamily ind = affine(kLp, kLp, Dependence::independent, 1, 1.0);
  CHECK(f_plus(ind, 0, 2) == 1.0);
  CHECK(f_plus(ind, 3, 2) == 10.0);
  CHECK(f_minus(ind, -3, 2) == 0.0);
  const MapFamily eq = affine(kLp, kLp, Dependence::equal);
  CHECK(f_plus(eq, 1, 2) == 4.0);
  CHECK(f_plus(eq, -2, 2) == 0.0);
  const MapFamily sg = affine(kLp, kLp, Dependence::signed_a, 0.75, 1.0);
  CHECK(f_plus(sg, -2, 2) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  CHECK(f_minus(sg, -2, 2) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(f_minus(sg, 3, 2) == doctest::Approx(3.0).epsilon(1e-14));
  const MapFamily pp = MapFamily::pos_part_affine(CoeffLaw::make(kLp, kLp, Dependence::independent, 1, 1.0), 0.5);
  CHECK(f_plus(pp, -4, 2) == 1.0);
  CHECK(f_plus(pp, 2, 2) == 5.0);

  const MapFamily neg_b = affine(kLp, TailModel::constant(-1), Dependence::independent);
  CHECK_FALSE(has_closed_form_f(neg_b));
  CHECK_THROWS_AS(f_plus(neg_b, 1, 2), PreconditionError);
}

TEST_CASE("f bound") {
  std::vector<double> ys;
  for (double y = -20; y <= 20; y += 0.25) ys.push_back(y);
  for (const MapFamily& f : {affine(kLp, kLp, Dependence::independent, 1, 1.0), affine(kLp, kLp, Dependence::equal)}) {
    const FBoundReport r = f_bound_check(f, 2, ys);
    CHECK(r.holds);
    CHECK(r.min_slack >= 0);
    CHECK(r.offending_y.empty());
  }
  // The bound is stated for A >= 0. With a signed A, f_+ picks up (1-p)/p y_-^alpha and f_- picks up
  // (1-p)/p y_+^alpha, neither of which 2^alpha f_pm(0) covers; the check reports both signs.
  const MapFamily sg = affine(kLp, kLp, Dependence::signed_a, 0.75, 1.0);
  const FBoundReport rs = f_bound_check(sg, 2, ys);
  CHECK_FALSE(rs.holds);
  CHECK(std::any_of(rs.offending_y.begin(), rs.offending_y.end(), [](double y) { return y < 0; }));
  CHECK(std::any_of(rs.offending_y.begin(), rs.offending_y.end(), [](double y) { return y > 0; }));

  // Independent c_B = 1, y = 3: f_+ = 10 <= 40; f_- = 0 <= 0 is tight, so the minimum slack is 0.
  const std::vector<double> y3 = {3.0};
  const FBoundReport r3 = f_bound_check(affine(kLp, kLp, Dependence::independent, 1, 1.0), 2, y3);
  CHECK(r3.holds);
  CHECK(r3.min_slack == 0.0);
  CHECK(f_plus(affine(kLp, kLp, Dependence::independent, 1, 1.0), 3, 2) <= 4 * (9 + 1));
}

TEST_CASE("envelope decomposition holds on random draws") {
  RngStream r(11, 0);
  const CoeffLaw law = CoeffLaw::make(kLp, kLp, Dependence::independent);
  const std::vector<MapFamily> fams = {MapFamily::affine(law), MapFamily::max_affine(law),
                                       MapFamily::pos_part_affine(law, 0.5),
                                       MapFamily::sqrt_log(law, TailModel::pareto(3, 0.1))};
  for (const MapFamily& f : fams) {
    for (int i = 0; i < 1000; ++i) {
      const RealizedMap psi = draw_map(f, r);
      const double a = psi.coefficients().a;
      double prev = -INFINITY;
      // max_affine and pos_part_affine carry their envelope on x >= 0 only.
      const double x_lo = f.kind == MapKind::affine || f.kind == MapKind::sqrt_log ? -10.0 : 0.0;
      for (double x = x_lo; x <= 50; x += 0.5) {
        const double v = psi(x);
        CHECK(std::abs(v - a * x) <= psi.envelope_coeff() * envelope_phi(f.kind, std::abs(x)) * (1 + 1e-14) + 1e-12);
        if (f.kind == MapKind::max_affine || f.kind == MapKind::pos_part_affine) {
          CHECK(v >= prev);
          prev = v;
        }
      }
    }
  }
}

TEST_CASE("elton precheck") {
  const EltonReport half = elton_precheck(affine(TailModel::constant(0.5), TailModel::constant(1), Dependence::independent), 1000, 1);
  CHECK(half.pass);
  CHECK(half.e_log_l.mean == doctest::Approx(std::log(0.5)));
  const EltonReport two = elton_precheck(affine(TailModel::constant(2), TailModel::constant(1), Dependence::independent), 1000, 1);
  CHECK_FALSE(two.pass);
  CHECK(two.e_log_l.mean == doctest::Approx(std::log(2.0)));
  const EltonReport lp = elton_precheck(affine(kLp, kLp, Dependence::independent), 20000, 2);
  CHECK(lp.pass);
  CHECK(lp.e_log_l.mean == doctest::Approx(kLp.log_moment()).epsilon(0.02));
  CHECK(kLp.log_moment() < 0);
  CHECK_THROWS(elton_precheck(affine(kLp, kLp, Dependence::independent), 999, 2));
}

TEST_CASE("empirical f_plus approaches the closed form") {
  // A, B iid Pareto(2, 1): P[A y + B > t] / S_A(t) -> y^2 + 1.
  const TailModel p = TailModel::pareto(2, 1);
  const MapFamily f = affine(p, p, Dependence::independent);
  const double y = 2.0;
  const int n = 2000000;
  std::vector<double> dev;
  for (double t : {20.0, 200.0}) {
    int k = 0;
    for (int i = 0; i < n; ++i) {
      RngStream r(21, i);
      k += draw_map(f, r)(y) > t;
    }
    const double ph = k / double(n);
    const double se = std::sqrt(ph * (1 - ph) / n) / p.survival(t);
    const double ratio = ph / p.survival(t);
    dev.push_back(std::abs(ratio - f_plus(f, y, 2)) / se);
  }
  INFO("deviations in se units " << dev[0] << " " << dev[1]);
  CHECK(dev[1] <= 3.0);
}
