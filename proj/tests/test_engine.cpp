#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "irf/engine.hpp"
#include "irf/errors.hpp"
#include "irf/kernels.hpp"
#include "irf/tailstats.hpp"

using namespace irf;

namespace {

const TailModel kLp = TailModel::log_pareto(2, 3, 0.4);

MapFamily affine(TailModel a, TailModel b, Dependence d, double p = 1.0, std::optional<double> cb = std::nullopt) {
  return MapFamily::affine(CoeffLaw::make(a, b, d, p, cb));
}

SimConfig sim(std::size_t n, std::uint64_t seed, Method m = Method::chain) {
  SimConfig c;
  c.n_samples = n;
  c.seed = seed;
  c.method = m;
  return c;
}

// E over U(0,1) of g(Q(u)), by Gauss-Kronrod on the u scale split geometrically toward 0.
template <class G>
double expect_u(const TailModel& m, G&& g) {
  using boost::math::quadrature::gauss_kronrod;
  if (m.is_constant()) return g(m.support_low());
  double total = 0, hi = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double lo = hi * 0.5;
    total += gauss_kronrod<double, 31>::integrate([&](double u) { return g(m.quantile(u)); }, lo, hi, 8, 1e-12);
    hi = lo;
  }
  return total;
}

}  // namespace

TEST_CASE("config validation") {
  SimConfig c = sim(10, 1);
  CHECK_NOTHROW(c.validate());
  c.n_samples = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = sim(10, 1);
  c.burn_in = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = sim(10, 1);
  c.truncation_eps = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = sim(10, 1);
  c.workers = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_method("perpetuity") == Method::perpetuity);
  CHECK_THROWS(parse_method("mcmc"));
}

TEST_CASE("chain examples") {
  SimConfig c = sim(100, 3);
  c.burn_in = 7;
  for (double v : sample_stationary_chain(affine(TailModel::constant(0), TailModel::constant(5), Dependence::independent), c).values)
    CHECK(v == 5.0);
  c.burn_in = 4;
  for (double v : sample_stationary_chain(affine(TailModel::constant(0.5), TailModel::constant(1), Dependence::independent), c).values)
    CHECK(v == 1.875);
  CHECK_THROWS_AS(
      sample_stationary_chain(affine(TailModel::constant(2), TailModel::constant(1), Dependence::independent), c),
      PreconditionError);
}

TEST_CASE("chain mean matches the moment identity") {
  const auto b = sample_stationary_chain(affine(kLp, kLp, Dependence::independent), sim(100000, 17));
  const double mu = kLp.alpha_moment_quadrature(1.0);
  double s = 0, s2 = 0;
  for (double v : b.values) {
    s += v;
    s2 += v * v;
  }
  const double n = b.values.size(), m = s / n, se = std::sqrt((s2 / n - m * m) / n);
  CHECK(std::abs(m - mu / (1 - mu)) <= 3 * se);
}

TEST_CASE("perpetuity examples") {
  SimConfig c = sim(50, 9, Method::perpetuity);
  c.truncation_eps = 0.003;
  const CoeffLaw half = CoeffLaw::make(TailModel::constant(0.5), TailModel::constant(1), Dependence::independent);
  const SampleBatch b = sample_perpetuity(half, c);
  CHECK(b.truncation_terms == 10);
  CHECK(b.remainder_bound < c.truncation_eps);
  for (double v : b.values) CHECK(v == 1.998046875);

  const CoeffLaw zero = CoeffLaw::make(TailModel::constant(0), kLp, Dependence::independent);
  c.n_samples = 100000;
  const SampleBatch z = sample_perpetuity(zero, c);
  CHECK(z.truncation_terms == 1);
  std::vector<double> ref(100000);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    RngStream r(12345, i);
    ref[i] = kLp.sample(r);
  }
  CHECK(ks_distance(z.values, ref) <= 0.01);

  const CoeffLaw heavy = CoeffLaw::make(TailModel::pareto(0.5, 1), TailModel::constant(1), Dependence::independent);
  CHECK_THROWS_WITH_AS(sample_perpetuity(heavy, c), doctest::Contains("use chain method"), PreconditionError);
}

TEST_CASE("perpetuity truncation remainder") {
  const CoeffLaw law = CoeffLaw::make(kLp, kLp, Dependence::independent);
  const Truncation tr = perpetuity_truncation(law, 1e-3);
  CHECK(tr.bound < 1e-3);
  CHECK(tr.s == 1.0);
  const std::size_t n = 20000;
  std::vector<double> a(n), b(n);
  kernels::perpetuity_serial(law, 4, tr.terms, 0, a);
  kernels::perpetuity_serial(law, 4, tr.terms + 20, 0, b);
  double frac = 0, mean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(b[i] - a[i]);
    CHECK(b[i] >= a[i]);
    frac += d > 0.01;
    mean += d;
  }
  frac /= n;
  mean /= n;
  // Markov: P[|rest| > 0.01] <= bound / 0.01.
  CHECK(frac <= tr.bound / 0.01);
  CHECK(mean <= 3 * tr.bound);
}

TEST_CASE("perpetuity and chain agree; burn-in doubling is harmless") {
  const MapFamily f = affine(kLp, kLp, Dependence::independent);
  const auto chain = sample_stationary_chain(f, sim(100000, 1));
  const auto perp = sample_perpetuity(f.coeff, sim(100000, 2, Method::perpetuity));
  CHECK(ks_distance(chain.values, perp.values) <= 0.01);
  SimConfig c2 = sim(100000, 3);
  c2.burn_in = 128;
  const auto longer = sample_stationary_chain(f, c2);
  CHECK(ks_distance(chain.values, longer.values) <= 0.01);
}

TEST_CASE("stationarity: one more map leaves the ecdf in place") {
  const MapFamily f = affine(kLp, kLp, Dependence::independent);
  const auto b = sample_perpetuity(f.coeff, sim(200000, 5, Method::perpetuity));
  const auto moved = apply_one_step(f, b.values, derive_seed(5, 1));
  const std::vector<double> ts = {0.5, 1, 2, 5, 10, 20};
  const TailEstimate e0 = ecdf_survival(b.values, ts), e1 = ecdf_survival(moved, ts);
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const double p = e0.p_hat[j];
    CHECK(std::abs(e1.p_hat[j] - p) <= 3 * std::sqrt(2 * p * (1 - p) / 200000));
  }
}

TEST_CASE("determinism across worker counts") {
  const MapFamily f = affine(kLp, kLp, Dependence::signed_a, 0.75);
  SimConfig c = sim(30000, 77);
  c.chunk_size = 1000;
  std::vector<std::vector<double>> chains, perps;
  std::vector<std::vector<SmoothedPoint>> sm;
  const std::vector<double> ts = {1, 3, 10};
  for (int w : {1, 4, 8}) {
    c.workers = w;
    c.method = Method::chain;
    chains.push_back(sample_stationary_chain(f, c).values);
    c.method = Method::perpetuity;
    perps.push_back(sample_perpetuity(f.coeff, c).values);
    sm.push_back(smoothed_tail(chains.back(), f, ts, Side::right, w, 1000));
  }
  for (int k = 1; k < 3; ++k) {
    CHECK(chains[k] == chains[0]);
    CHECK(perps[k] == perps[0]);
    for (std::size_t j = 0; j < ts.size(); ++j) {
      CHECK(sm[k][j].p == sm[0][j].p);
      CHECK(sm[k][j].se == sm[0][j].se);
    }
  }
  // Serial kernels give the same values as the OpenMP ones.
  std::vector<double> serial(c.n_samples);
  kernels::chain_serial(f, {c.seed, c.burn_in, c.x_init}, 0, serial);
  CHECK(serial == chains[0]);
}

TEST_CASE("non-finite values abort the batch") {
  const MapFamily f = affine(TailModel::constant(0.5), TailModel::pareto(0.002, 1), Dependence::independent);
  CHECK_THROWS_AS(sample_stationary_chain(f, sim(100000, 1)), NumericError);
  const std::vector<double> bad = {1.0, NAN};
  const std::vector<double> ts = {1.0};
  CHECK_THROWS_AS(smoothed_tail(bad, affine(kLp, kLp, Dependence::independent), ts), NumericError);
}

TEST_CASE("smoothed estimator closed-form examples") {
  const TailModel p = TailModel::pareto(2, 1);
  const std::vector<double> ones(10, 1.0);
  const std::vector<double> t10 = {10.0};
  const auto eq = smoothed_tail(ones, affine(p, p, Dependence::equal), t10);
  CHECK(eq[0].p == doctest::Approx(0.04).epsilon(1e-14));
  const std::vector<double> twos(10, 2.0);
  const std::vector<double> t11 = {11.0};
  const auto ind = smoothed_tail(twos, affine(p, TailModel::constant(1), Dependence::independent), t11);
  CHECK(ind[0].p == doctest::Approx(0.04).epsilon(1e-14));
  CHECK(ind[0].se == 0.0);
}

TEST_CASE("conditional tail matches an independent quadrature") {
  const TailModel b = TailModel::log_pareto(2, 3, 0.3);
  const MapFamily ind = affine(kLp, b, Dependence::independent);
  const MapFamily sg = affine(kLp, b, Dependence::signed_a, 0.75);
  for (double t : {2.0, 10.0, 50.0}) {
    const ConditionalTail h(ind, t, Side::right);
    const ConditionalTail hs(sg, t, Side::right);
    const ConditionalTail hl(sg, t, Side::left);
    for (double y : {0.3, 1.0, 4.0, 30.0}) {
      const double want = expect_u(b, [&](double bb) { return kLp.survival((t - bb) / y); });
      CHECK(h(y) == doctest::Approx(want).epsilon(1e-8));
      const double wneg = expect_u(kLp, [&](double w) { return b.survival(t + w * y); });
      CHECK(h(-y) == doctest::Approx(wneg).epsilon(1e-8));
      CHECK(hs(y) == doctest::Approx(0.75 * want + 0.25 * wneg).epsilon(1e-8));
      const double left = expect_u(b, [&](double bb) { return kLp.survival((t + bb) / y); });
      CHECK(hl(y) == doctest::Approx(0.25 * left).epsilon(1e-8));
      CHECK(hl(-y) == doctest::Approx(0.75 * left).epsilon(1e-8));
    }
  }
  const ConditionalTail eq(affine(kLp, kLp, Dependence::equal), 10.0, Side::right);
  CHECK(eq(1.5) == doctest::Approx(kLp.survival(4.0)).epsilon(1e-14));
  CHECK_THROWS_AS(ConditionalTail(ind, 0.0, Side::right), PreconditionError);
}

TEST_CASE("tabulated and direct smoothed estimators agree") {
  const std::vector<MapFamily> fams = {
      affine(kLp, kLp, Dependence::independent), affine(kLp, kLp, Dependence::equal),
      affine(kLp, kLp, Dependence::signed_a, 0.75), MapFamily::max_affine(CoeffLaw::make(kLp, kLp, Dependence::independent)),
      MapFamily::pos_part_affine(CoeffLaw::make(kLp, kLp, Dependence::independent), 0.1)};
  const std::vector<double> ts = {1.0, 4.0, 20.0, 100.0};
  for (const MapFamily& f : fams) {
    for (Side side : {Side::right, Side::left}) {
      if (!smoothing_supported(f, side)) continue;
      if (side == Side::left && f.coeff.dependence != Dependence::signed_a) continue;
      const auto y = sample_stationary_chain(f, sim(5000, 8)).values;
      const auto tab = smoothed_tail(y, f, ts, side);
      const auto dir = smoothed_tail_direct(y, f, ts, side);
      for (std::size_t j = 0; j < ts.size(); ++j) {
        INFO(map_kind_name(f.kind) << " " << dependence_to_string(f.coeff) << " t=" << ts[j]);
        CHECK(tab[j].p == doctest::Approx(dir[j].p).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("smoothed vs ecdf on the same batch") {
  const MapFamily f = affine(kLp, kLp, Dependence::independent);
  const auto y = sample_perpetuity(f.coeff, sim(300000, 31, Method::perpetuity)).values;
  std::vector<double> ts;
  for (int j = 0; j < 10; ++j) ts.push_back(std::pow(1.4, j));
  const auto sm = smoothed_tail(y, f, ts);
  const TailEstimate e = ecdf_survival(y, ts);
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const double p = e.p_hat[j], se_e = std::sqrt(p * (1 - p) / y.size());
    INFO("t = " << ts[j]);
    CHECK(std::abs(sm[j].p - p) <= 3 * std::hypot(se_e, sm[j].se));
    CHECK(sm[j].se < se_e);
    CHECK(sm[j].n_equiv > p * y.size());
    if (j > 0) CHECK(sm[j].p <= sm[j - 1].p);
  }
}

TEST_CASE("unsupported smoothing is signalled") {
  const MapFamily f = MapFamily::sqrt_log(CoeffLaw::make(kLp, kLp, Dependence::independent), TailModel::pareto(3, 0.1));
  CHECK_FALSE(smoothing_supported(f, Side::right));
  const std::vector<double> y = {1.0}, ts = {1.0};
  CHECK_THROWS_WITH_AS(smoothed_tail(y, f, ts), doctest::Contains("empirical survival"), PreconditionError);
}

TEST_CASE("batch file round trip") {
  SampleBatch b;
  b.values = {1.5, -2.25, 1e300, 0.0};
  const std::string path = "test_engine_batch.bin";
  write_batch(path, b, "[sim]\nseed = 1");
  CHECK(read_batch(path) == b.values);
  std::ifstream is(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), {});
  CHECK(bytes.size() == 16 + 4 * 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "IRFB");
  std::ifstream side(path + ".cfg");
  std::string line;
  std::getline(side, line);
  CHECK(line == "[sim]");
  std::remove(path.c_str());
  std::remove((path + ".cfg").c_str());
  CHECK_THROWS_AS(read_batch("no_such_file.bin"), ConfigError);
}
