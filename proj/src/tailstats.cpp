#include "irf/tailstats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "irf/errors.hpp"

namespace irf {

Interval wilson_interval(double k, double n, double z) {
  if (!(n > 0)) throw PreconditionError("wilson_interval: n must be > 0");
  const double p = k / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(std::max(0.0, p * (1.0 - p) / n + z2 / (4.0 * n * n)));
  return {k <= 0 ? 0.0 : std::max(0.0, center - half), k >= n ? 1.0 : std::min(1.0, center + half)};
}

TailEstimate ecdf_survival(std::span<const double> samples, std::span<const double> t_grid) {
  if (samples.empty()) throw PreconditionError("ecdf_survival: empty batch");
  for (std::size_t j = 1; j < t_grid.size(); ++j)
    if (!(t_grid[j] > t_grid[j - 1])) throw PreconditionError("ecdf_survival: t grid must be strictly increasing");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  TailEstimate est;
  est.n_total = sorted.size();
  est.t_grid.assign(t_grid.begin(), t_grid.end());
  const double n = static_cast<double>(sorted.size());
  std::size_t pos = 0;  // first index with value > t
  for (double t : t_grid) {
    while (pos < sorted.size() && sorted[pos] <= t) ++pos;
    const double k = static_cast<double>(sorted.size() - pos);
    const Interval ci = wilson_interval(k, n);
    est.p_hat.push_back(k / n);
    est.ci_lo.push_back(ci.lo);
    est.ci_hi.push_back(ci.hi);
    est.n_exceed.push_back(k);
  }
  return est;
}

TailEstimate from_smoothed(std::span<const SmoothedPoint> points, std::size_t n_total) {
  TailEstimate est;
  est.n_total = n_total;
  for (const SmoothedPoint& p : points) {
    est.t_grid.push_back(p.t);
    est.p_hat.push_back(p.p);
    est.ci_lo.push_back(std::max(0.0, p.p - kZ95 * p.se));
    est.ci_hi.push_back(std::min(1.0, p.p + kZ95 * p.se));
    est.n_exceed.push_back(p.n_equiv);
  }
  return est;
}

RatioCurve ratio_curve(const TailEstimate& est, const std::function<double(double)>& ref_survival) {
  RatioCurve rc;
  for (std::size_t j = 0; j < est.t_grid.size(); ++j) {
    const double t = est.t_grid[j];
    const double s = ref_survival(t);
    if (!(s > 0)) throw PreconditionError("ratio_curve: reference survival vanishes at t = " + std::to_string(t));
    rc.t.push_back(t);
    rc.ref_tail.push_back(s);
    rc.ratio.push_back(est.p_hat[j] / s);
    rc.lo.push_back(est.ci_lo[j] / s);
    rc.hi.push_back(est.ci_hi[j] / s);
  }
  return rc;
}

RatioCurve ratio_curve(const TailEstimate& est, const TailModel& ref, double scale) {
  return ratio_curve(est, [&](double t) { return scale * ref.survival(t); });
}

std::ptrdiff_t reliable_index(const TailEstimate& est, double min_exceed) {
  std::ptrdiff_t last = -1;
  for (std::size_t j = 0; j < est.n_exceed.size(); ++j)
    if (est.n_exceed[j] >= min_exceed) last = static_cast<std::ptrdiff_t>(j);
  return last;
}

double last_decade_spread(const RatioCurve& curve, std::ptrdiff_t last) {
  if (last < 0) return NAN;
  const double t_end = curve.t[last];
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  int n = 0;
  for (std::ptrdiff_t j = last; j >= 0 && curve.t[j] >= t_end / 10.0; --j) {
    lo = std::min(lo, curve.ratio[j]);
    hi = std::max(hi, curve.ratio[j]);
    sum += curve.ratio[j];
    ++n;
  }
  return (hi - lo) / (sum / n);
}

double hill(std::span<const double> samples, std::size_t k) {
  if (k < 1) throw PreconditionError("hill: k must be >= 1");
  if (samples.size() < k + 1) throw PreconditionError("hill: need at least k + 1 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k), x.end(), std::greater<>());
  const double xk1 = x[k];
  if (!(xk1 > 0)) throw PreconditionError("hill: X_(k+1) must be > 0");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(x[i] / xk1);
  if (!(s > 0)) throw PreconditionError("hill: degenerate tail (top order statistics are equal)");
  return static_cast<double>(k) / s;
}

namespace {

double apply(const MomentSpec& g, double x) {
  switch (g.kind) {
    case MomentKind::pow_plus: return x > 0 ? std::pow(x, g.alpha) : 0.0;
    case MomentKind::pow_minus: return x < 0 ? std::pow(-x, g.alpha) : 0.0;
    case MomentKind::f_plus: return f_plus(*g.family, x, g.alpha);
    case MomentKind::f_minus: return f_minus(*g.family, x, g.alpha);
  }
  return NAN;
}

}  // namespace

McEstimate plugin_moment(std::span<const double> samples, const MomentSpec& g) {
  if (samples.size() < 2) throw PreconditionError("plugin_moment: need at least 2 samples");
  if ((g.kind == MomentKind::f_plus || g.kind == MomentKind::f_minus) && g.family == nullptr)
    throw PreconditionError("plugin_moment: f_plus / f_minus need a map family");
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += apply(g, x);
  const double mean = sum / n;
  // Leave-one-out means theta_i = (sum - g_i) / (n - 1); their jackknife variance reduces to
  // sum (g_i - mean)^2 / (n (n - 1)).
  double ss = 0.0;
  for (double x : samples) {
    const double d = apply(g, x) - mean;
    ss += d * d;
  }
  const double se = std::sqrt(ss / (n * (n - 1.0)));
  if (!std::isfinite(mean) || !std::isfinite(se))
    throw NumericError("plugin_moment: non-finite moment estimate (check alpha)");
  return {mean, se};
}

std::vector<double> quantile_grid(std::span<const double> samples, double lo, double hi_exceed, std::size_t points) {
  if (samples.empty()) throw PreconditionError("quantile_grid: empty batch");
  if (!(lo > 0 && lo < 1)) throw PreconditionError("quantile_grid: lo must lie in (0, 1)");
  if (points < 2) throw PreconditionError("quantile_grid: need at least 2 points");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  const auto idx_lo = std::min(n - 1, static_cast<std::size_t>(std::floor(lo * static_cast<double>(n))));
  const double t_lo = x[idx_lo];
  const auto k = static_cast<std::size_t>(hi_exceed);
  if (k < 1 || k >= n - idx_lo) throw PreconditionError("quantile_grid: too few samples for the exceedance rule");
  // Largest threshold with at least k exceedances.
  const double t_hi = x[n - k - 1];
  if (!(t_lo > 0) || !(t_hi > t_lo)) throw PreconditionError("quantile_grid: degenerate or non-positive tail samples");
  std::vector<double> grid(points);
  const double r = std::log(t_hi / t_lo);
  for (std::size_t j = 0; j < points; ++j)
    grid[j] = t_lo * std::exp(r * static_cast<double>(j) / static_cast<double>(points - 1));
  grid.back() = t_hi;
  return grid;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("ks_distance: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

void write_tail_csv(std::ostream& os, const TailEstimate& est, const RatioCurve& ratio) {
  const auto prec = os.precision(12);
  os << "t,p_hat,ci_lo,ci_hi,n_exceed,ref_tail,ratio,ratio_ci_lo,ratio_ci_hi\n";
  for (std::size_t j = 0; j < est.t_grid.size(); ++j) {
    os << est.t_grid[j] << ',' << est.p_hat[j] << ',' << est.ci_lo[j] << ',' << est.ci_hi[j] << ','
       << std::round(est.n_exceed[j]) << ',' << ratio.ref_tail[j] << ',' << ratio.ratio[j] << ',' << ratio.lo[j] << ','
       << ratio.hi[j] << '\n';
  }
  os.precision(prec);
}

}  // namespace irf
