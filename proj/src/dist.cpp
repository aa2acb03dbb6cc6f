#include "irf/dist.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "irf/errors.hpp"
#include "irf/quadrature.hpp"

namespace irf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw PreconditionError(msg);
}

// Solves g(x) = 0 for increasing g with g(lo) <= 0 <= g(hi), starting from x.
// Newton steps that leave the bracket are replaced by bisection.
template <class G, class DG>
double solve_increasing(G g, DG dg, double lo, double hi, double x, double abs_tol) {
  for (int it = 0; it < 200; ++it) {
    const double fx = g(x);
    if (fx == 0.0) return x;
    if (fx < 0.0)
      lo = x;
    else
      hi = x;
    double next = x - fx / dg(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= abs_tol || hi - lo <= abs_tol) return next;
    x = next;
  }
  return x;
}

}  // namespace

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::pareto: return "pareto";
    case Family::log_pareto: return "log_pareto";
    case Family::exp_poly: return "exp_poly";
    case Family::exp_stretched: return "exp_stretched";
    case Family::constant: return "constant";
  }
  return "unknown";
}

TailModel TailModel::pareto(double alpha, double x0) {
  require(alpha > 0 && std::isfinite(alpha), "pareto: alpha must be > 0");
  require(x0 > 0 && std::isfinite(x0), "pareto: x0 must be > 0");
  return {Family::pareto, alpha, 0.0, 0.0, 0.0, x0};
}

TailModel TailModel::log_pareto(double alpha, double beta, double x0) {
  require(alpha > 0 && std::isfinite(alpha), "log_pareto: alpha must be > 0");
  require(beta > 1 && std::isfinite(beta), "log_pareto: beta must be > 1");
  require(x0 > 0 && std::isfinite(x0), "log_pareto: x0 must be > 0");
  return {Family::log_pareto, alpha, beta, 0.0, 0.0, x0};
}

TailModel TailModel::exp_poly(double alpha, double p, double t0) {
  require(alpha > 0 && std::isfinite(alpha), "exp_poly: alpha must be > 0");
  require(p < -1 && std::isfinite(p), "exp_poly: p must be < -1");
  require(t0 > 0 && std::isfinite(t0), "exp_poly: t0 must be > 0");
  return {Family::exp_poly, alpha, 0.0, 0.0, p, t0};
}

TailModel TailModel::exp_stretched(double alpha, double beta, double gamma, double t0) {
  require(alpha > 0 && std::isfinite(alpha), "exp_stretched: alpha must be > 0");
  require(beta > 0 && std::isfinite(beta), "exp_stretched: beta must be > 0");
  require(gamma > 0 && gamma < 1, "exp_stretched: gamma must lie in (0, 1)");
  require(t0 >= 0 && std::isfinite(t0), "exp_stretched: t0 must be >= 0");
  return {Family::exp_stretched, alpha, beta, gamma, 0.0, t0};
}

TailModel TailModel::constant(double c) {
  require(std::isfinite(c), "constant: c must be finite");
  return {Family::constant, 0.0, 0.0, 0.0, 0.0, c};
}

TailModel TailModel::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  const std::string_view whole = trim(text);
  const auto open = whole.find('(');
  if (open == std::string_view::npos || whole.back() != ')')
    throw ConfigError("model spec must look like family(key=value, ...): '" + std::string(whole) + "'");
  const std::string name(trim(whole.substr(0, open)));
  std::string_view body = whole.substr(open + 1, whole.size() - open - 2);

  std::map<std::string, double> kv;
  while (!trim(body).empty()) {
    const auto comma = body.find(',');
    const std::string_view item = trim(body.substr(0, comma));
    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key=value in model spec, got '" + std::string(item) + "'");
    const std::string key(trim(item.substr(0, eq)));
    const std::string value(trim(item.substr(eq + 1)));
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size())
      throw ConfigError("not a number for key '" + key + "': '" + value + "'");
    if (!kv.emplace(key, v).second) throw ConfigError("duplicate key '" + key + "' in model spec");
  }

  auto take = [&](const std::vector<std::string>& keys) {
    std::vector<double> out;
    for (const auto& k : keys) {
      const auto it = kv.find(k);
      if (it == kv.end()) throw ConfigError(name + ": missing key '" + k + "'");
      out.push_back(it->second);
      kv.erase(it);
    }
    if (!kv.empty()) throw ConfigError(name + ": unknown key '" + kv.begin()->first + "'");
    return out;
  };

  if (name == "pareto") {
    const auto v = take({"alpha", "x0"});
    return pareto(v[0], v[1]);
  }
  if (name == "log_pareto") {
    const auto v = take({"alpha", "beta", "x0"});
    return log_pareto(v[0], v[1], v[2]);
  }
  if (name == "exp_poly") {
    const auto v = take({"alpha", "p", "t0"});
    return exp_poly(v[0], v[1], v[2]);
  }
  if (name == "exp_stretched") {
    const auto v = take({"alpha", "beta", "gamma", "t0"});
    return exp_stretched(v[0], v[1], v[2], v[3]);
  }
  if (name == "constant") {
    const auto v = take({"c"});
    return constant(v[0]);
  }
  throw ConfigError("unknown distribution family '" + name + "'");
}

std::string TailModel::to_string() const {
  switch (family_) {
    case Family::pareto: return "pareto(alpha=" + num(alpha_) + ", x0=" + num(low_) + ")";
    case Family::log_pareto:
      return "log_pareto(alpha=" + num(alpha_) + ", beta=" + num(beta_) + ", x0=" + num(low_) + ")";
    case Family::exp_poly: return "exp_poly(alpha=" + num(alpha_) + ", p=" + num(p_) + ", t0=" + num(low_) + ")";
    case Family::exp_stretched:
      return "exp_stretched(alpha=" + num(alpha_) + ", beta=" + num(beta_) + ", gamma=" + num(gamma_) +
             ", t0=" + num(low_) + ")";
    case Family::constant: return "constant(c=" + num(low_) + ")";
  }
  return {};
}

double TailModel::tail_index() const noexcept {
  return (family_ == Family::pareto || family_ == Family::log_pareto) ? alpha_ : kInf;
}

double TailModel::log_survival(double t) const noexcept {
  if (std::isnan(t)) return t;
  if (family_ == Family::constant) return t < low_ ? 0.0 : -kInf;
  if (t <= low_) return 0.0;
  switch (family_) {
    case Family::pareto: return -alpha_ * std::log(t / low_);
    case Family::log_pareto: {
      const double u = std::log(t / low_);
      return -alpha_ * u - beta_ * std::log1p(u);
    }
    case Family::exp_poly: return p_ * std::log(t / low_) - alpha_ * (t - low_);
    case Family::exp_stretched:
      return -alpha_ * (t - low_) - beta_ * (std::pow(t, gamma_) - std::pow(low_, gamma_));
    case Family::constant: break;
  }
  return 0.0;
}

double TailModel::survival(double t) const noexcept {
  if (family_ == Family::pareto) return t <= low_ ? 1.0 : std::pow(low_ / t, alpha_);
  return std::exp(log_survival(t));
}

double TailModel::quantile(double u) const {
  if (u == 0.0) throw PreconditionError("unbounded quantile: u = 0");
  if (!(u > 0.0 && u <= 1.0)) throw PreconditionError("quantile: u must lie in (0, 1], got " + num(u));
  if (family_ == Family::constant || u == 1.0) return low_;
  const double L = -std::log(u);
  switch (family_) {
    case Family::pareto: return low_ * std::exp(L / alpha_);
    case Family::log_pareto: {
      // alpha v + beta log(1+v) = L, t = x0 e^v. Halley steps from a left start; g is concave
      // and increasing, so the iterates stay in [0, L/alpha].
      const double a = alpha_, b = beta_;
      const double hi = L / a;
      double v = std::max(L / (a + b), (L - b * std::log1p(L / a)) / a);
      for (int it = 0; it < 60; ++it) {
        const double q = 1.0 / (1.0 + v);
        const double g = a * v + b * std::log1p(v) - L;
        const double d1 = a + b * q;
        const double d2 = -b * q * q;
        const double newton = g / d1;
        const double step = newton / (1.0 - 0.5 * newton * d2 / d1);
        const double next = std::clamp(v - step, 0.0, hi);
        // Cubic convergence: once a step is below 1e-6 the next error is far below 1e-15.
        if (std::abs(next - v) <= 1e-6 * (1.0 + v)) return low_ * std::exp(next);
        v = next;
      }
      return low_ * std::exp(v);
    }
    case Family::exp_poly: {
      // alpha w - p log(1 + w/t0) = L, t = t0 + w.
      const double a = alpha_, p = p_, t0 = low_;
      const double hi = L / a;
      const double start = std::max(L / (a - p / t0), (L + p * std::log1p(hi / t0)) / a);
      const double w = solve_increasing([&](double x) { return a * x - p * std::log1p(x / t0) - L; },
                                        [&](double x) { return a - p / (t0 + x); }, 0.0, hi,
                                        std::max(start, 0.0), 1e-15 * (t0 + hi));
      return t0 + w;
    }
    case Family::exp_stretched: {
      const double a = alpha_, b = beta_, g = gamma_, t0 = low_;
      const double t0g = std::pow(t0, g);
      const double hi = L / a;
      const double start = std::max(0.0, (L - b * (std::pow(t0 + hi, g) - t0g)) / a);
      auto fn = [&](double x) { return a * x + b * (std::pow(t0 + x, g) - t0g) - L; };
      auto dfn = [&](double x) {
        const double y = t0 + x;
        return y > 0 ? a + b * g * std::pow(y, g - 1.0) : kInf;
      };
      const double w = solve_increasing(fn, dfn, 0.0, hi, start > 0 ? start : 0.5 * hi, 1e-15 * (t0 + hi));
      return t0 + w;
    }
    case Family::constant: break;
  }
  return low_;
}

double TailModel::quantile_bisect(double u) const {
  if (u == 0.0) throw PreconditionError("unbounded quantile: u = 0");
  if (!(u > 0.0 && u <= 1.0)) throw PreconditionError("quantile: u must lie in (0, 1], got " + num(u));
  if (family_ == Family::constant || u == 1.0) return low_;
  const double base = low_ > 0 ? low_ : 1.0;
  double lo = low_;
  double hi = low_ > 0 ? 2.0 * low_ : 1.0;
  while (survival(hi) >= u) {
    lo = hi;
    hi = 2.0 * (hi > 0 ? hi : base);
    if (!std::isfinite(hi)) throw NumericError("quantile bracket overflow");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (survival(mid) > u)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double TailModel::alpha_moment_quadrature(double s) const {
  require(s >= 0, "alpha_moment: s must be >= 0");
  if (s == 0) return 1.0;
  if (family_ == Family::constant) return std::pow(std::abs(low_), s);
  if (s > tail_index()) return kInf;
  if (s == tail_index() && family_ == Family::pareto) return kInf;
  // E[X^s] = x0^s + int_{log x0}^inf s e^{sv} S(e^v) dv, for X >= 0.
  const double v0 = low_ > 0 ? std::log(low_) : -kInf;
  const auto integrand = [&](double v) {
    const double t = std::exp(v);
    const double ls = log_survival(t);
    return ls == -kInf ? 0.0 : s * std::exp(s * v + ls);
  };
  const double base = low_ > 0 ? std::pow(low_, s) : 0.0;
  return base + quad::integrate(integrand, v0, kInf, 1e-12).value;
}

double TailModel::alpha_moment(double s) const {
  require(s >= 0, "alpha_moment: s must be >= 0");
  if (s == 0) return 1.0;
  switch (family_) {
    case Family::pareto: return s < alpha_ ? alpha_ * std::pow(low_, s) / (alpha_ - s) : kInf;
    case Family::log_pareto:
      if (s > alpha_) return kInf;
      if (s == alpha_) return std::pow(low_, alpha_) * (1.0 + alpha_ / (beta_ - 1.0));
      return alpha_moment_quadrature(s);
    case Family::constant: return std::pow(std::abs(low_), s);
    default: return alpha_moment_quadrature(s);
  }
}

double TailModel::log_moment() const {
  require(low_ > 0, "log_moment: support must lie in (0, inf)");
  if (family_ == Family::constant) return std::log(low_);
  if (family_ == Family::pareto) return std::log(low_) + 1.0 / alpha_;
  const double v0 = std::log(low_);
  const auto integrand = [&](double v) { return std::exp(log_survival(std::exp(v))); };
  return v0 + quad::integrate(integrand, v0, kInf, 1e-12).value;
}

std::optional<double> tail_ratio_constant(const TailModel& b, const TailModel& a) {
  if (a.is_constant()) return std::nullopt;
  if (b == a) return 1.0;
  if (b.is_constant()) return 0.0;
  const double ib = b.tail_index();
  const double ia = a.tail_index();
  if (std::isinf(ia) || std::isinf(ib)) {
    if (std::isinf(ib) && !std::isinf(ia)) return 0.0;
    return std::nullopt;
  }
  if (ib > ia) return 0.0;
  if (ib < ia) return kInf;
  const double scale = std::pow(b.support_low() / a.support_low(), ia);
  const bool lb = b.family() == Family::log_pareto;
  const bool la = a.family() == Family::log_pareto;
  if (!lb && !la) return scale;
  if (lb && !la) return 0.0;
  if (!lb && la) return kInf;
  if (b.beta() > a.beta()) return 0.0;
  if (b.beta() < a.beta()) return kInf;
  return scale;
}

LogTail LogTail::direct(const TailModel& m) { return {m, false, 0.0}; }

LogTail LogTail::log_view(const TailModel& m) {
  if (!(m.support_low() > 0))
    throw PreconditionError("log_view: law has mass at nonpositive reals (support edge " + num(m.support_low()) + ")");
  return {m, true, 0.0};
}

LogTail LogTail::shifted(double c) const { return {base_, log_view_, shift_ + c}; }

double LogTail::log_survival(double t) const noexcept {
  const double y = t - shift_;
  if (!log_view_) return base_.log_survival(y);
  const double l0 = std::log(base_.support_low());
  switch (base_.family()) {
    case Family::constant: return y < l0 ? 0.0 : -kInf;
    case Family::pareto: return y <= l0 ? 0.0 : -base_.alpha() * (y - l0);
    case Family::log_pareto: {
      if (y <= l0) return 0.0;
      const double u = y - l0;
      return -base_.alpha() * u - base_.beta() * std::log1p(u);
    }
    default: return y > 700.0 ? -kInf : base_.log_survival(std::exp(y));
  }
}

double LogTail::survival(double t) const noexcept { return std::exp(log_survival(t)); }

double LogTail::support_low() const noexcept {
  return (log_view_ ? std::log(base_.support_low()) : base_.support_low()) + shift_;
}

double LogTail::atom() const noexcept { return support_low(); }

double LogTail::exp_moment(double alpha) const {
  require(alpha >= 0, "exp_moment: alpha must be >= 0");
  const double shift_factor = std::exp(alpha * shift_);
  if (alpha == 0) return 1.0;
  if (log_view_) return shift_factor * base_.alpha_moment(alpha);
  switch (base_.family()) {
    case Family::constant: return std::exp(alpha * (base_.support_low() + shift_));
    case Family::pareto:
    case Family::log_pareto: return kInf;
    case Family::exp_poly:
    case Family::exp_stretched:
      if (alpha > base_.alpha()) return kInf;
      break;
  }
  // m = e^{alpha low} + alpha int_low^inf e^{alpha s} S(s) ds.
  const double low = base_.support_low();
  const auto integrand = [&](double s) {
    const double ls = base_.log_survival(s);
    return ls == -kInf ? 0.0 : std::exp(alpha * s + ls);
  };
  const double tail = quad::integrate(integrand, low, kInf, 1e-12).value;
  return shift_factor * (std::exp(alpha * low) + alpha * tail);
}

double LogTail::k_function(double alpha, double t) const noexcept {
  const double ls = log_survival(t);
  return ls == -kInf ? 0.0 : std::exp(alpha * t + ls);
}

}  // namespace irf
