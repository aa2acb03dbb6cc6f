#include "irf/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "irf/errors.hpp"
#include "irf/quadrature.hpp"
#include "irf/tailstats.hpp"

namespace irf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
  if (!ok) throw PreconditionError(msg);
}

void require_moment(double ea, const char* who) {
  require(ea >= 0, std::string(who) + ": E[A^alpha] must be >= 0");
  require(ea < 1, std::string(who) + ": E[A^alpha] >= 1 is the Cramer boundary");
}

bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) || a == b;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<double> geometric_grid(const GridSpec& g) {
  require(g.x_lo > 0 && g.x_hi > g.x_lo && g.per_decade >= 2, "grid: need 0 < x_lo < x_hi and per_decade >= 2");
  const int n = static_cast<int>(std::ceil(std::log10(g.x_hi / g.x_lo) * g.per_decade)) + 1;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = g.x_lo * std::pow(g.x_hi / g.x_lo, static_cast<double>(i) / (n - 1));
  xs.back() = g.x_hi;
  return xs;
}

// Non-increasing over [from, end) and the last value at most `shrink` times the first.
bool vanishing(const std::vector<double>& v, std::size_t from, double shrink) {
  for (std::size_t i = from + 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] * (1.0 + 1e-12)) return false;
  return v.back() <= shrink * v[from];
}

// int exp(log_g) dF on [a, b] for F given by log S, evaluated in log space so that tiny
// survivals multiplied by huge ratios do not under- or overflow.
template <class LG, class LS>
double stieltjes_log(const LG& log_g, const LS& log_s, double a, double b, double h) {
  if (!(b > a)) return 0.0;
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / h));
  const double step = (b - a) / static_cast<double>(n);
  double sum = 0.0;
  double lg0 = log_g(a), ls0 = log_s(a);
  for (std::size_t i = 1; i <= n; ++i) {
    const double y1 = i == n ? b : a + step * static_cast<double>(i);
    const double lg1 = log_g(y1), ls1 = log_s(y1);
    const double mass = ls1 == ls0 ? 0.0 : -std::expm1(ls1 - ls0);
    if (mass > 0) sum += 0.5 * (std::exp(lg0 + ls0) + std::exp(lg1 + ls0)) * mass;
    lg0 = lg1;
    ls0 = ls1;
  }
  return sum;
}

}  // namespace

std::string_view regime_name(Regime r) noexcept {
  switch (r) {
    case Regime::GreyBHeavy: return "GreyBHeavy";
    case Regime::KeveiAHeavy: return "KeveiAHeavy";
    case Regime::IndepComparable: return "IndepComparable";
    case Regime::AffineGeneral: return "AffineGeneral";
    case Regime::IfsSigned: return "IfsSigned";
    case Regime::ExampleD1: return "ExampleD1";
    case Regime::ExampleD2: return "ExampleD2";
  }
  return "unknown";
}

std::string inputs_json(const Prediction& p) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : p.inputs) j[k] = v;
  return j.dump();
}

std::string prediction_csv_row(const Prediction& p) {
  std::string js = inputs_json(p);
  std::string quoted;
  for (char c : js) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  std::ostringstream os;
  os.precision(15);
  os << regime_name(p.regime) << ',' << p.constant << ',' << p.reference << ",\"" << quoted << '"';
  return os.str();
}

double grey_constant(double ea_alpha) {
  require_moment(ea_alpha, "grey_constant");
  return 1.0 / (1.0 - ea_alpha);
}

double kevei_constant(double ex_alpha, double ea_alpha) {
  require_moment(ea_alpha, "kevei_constant");
  require(ex_alpha >= 0, "kevei_constant: E[X^alpha] must be >= 0");
  return ex_alpha / (1.0 - ea_alpha);
}

double affine_constant(double xi, double mu) {
  require(mu >= 0 && mu < 1, "affine_constant: mu_plus must lie in [0, 1)");
  require(xi >= 0, "affine_constant: xi must be >= 0");
  return xi / (1.0 - mu);
}

double indep_constant(double ex_plus_alpha, double c_b, double ea_alpha) {
  require_moment(ea_alpha, "indep_constant");
  require(ex_plus_alpha >= 0 && c_b >= 0, "indep_constant: E[X_+^alpha] and c_B must be >= 0");
  return (ex_plus_alpha + c_b) / (1.0 - ea_alpha);
}

std::pair<double, double> solve_2x2(double a11, double a12, double a21, double a22, double b1, double b2) {
  if (std::abs(a21) > std::abs(a11)) {
    std::swap(a11, a21);
    std::swap(a12, a22);
    std::swap(b1, b2);
  }
  if (a11 == 0.0) throw NumericError("solve_2x2: singular system");
  const double m = a21 / a11;
  const double u22 = a22 - m * a12;
  const double c2 = b2 - m * b1;
  if (u22 == 0.0) throw NumericError("solve_2x2: singular system");
  const double x2 = c2 / u22;
  const double x1 = (b1 - a12 * x2) / a11;
  return {x1, x2};
}

IfsConstants ifs_constants(double mu_plus, double mu_minus, double xi_plus, double xi_minus) {
  require(mu_plus >= 0 && mu_minus >= 0, "ifs_constants: mu_plus and mu_minus must be >= 0");
  require(mu_plus + mu_minus < 1, "ifs_constants: contraction violated (mu_plus + mu_minus >= 1)");
  require(xi_plus >= 0 && xi_minus >= 0, "ifs_constants: xi_plus and xi_minus must be >= 0");
  IfsConstants c;
  const double den = (1.0 - mu_plus - mu_minus) * (1.0 - mu_plus + mu_minus);
  c.d_plus = ((1.0 - mu_plus) * xi_plus + mu_minus * xi_minus) / den;
  c.d_minus = ((1.0 - mu_plus) * xi_minus + mu_minus * xi_plus) / den;
  const auto [dp, dm] = solve_2x2(1.0 - mu_plus, -mu_minus, -mu_minus, 1.0 - mu_plus, xi_plus, xi_minus);
  c.d_plus_system = dp;
  c.d_minus_system = dm;
  if (!close_rel(c.d_plus, dp, 1e-12) || !close_rel(c.d_minus, dm, 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << "ifs_constants: closed form (" << c.d_plus << ", " << c.d_minus << ") and linear solve (" << dp << ", "
       << dm << ") disagree";
    throw AssertionFailure(os.str());
  }
  return c;
}

ExampleConstants example_constants(double mu, double sigma) {
  require(mu > 0 && mu < 1, "example_constants: mu must lie in (0, 1)");
  require(sigma > 0 && sigma < 1, "example_constants: sigma must lie in (0, 1)");
  const double den = (1.0 - mu) * (1.0 - sigma) * (1.0 - sigma);
  const double p1 = 2.0 * mu * mu * mu - mu + 1.0;
  const double p2 = 2.0 * mu + sigma * (1.0 - mu);
  return {p1 / den, p2 / den, p1 != p2};
}

double equal_input_constant(double mu, double sigma) {
  require(mu > 0 && mu < 1, "equal_input_constant: mu must lie in (0, 1)");
  require(sigma > 0 && sigma < 1, "equal_input_constant: sigma must lie in (0, 1)");
  return (1.0 + mu) / ((1.0 - mu) * (1.0 - sigma) * (1.0 - sigma));
}

AffineMoments affine_moments(double ea, double ea2, double eb, double eb2, double eab) {
  require(std::abs(ea) < 1 && ea2 < 1, "affine_moments: need |E A| < 1 and E A^2 < 1");
  AffineMoments m;
  m.ex = eb / (1.0 - ea);
  m.ex2 = (eb2 + 2.0 * eab * m.ex) / (1.0 - ea2);
  return m;
}

// ---- S(alpha) predicates ----------------------------------------------------------------------

bool PredicateReport::pass() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const Clause& c) { return c.pass; });
}

const Clause& PredicateReport::clause(std::string_view name) const {
  for (const Clause& c : clauses)
    if (c.name == name) return c;
  throw PreconditionError("no clause named '" + std::string(name) + "'");
}

LogK log_k_of(const LogTail& tail, double alpha) {
  return [tail, alpha](double x) { return alpha * x + tail.log_survival(x); };
}

PredicateReport salpha_check_dom(const LogK& log_k, double alpha, const GridSpec& grid) {
  require(alpha > 0, "salpha_check_dom: alpha must be > 0");
  const std::vector<double> xs = geometric_grid(grid);
  const double x_end = xs.back();
  PredicateReport rep;

  {
    Clause c{"shift", true, true, ""};
    for (double y : {1.0, 2.0}) {
      const double dev = std::abs(std::exp(log_k(x_end - y) - log_k(x_end)) - 1.0);
      if (!std::isfinite(dev)) c.conclusive = false;
      if (!(dev < 0.02)) c.pass = false;
      c.detail += "y=" + fmt(y) + ": |K(x-y)/K(x)-1| = " + fmt(dev) + " at x=" + fmt(x_end) + "; ";
    }
    rep.clauses.push_back(c);
  }
  {
    Clause c{"doubling", false, true, ""};
    std::vector<double> r;
    for (std::size_t i = xs.size() / 2; i < xs.size(); ++i) r.push_back(std::exp(log_k(2.0 * xs[i]) - log_k(xs[i])));
    const double mn = *std::min_element(r.begin(), r.end());
    c.conclusive = std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); });
    c.pass = c.conclusive && mn >= 1e-2 && r.back() >= 0.5 * r.front();
    c.detail = "min K(2x)/K(x) over upper grid = " + fmt(mn) + ", last = " + fmt(r.back());
    rep.clauses.push_back(c);
  }
  {
    Clause c{"integrable", false, true, ""};
    auto integral = [&](double hi) {
      return quad::integrate([&](double s) { return std::exp(log_k(std::exp(s)) + s); }, std::log(grid.x_lo),
                             std::log(hi), 1e-9)
          .value;
    };
    try {
      const double i_end = integral(x_end);
      const double i_prev = integral(x_end / 10.0);
      const double tail = x_end * std::exp(log_k(x_end));
      c.pass = std::isfinite(i_end) && tail <= 1e-3 * i_end && (i_end - i_prev) <= 1e-2 * i_end;
      c.detail = "int_{x_lo}^{x} K = " + fmt(i_end) + " (x/10: " + fmt(i_prev) + "), x K(x) = " + fmt(tail);
    } catch (const NumericError& e) {
      c.pass = false;
      c.detail = std::string("integral does not converge: ") + e.what();
    }
    rep.clauses.push_back(c);
  }
  return rep;
}

PredicateReport salpha_check_convex_with(const LogK& log_k, const std::function<double(double)>& f,
                                         const GridSpec& grid) {
  const std::vector<double> xs = geometric_grid(grid);
  const std::size_t n = xs.size();
  const std::size_t mid = n / 2;
  PredicateReport rep;

  {
    Clause c{"concave", false, true, ""};
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) phi[i] = -log_k(xs[i]);
    // Smallest index beyond which every second divided difference of -log K is <= 0.
    std::size_t threshold = n;
    for (std::size_t i = n - 2; i >= 1; --i) {
      const double d1 = (phi[i + 1] - phi[i]) / (xs[i + 1] - xs[i]);
      const double d0 = (phi[i] - phi[i - 1]) / (xs[i] - xs[i - 1]);
      const double d2 = 2.0 * (d1 - d0) / (xs[i + 1] - xs[i - 1]);
      const double h = xs[i + 1] - xs[i - 1];
      const double noise = 64.0 * 2.2e-16 * (1.0 + std::abs(phi[i])) / (h * h);
      if (d2 > noise) break;
      threshold = i;
    }
    c.pass = threshold <= mid;
    c.detail = threshold < n ? "second differences <= 0 beyond x = " + fmt(xs[threshold]) : "no concave tail on grid";
    rep.clauses.push_back(c);
  }
  {
    Clause c{"f_range", true, true, ""};
    for (std::size_t i = mid; i < n; ++i) {
      if (!(f(xs[i]) <= xs[i] / 2.0)) c.pass = false;
      if (i > mid && !(f(xs[i]) > f(xs[i - 1]))) c.pass = false;
    }
    if (!(f(xs.back()) >= f(xs[mid]) + 1.0)) c.pass = false;
    c.detail = "f(x_mid) = " + fmt(f(xs[mid])) + ", f(x_end) = " + fmt(f(xs.back()));
    rep.clauses.push_back(c);
  }
  {
    Clause c{"uniform_shift", false, true, ""};
    std::vector<double> dev;
    for (std::size_t i = mid; i < n; ++i) {
      const double x = xs[i];
      const double fx = f(x);
      const double lk = log_k(x);
      double sup = 0.0;
      constexpr int ny = 200;
      for (int k = 0; k <= ny; ++k) {
        const double y = fx * k / ny;
        sup = std::max(sup, std::abs(std::exp(log_k(x - y) - lk) - 1.0));
      }
      dev.push_back(sup);
    }
    c.conclusive = std::all_of(dev.begin(), dev.end(), [](double v) { return std::isfinite(v); });
    c.pass = c.conclusive && vanishing(dev, 0, 0.5);
    c.detail = "sup |K(x-y)/K(x)-1| from " + fmt(dev.front()) + " to " + fmt(dev.back());
    rep.clauses.push_back(c);
  }
  {
    Clause c{"xKf_vanishes", false, true, ""};
    std::vector<double> g;
    for (std::size_t i = mid; i < n; ++i) g.push_back(xs[i] * std::exp(log_k(f(xs[i]))));
    c.conclusive = std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v); });
    c.pass = c.conclusive && vanishing(g, 0, 0.5);
    c.detail = "x K(f(x)) from " + fmt(g.front()) + " to " + fmt(g.back());
    rep.clauses.push_back(c);
  }
  return rep;
}

PredicateReport salpha_check_convex(const LogK& log_k, double alpha, double gamma, const GridSpec& grid) {
  require(alpha > 0, "salpha_check_convex: alpha must be > 0");
  require(gamma > 0 && gamma < 1, "salpha_check_convex: gamma must lie in (0, 1)");
  PredicateReport rep =
      salpha_check_convex_with(log_k, [gamma](double x) { return std::pow(std::log(x), 1.0 / gamma); }, grid);
  if (!rep.clause("xKf_vanishes").pass)
    rep.info.push_back(
        "x K(f(x)) does not vanish for f = log^(1/gamma) x; for K = exp(-beta x^gamma) this needs beta > 1, "
        "or a faster f such as (2 log x / beta)^(1/gamma)");
  return rep;
}

// ---- convolution diagnostics ------------------------------------------------------------------

bool approach_non_increasing(const std::vector<double>& est, double target, std::size_t last_n) {
  if (est.size() < last_n || last_n < 2) return false;
  for (std::size_t i = est.size() - last_n + 1; i < est.size(); ++i)
    if (std::abs(est[i] - target) > std::abs(est[i - 1] - target)) return false;
  return true;
}

double stieltjes(const std::function<double(double)>& g, const std::function<double(double)>& survival, double a,
                 double b, double h) {
  if (!(b > a)) return 0.0;
  require(h > 0, "stieltjes: step must be > 0");
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / h));
  const double step = (b - a) / static_cast<double>(n);
  double sum = 0.0;
  double y0 = a, g0 = g(a), s0 = survival(a);
  for (std::size_t i = 1; i <= n; ++i) {
    const double y1 = i == n ? b : a + step * static_cast<double>(i);
    const double g1 = g(y1), s1 = survival(y1);
    sum += 0.5 * (g0 + g1) * (s0 - s1);
    y0 = y1;
    g0 = g1;
    s0 = s1;
  }
  (void)y0;
  return sum;
}

double convolution_tail(const LogTail& g1, const LogTail& g2, double t, double h) {
  if (g2.is_point_mass()) return g1.survival(t - g2.atom());
  if (g1.is_point_mass()) return g2.survival(t - g1.atom());
  const double lo = g2.support_low();
  const double hi = t - g1.support_low();
  if (!(hi > lo)) return 1.0;
  // P[Y1 + Y2 > t] = int_{y2 < hi} G1-bar(t - y2) dG2 + P[Y2 > hi].
  return stieltjes([&](double y) { return g1.survival(t - y); }, [&](double y) { return g2.survival(y); }, lo, hi,
                   h) +
         g2.survival(hi);
}

Trajectory convolution_limit_check(const LogTail& g1, const LogTail& g2, const LogTail& f, double k1, double k2,
                                   double alpha, const std::vector<double>& t_list, double tolerance, double h0) {
  const double m1 = g1.exp_moment(alpha);
  const double m2 = g2.exp_moment(alpha);
  if (!std::isfinite(m1)) throw NumericError("convolution_limit_check: m_alpha(G1) is not finite");
  if (!std::isfinite(m2)) throw NumericError("convolution_limit_check: m_alpha(G2) is not finite");
  require(!t_list.empty(), "convolution_limit_check: empty t list");
  Trajectory tr;
  tr.target = k1 * m2 + k2 * m1;
  for (double t : t_list) {
    const double ft = f.survival(t);
    require(ft > 0, "convolution_limit_check: F-bar(t) vanishes");
    double h = h0;
    double est = convolution_tail(g1, g2, t, h) / ft;
    for (int it = 0; it < 10; ++it) {
      h *= 0.5;
      const double next = convolution_tail(g1, g2, t, h) / ft;
      const bool done = std::abs(next - est) <= 1e-3 * std::abs(next);
      est = next;
      if (done) break;
    }
    tr.t.push_back(t);
    tr.estimate.push_back(est);
    tr.ci_lo.push_back(est);
    tr.ci_hi.push_back(est);
  }
  tr.final_within = std::abs(tr.estimate.back() - tr.target) <= tolerance * std::abs(tr.target);
  tr.monotone_approach = approach_non_increasing(tr.estimate, tr.target);
  return tr;
}

double smallint(const LogTail& f, double v, double x) {
  if (v >= x / 2.0) return 0.0;
  const double lx = f.log_survival(x);
  auto lg = [&](double y) { return f.log_survival(x - y) - lx; };
  auto ls = [&](double y) { return f.log_survival(y); };
  double h = 1e-2;
  double est = stieltjes_log(lg, ls, v, x - v, h);
  for (int it = 0; it < 8; ++it) {
    h *= 0.5;
    const double next = stieltjes_log(lg, ls, v, x - v, h);
    const bool done = std::abs(next - est) <= 1e-4 * std::abs(next);
    est = next;
    if (done) break;
  }
  if (!std::isfinite(est)) throw NumericError("smallint: quadrature produced a non-finite value");
  return est;
}

SmallIntReport appendix_smallint_diagnostic(const LogTail& f, double alpha, const std::vector<double>& v_list,
                                            const std::vector<double>& x_list) {
  require(alpha > 0, "appendix_smallint_diagnostic: alpha must be > 0");
  require(x_list.size() >= 2 && !v_list.empty(), "appendix_smallint_diagnostic: need >= 2 x values and >= 1 v");
  SmallIntReport rep;
  rep.v = v_list;
  rep.x = x_list;
  rep.stabilizes = true;
  rep.v_monotone = true;
  for (double v : v_list) {
    std::vector<double> row;
    for (double x : x_list) row.push_back(smallint(f, v, x));
    const double a = row[row.size() - 2], b = row.back();
    if (!(std::abs(b - a) <= 0.05 * std::max(std::abs(a), std::abs(b)))) rep.stabilizes = false;
    if (!rep.values.empty() && b > rep.values.back().back()) rep.v_monotone = false;
    rep.values.push_back(std::move(row));
  }
  return rep;
}

ProductReport product_convolution_check(const TailModel& a, double alpha, const std::vector<double>& t_list,
                                        std::size_t n_mc, std::uint64_t seed, double tolerance, int workers) {
  if (a.is_constant()) throw PreconditionError("product_convolution_check: constant A is not regularly varying");
  require(n_mc >= 2 && !t_list.empty(), "product_convolution_check: need n_mc >= 2 and a non-empty t list");
  ProductReport rep;
  const double ea = a.alpha_moment(alpha);
  rep.traj.target = 2.0 * ea;
  rep.target_finite = std::isfinite(rep.traj.target);
  if (!rep.target_finite) rep.note = "E[A^alpha] is infinite; ratio assertion refused";

  const std::size_t nt = t_list.size();
  std::vector<double> roots(nt);
  for (std::size_t j = 0; j < nt; ++j) roots[j] = std::sqrt(t_list[j]);
  constexpr std::size_t kChunk = std::size_t{1} << 16;
  const std::size_t n_chunks = (n_mc + kChunk - 1) / kChunk;
  std::vector<double> p1(n_chunks * nt), p2(n_chunks * nt);
  const auto nc = static_cast<std::ptrdiff_t>(n_chunks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk, hi = std::min(n_mc, lo + kChunk);
    double* s1 = &p1[c * nt];
    double* s2 = &p2[c * nt];
    for (std::size_t i = lo; i < hi; ++i) {
      RngStream rng(seed, i);
      const double ap = a.sample(rng);
      for (std::size_t j = 0; j < nt; ++j) {
        const double g = ap <= roots[j] ? 2.0 * a.survival(t_list[j] / ap) : 0.0;
        s1[j] += g;
        s2[j] += g * g;
      }
    }
  }
  const double n = static_cast<double>(n_mc);
  for (std::size_t j = 0; j < nt; ++j) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
      s1 += p1[c * nt + j];
      s2 += p2[c * nt + j];
    }
    const double m = s1 / n;
    const double var = std::max(0.0, (s2 / n - m * m) * n / (n - 1.0));
    const double st = a.survival(t_list[j]);
    const double sr = a.survival(roots[j]);
    const double est = (m + sr * sr) / st;
    const double half = kZ95 * std::sqrt(var / n) / st;
    rep.traj.t.push_back(t_list[j]);
    rep.traj.estimate.push_back(est);
    rep.traj.ci_lo.push_back(est - half);
    rep.traj.ci_hi.push_back(est + half);
  }
  if (rep.target_finite) {
    rep.traj.final_within = std::abs(rep.traj.estimate.back() - rep.traj.target) <= tolerance * rep.traj.target;
    rep.traj.monotone_approach = approach_non_increasing(rep.traj.estimate, rep.traj.target);
  }
  return rep;
}

UniformityReport rv_uniformity_check(const TailModel& a, double alpha, double c, const std::vector<double>& t_list,
                                     int y_points) {
  require(c > 0, "rv_uniformity_check: c must be > 0");
  require(c < 1e3, "rv_uniformity_check: c must be < 1e3");
  require(y_points >= 2, "rv_uniformity_check: need at least 2 y points");
  UniformityReport rep;
  rep.t = t_list;
  for (double t : t_list) {
    const double st = a.survival(t);
    require(st > 0, "rv_uniformity_check: S(t) vanishes");
    double sup = 0.0;
    for (int k = 0; k < y_points; ++k) {
      const double y = c * std::pow(1e3 / c, static_cast<double>(k) / (y_points - 1));
      sup = std::max(sup, std::abs(a.survival(y * t) / st - std::pow(y, -alpha)));
    }
    rep.deviation.push_back(sup);
  }
  rep.strictly_decreasing = true;
  for (std::size_t j = 1; j < rep.deviation.size(); ++j)
    if (!(rep.deviation[j] < rep.deviation[j - 1])) rep.strictly_decreasing = false;
  rep.final_below = !rep.deviation.empty() && rep.deviation.back() < 1e-2;
  return rep;
}

}  // namespace irf
