#include "irf/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "irf/errors.hpp"
#include "irf/kernels.hpp"
#include "irf/quadrature.hpp"

namespace irf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quantile integrals run over v = -log u in [0, kCells]; the mass beyond is e^-48.
constexpr int kCells = 48;
// Cells containing a kink are split there and graded geometrically toward it.
constexpr int kGradeLevels = 16;

ConditionalTail::Nodes build_nodes(const TailModel& law) {
  ConditionalTail::Nodes n;
  if (law.is_constant()) return n;
  n.x.reserve(kCells * quad::kGL8Nodes.size());
  n.w.reserve(kCells * quad::kGL8Nodes.size());
  for (int c = 0; c < kCells; ++c) {
    for (std::size_t k = 0; k < quad::kGL8Nodes.size(); ++k) {
      const double v = c + 0.5 + 0.5 * quad::kGL8Nodes[k];
      n.x.push_back(law.quantile(std::exp(-v)));
      n.w.push_back(0.5 * quad::kGL8Weights[k] * std::exp(-v));
    }
  }
  return n;
}

template <class G>
double cell_fresh(const TailModel& law, const G& g, double a, double b) {
  return quad::gauss_legendre([&](double v) { return g(law.quantile(std::exp(-v))) * std::exp(-v); }, a, b, 1);
}

// Integral over [a, b] with cells shrinking geometrically toward the endpoint `focus`.
template <class G>
double graded(const TailModel& law, const G& g, double a, double b, bool focus_at_b) {
  const double len = b - a;
  if (!(len > 0)) return 0.0;
  double sum = 0.0;
  double outer = len;
  for (int j = 0; j < kGradeLevels; ++j) {
    const double inner = 0.5 * outer;
    if (focus_at_b)
      sum += cell_fresh(law, g, b - outer, b - inner);
    else
      sum += cell_fresh(law, g, a + inner, a + outer);
    outer = inner;
  }
  sum += focus_at_b ? cell_fresh(law, g, b - outer, b) : cell_fresh(law, g, a, a + outer);
  return sum;
}

// E[g(X)] = int_0^inf g(Q(e^-v)) e^-v dv, with a possible kink of g at X = x_kink.
template <class G>
double expect(const TailModel& law, const ConditionalTail::Nodes& nodes, const G& g, double x_kink) {
  if (law.is_constant()) return g(law.support_low());
  double vk = -1.0;
  if (x_kink > law.support_low()) vk = -law.log_survival(x_kink);
  double total = 0.0;
  const std::size_t per = quad::kGL8Nodes.size();
  for (int c = 0; c < kCells; ++c) {
    if (vk > c && vk < c + 1) {
      total += graded(law, g, c, vk, true) + graded(law, g, vk, c + 1.0, false);
      continue;
    }
    double s = 0.0;
    for (std::size_t k = c * per; k < (c + 1) * per; ++k) s += nodes.w[k] * g(nodes.x[k]);
    total += s;
  }
  return std::clamp(total, 0.0, 1.0);
}

bool nonneg(const TailModel& m) { return m.support_low() >= 0; }

std::string describe(const MapFamily& f, Side side) {
  return std::string(map_kind_name(f.kind)) + "/" + dependence_to_string(f.coeff) + "/" +
         (side == Side::right ? "right" : "left");
}

}  // namespace

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::chain: return "chain";
    case Method::perpetuity: return "perpetuity";
    case Method::smoothed: return "smoothed";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::chain, Method::perpetuity, Method::smoothed})
    if (text == method_name(m)) return m;
  throw ConfigError("unknown method '" + std::string(text) + "' (chain | perpetuity | smoothed)");
}

void SimConfig::validate() const {
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (burn_in < 1) throw ConfigError("burn_in must be >= 1");
  if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
  if (!(truncation_eps > 0 && truncation_eps < 1)) throw ConfigError("truncation_eps must lie in (0, 1)");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (!std::isfinite(x_init)) throw ConfigError("x_init must be finite");
}

SampleBatch sample_stationary_chain(const MapFamily& family, const SimConfig& cfg) {
  cfg.validate();
  const EltonReport elton = elton_precheck(family, 10000, derive_seed(cfg.seed, 0xE17));
  if (!elton.pass) {
    std::ostringstream os;
    os << "Elton precondition failed: E[log L] = " << elton.e_log_l.mean << " +- " << elton.e_log_l.se
       << ", E[log+ L] = " << elton.e_logplus_l.mean << ", E[log|Psi(0)|] = " << elton.e_log_disp.mean;
    throw PreconditionError(os.str());
  }
  SampleBatch batch;
  batch.values.resize(cfg.n_samples);
  batch.method = Method::chain;
  batch.seed = cfg.seed;
  batch.config = cfg;
  kernels::chain_omp(family, {cfg.seed, cfg.burn_in, cfg.x_init}, batch.values, cfg.chunk_size, cfg.workers);
  return batch;
}

Truncation perpetuity_truncation(const CoeffLaw& coeff, double eps) {
  if (!(eps > 0 && eps < 1)) throw PreconditionError("truncation_eps must lie in (0, 1)");
  Truncation tr;
  tr.s = std::min(1.0, coeff.marginal_a.tail_index());
  tr.m_s = coeff.marginal_a.alpha_moment(tr.s);
  if (!(tr.m_s < 1.0)) throw PreconditionError("perpetuity truncation bound unavailable; use chain method");
  const double eb = coeff.marginal_b.alpha_moment(tr.s);
  if (!std::isfinite(eb)) throw PreconditionError("perpetuity truncation bound unavailable; use chain method");
  std::size_t k = 1;
  double bound = tr.m_s * eb / (1.0 - tr.m_s);
  while (!(bound < eps)) {
    bound *= tr.m_s;
    ++k;
    if (k > 100000) throw PreconditionError("perpetuity truncation needs more than 1e5 terms; use chain method");
  }
  tr.terms = k;
  tr.bound = bound;
  return tr;
}

SampleBatch sample_perpetuity(const CoeffLaw& coeff, const SimConfig& cfg) {
  cfg.validate();
  const Truncation tr = perpetuity_truncation(coeff, cfg.truncation_eps);
  SampleBatch batch;
  batch.values.resize(cfg.n_samples);
  batch.method = Method::perpetuity;
  batch.seed = cfg.seed;
  batch.config = cfg;
  batch.truncation_terms = tr.terms;
  batch.remainder_bound = tr.bound;
  kernels::perpetuity_omp(coeff, cfg.seed, tr.terms, batch.values, cfg.chunk_size, cfg.workers);
  return batch;
}

std::vector<double> apply_one_step(const MapFamily& family, std::span<const double> values, std::uint64_t seed,
                                   int workers) {
  std::vector<double> out(values.size());
  const auto n = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel for schedule(static) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    out[i] = draw_map(family, rng)(values[i]);
  }
  return out;
}

bool smoothing_supported(const MapFamily& f, Side side) noexcept {
  const CoeffLaw& c = f.coeff;
  const bool a_pos = nonneg(c.marginal_a);
  const bool b_pos = nonneg(c.marginal_b);
  switch (f.kind) {
    case MapKind::affine:
      if (c.dependence == Dependence::equal) return a_pos;
      if (c.dependence == Dependence::signed_a) return side == Side::right || b_pos;
      return a_pos && (side == Side::right || b_pos);
    case MapKind::max_affine:
      return a_pos && c.dependence != Dependence::signed_a && (side == Side::right || b_pos);
    case MapKind::pos_part_affine:
      return a_pos && c.dependence == Dependence::independent && (side == Side::right || b_pos);
    case MapKind::sqrt_log:
      return false;
  }
  return false;
}

ConditionalTail::ConditionalTail(const MapFamily& family, double t, Side side)
    : family_(family), t_(t), side_(side) {
  if (!(t > 0) || !std::isfinite(t)) throw PreconditionError("conditional tail needs a finite t > 0");
  if (!smoothing_supported(family, side))
    throw PreconditionError("smoothed estimator not available for " + describe(family, side) +
                            "; fall back to the empirical survival");
  const CoeffLaw& c = family.coeff;
  const bool both_random = !c.marginal_a.is_constant() && !c.marginal_b.is_constant();
  const bool affine_like = family.kind == MapKind::affine || family.kind == MapKind::pos_part_affine;
  integral_ = both_random && affine_like && c.dependence != Dependence::equal;
  if (integral_) {
    nodes_w_ = build_nodes(c.marginal_a);
    nodes_b_ = build_nodes(c.marginal_b);
  }
}

double ConditionalTail::i1(double y) const {
  const TailModel& w = family_.coeff.marginal_a;
  const TailModel& b = family_.coeff.marginal_b;
  const double t = t_;
  if (w.is_constant() && b.is_constant()) return w.support_low() * y + b.support_low() > t ? 1.0 : 0.0;
  if (w.is_constant()) return b.survival(t - w.support_low() * y);
  if (b.is_constant()) return w.survival((t - b.support_low()) / y);
  return expect(b, nodes_b_, [&](double bv) { return w.survival((t - bv) / y); }, t - w.support_low() * y);
}

double ConditionalTail::i2(double y) const {
  const TailModel& w = family_.coeff.marginal_a;
  const TailModel& b = family_.coeff.marginal_b;
  const double t = t_;
  if (w.is_constant() && b.is_constant()) return b.support_low() > t + w.support_low() * y ? 1.0 : 0.0;
  if (w.is_constant()) return b.survival(t + w.support_low() * y);
  if (b.is_constant()) return 1.0 - w.survival((b.support_low() - t) / y);
  return expect(w, nodes_w_, [&](double wv) { return b.survival(t + wv * y); }, (b.support_low() - t) / y);
}

double ConditionalTail::i3(double y) const {
  const TailModel& w = family_.coeff.marginal_a;
  const TailModel& b = family_.coeff.marginal_b;
  const double t = t_;
  if (w.is_constant() && b.is_constant()) return w.support_low() * y > t + b.support_low() ? 1.0 : 0.0;
  if (w.is_constant()) return 1.0 - b.survival(w.support_low() * y - t);
  if (b.is_constant()) return w.survival((t + b.support_low()) / y);
  return expect(b, nodes_b_, [&](double bv) { return w.survival((t + bv) / y); }, w.support_low() * y - t);
}

double ConditionalTail::operator()(double y) const {
  const CoeffLaw& c = family_.coeff;
  const TailModel& a = c.marginal_a;
  const double sb = c.marginal_b.survival(t_);
  const bool right = side_ == Side::right;
  switch (family_.kind) {
    case MapKind::affine:
      switch (c.dependence) {
        case Dependence::independent:
          if (right) return y > 0 ? i1(y) : (y < 0 ? i2(-y) : sb);
          return y < 0 ? i3(-y) : 0.0;
        case Dependence::equal:
          if (right) return y > -1.0 ? a.survival(t_ / (y + 1.0)) : 0.0;
          return y < -1.0 ? a.survival(t_ / (-1.0 - y)) : 0.0;
        case Dependence::signed_a: {
          const double p = c.p_plus;
          if (right) {
            if (y > 0) return p * i1(y) + (1.0 - p) * i2(y);
            if (y < 0) return p * i2(-y) + (1.0 - p) * i1(-y);
            return sb;
          }
          if (y > 0) return (1.0 - p) * i3(y);
          if (y < 0) return p * i3(-y);
          return 0.0;
        }
      }
      break;
    case MapKind::max_affine:
      if (!right) return 0.0;
      if (c.dependence == Dependence::equal) return a.survival(t_ / std::max(y, 1.0));
      return y > 0 ? 1.0 - (1.0 - a.survival(t_ / y)) * (1.0 - sb) : sb;
    case MapKind::pos_part_affine:
      if (!right) return 0.0;
      return y > 0 ? i1(y) : sb;
    case MapKind::sqrt_log: break;
  }
  throw PreconditionError("smoothed estimator not available for " + describe(family_, side_));
}

std::vector<double> ConditionalTail::kinks(bool /*positive_y*/) const {
  std::vector<double> out;
  const double x0w = family_.coeff.marginal_a.support_low();
  const double x0b = family_.coeff.marginal_b.support_low();
  if (!(x0w > 0)) return out;
  for (double k : {(t_ - x0b) / x0w, (t_ + x0b) / x0w, (x0b - t_) / x0w})
    if (k > 0 && std::isfinite(k)) out.push_back(k);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw PreconditionError("t grid is empty");
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    if (!(t_grid[j] > 0) || !std::isfinite(t_grid[j])) throw PreconditionError("t grid values must be finite and > 0");
    if (j > 0 && !(t_grid[j] > t_grid[j - 1])) throw PreconditionError("t grid must be strictly increasing");
  }
}

std::vector<SmoothedPoint> finish(std::span<const double> t_grid, const kernels::Sums& sums, std::size_t n) {
  std::vector<SmoothedPoint> out(t_grid.size());
  const double nn = static_cast<double>(n);
  double running = 1.0;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    SmoothedPoint& pt = out[j];
    pt.t = t_grid[j];
    const double m = sums.s1[j] / nn;
    const double var = n > 1 ? std::max(0.0, (sums.s2[j] / nn - m * m) * nn / (nn - 1.0)) : 0.0;
    running = std::min(running, m);
    pt.p = running;
    pt.se = std::sqrt(var / nn);
    if (pt.se > 0)
      pt.n_equiv = pt.p * pt.p * (1.0 - pt.p) / (pt.se * pt.se);
    else
      pt.n_equiv = pt.p > 0 ? kInf : 0.0;
  }
  return out;
}

}  // namespace

std::vector<SmoothedPoint> smoothed_tail(std::span<const double> samples, const MapFamily& family,
                                         std::span<const double> t_grid, Side side, int workers,
                                         std::size_t chunk_size) {
  if (samples.empty()) throw PreconditionError("smoothed estimator on an empty batch");
  check_grid(t_grid);
  double pmin = kInf, pmax = 0.0, nmin = kInf, nmax = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double y = samples[i];
    if (!std::isfinite(y)) {
      std::ostringstream os;
      os << "non-finite sample " << y << " at index " << i;
      throw NumericError(os.str());
    }
    if (y > 0) {
      pmin = std::min(pmin, y);
      pmax = std::max(pmax, y);
    } else if (y < 0) {
      nmin = std::min(nmin, -y);
      nmax = std::max(nmax, -y);
    }
  }
  std::vector<kernels::TailTable> tables;
  tables.reserve(t_grid.size());
  for (double t : t_grid) tables.emplace_back(ConditionalTail(family, t, side), pmin, pmax, nmin, nmax, workers);
  const kernels::Sums sums = kernels::smoothed_omp(tables, samples, chunk_size, workers);
  return finish(t_grid, sums, samples.size());
}

std::vector<SmoothedPoint> smoothed_tail_direct(std::span<const double> samples, const MapFamily& family,
                                                std::span<const double> t_grid, Side side) {
  if (samples.empty()) throw PreconditionError("smoothed estimator on an empty batch");
  check_grid(t_grid);
  kernels::Sums sums{std::vector<double>(t_grid.size()), std::vector<double>(t_grid.size())};
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    const ConditionalTail h(family, t_grid[j], side);
    for (double y : samples) {
      const double v = h(y);
      sums.s1[j] += v;
      sums.s2[j] += v * v;
    }
  }
  return finish(t_grid, sums, samples.size());
}

}  // namespace irf
