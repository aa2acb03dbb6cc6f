#include "irf/maps.hpp"

#include <cctype>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "irf/errors.hpp"

namespace irf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double pos(double x) noexcept { return x > 0 ? x : 0.0; }
inline double neg(double x) noexcept { return x < 0 ? -x : 0.0; }
inline double powa(double x, double alpha) noexcept { return x > 0 ? std::pow(x, alpha) : 0.0; }

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void no_closed_form(const MapFamily& f) {
  throw PreconditionError("no closed form for f_pm with kind '" + std::string(map_kind_name(f.kind)) + "' and dependence '" +
                          dependence_to_string(f.coeff) + "'; use empirical f_pm via simulation");
}

bool nonneg(const TailModel& m) { return m.support_low() >= 0; }

}  // namespace

CoeffLaw CoeffLaw::make(TailModel a, TailModel b, Dependence dep, double p_plus, std::optional<double> c_b) {
  if (dep == Dependence::signed_a) {
    if (!(p_plus > 0 && p_plus <= 1)) throw PreconditionError("signed: p_plus must lie in (0, 1]");
  } else {
    p_plus = 1.0;
  }
  if (dep == Dependence::equal) b = a;
  double cb = 0.0;
  if (dep == Dependence::equal) {
    cb = 1.0;
  } else if (c_b) {
    cb = *c_b;
  } else if (auto derived = tail_ratio_constant(b, a)) {
    cb = *derived;
  }
  if (!(cb >= 0)) throw PreconditionError("c_B must be >= 0");
  return CoeffLaw{a, b, dep, p_plus, cb};
}

double CoeffLaw::mu_plus(double alpha) const {
  if (dependence == Dependence::signed_a) return p_plus * marginal_a.alpha_moment(alpha);
  if (marginal_a.support_low() >= 0) return marginal_a.alpha_moment(alpha);
  return 0.0;  // constant negative A
}

double CoeffLaw::mu_minus(double alpha) const {
  if (dependence == Dependence::signed_a) return (1.0 - p_plus) * marginal_a.alpha_moment(alpha);
  if (marginal_a.support_low() >= 0) return 0.0;
  return marginal_a.alpha_moment(alpha);
}

std::string dependence_to_string(const CoeffLaw& law) {
  switch (law.dependence) {
    case Dependence::independent: return "independent";
    case Dependence::equal: return "equal";
    case Dependence::signed_a: return "signed(p_plus=" + num(law.p_plus) + ")";
  }
  return {};
}

Dependence parse_dependence(std::string_view text, double& p_plus) {
  const std::string_view t = trim(text);
  if (t == "independent") return Dependence::independent;
  if (t == "equal") return Dependence::equal;
  const std::string_view prefix = "signed(";
  if (t.substr(0, prefix.size()) == prefix && t.back() == ')') {
    std::string_view body = trim(t.substr(prefix.size(), t.size() - prefix.size() - 1));
    const auto eq = body.find('=');
    if (eq == std::string_view::npos || trim(body.substr(0, eq)) != "p_plus")
      throw ConfigError("signed dependence expects signed(p_plus=...)");
    const std::string v(trim(body.substr(eq + 1)));
    char* end = nullptr;
    p_plus = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) throw ConfigError("p_plus is not a number: '" + v + "'");
    return Dependence::signed_a;
  }
  throw ConfigError("unknown dependence '" + std::string(t) + "' (independent | equal | signed(p_plus=...))");
}

std::string_view map_kind_name(MapKind k) noexcept {
  switch (k) {
    case MapKind::affine: return "affine";
    case MapKind::max_affine: return "max_affine";
    case MapKind::pos_part_affine: return "pos_part_affine";
    case MapKind::sqrt_log: return "sqrt_log";
  }
  return "unknown";
}

MapKind parse_map_kind(std::string_view text) {
  const std::string_view t = trim(text);
  for (MapKind k : {MapKind::affine, MapKind::max_affine, MapKind::pos_part_affine, MapKind::sqrt_log})
    if (t == map_kind_name(k)) return k;
  throw ConfigError("unknown map kind '" + std::string(t) + "'");
}

MapFamily MapFamily::max_affine(CoeffLaw law) {
  if (law.dependence == Dependence::signed_a) throw PreconditionError("max_affine requires A >= 0");
  return {MapKind::max_affine, std::move(law), 0.0, std::nullopt, 0.0};
}

MapFamily MapFamily::pos_part_affine(CoeffLaw law, double lower_b) {
  if (!(lower_b > 0)) throw PreconditionError("pos_part_affine: lower bound b must be > 0");
  if (!(law.marginal_b.support_low() > -lower_b))
    throw PreconditionError("pos_part_affine: B must satisfy B > -b");
  if (law.dependence == Dependence::signed_a) throw PreconditionError("pos_part_affine requires A > 0");
  return {MapKind::pos_part_affine, std::move(law), lower_b, std::nullopt, 0.0};
}

MapFamily MapFamily::sqrt_log(CoeffLaw law, TailModel c, std::optional<double> c_c) {
  if (law.dependence != Dependence::independent) throw PreconditionError("sqrt_log requires independent A, B, C");
  if (!nonneg(law.marginal_a) || !nonneg(law.marginal_b) || !nonneg(c))
    throw PreconditionError("sqrt_log requires A, B, C >= 0");
  double cc = 0.0;
  if (c_c)
    cc = *c_c;
  else if (auto derived = tail_ratio_constant(c, law.marginal_a))
    cc = *derived;
  return {MapKind::sqrt_log, std::move(law), 0.0, c, cc};
}

double RealizedMap::envelope_coeff() const noexcept {
  switch (kind_) {
    case MapKind::affine: return std::abs(k_.b);
    case MapKind::max_affine: return k_.b;
    case MapKind::pos_part_affine: return k_.a * lower_b_ + k_.b;
    case MapKind::sqrt_log: return k_.b + k_.c;
  }
  return 0.0;
}

double RealizedMap::lipschitz() const noexcept {
  // On [0, inf), x -> sqrt(x) log^+(x) has Lipschitz constant 1 (its slope peaks at x = 1).
  if (kind_ == MapKind::sqrt_log) return std::abs(k_.a) + std::abs(k_.b);
  return std::abs(k_.a);
}

Coefficients draw_coefficients(const MapFamily& family, RngStream& rng) {
  const CoeffLaw& law = family.coeff;
  Coefficients k;
  switch (law.dependence) {
    case Dependence::independent:
      k.a = law.marginal_a.sample(rng);
      k.b = law.marginal_b.sample(rng);
      break;
    case Dependence::equal:
      k.a = law.marginal_a.sample(rng);
      k.b = k.a;
      break;
    case Dependence::signed_a: {
      const double w = law.marginal_a.sample(rng);
      const double s = rng.uniform() <= law.p_plus ? 1.0 : -1.0;
      k.a = s * w;
      k.b = law.marginal_b.sample(rng);
      break;
    }
  }
  if (family.marginal_c) k.c = family.marginal_c->sample(rng);
  return k;
}

bool has_closed_form_f(const MapFamily& f) noexcept {
  const CoeffLaw& c = f.coeff;
  const bool ab_nonneg = nonneg(c.marginal_a) && nonneg(c.marginal_b);
  switch (f.kind) {
    case MapKind::affine:
      if (c.dependence == Dependence::equal) return nonneg(c.marginal_a);
      if (c.dependence == Dependence::signed_a) return nonneg(c.marginal_b);
      return ab_nonneg;
    case MapKind::max_affine:
      return ab_nonneg && c.dependence != Dependence::signed_a;
    case MapKind::pos_part_affine:
      return nonneg(c.marginal_a) && c.dependence == Dependence::independent;
    case MapKind::sqrt_log:
      return c.dependence == Dependence::independent;
  }
  return false;
}

double f_plus(const MapFamily& f, double y, double alpha) {
  if (!has_closed_form_f(f)) no_closed_form(f);
  const CoeffLaw& c = f.coeff;
  switch (f.kind) {
    case MapKind::affine:
      switch (c.dependence) {
        case Dependence::independent: return powa(pos(y), alpha) + c.c_b;
        case Dependence::equal: return powa(pos(y + 1.0), alpha);
        case Dependence::signed_a: {
          const double r = (1.0 - c.p_plus) / c.p_plus;
          return powa(pos(y), alpha) + r * powa(neg(y), alpha) + c.c_b / c.p_plus;
        }
      }
      break;
    case MapKind::max_affine:
      if (c.dependence == Dependence::equal) return std::pow(std::max(y, 1.0), alpha);
      return powa(pos(y), alpha) + c.c_b;
    case MapKind::pos_part_affine: return powa(pos(y), alpha) + c.c_b;
    case MapKind::sqrt_log: {
      const double yp = pos(y);
      const double nl = yp > 1.0 ? std::sqrt(yp) * std::log(yp) : 0.0;
      return powa(yp, alpha) + c.c_b * powa(nl, alpha) + f.c_c;
    }
  }
  no_closed_form(f);
}

double f_minus(const MapFamily& f, double y, double alpha) {
  if (!has_closed_form_f(f)) no_closed_form(f);
  if (f.kind == MapKind::affine && f.coeff.dependence == Dependence::signed_a) {
    const double r = (1.0 - f.coeff.p_plus) / f.coeff.p_plus;
    return powa(neg(y), alpha) + r * powa(pos(y), alpha);
  }
  return 0.0;
}

FBoundReport f_bound_check(const MapFamily& family, double alpha, std::span<const double> y_grid) {
  FBoundReport rep;
  const double scale = std::pow(2.0, alpha);
  const double fp0 = f_plus(family, 0.0, alpha);
  const double fm0 = f_minus(family, 0.0, alpha);
  for (double y : y_grid) {
    const double sp = scale * (powa(pos(y), alpha) + fp0) - f_plus(family, y, alpha);
    const double sm = scale * (powa(neg(y), alpha) + fm0) - f_minus(family, y, alpha);
    const double slack = std::min(sp, sm);
    rep.min_slack = std::min(rep.min_slack, slack);
    rep.max_slack = std::max(rep.max_slack, std::max(sp, sm));
    if (slack < -1e-12 * (1.0 + scale * (powa(std::abs(y), alpha) + fp0 + fm0))) {
      rep.holds = false;
      rep.offending_y.push_back(y);
    }
  }
  return rep;
}

EltonReport elton_precheck(const MapFamily& family, std::size_t n_mc, std::uint64_t seed) {
  if (n_mc < 1000) throw PreconditionError("elton_precheck: n_mc must be >= 1000");
  RngStream rng(seed, 0);
  double s_l = 0, s_l2 = 0, s_p = 0, s_p2 = 0, s_d = 0, s_d2 = 0;
  bool l_neg_inf = false, d_neg_inf = false;
  for (std::size_t i = 0; i < n_mc; ++i) {
    const RealizedMap psi = draw_map(family, rng);
    const double lip = psi.lipschitz();
    const double disp = std::abs(psi(0.0));
    const double ll = std::log(lip);
    const double ld = std::log(disp);
    if (std::isnan(ll) || ll == kInf || std::isnan(ld) || ld == kInf) {
      const auto& k = psi.coefficients();
      std::ostringstream os;
      os << "elton_precheck: non-finite sample at draw " << i << " (A=" << k.a << ", B=" << k.b << ", C=" << k.c << ")";
      throw NumericError(os.str());
    }
    if (ll == -kInf) {
      l_neg_inf = true;
    } else {
      s_l += ll;
      s_l2 += ll * ll;
      const double lp = ll > 0 ? ll : 0.0;
      s_p += lp;
      s_p2 += lp * lp;
    }
    if (ld == -kInf) {
      d_neg_inf = true;
    } else {
      s_d += ld;
      s_d2 += ld * ld;
    }
  }
  const double n = static_cast<double>(n_mc);
  auto est = [n](double s, double s2) {
    const double m = s / n;
    const double var = std::max(0.0, s2 / n - m * m);
    return McEstimate{m, std::sqrt(var * n / (n - 1.0) / n)};
  };
  EltonReport rep;
  rep.e_log_l = l_neg_inf ? McEstimate{-kInf, 0.0} : est(s_l, s_l2);
  rep.e_logplus_l = est(s_p, s_p2);
  rep.e_log_disp = d_neg_inf ? McEstimate{-kInf, 0.0} : est(s_d, s_d2);
  rep.pass = rep.e_log_l.mean + 3.0 * rep.e_log_l.se < 0.0 && std::isfinite(rep.e_logplus_l.mean) &&
             rep.e_log_disp.mean < kInf;
  return rep;
}

}  // namespace irf
