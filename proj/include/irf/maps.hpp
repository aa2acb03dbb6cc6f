#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irf/dist.hpp"
#include "irf/rng.hpp"

namespace irf {

enum class Dependence { independent, equal, signed_a };

// Joint law of the coefficients (A, B).
//
// independent: A ~ marginal_a, B ~ marginal_b, independent.
// equal:       A = B ~ marginal_a pathwise.
// signed_a:    A = eps * W, W ~ marginal_a, P[eps = +1] = p_plus, eps independent of (W, B),
//              B ~ marginal_b independent of W.
//
// c_b is lim P[B > t] / P[|A| > t], i.e. the B tail measured against the law of |A| (W).
struct CoeffLaw {
  TailModel marginal_a;
  TailModel marginal_b;
  Dependence dependence = Dependence::independent;
  double p_plus = 1.0;
  double c_b = 0.0;

  // Validates and fills c_b from the marginals when it can be read off them.
  static CoeffLaw make(TailModel a, TailModel b, Dependence dep, double p_plus = 1.0,
                       std::optional<double> c_b = std::nullopt);

  // Reference tail P[A > t] used to normalize every tail constant (p_plus * S_W(t)).
  double reference_survival(double t) const noexcept { return ref_scale() * marginal_a.survival(t); }
  double ref_scale() const noexcept { return dependence == Dependence::signed_a ? p_plus : 1.0; }

  // mu_plus = E[A_+^alpha], mu_minus = E[A_-^alpha].
  double mu_plus(double alpha) const;
  double mu_minus(double alpha) const;
};

std::string dependence_to_string(const CoeffLaw& law);
// `independent | equal | signed(p_plus=0.75)`
Dependence parse_dependence(std::string_view text, double& p_plus);

enum class MapKind { affine, max_affine, pos_part_affine, sqrt_log };

std::string_view map_kind_name(MapKind k) noexcept;
MapKind parse_map_kind(std::string_view text);

// A random Lipschitz map Psi(x) = A x + Phi(x):
//   affine           A x + B
//   max_affine       max(A x, B)
//   pos_part_affine  A x^+ + B              (B > -lower_b)
//   sqrt_log         A x + B sqrt(x^+) log^+(x) + C
struct MapFamily {
  MapKind kind = MapKind::affine;
  CoeffLaw coeff;
  double lower_b = 0.0;
  std::optional<TailModel> marginal_c;
  double c_c = 0.0;

  static MapFamily affine(CoeffLaw law) { return {MapKind::affine, std::move(law), 0.0, std::nullopt, 0.0}; }
  static MapFamily max_affine(CoeffLaw law);
  static MapFamily pos_part_affine(CoeffLaw law, double lower_b);
  static MapFamily sqrt_log(CoeffLaw law, TailModel c, std::optional<double> c_c = std::nullopt);

  // Tail index of A (the alpha of the regularly varying reference tail).
  double alpha() const noexcept { return coeff.marginal_a.tail_index(); }
};

struct Coefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// phi(x) of the envelope |Psi(x) - A x| <= B~ phi(|x|).
inline double envelope_phi(MapKind kind, double x) noexcept {
  if (kind != MapKind::sqrt_log) return 1.0;
  const double xp = x > 0 ? x : 0.0;
  return (xp > 1.0 ? std::sqrt(xp) * std::log(xp) : 0.0) + 1.0;
}

class RealizedMap {
 public:
  RealizedMap(MapKind kind, Coefficients k, double lower_b = 0.0) noexcept
      : kind_(kind), k_(k), lower_b_(lower_b) {}

  double operator()(double x) const noexcept {
    switch (kind_) {
      case MapKind::affine: return k_.a * x + k_.b;
      case MapKind::max_affine: return std::max(k_.a * x, k_.b);
      case MapKind::pos_part_affine: return k_.a * (x > 0 ? x : 0.0) + k_.b;
      case MapKind::sqrt_log: {
        const double nl = x > 1.0 ? std::sqrt(x) * std::log(x) : 0.0;
        return k_.a * x + k_.b * nl + k_.c;
      }
    }
    return k_.a * x + k_.b;
  }

  const Coefficients& coefficients() const noexcept { return k_; }
  MapKind kind() const noexcept { return kind_; }

  // B~ of the envelope.
  double envelope_coeff() const noexcept;
  // Upper bound on Lip(Psi); exact for affine.
  double lipschitz() const noexcept;

 private:
  MapKind kind_;
  Coefficients k_;
  double lower_b_;
};

// Draws (A, B[, C]) according to the dependence structure. Consumes a fixed number of uniforms
// per call for a given family.
Coefficients draw_coefficients(const MapFamily& family, RngStream& rng);

inline RealizedMap draw_map(const MapFamily& family, RngStream& rng) {
  return RealizedMap(family.kind, draw_coefficients(family, rng), family.lower_b);
}

// lim_t P[Psi(y) > t] / P[A > t] (f_plus) and lim_t P[Psi(y) < -t] / P[A > t] (f_minus).
// Throws PreconditionError for (kind, dependence) pairs without a closed form.
double f_plus(const MapFamily& family, double y, double alpha);
double f_minus(const MapFamily& family, double y, double alpha);
bool has_closed_form_f(const MapFamily& family) noexcept;

struct FBoundReport {
  bool holds = true;
  // min over the grid of the bound minus f (>= 0 when the bound holds).
  double min_slack = INFINITY;
  double max_slack = 0.0;
  std::vector<double> offending_y;
};

// Checks f_pm(y) <= 2^alpha (y_pm^alpha + f_pm(0)) on y_grid.
FBoundReport f_bound_check(const MapFamily& family, double alpha, std::span<const double> y_grid);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

struct EltonReport {
  McEstimate e_log_l;
  McEstimate e_logplus_l;
  McEstimate e_log_disp;
  bool pass = false;
};

// Monte Carlo check of E[log L] < 0, E[log^+ L] < inf and E[log |x0 - Psi(x0)|] < inf at x0 = 0.
EltonReport elton_precheck(const MapFamily& family, std::size_t n_mc, std::uint64_t seed);

}  // namespace irf
