#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "irf/rng.hpp"

namespace irf {

enum class Family { pareto, log_pareto, exp_poly, exp_stretched, constant };

std::string_view family_name(Family f) noexcept;

// A right-unbounded parametric law given by its survival function S(t) = P[X > t].
//
//   pareto(alpha, x0)                 S(t) = (x0/t)^alpha                                 t >= x0
//   log_pareto(alpha, beta, x0)       S(t) = (x0/t)^alpha (1 + log(t/x0))^-beta          t >= x0
//   exp_poly(alpha, p, t0)            S(t) = (t/t0)^p exp(-alpha (t - t0))                t >= t0
//   exp_stretched(alpha, beta, gamma, t0)
//                                     S(t) = exp(-alpha (t - t0) - beta (t^gamma - t0^gamma))
//   constant(c)                       point mass at c
//
// S(t) = 1 below the support edge. Values are immutable after construction.
class TailModel {
 public:
  static TailModel pareto(double alpha, double x0);
  static TailModel log_pareto(double alpha, double beta, double x0);
  static TailModel exp_poly(double alpha, double p, double t0);
  static TailModel exp_stretched(double alpha, double beta, double gamma, double t0);
  static TailModel constant(double c);

  // Parses `family(key=value, ...)`, e.g. `log_pareto(alpha=2.0, beta=3.0, x0=0.4)`.
  static TailModel parse(std::string_view text);
  std::string to_string() const;

  Family family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  double p() const noexcept { return p_; }
  // x0, t0, or the atom c.
  double support_low() const noexcept { return low_; }
  bool is_constant() const noexcept { return family_ == Family::constant; }

  // Power-law index of the right tail; +inf for the exponential-type and constant families.
  double tail_index() const noexcept;

  double survival(double t) const noexcept;
  // log S(t); -inf where S(t) = 0.
  double log_survival(double t) const noexcept;

  // t with S(t) = u for u in (0, 1]. Closed form for pareto, safeguarded Newton otherwise.
  double quantile(double u) const;
  // Bracket-doubling plus bisection; kept as an independent route for tests.
  double quantile_bisect(double u) const;

  double sample(RngStream& rng) const { return is_constant() ? low_ : quantile(rng.uniform()); }

  // E[|X|^s] for s >= 0; +inf when the integral diverges.
  double alpha_moment(double s) const;
  // Same quantity by quadrature only (no closed forms).
  double alpha_moment_quadrature(double s) const;
  // E[log X]; requires support in (0, inf).
  double log_moment() const;

  bool operator==(const TailModel&) const = default;

 private:
  TailModel(Family f, double alpha, double beta, double gamma, double p, double low)
      : family_(f), alpha_(alpha), beta_(beta), gamma_(gamma), p_(p), low_(low) {}

  Family family_;
  double alpha_;
  double beta_;
  double gamma_;
  double p_;
  double low_;
};

// lim_{t->inf} S_b(t) / S_a(t) where it can be read off the parameters; nullopt otherwise.
std::optional<double> tail_ratio_constant(const TailModel& b, const TailModel& a);

// A law on the real line seen through its survival function. Built either from a TailModel
// directly (the model already lives on the log scale) or as the law of log X (log_view).
class LogTail {
 public:
  static LogTail direct(const TailModel& m);
  // Law of log X for X ~ m; m must be supported in (0, inf).
  static LogTail log_view(const TailModel& m);

  // Law of Y + c.
  LogTail shifted(double c) const;

  double survival(double t) const noexcept;
  double log_survival(double t) const noexcept;
  double support_low() const noexcept;
  bool is_point_mass() const noexcept { return base_.is_constant(); }
  double atom() const noexcept;

  // m_alpha = E[exp(alpha Y)]; +inf when divergent.
  double exp_moment(double alpha) const;

  // K(t) = exp(alpha t) S(t).
  double k_function(double alpha, double t) const noexcept;

  const TailModel& base() const noexcept { return base_; }
  bool is_log_view() const noexcept { return log_view_; }
  double shift() const noexcept { return shift_; }

 private:
  LogTail(TailModel base, bool log_view, double shift) : base_(base), log_view_(log_view), shift_(shift) {}

  TailModel base_;
  bool log_view_;
  double shift_;
};

}  // namespace irf
