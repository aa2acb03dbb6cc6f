#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "irf/engine.hpp"
#include "irf/maps.hpp"

namespace irf {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for k successes out of n.
Interval wilson_interval(double k, double n, double z = kZ95);

struct TailEstimate {
  std::vector<double> t_grid;
  std::vector<double> p_hat;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  // Exceedance counts; for the smoothed estimator the equivalent count p^2 (1 - p) / se^2.
  std::vector<double> n_exceed;
  std::size_t n_total = 0;
};

// p_hat(t) = #{x > t} / N with 95% Wilson intervals; one pass over the sorted data.
TailEstimate ecdf_survival(std::span<const double> samples, std::span<const double> t_grid);

// Wraps smoothed points with normal intervals p +- z se, clipped to [0, 1].
TailEstimate from_smoothed(std::span<const SmoothedPoint> points, std::size_t n_total);

struct RatioCurve {
  std::vector<double> t;
  std::vector<double> ref_tail;
  std::vector<double> ratio;
  std::vector<double> lo;
  std::vector<double> hi;
};

RatioCurve ratio_curve(const TailEstimate& est, const std::function<double(double)>& ref_survival);
RatioCurve ratio_curve(const TailEstimate& est, const TailModel& ref, double scale = 1.0);

// Largest index with n_exceed >= min_exceed; nullopt-like -1 when none.
std::ptrdiff_t reliable_index(const TailEstimate& est, double min_exceed = 300.0);

// (max - min) / mean of the ratio over the last decade of t ending at index `last`.
double last_decade_spread(const RatioCurve& curve, std::ptrdiff_t last);

// Hill estimator from the k largest values.
double hill(std::span<const double> samples, std::size_t k);

enum class MomentKind { pow_plus, pow_minus, f_plus, f_minus };

struct MomentSpec {
  MomentKind kind = MomentKind::pow_plus;
  double alpha = 2.0;
  const MapFamily* family = nullptr;  // required for f_plus / f_minus
};

// Sample mean of g(x) with its jackknife standard error.
McEstimate plugin_moment(std::span<const double> samples, const MomentSpec& g);

// Geometric grid from the empirical lo-quantile to the hi_exceed-th largest sample.
std::vector<double> quantile_grid(std::span<const double> samples, double lo = 0.99, double hi_exceed = 300.0,
                                  std::size_t points = 20);

// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::span<const double> a, std::span<const double> b);

// CSV with columns t,p_hat,ci_lo,ci_hi,n_exceed,ref_tail,ratio,ratio_ci_lo,ratio_ci_hi.
void write_tail_csv(std::ostream& os, const TailEstimate& est, const RatioCurve& ratio);

}  // namespace irf
