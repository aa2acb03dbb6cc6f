#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irf/maps.hpp"

namespace irf {

enum class Method { chain, perpetuity, smoothed };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view text);

struct SimConfig {
  std::size_t n_samples = 0;
  std::size_t burn_in = 64;
  std::uint64_t seed = 0;
  std::size_t chunk_size = std::size_t{1} << 16;
  Method method = Method::chain;
  double truncation_eps = 1e-3;
  double x_init = 0.0;
  int workers = 1;

  // Throws ConfigError on n_samples < 1, burn_in < 1, chunk_size < 1, eps outside (0, 1), workers < 1.
  void validate() const;
};

struct SampleBatch {
  std::vector<double> values;
  Method method = Method::chain;
  std::uint64_t seed = 0;
  SimConfig config;
  // Perpetuity only: number of series terms and the Markov remainder bound.
  std::size_t truncation_terms = 0;
  double remainder_bound = 0.0;
};

// n_samples independent replicas of R_{n0} started at x_init; replica i uses RngStream(seed, i).
// Runs elton_precheck first and throws PreconditionError when it fails.
SampleBatch sample_stationary_chain(const MapFamily& family, const SimConfig& cfg);

struct Truncation {
  std::size_t terms = 0;
  double bound = 0.0;
  double s = 1.0;
  double m_s = 0.0;
};

// Smallest K with E|A|^s^K E|B|^s / (1 - E|A|^s) < eps, s = min(1, alpha).
Truncation perpetuity_truncation(const CoeffLaw& coeff, double eps);

// Truncated series sum_{k<K} B_{k+1} prod_{j<=k} A_j; replica i uses RngStream(seed, i).
SampleBatch sample_perpetuity(const CoeffLaw& coeff, const SimConfig& cfg);

// One more random map applied to every sample (replica i uses RngStream(seed, i)).
std::vector<double> apply_one_step(const MapFamily& family, std::span<const double> values, std::uint64_t seed,
                                   int workers = 1);

enum class Side { right, left };

// Exact P[Psi(y) > t] (right) or P[Psi(y) < -t] (left) for a fixed y, by quadrature over
// the coefficient quantiles where no closed form exists.
class ConditionalTail {
 public:
  // Throws PreconditionError when the (kind, dependence, side) has no supported form or t <= 0.
  ConditionalTail(const MapFamily& family, double t, Side side);

  double operator()(double y) const;

  // True when evaluation needs quadrature (callers then tabulate in y).
  bool needs_table() const noexcept { return integral_; }
  // |y| values where the map y -> P[...] has a kink; positive and negative y listed separately.
  std::vector<double> kinks(bool positive_y) const;
  double t() const noexcept { return t_; }

  struct Nodes {
    std::vector<double> x;
    std::vector<double> w;
  };

 private:
  // E_B S_W((t - B)/y), E_W S_B(t + W y), E_B S_W((t + B)/y) for y > 0.
  double i1(double y) const;
  double i2(double y) const;
  double i3(double y) const;

  MapFamily family_;
  double t_;
  Side side_;
  bool integral_ = false;
  Nodes nodes_w_;
  Nodes nodes_b_;
};

bool smoothing_supported(const MapFamily& family, Side side) noexcept;

struct SmoothedPoint {
  double t = 0.0;
  double p = 0.0;
  double se = 0.0;
  // p^2 (1 - p) / se^2: the exceedance count an indicator estimator would need for the same se.
  double n_equiv = 0.0;
};

// Rao-Blackwellized tail: mean over samples y of P[Psi(y) > t]. OpenMP kernel over tabulated
// conditional tails; p is forced non-increasing in t.
std::vector<SmoothedPoint> smoothed_tail(std::span<const double> samples, const MapFamily& family,
                                         std::span<const double> t_grid, Side side = Side::right,
                                         int workers = 1, std::size_t chunk_size = std::size_t{1} << 16);

// Same estimator with the exact conditional evaluated per sample (no table); reference for tests.
std::vector<SmoothedPoint> smoothed_tail_direct(std::span<const double> samples, const MapFamily& family,
                                                std::span<const double> t_grid, Side side = Side::right);

// Binary batch file: "IRFB", u32 version, u64 count, then count little-endian doubles.
// A sidecar `<path>.cfg` holds the config echo.
void write_batch(const std::string& path, const SampleBatch& batch, std::string_view config_echo);
std::vector<double> read_batch(const std::string& path);

}  // namespace irf
