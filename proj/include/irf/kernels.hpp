#pragma once

// Inner loops of the engine. Every kernel has a serial version and an OpenMP version with
// identical output; the serial ones are kept as the reference for tests and benchmarks.

#include <cstdint>
#include <span>
#include <vector>

#include "irf/engine.hpp"

namespace irf::kernels {

struct ChainParams {
  std::uint64_t seed = 0;
  std::size_t burn_in = 64;
  double x_init = 0.0;
};

// out[i] = replica (first + i).
void chain_serial(const MapFamily& family, const ChainParams& p, std::size_t first, std::span<double> out);
void chain_omp(const MapFamily& family, const ChainParams& p, std::span<double> out, std::size_t chunk,
               int workers);

void perpetuity_serial(const CoeffLaw& coeff, std::uint64_t seed, std::size_t terms, std::size_t first,
                       std::span<double> out);
void perpetuity_omp(const CoeffLaw& coeff, std::uint64_t seed, std::size_t terms, std::span<double> out,
                    std::size_t chunk, int workers);

// A conditional tail y -> H(y) either evaluated in closed form or interpolated from a table
// on a log|y| grid (cubic Hermite in log H) split at the kinks of H.
class TailTable {
 public:
  TailTable(const ConditionalTail& h, double y_min_pos, double y_max_pos, double y_min_neg, double y_max_neg,
            int workers = 1);

  double operator()(double y) const;
  // Same with log|y| supplied by the caller (shared across tables in the kernels).
  double at(double y, double log_abs_y) const;
  bool tabulated() const noexcept { return tabulated_; }

  struct Segment {
    double lo = 0.0;  // log|y|
    double hi = 0.0;
    double step = 0.0;
    bool log_scale = true;
    std::vector<double> v;
  };

 private:
  double eval(const std::vector<Segment>& segs, double ay) const noexcept;

  ConditionalTail h_;
  bool tabulated_ = false;
  std::vector<Segment> pos_;
  std::vector<Segment> neg_;
  double at_zero_ = 0.0;
};

struct Sums {
  std::vector<double> s1;
  std::vector<double> s2;
};

// Per-t sums of H(y) and H(y)^2, accumulated chunk by chunk and merged in chunk order.
Sums smoothed_serial(std::span<const TailTable> tables, std::span<const double> y, std::size_t chunk);
Sums smoothed_omp(std::span<const TailTable> tables, std::span<const double> y, std::size_t chunk, int workers);

}  // namespace irf::kernels
