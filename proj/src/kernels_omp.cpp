#include <cmath>
#include <exception>
#include <vector>

#include "irf/kernels.hpp"

namespace irf::kernels {
namespace {

// Runs body(chunk_index, lo, hi) over fixed chunks on `workers` threads. An exception from the
// lowest failing chunk is rethrown after the loop, so the error matches the serial one.
template <class Body>
void for_chunks(std::size_t n, std::size_t chunk, int workers, const Body& body) {
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<std::exception_ptr> errors(n_chunks);
  const auto nc = static_cast<std::ptrdiff_t>(n_chunks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    try {
      body(static_cast<std::size_t>(c), lo, hi);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void chain_omp(const MapFamily& family, const ChainParams& p, std::span<double> out, std::size_t chunk,
               int workers) {
  for_chunks(out.size(), chunk, workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
    chain_serial(family, p, lo, out.subspan(lo, hi - lo));
  });
}

void perpetuity_omp(const CoeffLaw& coeff, std::uint64_t seed, std::size_t terms, std::span<double> out,
                    std::size_t chunk, int workers) {
  for_chunks(out.size(), chunk, workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
    perpetuity_serial(coeff, seed, terms, lo, out.subspan(lo, hi - lo));
  });
}

Sums smoothed_omp(std::span<const TailTable> tables, std::span<const double> y, std::size_t chunk, int workers) {
  const std::size_t nt = tables.size();
  const std::size_t n_chunks = (y.size() + chunk - 1) / chunk;
  std::vector<double> part1(n_chunks * nt), part2(n_chunks * nt);
  for_chunks(y.size(), chunk, workers, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    double* s1 = &part1[c * nt];
    double* s2 = &part2[c * nt];
    for (std::size_t i = lo; i < hi; ++i) {
      const double ly = std::log(std::abs(y[i]));
      for (std::size_t j = 0; j < nt; ++j) {
        const double h = tables[j].at(y[i], ly);
        s1[j] += h;
        s2[j] += h * h;
      }
    }
  });
  Sums total{std::vector<double>(nt), std::vector<double>(nt)};
  for (std::size_t c = 0; c < n_chunks; ++c) {
    for (std::size_t j = 0; j < nt; ++j) {
      total.s1[j] += part1[c * nt + j];
      total.s2[j] += part2[c * nt + j];
    }
  }
  return total;
}

}  // namespace irf::kernels
