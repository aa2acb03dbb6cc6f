#include <cmath>
#include <sstream>

#include "irf/errors.hpp"
#include "irf/kernels.hpp"

namespace irf::kernels {

void chain_serial(const MapFamily& family, const ChainParams& p, std::size_t first, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t replica = first + i;
    RngStream rng(p.seed, replica);
    double x = p.x_init;
    for (std::size_t step = 1; step <= p.burn_in; ++step) {
      x = draw_map(family, rng)(x);
      if (!std::isfinite(x)) {
        std::ostringstream os;
        os << "non-finite state " << x << " in replica " << replica << " at step " << step;
        throw NumericError(os.str());
      }
    }
    out[i] = x;
  }
}

void perpetuity_serial(const CoeffLaw& coeff, std::uint64_t seed, std::size_t terms, std::size_t first,
                       std::span<double> out) {
  const MapFamily family = MapFamily::affine(coeff);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t replica = first + i;
    RngStream rng(seed, replica);
    double sum = 0.0;
    double prod = 1.0;
    for (std::size_t k = 0; k < terms; ++k) {
      const Coefficients c = draw_coefficients(family, rng);
      sum += prod * c.b;
      prod *= c.a;
      if (!std::isfinite(sum)) {
        std::ostringstream os;
        os << "non-finite partial sum " << sum << " in replica " << replica << " at term " << k;
        throw NumericError(os.str());
      }
    }
    out[i] = sum;
  }
}

Sums smoothed_serial(std::span<const TailTable> tables, std::span<const double> y, std::size_t chunk) {
  const std::size_t nt = tables.size();
  Sums total{std::vector<double>(nt), std::vector<double>(nt)};
  std::vector<double> s1(nt), s2(nt);
  for (std::size_t lo = 0; lo < y.size(); lo += chunk) {
    const std::size_t hi = std::min(y.size(), lo + chunk);
    std::fill(s1.begin(), s1.end(), 0.0);
    std::fill(s2.begin(), s2.end(), 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      const double ly = std::log(std::abs(y[i]));
      for (std::size_t j = 0; j < nt; ++j) {
        const double h = tables[j].at(y[i], ly);
        s1[j] += h;
        s2[j] += h * h;
      }
    }
    for (std::size_t j = 0; j < nt; ++j) {
      total.s1[j] += s1[j];
      total.s2[j] += s2[j];
    }
  }
  return total;
}

}  // namespace irf::kernels
