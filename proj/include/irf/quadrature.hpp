#pragma once

#include <array>
#include <functional>
#include <limits>

namespace irf::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (15-point) over [a, b]; either bound may be infinite.
// Throws NumericError when the error estimate stays above tolerance.
Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-11,
                 double abs_tol = 0.0);

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGL8Nodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGL8Weights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Composite 8-point Gauss-Legendre over [a, b] split into `cells` equal cells.
template <class F>
double gauss_legendre(F&& f, double a, double b, int cells) {
  const double h = (b - a) / cells;
  double total = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double mid = a + (c + 0.5) * h;
    double s = 0.0;
    for (std::size_t k = 0; k < kGL8Nodes.size(); ++k) s += kGL8Weights[k] * f(mid + 0.5 * h * kGL8Nodes[k]);
    total += 0.5 * h * s;
  }
  return total;
}

}  // namespace irf::quad
