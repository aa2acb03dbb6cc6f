#include "irf/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "irf/errors.hpp"

namespace irf::quad {

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol) {
  if (a == b) return {};
  double err = 0.0;
  double l1 = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 18, rel_tol, &err, &l1);
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "quadrature produced a non-finite value on [" << a << ", " << b << "]";
    throw NumericError(os.str());
  }
  // Boost reports the error relative to the L1 norm; accept anything within 100x of the request.
  const double allowed = std::max(100.0 * rel_tol * l1, abs_tol);
  if (err > allowed && err > 1e-300) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << a << ", " << b << "]: value " << value << ", error " << err;
    throw NumericError(os.str());
  }
  return {value, err};
}

}  // namespace irf::quad
