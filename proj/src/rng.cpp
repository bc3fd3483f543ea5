#include "mstate/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>

namespace mstate {

double standard_normal(RandomStream& rng) {
  // Phi^{-1}(u) = -sqrt(2) * erfc^{-1}(2u)
  const double u = rng.uniform_open();
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

}  // namespace mstate
