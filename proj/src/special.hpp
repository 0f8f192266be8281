#pragma once

#include <complex>

namespace metascreen::detail {

using cplx = std::complex<double>;

// e^z - 1 without cancellation for small |z|.
cplx expm1c(cplx z);
// (e^z - 1)/z, equal to 1 at z = 0.
cplx phi1(cplx z);

// Li_s(e^w) for integer s in [-8, 6], Re w < 0 or (Re w = 0, w != 0), |Im w| <= pi.
cplx polylog_exp(int s, cplx w);

}  // namespace metascreen::detail
