// SPDX-License-Identifier: MIT
#include "mfstop/market.hpp"

#include <cmath>

#include "mfstop/errors.hpp"

namespace mfstop {

namespace {

void require_finite(const char* field, double v) {
    if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
}

}  // namespace

void validate(const MarketParams& p) {
    require_finite("alpha", p.alpha);
    require_finite("sigma", p.sigma);
    require_finite("beta", p.beta);
    require_finite("x0", p.x0);
    require_finite("K", p.K);
    require_finite("theta", p.theta);
    require_finite("l1", p.l1);
    require_finite("l2", p.l2);
    if (p.sigma <= 0.0) throw ValidationError("sigma", "must be > 0");
    if (p.x0 <= 0.0) throw ValidationError("x0", "must be > 0");
    if (p.K <= 0.0) throw ValidationError("K", "must be > 0");
    if (p.beta <= 0.0) throw ValidationError("beta", "must be > 0");
    if (p.l2 <= 0.0) throw ValidationError("l2", "must be > 0");
    if (p.l1 < 0.0) throw ValidationError("l1", "must be >= 0");
    if (p.theta < 0.0 || p.theta > 1.0) throw ValidationError("theta", "must lie in [0, 1]");
    if (p.beta <= p.alpha)
        throw ValidationError("beta", "must exceed alpha (otherwise the stopping value is infinite)");
}

}  // namespace mfstop
