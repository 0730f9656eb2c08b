// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

namespace rftbd {

/// log I_0(x) for x >= 0, the modified Bessel function of the first kind of
/// order zero. Power series below x = 15, asymptotic expansion above.
double log_i0(double x);

}  // namespace rftbd
