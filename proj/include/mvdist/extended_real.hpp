#pragma once

#include <limits>

namespace mvdist {

// Extended-real limits are plain doubles: IEEE +-infinity are the sentinels
// and already order correctly against every finite value. NaN is rejected by
// validation and never enters the computational paths.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

}  // namespace mvdist
