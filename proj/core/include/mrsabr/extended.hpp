#pragma once

// Extended-precision scalar used for closed-form evaluation and for
// high-accuracy verification runs.

#include <boost/multiprecision/float128.hpp>

namespace mrsabr {

using Quad = boost::multiprecision::float128;

}  // namespace mrsabr
