#pragma once

#include "hermix/bigreal.hpp"
#include "hermix/errors.hpp"
#include "hermix/estimator.hpp"
#include "hermix/hermite.hpp"
#include "hermix/intervals.hpp"
#include "hermix/io.hpp"
#include "hermix/lowerbound.hpp"
#include "hermix/matrix.hpp"
#include "hermix/mixture.hpp"
#include "hermix/parallel.hpp"
#include "hermix/quadrature.hpp"
#include "hermix/rng.hpp"

namespace hermix {
inline constexpr const char* kVersion = "0.1.0";
}
