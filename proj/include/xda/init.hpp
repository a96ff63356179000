#pragma once

#include <cmath>
#include <random>

#include "xda/tensor.hpp"

namespace xda {

/// Fan-in-scaled uniform init, bound = gain * sqrt(3 / fan_in).
Tensor kaiming_uniform(Shape shape, int fan_in, double gain, std::mt19937_64& rng);

/// Gain matching a trailing leaky ReLU with the given negative slope.
inline double leaky_gain(double alpha) { return std::sqrt(2.0 / (1.0 + alpha * alpha)); }

}  // namespace xda
