#pragma once

#include <functional>
#include <vector>

#include "xda/tensor.hpp"

namespace xda {

using TensorFn = std::function<Tensor(const std::vector<Tensor>&)>;

/// Compares the tape gradient of the scalar function `f` against central
/// finite differences. Returns the max over all coordinates of
/// |analytic - numeric| / max(1, |analytic|).
double finite_diff_check(const TensorFn& f, std::vector<Tensor> inputs, double eps);

}  // namespace xda
