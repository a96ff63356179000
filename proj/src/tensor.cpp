#include "xda/tensor.hpp"

#include <cmath>
#include <sstream>

#include "xda/error.hpp"

namespace xda {

std::int64_t numel(const Shape& shape) {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

static void check_extents(const Shape& shape) {
    for (int d : shape) {
        if (d < 0) throw DimensionError("negative extent in shape " + shape_str(shape));
    }
}

Tensor Tensor::zeros(Shape shape) {
    check_extents(shape);
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_.assign(static_cast<std::size_t>(numel(t.shape_)), 0.0);
    return t;
}

Tensor Tensor::full(Shape shape, double value) {
    check_extents(shape);
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_.assign(static_cast<std::size_t>(numel(t.shape_)), value);
    return t;
}

Tensor Tensor::scalar(double value) { return full({1}, value); }

Tensor Tensor::from(Shape shape, std::vector<double> values) {
    check_extents(shape);
    if (numel(shape) != static_cast<std::int64_t>(values.size())) {
        throw DimensionError("shape " + shape_str(shape) + " expects " +
                             std::to_string(numel(shape)) + " values, got " +
                             std::to_string(values.size()));
    }
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(values);
    return t;
}

double Tensor::item() const {
    if (data_.size() != 1) {
        throw ContractError("item() requires a one-element tensor, got shape " + shape_str(shape_));
    }
    return data_[0];
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor Tensor::detached() const {
    Tensor t = *this;
    t.tape_serial_ = 0;
    t.tape_node_ = -1;
    return t;
}

}  // namespace xda
