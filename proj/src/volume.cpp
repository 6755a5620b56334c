#include "xfer/volume.hpp"

#include <cmath>

#include "xfer/error.hpp"

namespace xfer {

std::string to_string(const Shape& s) {
  return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" +
         std::to_string(s.width);
}

namespace {
void check_dims(const Shape& s) {
  if (s.channels == 0 || s.height == 0 || s.width == 0) {
    throw ShapeError("volume dimensions must be >= 1, got " + to_string(s));
  }
}
}  // namespace

Volume::Volume(Shape shape, double fill) : shape_(shape) {
  check_dims(shape_);
  data_.assign(shape_.size(), fill);
}

Volume::Volume(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  check_dims(shape_);
  if (data_.size() != shape_.size()) {
    throw ShapeError("volume " + to_string(shape_) + " needs " + std::to_string(shape_.size()) +
                     " values, got " + std::to_string(data_.size()));
  }
}

Volume Volume::vector(std::vector<double> values) {
  const Shape s{values.size(), 1, 1};
  return Volume(s, std::move(values));
}

Volume Volume::flattened() const { return reshaped(Shape{size(), 1, 1}); }

Volume Volume::reshaped(Shape shape) const {
  if (shape.size() != size()) {
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  return Volume(shape, data_);
}

bool Volume::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(std::span<const double> values, const std::string& where) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in " + where);
  }
}

}  // namespace xfer
