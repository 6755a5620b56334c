#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace xfer {

/// Dimensions of a feature volume: channels x height x width.
struct Shape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t size() const { return channels * height * width; }
  bool flat() const { return height == 1 && width == 1; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Dense 3-D real tensor stored row-major in (channel, row, col) order.
/// A plain vector of n values is the volume n x 1 x 1.
class Volume {
 public:
  Volume() : Volume(Shape{}) {}
  explicit Volume(Shape shape, double fill = 0.0);
  Volume(Shape shape, std::vector<double> data);
  Volume(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0)
      : Volume(Shape{channels, height, width}, fill) {}

  /// n x 1 x 1 volume holding `values`.
  static Volume vector(std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }
  const double& at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Same data viewed as a flat vector (size x 1 x 1).
  Volume flattened() const;
  /// Same data with a new shape of equal size.
  Volume reshaped(Shape shape) const;

  bool all_finite() const;

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Throws NumericError naming `where` if any value is NaN or Inf.
void require_finite(std::span<const double> values, const std::string& where);

}  // namespace xfer
