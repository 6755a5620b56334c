#include <cctype>
#include <cmath>
#include <string>

#include "xfer/dataset.hpp"
#include "xfer/error.hpp"

namespace xfer {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) throw DecodeError(std::string("truncated header before ") + what, pos_);
    if (!std::isdigit(bytes_[pos_])) throw DecodeError(std::string("expected ") + what, pos_);
    std::size_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1u << 24) throw DecodeError(std::string(what) + " too large", pos_);
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw DecodeError("expected whitespace after maxval", pos_);
    }
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw DecodeError("bad magic, expected P6", 0);
  }
  HeaderReader r(bytes.subspan(2));
  const std::size_t w = r.number("width");
  const std::size_t h = r.number("height");
  const std::size_t before_max = r.pos() + 2;
  const std::size_t maxval = r.number("maxval");
  if (maxval != 255) {
    throw DecodeError("unsupported maxval " + std::to_string(maxval) + " (only 255)", before_max);
  }
  r.single_space();
  if (w == 0 || h == 0) throw DecodeError("zero image dimension", r.pos() + 2);
  const std::size_t start = r.pos() + 2;
  const std::size_t need = w * h * 3;
  if (bytes.size() - start < need) {
    throw DecodeError("truncated raster: need " + std::to_string(need) + " bytes, have " +
                          std::to_string(bytes.size() - start),
                      bytes.size());
  }
  Image img(w, h);
  const std::uint8_t* p = bytes.data() + start;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x, p += 3) {
      img.at(x, y) = Rgb{p[0] / 255.0, p[1] / 255.0, p[2] / 255.0};
    }
  }
  return img;
}

Image decode_ppm(const std::string& bytes) {
  return decode_ppm(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                    "\n255\n";
  const auto q = [](double v) {
    return static_cast<char>(static_cast<unsigned char>(std::lround(clamp01(v) * 255.0)));
  };
  out.reserve(out.size() + img.pixels().size() * 3);
  for (const Rgb& p : img.pixels()) {
    out.push_back(q(p.r));
    out.push_back(q(p.g));
    out.push_back(q(p.b));
  }
  return out;
}

}  // namespace xfer
