#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pimdc {

// Dense H x W x C feature map (HWC row-major, float32). Flat vectors are
// stored as 1 x 1 x N. Ops treat tensors as immutable values.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::int64_t h, std::int64_t w, std::int64_t c)
      : h_(h), w_(w), c_(c), data_(volume(h, w, c), 0.0f) {}

  static Tensor flat(std::vector<float> values) {
    Tensor t;
    t.h_ = 1;
    t.w_ = 1;
    t.c_ = static_cast<std::int64_t>(values.size());
    t.data_ = std::move(values);
    return t;
  }

  static Tensor from_data(std::int64_t h, std::int64_t w, std::int64_t c,
                          std::vector<float> values) {
    if (values.size() != volume(h, w, c)) {
      throw std::invalid_argument("tensor data length does not match dims");
    }
    Tensor t;
    t.h_ = h;
    t.w_ = w;
    t.c_ = c;
    t.data_ = std::move(values);
    return t;
  }

  std::int64_t h() const { return h_; }
  std::int64_t w() const { return w_; }
  std::int64_t c() const { return c_; }
  std::size_t size() const { return data_.size(); }

  float at(std::int64_t y, std::int64_t x, std::int64_t ch) const {
    return data_[index(y, x, ch)];
  }
  float& at(std::int64_t y, std::int64_t x, std::int64_t ch) {
    return data_[index(y, x, ch)];
  }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  bool same_shape(const Tensor& other) const {
    return h_ == other.h_ && w_ == other.w_ && c_ == other.c_;
  }

  bool all_finite() const {
    for (float v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  static std::size_t volume(std::int64_t h, std::int64_t w, std::int64_t c) {
    if (h < 1 || w < 1 || c < 1) throw std::invalid_argument("tensor dims must be >= 1");
    return static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
           static_cast<std::size_t>(c);
  }
  std::size_t index(std::int64_t y, std::int64_t x, std::int64_t ch) const {
    return (static_cast<std::size_t>(y) * w_ + x) * c_ + ch;
  }

  std::int64_t h_ = 0, w_ = 0, c_ = 0;
  std::vector<float> data_;
};

// Per-layer filter tensor, [m][c][r][s] row-major.
struct WeightBlock {
  std::int64_t m = 0, c = 0, r = 0, s = 0;
  std::vector<float> data;

  static WeightBlock make(std::int64_t m, std::int64_t c, std::int64_t r,
                          std::int64_t s, std::vector<float> values) {
    WeightBlock block{m, c, r, s, std::move(values)};
    std::size_t want = static_cast<std::size_t>(m) * c * r * s;
    if (block.data.size() != want) {
      throw std::invalid_argument("weight data length does not match dims");
    }
    return block;
  }

  float at(std::int64_t mo, std::int64_t ci, std::int64_t rr, std::int64_t ss) const {
    return data[((static_cast<std::size_t>(mo) * c + ci) * r + rr) * s + ss];
  }
};

}  // namespace pimdc
