#pragma once

#include <string>
#include <variant>
#include <vector>

#include "somqe/errors.hpp"
#include "somqe/image.hpp"
#include "somqe/som.hpp"

namespace somqe {

/// One 1-D vector per pixel: intensity / 255.
struct PixelScalar {
  bool operator==(const PixelScalar&) const = default;
};

/// Non-overlapping k x k blocks anchored at (0,0); partial blocks are dropped.
struct Patch {
  std::size_t k = 4;
  bool operator==(const Patch&) const = default;
};

/// One 3-D vector per pixel: (x / (w-1), y / (h-1), intensity / 255).
struct PixelPosition {
  bool operator==(const PixelPosition&) const = default;
};

using ExtractionStrategy = std::variant<PixelScalar, Patch, PixelPosition>;

inline std::size_t feature_dim(const ExtractionStrategy& strategy) {
  if (const auto* p = std::get_if<Patch>(&strategy)) return p->k * p->k;
  return std::holds_alternative<PixelScalar>(strategy) ? 1 : 3;
}

inline std::string strategy_name(const ExtractionStrategy& strategy) {
  if (const auto* p = std::get_if<Patch>(&strategy)) return "patch" + std::to_string(p->k);
  return std::holds_alternative<PixelScalar>(strategy) ? "pixel" : "position";
}

inline FeatureDataset extract_vectors(const GrayImage& image, const ExtractionStrategy& strategy) {
  if (image.width == 0 || image.height == 0 || image.data.size() != image.width * image.height)
    throw InputError("invalid image");
  constexpr double kScale = 1.0 / 255.0;
  const std::size_t w = image.width;
  const std::size_t h = image.height;
  std::vector<double> values;

  if (std::holds_alternative<PixelScalar>(strategy)) {
    values.reserve(w * h);
    for (auto v : image.data) values.push_back(v * kScale);
    return FeatureDataset(1, std::move(values));
  }

  if (std::holds_alternative<PixelPosition>(strategy)) {
    values.reserve(3 * w * h);
    const double sx = w > 1 ? 1.0 / static_cast<double>(w - 1) : 0.0;
    const double sy = h > 1 ? 1.0 / static_cast<double>(h - 1) : 0.0;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        values.push_back(static_cast<double>(x) * sx);
        values.push_back(static_cast<double>(y) * sy);
        values.push_back(image.at(x, y) * kScale);
      }
    }
    return FeatureDataset(3, std::move(values));
  }

  const std::size_t k = std::get<Patch>(strategy).k;
  if (k == 0) throw InputError("patch size must be positive");
  if (k > w || k > h)
    throw InputError("patch size " + std::to_string(k) + " exceeds image " + std::to_string(w) + "x" +
                     std::to_string(h));
  const std::size_t bw = w / k;
  const std::size_t bh = h / k;
  values.reserve(bw * bh * k * k);
  for (std::size_t by = 0; by < bh; ++by) {
    for (std::size_t bx = 0; bx < bw; ++bx) {
      for (std::size_t dy = 0; dy < k; ++dy) {
        const std::uint8_t* row = image.data.data() + (by * k + dy) * w + bx * k;
        for (std::size_t dx = 0; dx < k; ++dx) values.push_back(row[dx] * kScale);
      }
    }
  }
  return FeatureDataset(k * k, std::move(values));
}

}  // namespace somqe
