#pragma once

// Deterministic bilevel test-pattern series. Every image is black (0) and
// white (255) only; the first image of a series is its reference.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "somqe/errors.hpp"
#include "somqe/image.hpp"
#include "somqe/random.hpp"

namespace somqe {

enum class SeriesKind { RandomWhite, RandomBlack, CheckerCount, CheckerSize, CentralSquare };

inline constexpr SeriesKind kAllSeriesKinds[] = {SeriesKind::RandomWhite, SeriesKind::RandomBlack,
                                                 SeriesKind::CheckerCount, SeriesKind::CheckerSize,
                                                 SeriesKind::CentralSquare};

inline std::string to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::RandomWhite: return "random-white";
    case SeriesKind::RandomBlack: return "random-black";
    case SeriesKind::CheckerCount: return "checker-count";
    case SeriesKind::CheckerSize: return "checker-size";
    case SeriesKind::CentralSquare: return "central-square";
  }
  return "?";
}

inline SeriesKind parse_series_kind(const std::string& name) {
  for (auto kind : kAllSeriesKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown series kind '" + name + "'");
}

inline bool is_random_kind(SeriesKind kind) {
  return kind == SeriesKind::RandomWhite || kind == SeriesKind::RandomBlack;
}

struct SeriesSpec {
  SeriesKind kind = SeriesKind::RandomWhite;
  std::size_t width = 792;
  std::size_t height = 777;
  std::vector<double> deltas;     // percent, one per image
  double baseline_density = 20.0; // percent foreground in the reference (random kinds)
  std::size_t cells = 5;          // lattice subdivision (checker kinds)
  std::uint64_t seed = 42;

  std::size_t count() const { return deltas.size(); }

  /// Default series for a kind: 792x777 with the stated delta progression.
  static SeriesSpec defaults(SeriesKind kind) {
    SeriesSpec s;
    s.kind = kind;
    switch (kind) {
      case SeriesKind::RandomWhite: s.deltas = {0, 10, 22.5, 35, 47.5, 60}; break;
      case SeriesKind::RandomBlack: s.deltas = {0, 20, 30}; break;
      case SeriesKind::CheckerCount:
        s.cells = 5;
        s.deltas = {8, 16, 24, 32, 40, 48, 56, 64, 72};
        break;
      case SeriesKind::CheckerSize:
        s.cells = 3;
        s.deltas = {2, 4, 6, 8, 10, 12, 14, 16, 18};
        break;
      case SeriesKind::CentralSquare: s.deltas = {1, 2, 4, 8, 16, 32}; break;
    }
    return s;
  }

  void validate() const {
    if (width == 0 || height == 0) throw ConfigError("series image size must be positive");
    if (deltas.empty()) throw ConfigError("series needs at least one image");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      if (!std::isfinite(deltas[i]) || deltas[i] < 0.0) throw ConfigError("deltas must be finite and non-negative");
      if (i > 0 && deltas[i] < deltas[i - 1]) throw ConfigError("deltas must be non-decreasing");
    }
    if (is_random_kind(kind)) {
      if (deltas.front() != 0.0) throw ConfigError("random series must start at delta 0 (the reference)");
      if (!(baseline_density >= 0.0 && baseline_density <= 100.0))
        throw ConfigError("baseline density must lie in [0, 100]");
      if (baseline_density + deltas.back() > 100.0)
        throw ConfigError("baseline + delta exceeds 100% of the image");
    } else {
      if (deltas.back() > 100.0) throw ConfigError("delta exceeds 100% of the image");
      if (kind != SeriesKind::CentralSquare && cells == 0) throw ConfigError("cells must be positive");
      if (kind != SeriesKind::CentralSquare && (cells > width || cells > height))
        throw ConfigError("more cells than pixels");
    }
  }

  bool operator==(const SeriesSpec&) const = default;
};

/// Generated images plus, per image, the integral quantity actually drawn:
/// foreground pixel count (random), white cell count (checker-count), pixel
/// area of one element (checker-size) or square side (central-square).
struct GeneratedSeries {
  std::vector<GrayImage> images;
  std::vector<std::size_t> units;
  std::vector<bool> rounded;  // true when the delta was not exactly representable
};

namespace detail {

// Rectangle of lattice cell `index` along one axis of length `extent` split
// into `cells` parts; the remainder goes to the last part.
inline std::pair<std::size_t, std::size_t> cell_span(std::size_t extent, std::size_t cells, std::size_t index) {
  const std::size_t base = extent / cells;
  const std::size_t begin = index * base;
  const std::size_t len = index + 1 == cells ? extent - begin : base;
  return {begin, len};
}

// True when `exact` is not an integer up to floating-point noise.
inline bool needs_rounding(double exact, std::size_t rounded) {
  return std::abs(exact - static_cast<double>(rounded)) > 1e-9 * std::max(1.0, std::abs(exact));
}

inline void fill_rect(GrayImage& img, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h,
                      std::uint8_t value) {
  for (std::size_t y = y0; y < y0 + h; ++y) std::fill_n(img.data.begin() + y * img.width + x0, w, value);
}

}  // namespace detail

/// Interleaved whitening order for a cells x cells lattice, as row-major
/// cell indices. Each step whitens the black cell whose flip changes the
/// white/black border (in cell edges) by the amount closest to +1, preferring
/// growth over shrinkage, then the lowest index. The border therefore grows
/// by about one edge per cell for as long as the lattice allows, and the
/// whitened cells stay interleaved with black holes instead of merging into
/// one block.
inline std::vector<std::size_t> checker_cell_order(std::size_t cells) {
  const std::size_t total = cells * cells;
  std::vector<bool> white(total, false);
  std::vector<std::size_t> order;
  order.reserve(total);

  auto border_change = [&](std::size_t idx) {
    const std::size_t r = idx / cells;
    const std::size_t c = idx % cells;
    int delta = 0;
    auto visit = [&](std::size_t n) { delta += white[n] ? -1 : 1; };
    if (r > 0) visit(idx - cells);
    if (r + 1 < cells) visit(idx + cells);
    if (c > 0) visit(idx - 1);
    if (c + 1 < cells) visit(idx + 1);
    return delta;
  };

  for (std::size_t step = 0; step < total; ++step) {
    std::size_t best = total;
    int best_delta = 0;
    for (std::size_t idx = 0; idx < total; ++idx) {
      if (white[idx]) continue;
      const int d = border_change(idx);
      const int miss = std::abs(d - 1);
      const int best_miss = std::abs(best_delta - 1);
      if (best == total || miss < best_miss || (miss == best_miss && d > best_delta)) {
        best = idx;
        best_delta = d;
      }
    }
    white[best] = true;
    order.push_back(best);
  }
  return order;
}

inline GeneratedSeries gen_random_contrast_series(const SeriesSpec& spec) {
  if (!is_random_kind(spec.kind)) throw ConfigError("not a random-contrast series kind");
  spec.validate();
  const std::size_t n = spec.width * spec.height;
  const bool white_fg = spec.kind == SeriesKind::RandomWhite;
  const std::uint8_t fg = white_fg ? 255 : 0;
  const std::uint8_t bg = white_fg ? 0 : 255;

  GeneratedSeries out;
  for (double delta : spec.deltas) {
    const double target = (spec.baseline_density + delta) / 100.0 * static_cast<double>(n);
    const auto count = static_cast<std::size_t>(std::llround(target));
    if (count > n) throw ConfigError("foreground target exceeds image area");
    out.units.push_back(count);
    out.rounded.push_back(detail::needs_rounding(target, count));
  }

  // Partial Fisher-Yates over pixel indices: the first k entries of the
  // permutation are the foreground of any image needing k pixels, so each
  // image's foreground contains the previous one's. Placement uses its own
  // stream, derived from the seed but distinct from the SOM stream.
  const std::size_t needed = out.units.back();
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  Engine engine(mix_seed(spec.seed ^ 0x5EED1A6E5EED1A6EULL));
  for (std::size_t i = 0; i < needed; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(engine, n - i));
    std::swap(perm[i], perm[j]);
  }

  GrayImage img(spec.width, spec.height, bg);
  std::size_t placed = 0;
  for (std::size_t count : out.units) {
    for (; placed < count; ++placed) img.data[perm[placed]] = fg;
    out.images.push_back(img);
  }
  return out;
}

inline GeneratedSeries gen_checker_count_series(const SeriesSpec& spec) {
  if (spec.kind != SeriesKind::CheckerCount) throw ConfigError("not a checker-count series");
  spec.validate();
  const std::size_t total = spec.cells * spec.cells;
  const auto order = checker_cell_order(spec.cells);

  GeneratedSeries out;
  for (double delta : spec.deltas) {
    const double target = delta / 100.0 * static_cast<double>(total);
    const auto lit = static_cast<std::size_t>(std::llround(target));
    GrayImage img(spec.width, spec.height, 0);
    for (std::size_t i = 0; i < lit; ++i) {
      const std::size_t r = order[i] / spec.cells;
      const std::size_t c = order[i] % spec.cells;
      const auto [x0, w] = detail::cell_span(spec.width, spec.cells, c);
      const auto [y0, h] = detail::cell_span(spec.height, spec.cells, r);
      detail::fill_rect(img, x0, y0, w, h, 255);
    }
    out.images.push_back(std::move(img));
    out.units.push_back(lit);
    out.rounded.push_back(detail::needs_rounding(target, lit));
  }
  return out;
}

/// Element footprint for a target area: the closest of s x s, (s+1) x s and
/// (s+1) x (s+1) with s = floor(sqrt(area)). Allowing one extra column halves
/// the area step of plain squares.
inline std::pair<std::size_t, std::size_t> near_square(double area) {
  const auto s = static_cast<std::size_t>(std::floor(std::sqrt(area)));
  std::pair<std::size_t, std::size_t> best{s, s};
  double best_err = std::abs(static_cast<double>(s * s) - area);
  for (auto cand : {std::pair{s + 1, s}, std::pair{s + 1, s + 1}}) {
    const double err = std::abs(static_cast<double>(cand.first * cand.second) - area);
    if (err < best_err) {
      best = cand;
      best_err = err;
    }
  }
  return best;
}

inline GeneratedSeries gen_checker_size_series(const SeriesSpec& spec) {
  if (spec.kind != SeriesKind::CheckerSize) throw ConfigError("not a checker-size series");
  spec.validate();
  const double per_element_area =
      static_cast<double>(spec.width * spec.height) / static_cast<double>(spec.cells * spec.cells);

  GeneratedSeries out;
  for (double delta : spec.deltas) {
    const double target = delta / 100.0 * per_element_area;
    const auto [ew, eh] = near_square(target);
    GrayImage img(spec.width, spec.height, 0);
    for (std::size_t r = 0; r < spec.cells; ++r) {
      for (std::size_t c = 0; c < spec.cells; ++c) {
        const auto [cx, cw] = detail::cell_span(spec.width, spec.cells, c);
        const auto [cy, ch] = detail::cell_span(spec.height, spec.cells, r);
        if (ew > cw || eh > ch)
          throw ConfigError("element " + std::to_string(ew) + "x" + std::to_string(eh) + " exceeds its cell");
        detail::fill_rect(img, cx + (cw - ew) / 2, cy + (ch - eh) / 2, ew, eh, 255);
      }
    }
    out.images.push_back(std::move(img));
    out.units.push_back(ew * eh);
    out.rounded.push_back(detail::needs_rounding(target, ew * eh));
  }
  return out;
}

inline GeneratedSeries gen_central_square_series(const SeriesSpec& spec) {
  if (spec.kind != SeriesKind::CentralSquare) throw ConfigError("not a central-square series");
  spec.validate();
  const double area = static_cast<double>(spec.width * spec.height);

  GeneratedSeries out;
  for (double delta : spec.deltas) {
    const double exact = std::sqrt(delta / 100.0 * area);
    const auto side = static_cast<std::size_t>(std::llround(exact));
    if (side > spec.width || side > spec.height)
      throw ConfigError("square side " + std::to_string(side) + " exceeds the image");
    GrayImage img(spec.width, spec.height, 0);
    detail::fill_rect(img, spec.width / 2 - side / 2, spec.height / 2 - side / 2, side, side, 255);
    out.images.push_back(std::move(img));
    out.units.push_back(side);
    out.rounded.push_back(detail::needs_rounding(exact, side));
  }
  return out;
}

inline GeneratedSeries generate_series(const SeriesSpec& spec) {
  switch (spec.kind) {
    case SeriesKind::RandomWhite:
    case SeriesKind::RandomBlack: return gen_random_contrast_series(spec);
    case SeriesKind::CheckerCount: return gen_checker_count_series(spec);
    case SeriesKind::CheckerSize: return gen_checker_size_series(spec);
    case SeriesKind::CentralSquare: return gen_central_square_series(spec);
  }
  throw ConfigError("unknown series kind");
}

}  // namespace somqe
