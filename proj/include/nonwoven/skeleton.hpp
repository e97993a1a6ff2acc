#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "nonwoven/image.hpp"

namespace nonwoven {

enum class Connectivity { four = 4, eight = 8 };

struct Labeling {
  std::vector<std::int32_t> labels;  // -1 for pixels outside the selected value
  std::size_t count = 0;
};

// Labels connected components of pixels equal to `value` in raster order of
// their first pixel.
inline Labeling label_components(const BinaryImage& bin, Connectivity conn = Connectivity::eight,
                                 std::uint8_t value = 1) {
  const auto w = static_cast<std::ptrdiff_t>(bin.width());
  const auto h = static_cast<std::ptrdiff_t>(bin.height());
  Labeling out;
  out.labels.assign(bin.size(), -1);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < bin.size(); ++start) {
    if (bin.pixels()[start] != value || out.labels[start] >= 0) continue;
    const auto id = static_cast<std::int32_t>(out.count++);
    out.labels[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      const auto x = static_cast<std::ptrdiff_t>(i) % w;
      const auto y = static_cast<std::ptrdiff_t>(i) / w;
      for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
        for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (conn == Connectivity::four && dx != 0 && dy != 0) continue;
          const auto nx = x + dx;
          const auto ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const auto j = static_cast<std::size_t>(ny * w + nx);
          if (bin.pixels()[j] == value && out.labels[j] < 0) {
            out.labels[j] = id;
            stack.push_back(j);
          }
        }
      }
    }
  }
  return out;
}

inline std::size_t count_components(const BinaryImage& bin, Connectivity conn = Connectivity::eight) {
  return label_components(bin, conn).count;
}

namespace detail {

// Neighbours in the order E, NE, N, NW, W, SW, S, SE; outside counts as 0.
inline std::array<int, 8> neighbours(const BinaryImage& img, std::size_t x, std::size_t y) {
  static constexpr std::array<std::ptrdiff_t, 8> dx{1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr std::array<std::ptrdiff_t, 8> dy{0, -1, -1, -1, 0, 1, 1, 1};
  std::array<int, 8> n{};
  for (std::size_t k = 0; k < 8; ++k) {
    const auto nx = static_cast<std::ptrdiff_t>(x) + dx[k];
    const auto ny = static_cast<std::ptrdiff_t>(y) + dy[k];
    n[k] = img.contains(nx, ny) ? img(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)) : 0;
  }
  return n;
}

// Yokoi connectivity number for 8-connected foreground; a border point whose
// value is 1 can be removed without changing topology.
inline int connectivity_number(const std::array<int, 8>& n) {
  int c = 0;
  for (std::size_t k = 0; k < 8; k += 2) {
    const int a = 1 - n[k];
    const int b = 1 - n[(k + 1) % 8];
    const int d = 1 - n[(k + 2) % 8];
    c += a - a * b * d;
  }
  return c;
}

inline int neighbour_count(const std::array<int, 8>& n) {
  int s = 0;
  for (int v : n) s += v;
  return s;
}

}  // namespace detail

// Two-subiteration thinning (south-east boundary pass, then north-west) in the
// style of Zhang-Suen. Candidates are removed one at a time and only while they
// remain simple points, so 8-connected components and holes are preserved and
// line end points (one neighbour) are kept.
inline BinaryImage skeletonize(const BinaryImage& bin) {
  BinaryImage img = bin;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
          if (!img(x, y)) continue;
          const auto n = detail::neighbours(img, x, y);
          const int b = detail::neighbour_count(n);
          if (b < 2 || b > 6) continue;
          if (detail::connectivity_number(n) != 1) continue;
          const int east = n[0], north = n[2], west = n[4], south = n[6];
          const bool directional = pass == 0
                                       ? (north * east * south == 0 && east * south * west == 0)
                                       : (north * east * west == 0 && north * south * west == 0);
          if (!directional) continue;
          img(x, y) = 0;
          changed = true;
        }
      }
    }
  }
  return img;
}

// Removes skeleton branches that run from an end point to a junction and are
// shorter than `min_branch` pixels. Isolated segments (end point to end point)
// are never removed.
inline BinaryImage prune(const BinaryImage& skel, std::size_t min_branch) {
  BinaryImage out = skel;
  if (min_branch == 0) return out;
  std::vector<std::uint8_t> doomed(skel.size(), 0);
  std::vector<std::uint8_t> visited(skel.size(), 0);
  const auto w = skel.width();
  std::vector<std::size_t> path;
  for (std::size_t y = 0; y < skel.height(); ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!skel(x, y) || detail::neighbour_count(detail::neighbours(skel, x, y)) != 1) continue;
      for (auto i : path) visited[i] = 0;
      path.clear();
      std::size_t cx = x;
      std::size_t cy = y;
      bool reached_junction = false;
      while (true) {
        path.push_back(cy * w + cx);
        visited[cy * w + cx] = 1;
        if (path.size() >= min_branch) break;
        std::size_t next = skel.size();
        int unvisited = 0;
        for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
          for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const auto nx = static_cast<std::ptrdiff_t>(cx) + dx;
            const auto ny = static_cast<std::ptrdiff_t>(cy) + dy;
            if (!skel.contains(nx, ny)) continue;
            const auto j = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
            if (skel.pixels()[j] && !visited[j]) {
              ++unvisited;
              next = j;
            }
          }
        }
        if (unvisited == 0) break;  // isolated segment
        const auto nx = next % w;
        const auto ny = next / w;
        if (unvisited > 1 || detail::neighbour_count(detail::neighbours(skel, nx, ny)) >= 3) {
          reached_junction = true;
          break;
        }
        cx = nx;
        cy = ny;
      }
      if (reached_junction && path.size() < min_branch) {
        for (auto i : path) doomed[i] = 1;
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (doomed[i]) out.pixels()[i] = 0;
  }
  return out;
}

}  // namespace nonwoven
