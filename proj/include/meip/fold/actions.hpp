#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "meip/fold/scene.hpp"

namespace meip::fold {

/// Fold tuple (x, y, r, theta) as indices into the scene's discretization.
struct FoldAction {
  int x = 0, y = 0, r = 0, theta = 0;

  std::string label() const {
    return std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(r) + "," + std::to_string(theta);
  }

  static FoldAction parse(const std::string& s) {
    FoldAction a;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%d,%d,%d,%d%c", &a.x, &a.y, &a.r, &a.theta, &tail) != 4)
      throw FormatError("fold action must be 'x,y,r,theta', got '" + s + "'");
    return a;
  }

  bool operator==(const FoldAction&) const = default;
};

struct Discretization {
  int grid = 8;
  int radii = 4;
  int angles = 8;

  void validate() const {
    if (grid < 1 || radii < 1 || angles < 1) throw ConfigError("fold discretization resolutions must be >= 1");
  }
};

namespace detail {

inline Line action_line_in(Vec2 lo, Vec2 hi, const FoldAction& a, const Discretization& d) {
  const double w = hi.x - lo.x, h = hi.y - lo.y;
  Vec2 c{lo.x + static_cast<double>(a.x) / d.grid * w, lo.y + static_cast<double>(a.y) / d.grid * h};
  const double theta = kPi * a.theta / d.angles;
  const double r = std::min(w, h) / (2.0 * d.radii) * a.r;
  Vec2 n{std::cos(theta), std::sin(theta)};
  return Line::from_normal(c + r * n, theta);
}

}  // namespace detail

/// Grid point (x, y) of the bounding box (lower-left corner plus i / grid of
/// the extent), offset by radius r along the normal direction theta; the fold
/// line runs through it perpendicular to that normal. Radii step by
/// min(width, height) / (2 * radii), angles by pi / angles.
inline Line action_line(const FoldScene& scene, const FoldAction& a, const Discretization& d) {
  if (a.x < 0 || a.x >= d.grid || a.y < 0 || a.y >= d.grid || a.r < 0 || a.r >= d.radii || a.theta < 0 ||
      a.theta >= d.angles)
    throw GeometryError("fold action " + a.label() + " is outside the discretization");
  auto [lo, hi] = scene.bounds();
  return detail::action_line_in(lo, hi, a, d);
}

namespace detail {

/// One tuple per distinct fold line, in x, y, r, theta order (the first tuple
/// of each line is kept).
inline std::vector<FoldAction> distinct_lines(const FoldScene& scene, const Discretization& d) {
  d.validate();
  auto [lo, hi] = scene.bounds();
  struct Cand {
    double offset;
    std::size_t index;
    FoldAction a;
  };
  std::vector<std::pair<std::size_t, FoldAction>> kept;
  for (int t = 0; t < d.angles; ++t) {
    std::vector<Cand> cs;
    for (int x = 0; x < d.grid; ++x)
      for (int y = 0; y < d.grid; ++y)
        for (int r = 0; r < d.radii; ++r) {
          FoldAction a{x, y, r, t};
          Line line = action_line_in(lo, hi, a, d);
          const std::size_t index = ((static_cast<std::size_t>(x) * d.grid + y) * d.radii + r) * d.angles + t;
          cs.push_back({dot(line.point, line.normal()), index, a});
        }
    std::sort(cs.begin(), cs.end(), [](const Cand& a, const Cand& b) { return a.offset < b.offset; });
    for (std::size_t i = 0; i < cs.size();) {
      std::size_t j = i, first = i;
      while (j + 1 < cs.size() && cs[j + 1].offset - cs[j].offset <= kTol) {
        ++j;
        if (cs[j].index < cs[first].index) first = j;
      }
      kept.push_back({cs[first].index, cs[first].a});
      i = j + 1;
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<FoldAction> out;
  for (const auto& k : kept) out.push_back(k.second);
  return out;
}

/// The line crosses the cloth in a chord and leaves material on both sides.
inline bool splits(const FoldScene& scene, const Line& line) {
  const double total = scene.material_area();
  double left = 0.0, chord_lo = 1e300, chord_hi = -1e300;
  for (const auto& p : scene.pieces()) {
    left += signed_area(clip_polygon(p.vertices, line, +1));
    if (auto c = clip_line(line, p.vertices)) {
      chord_lo = std::min(chord_lo, c->first);
      chord_hi = std::max(chord_hi, c->second);
    }
  }
  const double min_part = kTol * std::max(1.0, total);
  return chord_hi - chord_lo >= kTol && left > min_part && total - left > min_part;
}

}  // namespace detail

/// Legal folds of the discretization with coinciding fold lines removed (the
/// first tuple in x, y, r, theta order is kept).
inline std::vector<FoldAction> enumerate_actions(const FoldScene& scene, const Discretization& d = {}) {
  std::vector<FoldAction> out;
  for (const auto& a : detail::distinct_lines(scene, d))
    if (detail::splits(scene, action_line(scene, a, d))) out.push_back(a);
  return out;
}

/// The enumerated tuple whose fold line coincides with that of `a`, or nothing
/// when the fold is illegal.
inline std::optional<FoldAction> canonical_action(const FoldScene& scene, const FoldAction& a,
                                                  const Discretization& d = {}) {
  const Line line = action_line(scene, a, d);
  if (!detail::splits(scene, line)) return std::nullopt;
  const double off = dot(line.point, line.normal());
  std::optional<FoldAction> best;
  double best_d = 1e-6;
  for (const auto& c : detail::distinct_lines(scene, d)) {
    if (c.theta != a.theta) continue;
    const Line l = action_line(scene, c, d);
    const double dist = std::abs(dot(l.point, l.normal()) - off);
    if (dist <= best_d) {
      best_d = dist;
      best = c;
    }
  }
  return best;
}

struct ProposalConfig {
  double sigma_xy = 1.0;  // in grid cells
  double sigma_r = 1.0;
  double sigma_theta = 1.0;  // in angle steps, circular
  std::size_t top_k = 20;

  void validate() const {
    if (!(sigma_xy > 0.0 && sigma_r > 0.0 && sigma_theta > 0.0)) throw ConfigError("proposal sigmas must be positive");
    if (top_k < 1) throw ConfigError("proposal top-k must be at least 1");
  }
};

/// Max over exemplars of the product of per-parameter normal kernels, scaled so
/// an exemplar itself scores 1. Uniform 1 without exemplars.
inline double action_proposal(const std::vector<FoldAction>& exemplars, const FoldAction& a, const Discretization& d,
                              const ProposalConfig& cfg = {}) {
  if (exemplars.empty()) return 1.0;
  double best = 0.0;
  for (const auto& e : exemplars) {
    double dt = std::abs(a.theta - e.theta);
    dt = std::min(dt, d.angles - dt);
    double z = std::pow((a.x - e.x) / cfg.sigma_xy, 2) + std::pow((a.y - e.y) / cfg.sigma_xy, 2) +
               std::pow((a.r - e.r) / cfg.sigma_r, 2) + std::pow(dt / cfg.sigma_theta, 2);
    best = std::max(best, std::exp(-0.5 * z));
  }
  return best;
}

/// The `top_k` highest-weight actions (ties to the earlier one), returned in
/// their original order.
inline std::vector<FoldAction> propose(const std::vector<FoldAction>& legal, const std::vector<FoldAction>& exemplars,
                                       const Discretization& d, const ProposalConfig& cfg = {}) {
  if (exemplars.empty() || legal.size() <= cfg.top_k) return legal;
  std::vector<std::pair<double, std::size_t>> w;
  for (std::size_t i = 0; i < legal.size(); ++i) w.push_back({action_proposal(exemplars, legal[i], d, cfg), i});
  std::stable_sort(w.begin(), w.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < cfg.top_k; ++i) keep.push_back(w[i].second);
  std::sort(keep.begin(), keep.end());
  std::vector<FoldAction> out;
  for (auto i : keep) out.push_back(legal[i]);
  return out;
}

/// Same result as propose(enumerate_actions(scene, d), ...), but tests
/// legality only until `top_k` actions are found.
inline std::vector<FoldAction> proposed_actions(const FoldScene& scene, const std::vector<FoldAction>& exemplars,
                                                const Discretization& d, const ProposalConfig& cfg = {}) {
  if (exemplars.empty()) return enumerate_actions(scene, d);
  auto lines = detail::distinct_lines(scene, d);
  std::vector<std::pair<double, std::size_t>> w;
  for (std::size_t i = 0; i < lines.size(); ++i) w.push_back({action_proposal(exemplars, lines[i], d, cfg), i});
  std::stable_sort(w.begin(), w.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> keep;
  for (const auto& [weight, i] : w) {
    if (keep.size() == cfg.top_k) break;
    if (detail::splits(scene, action_line(scene, lines[i], d))) keep.push_back(i);
  }
  std::sort(keep.begin(), keep.end());
  std::vector<FoldAction> out;
  for (auto i : keep) out.push_back(lines[i]);
  return out;
}

}  // namespace meip::fold
