#pragma once

// Layered 2-D cloth: convex pieces stacked back to front, folded along lines.
// Vertex and edge entities are the distinct positions and segments of the
// layered drawing, so stacked copies of a corner are one vertex.

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "meip/fold/geometry.hpp"

namespace meip::fold {

struct MarkPoint {
  std::string mark;  // "logo" or "neck"
  Vec2 p;
};

struct Piece {
  std::string id;
  std::vector<Vec2> vertices;  // counter-clockwise, convex
  int layer = 0;               // 0 is the back
  bool face_up = true;
  std::vector<MarkPoint> marks;

  double area() const { return signed_area(vertices); }
};

struct Registered {
  std::string id;
  Vec2 a;
  Vec2 b;  // edges only
};

class FoldScene {
 public:
  FoldScene() = default;

  const std::string& name() const { return name_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t fold_count() const { return folds_; }

  std::size_t layer_count() const {
    std::set<int> ls;
    for (const auto& p : pieces_) ls.insert(p.layer);
    return ls.size();
  }

  double material_area() const {
    double a = 0.0;
    for (const auto& p : pieces_) a += p.area();
    return a;
  }

  /// Area of the union of all pieces (slab sweep, exact for polygons).
  double silhouette_area() const {
    std::vector<double> xs;
    std::vector<std::pair<Vec2, Vec2>> edges;
    for (const auto& p : pieces_)
      for (std::size_t i = 0; i < p.vertices.size(); ++i) {
        xs.push_back(p.vertices[i].x);
        edges.push_back({p.vertices[i], p.vertices[(i + 1) % p.vertices.size()]});
      }
    for (std::size_t i = 0; i < edges.size(); ++i)
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        auto [a, b] = edges[i];
        auto [c, d] = edges[j];
        double den = cross(b - a, d - c);
        if (std::abs(den) < 1e-15) continue;
        double t = cross(c - a, d - c) / den, u = cross(c - a, b - a) / den;
        if (t >= 0 && t <= 1 && u >= 0 && u <= 1) xs.push_back(a.x + t * (b.x - a.x));
      }
    std::sort(xs.begin(), xs.end());
    double area = 0.0;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      double w = xs[k + 1] - xs[k];
      if (w <= 1e-15) continue;
      double xm = 0.5 * (xs[k] + xs[k + 1]);
      std::vector<std::pair<double, double>> iv;
      for (const auto& p : pieces_) {
        if (auto c = clip_line(Line{{xm, 0.0}, {0.0, 1.0}}, p.vertices)) iv.push_back(*c);
      }
      std::sort(iv.begin(), iv.end());
      double len = 0.0, cur_lo = 0.0, cur_hi = -1e300;
      for (auto [lo, hi] : iv) {
        if (lo > cur_hi) {
          if (cur_hi > -1e299) len += cur_hi - cur_lo;
          cur_lo = lo;
          cur_hi = hi;
        } else {
          cur_hi = std::max(cur_hi, hi);
        }
      }
      if (cur_hi > -1e299) len += cur_hi - cur_lo;
      area += w * len;
    }
    return area;
  }

  /// Bounding box of all pieces: {min, max}.
  std::pair<Vec2, Vec2> bounds() const {
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const auto& p : pieces_)
      for (const auto& v : p.vertices) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
      }
    return {lo, hi};
  }

  /// Visible fraction of a mark's material: on a face-up piece and not
  /// covered by any piece in a later layer. 0 when the scene has no such mark.
  double visible_fraction(const std::string& mark) const {
    auto it = mark_totals_.find(mark);
    if (it == mark_totals_.end() || it->second == 0) return 0.0;
    std::size_t seen = 0;
    for (const auto& p : pieces_) {
      if (!p.face_up) continue;
      for (const auto& m : p.marks) {
        if (m.mark != mark) continue;
        bool covered = false;
        for (const auto& q : pieces_)
          if (q.layer > p.layer && inside_or_on(m.p, q.vertices)) {
            covered = true;
            break;
          }
        seen += covered ? 0 : 1;
      }
    }
    return static_cast<double>(seen) / static_cast<double>(it->second);
  }

  bool has_mark(const std::string& mark) const { return mark_totals_.count(mark) > 0; }

  /// Vertex entities in registration order.
  std::vector<Registered> vertices() const {
    std::vector<Registered> out;
    std::set<std::string> used;
    for (const auto& p : pieces_)
      for (const auto& v : p.vertices) used.insert(vertex_id(v));
    for (const auto& r : vreg_)
      if (used.count(r.id)) out.push_back(r);
    return out;
  }

  /// Edge entities in registration order; a segment shared by two pieces is one edge.
  std::vector<Registered> edges() const {
    std::set<std::string> used;
    for (const auto& p : pieces_)
      for (std::size_t i = 0; i < p.vertices.size(); ++i)
        used.insert(edge_id(p.vertices[i], p.vertices[(i + 1) % p.vertices.size()]));
    std::vector<Registered> out;
    for (const auto& r : ereg_)
      if (used.count(r.id)) out.push_back(r);
    return out;
  }

  std::string vertex_id(Vec2 v) const {
    for (const auto& r : vreg_)
      if (near(r.a, v)) return r.id;
    throw GeometryError("unregistered vertex");
  }

  std::string edge_id(Vec2 a, Vec2 b) const {
    for (const auto& r : ereg_)
      if ((near(r.a, a) && near(r.b, b)) || (near(r.a, b) && near(r.b, a))) return r.id;
    throw GeometryError("unregistered edge");
  }

  /// Fold along `line`: pieces are split, the side with less material is
  /// mirrored across the line and stacked behind the other side.
  FoldScene folded(const Line& line) const {
    if (!(std::abs(norm(line.dir) - 1.0) < 1e-9)) throw GeometryError("fold line direction must be a unit vector");
    double lo = 1e300, hi = -1e300;
    for (const auto& p : pieces_)
      if (auto c = clip_line(line, p.vertices)) {
        lo = std::min(lo, c->first);
        hi = std::max(hi, c->second);
      }
    if (hi < lo) throw GeometryError("fold line misses the silhouette");
    if (hi - lo < kTol) throw GeometryError("fold chord is degenerate");

    double left = 0.0, right = 0.0;
    for (const auto& p : pieces_) {
      left += signed_area(clip_polygon(p.vertices, line, +1));
      right += signed_area(clip_polygon(p.vertices, line, -1));
    }
    const double total = left + right;
    const double min_part = kTol * std::max(1.0, total);
    if (left <= min_part || right <= min_part) throw GeometryError("fold line does not split the cloth");

    int stay;
    if (std::abs(left - right) > kTol * std::max(1.0, total)) {
      stay = left > right ? +1 : -1;
    } else {
      // tie: the side holding the leftmost-lowest vertex stays in front
      Vec2 best{1e300, 1e300};
      for (const auto& p : pieces_)
        for (const auto& v : p.vertices)
          if (std::abs(line.side(v)) > kTol && (v.x < best.x - kTol || (std::abs(v.x - best.x) <= kTol && v.y < best.y)))
            best = v;
      stay = line.side(best) > 0 ? +1 : -1;
    }

    FoldScene out = *this;
    out.pieces_.clear();
    ++out.folds_;
    for (const auto& p : pieces_) {
      bool crosses = false;
      for (const auto& v : p.vertices) crosses = crosses || stay * line.side(v) < -kTol;
      if (!crosses) {
        out.pieces_.push_back(p);
        continue;
      }
      auto kept = clip_polygon(p.vertices, line, stay);
      auto flap = clip_polygon(p.vertices, line, -stay);
      std::vector<MarkPoint> kept_marks, flap_marks;
      for (const auto& m : p.marks) (stay * line.side(m.p) >= 0.0 ? kept_marks : flap_marks).push_back(m);
      if (kept.size() >= 3 && signed_area(kept) > kTol) {
        Piece k;
        k.id = out.fresh_polygon();
        k.vertices = std::move(kept);
        k.layer = p.layer;
        k.face_up = p.face_up;
        k.marks = std::move(kept_marks);
        out.pieces_.push_back(std::move(k));
      }
      if (flap.size() >= 3 && signed_area(flap) > kTol) {
        Piece f;
        f.id = out.fresh_polygon();
        for (auto it = flap.rbegin(); it != flap.rend(); ++it) f.vertices.push_back(line.reflect(*it));
        f.layer = -1 - p.layer;
        f.face_up = !p.face_up;
        for (auto m : flap_marks) {
          m.p = line.reflect(m.p);
          f.marks.push_back(m);
        }
        out.pieces_.push_back(std::move(f));
      }
    }
    int min_layer = 0;
    for (const auto& p : out.pieces_) min_layer = std::min(min_layer, p.layer);
    for (auto& p : out.pieces_) p.layer -= min_layer;
    std::stable_sort(out.pieces_.begin(), out.pieces_.end(),
                     [](const Piece& a, const Piece& b) { return a.layer < b.layer; });
    out.register_all();
    return out;
  }

  /// Builds a scene from convex polygons; marks are convex regions sampled as
  /// material points on an 8x8 grid.
  static FoldScene build(std::string name, const std::vector<std::vector<Vec2>>& polygons,
                         const std::vector<std::vector<std::pair<std::string, std::vector<Vec2>>>>& marks = {}) {
    if (polygons.empty()) throw GeometryError("scene needs at least one polygon");
    FoldScene s;
    s.name_ = std::move(name);
    for (std::size_t i = 0; i < polygons.size(); ++i) {
      Piece p;
      p.id = s.fresh_polygon();
      p.vertices = checked_polygon(polygons[i]);
      if (!is_convex(p.vertices)) throw GeometryError("polygon " + std::to_string(i) + " is not convex; split it into convex parts");
      if (i < marks.size())
        for (const auto& [mark, region_in] : marks[i]) {
          auto region = checked_polygon(region_in);
          Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
          for (auto v : region) {
            lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
            hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
          }
          std::size_t count = 0;
          for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b) {
              Vec2 q{lo.x + (a + 0.5) / 8.0 * (hi.x - lo.x), lo.y + (b + 0.5) / 8.0 * (hi.y - lo.y)};
              if (!inside_or_on(q, region)) continue;
              if (!strictly_inside(q, p.vertices)) throw GeometryError("mark '" + mark + "' leaves its polygon");
              p.marks.push_back({mark, q});
              ++count;
            }
          s.mark_totals_[mark] += count;
        }
      s.pieces_.push_back(std::move(p));
    }
    s.register_all();
    return s;
  }

 private:
  std::string fresh_polygon() { return "p" + std::to_string(next_polygon_++); }

  void register_all() {
    auto reg_vertex = [&](Vec2 v) {
      for (const auto& r : vreg_)
        if (near(r.a, v)) return;
      vreg_.push_back({"v" + std::to_string(next_vertex_++), v, v});
    };
    for (const auto& p : pieces_)
      for (const auto& v : p.vertices) reg_vertex(v);
    for (const auto& p : pieces_)
      for (std::size_t i = 0; i < p.vertices.size(); ++i) {
        Vec2 a = p.vertices[i], b = p.vertices[(i + 1) % p.vertices.size()];
        bool found = false;
        for (const auto& r : ereg_)
          if ((near(r.a, a) && near(r.b, b)) || (near(r.a, b) && near(r.b, a))) found = true;
        if (!found) ereg_.push_back({"e" + std::to_string(next_edge_++), a, b});
      }
  }

  std::string name_;
  std::vector<Piece> pieces_;
  std::map<std::string, std::size_t> mark_totals_;
  std::vector<Registered> vreg_, ereg_;
  std::size_t next_polygon_ = 0, next_vertex_ = 0, next_edge_ = 0;
  std::size_t folds_ = 0;
};

inline FoldScene apply_fold(const FoldScene& s, const Line& line) { return s.folded(line); }

/// Scene description: {"name", "polygons": [{"vertices": [[x, y], ...],
/// "marks": [{"name": "logo", "region": [[x, y], ...]}]}]}.
inline FoldScene parse_scene(const nlohmann::json& j) {
  try {
    std::vector<std::vector<Vec2>> polys;
    std::vector<std::vector<std::pair<std::string, std::vector<Vec2>>>> marks;
    auto points = [](const nlohmann::json& arr) {
      std::vector<Vec2> out;
      for (const auto& v : arr) out.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      return out;
    };
    for (const auto& p : j.at("polygons")) {
      polys.push_back(points(p.at("vertices")));
      marks.emplace_back();
      if (p.contains("marks"))
        for (const auto& m : p["marks"]) {
          auto name = m.at("name").get<std::string>();
          if (name != "logo" && name != "neck") throw GeometryError("unknown mark '" + name + "' (logo or neck)");
          marks.back().emplace_back(name, points(m.at("region")));
        }
    }
    return FoldScene::build(j.value("name", std::string("cloth")), polys, marks);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scene description: ") + e.what());
  }
}

inline nlohmann::json scene_to_json(const FoldScene& s) {
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& p : s.pieces()) {
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : p.vertices) vs.push_back({v.x, v.y});
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : p.marks) ms.push_back({m.mark, m.p.x, m.p.y});
    pieces.push_back({{"id", p.id}, {"layer", p.layer}, {"face_up", p.face_up}, {"vertices", vs}, {"marks", ms}});
  }
  return {{"name", s.name()},
          {"folds", s.fold_count()},
          {"layers", s.layer_count()},
          {"material_area", s.material_area()},
          {"silhouette_area", s.silhouette_area()},
          {"pieces", pieces}};
}

}  // namespace meip::fold
