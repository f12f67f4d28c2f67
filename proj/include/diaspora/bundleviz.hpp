#pragma once

// Categorical edge-bundled circular rendering of a flow network.
//
// Areas are coloured sectors around the node circle; topics sit on the node
// circle next to their sector, ordered by strength. Cross-area edges are
// cubic B-splines through seven control points; intra-area edges are shallow
// U curves in the band between the nodes and the sectors.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "diaspora/classification.hpp"
#include "diaspora/error.hpp"
#include "diaspora/flow_builder.hpp"
#include "diaspora/text.hpp"

namespace diaspora::viz {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;

  static std::optional<Rgb> parse(std::string_view s) {
    if (s.size() != 7 || s[0] != '#') return std::nullopt;
    auto hex = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      return -1;
    };
    int v[6];
    for (int i = 0; i < 6; ++i)
      if ((v[i] = hex(s[i + 1])) < 0) return std::nullopt;
    return Rgb{static_cast<std::uint8_t>(v[0] * 16 + v[1]), static_cast<std::uint8_t>(v[2] * 16 + v[3]),
               static_cast<std::uint8_t>(v[4] * 16 + v[5])};
  }

  std::string hex() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
  }

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// (1 - lambda) * from + lambda * to, per channel, rounded.
inline Rgb mix(const Rgb& from, const Rgb& to, double lambda) {
  auto ch = [&](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround((1.0 - lambda) * a + lambda * b));
  };
  return {ch(from.r, to.r), ch(from.g, to.g), ch(from.b, to.b)};
}

inline const std::vector<Rgb>& default_palette() {
  static const std::vector<Rgb> p = [] {
    std::vector<Rgb> out;
    for (auto s : {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                   "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
                   "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5"})
      out.push_back(*Rgb::parse(s));
    return out;
  }();
  return p;
}

enum class SectorOrder { modularity, strength, alphabetical };

inline SectorOrder parse_sector_order(std::string_view s) {
  if (s == "modularity") return SectorOrder::modularity;
  if (s == "strength") return SectorOrder::strength;
  if (s == "alphabetical") return SectorOrder::alphabetical;
  fail(Errc::invalid_config, "sector order must be modularity, strength or alphabetical");
}

/// Radii are fractions of `circle_radius`; angles are degrees.
struct VizConfig {
  double canvas_size = 1000.0;
  double circle_radius = 340.0;
  double r_node = 1.00;
  double r_zero = 0.92;
  double r_first = 0.80;
  double r_second = 0.55;
  double r_sector_inner = 1.06;
  double r_sector_outer = 1.11;
  double r_label = 1.14;
  double sector_gap_deg = 2.0;
  double start_angle_deg = 90.0;
  double offset_deg = 0.6;
  double nudge = 0.03;
  double intra_depth = 0.9;  // share of the node-sector band used by the widest U
  double lambda = 0.7;
  double width_min = 0.5;
  double width_scale = 0.5;
  double alpha_max = 0.9;
  double alpha_slope = 0.6;
  double alpha_floor = 0.05;
  double node_scale = 2.0;
  double node_r_min = 2.0;
  double node_r_max = 12.0;
  double min_weight = 0.0;
  double font_size = 9.0;
  SectorOrder sector_order = SectorOrder::modularity;
  std::map<AreaId, Rgb> palette;

  void validate() const {
    auto bad = [](const std::string& why) { fail(Errc::invalid_config, "viz config: " + why); };
    if (!(canvas_size > 0 && circle_radius > 0)) bad("canvas_size and circle_radius must be positive");
    if (!(r_sector_outer > r_sector_inner && r_sector_inner > r_node && r_node > r_zero && r_zero > r_first &&
          r_first > r_second && r_second > 0))
      bad("radii must satisfy r_sector_outer > r_sector_inner > r_node > r_zero > r_first > r_second > 0");
    if (!(nudge >= 0 && r_first - nudge > r_second && r_first + nudge < r_zero)) bad("nudge leaves the first-level band");
    if (!(lambda >= 0 && lambda <= 1)) bad("lambda must lie in [0, 1]");
    if (!(alpha_floor > 0 && alpha_max <= 1 && alpha_max >= alpha_floor && alpha_slope >= 0)) bad("alpha law out of range");
    if (!(width_min >= 0 && width_scale > 0)) bad("edge width must grow with weight");
    if (!(node_r_min > 0 && node_r_max >= node_r_min && node_scale > 0)) bad("node radius clamp out of range");
    if (!(sector_gap_deg >= 0 && offset_deg >= 0)) bad("angles must be non-negative");
    if (!(intra_depth > 0 && intra_depth < 1)) bad("intra_depth must lie in (0, 1)");
  }

  /// Flat `key=value` lines; a value of the form `#RRGGBB` is a palette entry
  /// for the area named by the key.
  static VizConfig parse(std::istream& in, std::string_view name = "viz config") {
    VizConfig cfg;
    const std::map<std::string, double VizConfig::*> numeric = {
        {"canvas_size", &VizConfig::canvas_size},     {"circle_radius", &VizConfig::circle_radius},
        {"r_node", &VizConfig::r_node},               {"r_zero", &VizConfig::r_zero},
        {"r_first", &VizConfig::r_first},             {"r_second", &VizConfig::r_second},
        {"r_sector_inner", &VizConfig::r_sector_inner}, {"r_sector_outer", &VizConfig::r_sector_outer},
        {"r_label", &VizConfig::r_label},             {"sector_gap_deg", &VizConfig::sector_gap_deg},
        {"start_angle_deg", &VizConfig::start_angle_deg}, {"offset_deg", &VizConfig::offset_deg},
        {"nudge", &VizConfig::nudge},                 {"intra_depth", &VizConfig::intra_depth},
        {"lambda", &VizConfig::lambda},               {"width_min", &VizConfig::width_min},
        {"width_scale", &VizConfig::width_scale},     {"alpha_max", &VizConfig::alpha_max},
        {"alpha_slope", &VizConfig::alpha_slope},     {"alpha_floor", &VizConfig::alpha_floor},
        {"node_scale", &VizConfig::node_scale},       {"node_r_min", &VizConfig::node_r_min},
        {"node_r_max", &VizConfig::node_r_max},       {"min_weight", &VizConfig::min_weight},
        {"font_size", &VizConfig::font_size},
    };
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string_view s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string_view::npos) return std::string_view{};
      const auto e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
      ++lineno;
      const auto view = trim(text::strip_cr(line));
      if (text::is_skippable(view)) continue;
      const auto eq = view.find('=');
      if (eq == std::string_view::npos) fail_at(Errc::invalid_config, name, lineno, "expected key=value");
      const std::string key(trim(view.substr(0, eq)));
      const auto value = trim(view.substr(eq + 1));
      if (key.empty()) fail_at(Errc::invalid_config, name, lineno, "empty key");
      if (!value.empty() && value.front() == '#') {
        const auto c = Rgb::parse(value);
        if (!c) fail_at(Errc::invalid_config, name, lineno, "bad colour '" + std::string(value) + "'");
        cfg.palette[key] = *c;
      } else if (key == "sector_order") {
        cfg.sector_order = parse_sector_order(value);
      } else if (auto it = numeric.find(key); it != numeric.end()) {
        const auto v = text::parse_double(value);
        if (!v) fail_at(Errc::invalid_config, name, lineno, "not a number: '" + std::string(value) + "'");
        cfg.*(it->second) = *v;
      } else {
        fail_at(Errc::invalid_config, name, lineno, "unknown key '" + key + "'");
      }
    }
    cfg.validate();
    return cfg;
  }

  static VizConfig load(const std::filesystem::path& path) {
    auto in = text::open_input(path);
    return parse(in, path.string());
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct SectorArc {
  AreaId area;
  double start = 0.0;  // radians, start < end, not wrapped
  double end = 0.0;
  Rgb color;
  std::vector<NodeId> nodes;  // in angular order

  double barycenter() const { return 0.5 * (start + end); }
};

struct NodePlacement {
  AreaId area;
  double angle = 0.0;
  double radius = 0.0;  // drawn circle radius, pixels
  double strength = 0.0;
};

struct VizLayout {
  VizConfig config;
  std::vector<SectorArc> sectors;
  std::map<NodeId, NodePlacement> nodes;
  std::map<AreaId, std::size_t> sector_index;

  double center() const { return 0.5 * config.canvas_size; }

  Point polar(double radius_fraction, double angle) const {
    const double r = radius_fraction * config.circle_radius;
    return {center() + r * std::cos(angle), center() - r * std::sin(angle)};
  }

  Point position(const NodeId& n) const { return polar(config.r_node, placement(n).angle); }

  const NodePlacement& placement(const NodeId& n) const {
    auto it = nodes.find(n);
    if (it == nodes.end()) fail(Errc::unknown_topic, "node " + n + " is not in the layout");
    return it->second;
  }

  const SectorArc& sector_of(const NodeId& n) const { return sectors.at(sector_index.at(placement(n).area)); }
};

namespace detail {

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

/// Greedy agglomerative modularity on the undirected area graph. Returns
/// communities as lists of area indices.
inline std::vector<std::vector<std::size_t>> greedy_modularity(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m += w[i][i];
    for (std::size_t j = i + 1; j < n; ++j) m += w[i][j];
  }
  std::vector<std::vector<std::size_t>> comms(n);
  for (std::size_t i = 0; i < n; ++i) comms[i] = {i};
  if (m <= 0.0) return comms;

  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) degree[i] += (i == j ? 2.0 : 1.0) * w[i][j];

  // between[c][d]: edge weight joining communities c and d.
  std::vector<std::vector<double>> between = w;
  std::vector<double> cdeg = degree;
  std::vector<bool> alive(n, true);
  for (;;) {
    double best = 1e-12;
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!alive[j] || between[i][j] <= 0.0) continue;
        const double dq = between[i][j] / m - 2.0 * cdeg[i] * cdeg[j] / (4.0 * m * m);
        if (dq > best) {
          best = dq;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == n) break;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == bi || k == bj) continue;
      between[bi][k] += between[bj][k];
      between[k][bi] = between[bi][k];
    }
    between[bi][bi] += between[bj][bj] + between[bi][bj];
    cdeg[bi] += cdeg[bj];
    comms[bi].insert(comms[bi].end(), comms[bj].begin(), comms[bj].end());
    comms[bj].clear();
    alive[bj] = false;
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) out.push_back(comms[i]);
  return out;
}

inline const AreaId& area_of_node(const NodeId& node, Level level, const ClassificationTable& table) {
  if (level == Level::topic) return table.area_of(node);
  if (!table.has_area(node)) fail(Errc::unknown_area, "area " + node + " is not classified");
  return *table.areas().find(node);
}

inline void place_sectors(VizLayout& layout, const std::vector<AreaId>& order,
                          const std::map<AreaId, std::vector<NodeId>>& members) {
  const auto& cfg = layout.config;
  std::size_t slots = 0;
  for (const auto& a : order) slots += std::max<std::size_t>(1, members.count(a) ? members.at(a).size() : 0);
  double gap = deg(cfg.sector_gap_deg);
  const double two_pi = 2.0 * std::numbers::pi;
  if (gap * static_cast<double>(order.size()) >= two_pi) gap = 0.5 * two_pi / static_cast<double>(order.size());
  const double slot = (two_pi - gap * static_cast<double>(order.size())) / static_cast<double>(slots);
  double angle = deg(cfg.start_angle_deg) + 0.5 * gap;
  const auto& palette = default_palette();
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& a = order[i];
    SectorArc arc;
    arc.area = a;
    auto pit = cfg.palette.find(a);
    arc.color = pit != cfg.palette.end() ? pit->second : palette[i % palette.size()];
    const auto mit = members.find(a);
    const std::size_t k = mit == members.end() ? 0 : mit->second.size();
    arc.start = angle;
    arc.end = angle + slot * static_cast<double>(std::max<std::size_t>(1, k));
    if (mit != members.end()) {
      arc.nodes = mit->second;
      for (std::size_t j = 0; j < k; ++j)
        layout.nodes.at(arc.nodes[j]).angle = arc.start + (static_cast<double>(j) + 0.5) * slot;
    }
    angle = arc.end + gap;
    layout.sector_index[a] = layout.sectors.size();
    layout.sectors.push_back(std::move(arc));
  }
}

}  // namespace detail

inline double node_radius(double strength, const VizConfig& cfg) {
  return std::clamp(cfg.node_scale * std::log1p(strength), cfg.node_r_min, cfg.node_r_max);
}

/// Sector order, node order and node sizes for a non-empty network.
inline VizLayout layout(const FlowNetwork& net, const ClassificationTable& table, const VizConfig& cfg = {}) {
  cfg.validate();
  if (net.empty()) fail(Errc::empty_network, "cannot lay out an empty network");
  VizLayout out;
  out.config = cfg;

  for (const auto& [e, w] : net.weights) {
    for (const auto* n : {&e.first, &e.second}) {
      auto [it, inserted] = out.nodes.try_emplace(*n);
      if (inserted) it->second.area = detail::area_of_node(*n, net.level, table);
    }
    out.nodes[e.first].strength += w;
    out.nodes[e.second].strength += w;
  }
  for (auto& [n, p] : out.nodes) p.radius = node_radius(p.strength, cfg);

  // Area identifiers sorted; index-based undirected weight matrix.
  std::vector<AreaId> areas;
  for (const auto& [n, p] : out.nodes) areas.push_back(p.area);
  std::sort(areas.begin(), areas.end());
  areas.erase(std::unique(areas.begin(), areas.end()), areas.end());
  std::map<AreaId, std::size_t> index;
  for (std::size_t i = 0; i < areas.size(); ++i) index[areas[i]] = i;
  std::vector<std::vector<double>> w(areas.size(), std::vector<double>(areas.size(), 0.0));
  std::vector<double> area_strength(areas.size(), 0.0);
  for (const auto& [e, weight] : net.weights) {
    const auto a = index.at(out.nodes.at(e.first).area);
    const auto b = index.at(out.nodes.at(e.second).area);
    if (a == b) {
      w[a][a] += weight;
    } else {
      w[a][b] += weight;
      w[b][a] += weight;
    }
    area_strength[a] += weight;
    area_strength[b] += weight;
  }

  auto by_strength = [&](std::size_t a, std::size_t b) {
    if (area_strength[a] != area_strength[b]) return area_strength[a] > area_strength[b];
    return a < b;
  };
  std::vector<std::size_t> order_idx;
  switch (cfg.sector_order) {
    case SectorOrder::alphabetical:
      for (std::size_t i = 0; i < areas.size(); ++i) order_idx.push_back(i);
      break;
    case SectorOrder::strength:
      for (std::size_t i = 0; i < areas.size(); ++i) order_idx.push_back(i);
      std::sort(order_idx.begin(), order_idx.end(), by_strength);
      break;
    case SectorOrder::modularity: {
      auto comms = detail::greedy_modularity(w);
      for (auto& c : comms) std::sort(c.begin(), c.end(), by_strength);
      auto total = [&](const std::vector<std::size_t>& c) {
        double s = 0.0;
        for (auto i : c) s += area_strength[i];
        return s;
      };
      std::sort(comms.begin(), comms.end(), [&](const auto& a, const auto& b) {
        const double ta = total(a), tb = total(b);
        if (ta != tb) return ta > tb;
        return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end());
      });
      for (const auto& c : comms) order_idx.insert(order_idx.end(), c.begin(), c.end());
      break;
    }
  }

  std::map<AreaId, std::vector<NodeId>> members;
  for (const auto& [n, p] : out.nodes) members[p.area].push_back(n);  // lexicographic
  for (auto& [a, list] : members)
    std::stable_sort(list.begin(), list.end(), [&](const NodeId& x, const NodeId& y) {
      return out.nodes.at(x).strength > out.nodes.at(y).strength;
    });

  std::vector<AreaId> order;
  for (auto i : order_idx) order.push_back(areas[i]);
  detail::place_sectors(out, order, members);
  return out;
}

/// Sectors for every classified area in lexicographic order, with no nodes.
inline VizLayout sector_only_layout(const ClassificationTable& table, const VizConfig& cfg = {}) {
  cfg.validate();
  VizLayout out;
  out.config = cfg;
  const std::vector<AreaId> order(table.areas().begin(), table.areas().end());
  detail::place_sectors(out, order, {});
  return out;
}

/// Origin, five guide points, destination.
inline std::array<Point, 7> route_cross_edge(const VizLayout& layout, const NodeId& source, const NodeId& target) {
  const auto& ps = layout.placement(source);
  const auto& pt = layout.placement(target);
  if (ps.area == pt.area) fail(Errc::same_area, source + " and " + target + " share area " + ps.area);
  const auto& cfg = layout.config;
  const double offset = detail::deg(cfg.offset_deg);
  const double two_pi = 2.0 * std::numbers::pi;

  // Shorter-arc midpoint; an exact half-turn resolves counter-clockwise from the source.
  double d = std::remainder(pt.angle - ps.angle, two_pi);
  if (d <= -std::numbers::pi) d += two_pi;
  const double mid = ps.angle + 0.5 * d;

  return {layout.polar(cfg.r_node, ps.angle),
          layout.polar(cfg.r_zero, ps.angle),
          layout.polar(cfg.r_first + cfg.nudge, layout.sector_of(source).barycenter() + offset),
          layout.polar(cfg.r_second, mid),
          layout.polar(cfg.r_first - cfg.nudge, layout.sector_of(target).barycenter() - offset),
          layout.polar(cfg.r_zero, pt.angle),
          layout.polar(cfg.r_node, pt.angle)};
}

/// Radius fraction of the single control point of an intra-area edge.
inline double intra_control_radius(const VizLayout& layout, const NodeId& source, const NodeId& target) {
  const auto& cfg = layout.config;
  const auto& sector = layout.sector_of(source);
  const double span = std::abs(layout.placement(target).angle - layout.placement(source).angle);
  const double full = std::max(sector.end - sector.start, 1e-12);
  return cfg.r_node + cfg.intra_depth * (cfg.r_sector_inner - cfg.r_node) * std::min(1.0, span / full);
}

inline std::array<Point, 3> route_intra_edge(const VizLayout& layout, const NodeId& source, const NodeId& target) {
  const auto& ps = layout.placement(source);
  const auto& pt = layout.placement(target);
  if (ps.area != pt.area) fail(Errc::different_area, source + " and " + target + " lie in different areas");
  const auto& cfg = layout.config;
  const double mid = 0.5 * (ps.angle + pt.angle);
  return {layout.polar(cfg.r_node, ps.angle), layout.polar(intra_control_radius(layout, source, target), mid),
          layout.polar(cfg.r_node, pt.angle)};
}

/// The intra route traced in polar coordinates: angle linear between the
/// endpoints, radius rising to the control radius at the midpoint. Drawing the
/// three control points in Cartesian space would cut across the circle.
inline std::vector<Point> intra_edge_samples(const VizLayout& layout, const NodeId& source, const NodeId& target,
                                             std::size_t segments = 16) {
  route_intra_edge(layout, source, target);  // area check
  const auto& cfg = layout.config;
  const double a0 = layout.placement(source).angle;
  const double a1 = layout.placement(target).angle;
  const double rc = intra_control_radius(layout, source, target);
  std::vector<Point> out;
  out.reserve(segments + 1);
  for (std::size_t i = 0; i <= segments; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(segments);
    out.push_back(layout.polar(cfg.r_node + (rc - cfg.r_node) * 4.0 * t * (1.0 - t), a0 + (a1 - a0) * t));
  }
  return out;
}

struct CubicSegment {
  Point c1, c2, end;
};

/// Uniform cubic B-spline over the control polygon with clamped ends, as
/// Bezier segments starting at the first control point.
inline std::vector<CubicSegment> bspline_segments(const std::vector<Point>& ctrl) {
  std::vector<CubicSegment> out;
  if (ctrl.size() < 2) return out;
  std::vector<Point> q;
  q.push_back(ctrl.front());
  q.push_back(ctrl.front());
  q.insert(q.end(), ctrl.begin(), ctrl.end());
  q.push_back(ctrl.back());
  q.push_back(ctrl.back());
  auto lerp = [](const Point& a, const Point& b, double wa, double wb) {
    return Point{wa * a.x + wb * b.x, wa * a.y + wb * b.y};
  };
  for (std::size_t i = 0; i + 3 < q.size(); ++i) {
    const auto& p1 = q[i + 1];
    const auto& p2 = q[i + 2];
    const auto& p3 = q[i + 3];
    const Point c1 = lerp(p1, p2, 2.0 / 3.0, 1.0 / 3.0);
    const Point c2 = lerp(p1, p2, 1.0 / 3.0, 2.0 / 3.0);
    const Point end{(p1.x + 4.0 * p2.x + p3.x) / 6.0, (p1.y + 4.0 * p2.y + p3.y) / 6.0};
    out.push_back({c1, c2, end});
  }
  return out;
}

enum class EdgeCategory { intra_area, cross_out, cross_in };

/// Category of edge s->t as seen from `perspective` (an area).
inline EdgeCategory edge_category(const VizLayout& layout, const NodeId& s, const NodeId& t, const AreaId& perspective) {
  const auto& as = layout.placement(s).area;
  const auto& at = layout.placement(t).area;
  if (as == at) return EdgeCategory::intra_area;
  if (perspective == at) return EdgeCategory::cross_in;
  return EdgeCategory::cross_out;
}

struct EdgeStyle {
  EdgeCategory category = EdgeCategory::intra_area;  // relative to the source area
  double width = 0.0;
  Rgb color;
  double alpha = 1.0;
};

inline double edge_width(double weight, const VizConfig& cfg) { return cfg.width_min + cfg.width_scale * weight; }

inline EdgeStyle edge_style(const VizLayout& layout, const NodeId& s, const NodeId& t, double weight) {
  const auto& cfg = layout.config;
  EdgeStyle st;
  st.category = edge_category(layout, s, t, layout.placement(s).area);
  st.width = edge_width(weight, cfg);
  st.color = mix(layout.sector_of(s).color, layout.sector_of(t).color, cfg.lambda);
  const double diameter = 2.0 * cfg.r_node * cfg.circle_radius;
  const double d = distance(layout.position(s), layout.position(t)) / diameter;
  st.alpha = std::clamp(cfg.alpha_max - cfg.alpha_slope * d, cfg.alpha_floor, 1.0);
  return st;
}

namespace detail {

inline std::string num(double v) { return text::format_fixed(v, 3); }

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string path_data(const std::vector<Point>& ctrl) {
  std::string d = "M" + num(ctrl.front().x) + "," + num(ctrl.front().y);
  for (const auto& s : bspline_segments(ctrl))
    d += " C" + num(s.c1.x) + "," + num(s.c1.y) + " " + num(s.c2.x) + "," + num(s.c2.y) + " " + num(s.end.x) + "," +
         num(s.end.y);
  return d;
}

inline void write_sectors(std::ostream& out, const VizLayout& layout) {
  const auto& cfg = layout.config;
  const double r = 0.5 * (cfg.r_sector_inner + cfg.r_sector_outer);
  const double thickness = (cfg.r_sector_outer - cfg.r_sector_inner) * cfg.circle_radius;
  out << "<g id=\"sectors\" fill=\"none\">\n";
  for (const auto& s : layout.sectors) {
    const int steps = std::max(2, static_cast<int>(std::ceil((s.end - s.start) / deg(1.0))));
    out << "<polyline class=\"sector\" data-area=\"" << xml_escape(s.area) << "\" data-start=\"" << text::format_fixed(s.start, 6)
        << "\" data-end=\"" << text::format_fixed(s.end, 6) << "\" stroke=\"" << s.color.hex() << "\" stroke-width=\""
        << num(thickness) << "\" points=\"";
    for (int i = 0; i <= steps; ++i) {
      const auto p = layout.polar(r, s.start + (s.end - s.start) * i / steps);
      out << (i ? " " : "") << num(p.x) << "," << num(p.y);
    }
    out << "\"/>\n";
  }
  out << "</g>\n";
}

}  // namespace detail

/// Standalone SVG 1.1 document. Element order: sectors, intra-area edges,
/// cross-area edges, nodes, labels. Self-loops and edges lighter than
/// `min_weight` are not drawn.
inline std::string render_svg(const FlowNetwork& net, const ClassificationTable* table, const VizConfig& cfg = {}) {
  cfg.validate();
  VizLayout lay;
  if (!net.empty()) {
    if (table == nullptr) fail(Errc::invalid_config, "rendering a network needs its classification table");
    lay = layout(net, *table, cfg);
  } else if (table != nullptr)
    lay = sector_only_layout(*table, cfg);
  else
    lay.config = cfg;

  std::ostringstream out;
  const auto size = detail::num(cfg.canvas_size);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << " " << size << "\">\n"
      << "<title>" << level_name(net.level) << " flows " << net.from_snapshot << "-" << net.to_snapshot << "</title>\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << size << "\" height=\"" << size << "\" fill=\"#ffffff\"/>\n";
  detail::write_sectors(out, lay);

  auto drawn = [&](const Edge& e, double w) { return e.first != e.second && w >= cfg.min_weight; };
  auto write_edge = [&](const Edge& e, double w, const std::vector<Point>& ctrl, const char* cls) {
    const auto st = edge_style(lay, e.first, e.second, w);
    out << "<path class=\"" << cls << "\" data-source=\"" << detail::xml_escape(e.first) << "\" data-target=\""
        << detail::xml_escape(e.second) << "\" data-weight=\"" << text::format_number(w) << "\" d=\""
        << detail::path_data(ctrl) << "\" stroke=\"" << st.color.hex() << "\" stroke-width=\""
        << text::format_fixed(st.width, 4) << "\" stroke-opacity=\"" << text::format_fixed(st.alpha, 4)
        << "\"/>\n";
  };

  out << "<g id=\"intra-edges\" fill=\"none\">\n";
  for (const auto& [e, w] : net.weights) {
    if (!drawn(e, w) || lay.placement(e.first).area != lay.placement(e.second).area) continue;
    write_edge(e, w, intra_edge_samples(lay, e.first, e.second), "intra");
  }
  out << "</g>\n<g id=\"cross-edges\" fill=\"none\">\n";
  for (const auto& [e, w] : net.weights) {
    if (!drawn(e, w) || lay.placement(e.first).area == lay.placement(e.second).area) continue;
    const auto c = route_cross_edge(lay, e.first, e.second);
    write_edge(e, w, {c.begin(), c.end()}, "cross");
  }
  out << "</g>\n<g id=\"nodes\">\n";
  for (const auto& s : lay.sectors) {
    for (const auto& n : s.nodes) {
      const auto& p = lay.nodes.at(n);
      const auto pos = lay.polar(cfg.r_node, p.angle);
      out << "<circle class=\"node\" data-node=\"" << detail::xml_escape(n) << "\" data-angle=\""
          << text::format_fixed(p.angle, 6) << "\" cx=\"" << detail::num(pos.x) << "\" cy=\"" << detail::num(pos.y)
          << "\" r=\"" << detail::num(p.radius) << "\" fill=\"" << s.color.hex() << "\"/>\n";
    }
  }
  out << "</g>\n<g id=\"labels\" font-family=\"sans-serif\" font-size=\"" << detail::num(cfg.font_size) << "\">\n";
  for (const auto& s : lay.sectors) {
    for (const auto& n : s.nodes) {
      const auto& p = lay.nodes.at(n);
      const auto pos = lay.polar(cfg.r_label, p.angle);
      // Radial text; the left half is flipped so labels read outward.
      double rot = -p.angle * 180.0 / std::numbers::pi;
      const double c = std::cos(p.angle);
      const bool flip = c < 0.0;
      if (flip) rot += 180.0;
      out << "<text x=\"" << detail::num(pos.x) << "\" y=\"" << detail::num(pos.y) << "\" transform=\"rotate("
          << detail::num(rot) << " " << detail::num(pos.x) << " " << detail::num(pos.y) << ")\" text-anchor=\""
          << (flip ? "end" : "start") << "\" dominant-baseline=\"middle\" fill=\"" << s.color.hex() << "\">"
          << detail::xml_escape(n) << "</text>\n";
    }
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

inline void render_svg(const FlowNetwork& net, const ClassificationTable* table, const VizConfig& cfg,
                       const std::filesystem::path& out_path) {
  const auto doc = render_svg(net, table, cfg);
  auto out = text::open_output(out_path);
  out << doc;
  if (!out) fail(Errc::io_error, "failed writing " + out_path.string());
}

}  // namespace diaspora::viz
