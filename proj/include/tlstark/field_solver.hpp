#pragma once

// Two-dimensional electrostatics of the deflector.
//
// Laplace's equation is solved on a uniform grid by red-black successive
// over-relaxation. Nodes inside electrodes are fixed. Free nodes next to an
// electrode use the Shortley-Weller stencil, which places the Dirichlet value
// at the true boundary crossing instead of the nearest node, keeping the
// scheme second order for curved electrodes. The domain edge is either
// grounded (Dirichlet 0) or insulating (zero normal derivative).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tlstark/constants.hpp"
#include "tlstark/errors.hpp"

namespace tlstark::field {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Polygon {
  std::vector<Point> vertices;
};

struct Circle {
  Point center;
  double radius = 0.0;
};

using Shape = std::variant<Polygon, Circle>;

struct Electrode {
  std::string name;
  double potential = 0.0;
  Shape shape;
  /// Electrode occupies everything outside the shape (e.g. an outer
  /// cylinder).
  bool exterior = false;
};

struct Box {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
};

enum class Plane { transverse_xy, longitudinal_xz };

struct ElectrodeGeometry2D {
  Plane plane = Plane::transverse_xy;
  std::vector<Electrode> electrodes;
  Box domain;
  bool grounded_boundary = true;

  void validate() const;

  /// Copy with every potential multiplied by factor.
  ElectrodeGeometry2D scaled(double factor) const {
    ElectrodeGeometry2D g = *this;
    for (auto& e : g.electrodes) e.potential *= factor;
    return g;
  }
};

namespace detail {

inline bool segments_cross(Point a, Point b, Point c, Point d) {
  auto orient = [](Point p, Point q, Point r) {
    const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    return (v > 0.0) - (v < 0.0);
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

inline bool inside_polygon(const Polygon& poly, Point p) {
  // Even-odd rule; points on an edge count as inside.
  const auto& v = poly.vertices;
  bool in = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const Point a = v[i], b = v[j];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    if (std::abs(cross) <= 1e-9 * len2 && p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
        p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y))
      return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xc) in = !in;
    }
  }
  return in;
}

inline bool inside_shape(const Shape& s, Point p) {
  if (const auto* c = std::get_if<Circle>(&s)) {
    const double dx = p.x - c->center.x, dy = p.y - c->center.y;
    return dx * dx + dy * dy <= c->radius * c->radius;
  }
  return inside_polygon(std::get<Polygon>(s), p);
}

inline bool inside_electrode(const Electrode& e, Point p) {
  return inside_shape(e.shape, p) != e.exterior;
}

/// Smallest t in (0, 1] where the segment p + t (q - p) meets the shape
/// boundary; 1 if no crossing is found.
inline double boundary_crossing(const Shape& s, Point p, Point q) {
  double best = 1.0;
  if (const auto* c = std::get_if<Circle>(&s)) {
    const double dx = q.x - p.x, dy = q.y - p.y;
    const double fx = p.x - c->center.x, fy = p.y - c->center.y;
    const double a = dx * dx + dy * dy;
    const double b = 2.0 * (fx * dx + fy * dy);
    const double cc = fx * fx + fy * fy - c->radius * c->radius;
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)})
        if (t > 0.0 && t < best) best = t;
    }
    return best;
  }
  const auto& v = std::get<Polygon>(s).vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const double rx = q.x - p.x, ry = q.y - p.y;
    const double sx = v[i].x - v[j].x, sy = v[i].y - v[j].y;
    const double denom = rx * sy - ry * sx;
    if (denom == 0.0) continue;
    const double wx = v[j].x - p.x, wy = v[j].y - p.y;
    const double t = (wx * sy - wy * sx) / denom;
    const double u = (wx * ry - wy * rx) / denom;
    if (t > 0.0 && t < best && u >= -1e-12 && u <= 1.0 + 1e-12) best = t;
  }
  return best;
}

}  // namespace detail

inline void ElectrodeGeometry2D::validate() const {
  if (!(domain.xmax > domain.xmin && domain.ymax > domain.ymin)) throw DomainError("empty solver domain");
  if (electrodes.empty()) throw DomainError("geometry has no electrodes");
  auto in_box = [&](Point p) {
    return p.x >= domain.xmin && p.x <= domain.xmax && p.y >= domain.ymin && p.y <= domain.ymax;
  };
  for (const auto& e : electrodes) {
    if (!std::isfinite(e.potential)) throw DomainError("electrode '" + e.name + "' has no finite potential");
    if (const auto* c = std::get_if<Circle>(&e.shape)) {
      if (!(c->radius > 0.0)) throw DomainError("electrode '" + e.name + "': radius must be positive");
      if (!e.exterior && !(in_box({c->center.x - c->radius, c->center.y - c->radius}) &&
                           in_box({c->center.x + c->radius, c->center.y + c->radius})))
        throw DomainError("electrode '" + e.name + "' leaves the domain");
      continue;
    }
    const auto& v = std::get<Polygon>(e.shape).vertices;
    if (v.size() < 3) throw DomainError("electrode '" + e.name + "': polygon needs three vertices");
    for (const auto& p : v)
      if (!in_box(p)) throw DomainError("electrode '" + e.name + "' leaves the domain");
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (detail::segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
          throw DomainError("electrode '" + e.name + "': polygon self-intersects");
      }
  }
}

struct SolverOptions {
  double tol = 1e-10;          ///< residual bound relative to max |potential|
  int max_iterations = 200000;
  std::optional<double> omega; ///< over-relaxation factor; near-optimal default
  int min_gap_cells = 8;
};

/// Solved potential on the node lattice x_i = xmin + i h, y_j = ymin + j h.
class PotentialGrid {
 public:
  static constexpr int kFree = -1;
  static constexpr int kBoundary = -2;

  PotentialGrid(const Box& box, double h) : box_(box), h_(h) {
    if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
    nx_ = static_cast<int>(std::floor((box.xmax - box.xmin) / h + 1e-9)) + 1;
    ny_ = static_cast<int>(std::floor((box.ymax - box.ymin) / h + 1e-9)) + 1;
    if (nx_ < 5 || ny_ < 5) throw DomainError("grid spacing too coarse for the domain");
    phi_.assign(static_cast<std::size_t>(nx_) * ny_, 0.0);
    owner_.assign(phi_.size(), kFree);
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  double x(int i) const { return box_.xmin + i * h_; }
  double y(int j) const { return box_.ymin + j * h_; }
  const Box& box() const { return box_; }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  double operator()(int i, int j) const { return phi_[index(i, j)]; }
  bool fixed(int i, int j) const { return owner_[index(i, j)] != kFree; }
  /// Electrode index owning the node, kBoundary for grounded edges, kFree.
  int owner(int i, int j) const { return owner_[index(i, j)]; }

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

  const std::vector<double>& values() const { return phi_; }

 private:
  friend PotentialGrid solve_potential(const ElectrodeGeometry2D&, double, const SolverOptions&);

  Box box_;
  double h_;
  int nx_ = 0, ny_ = 0;
  std::vector<double> phi_;
  std::vector<int> owner_;
  double residual_ = 0.0;
  int iterations_ = 0;
};

namespace detail {

struct Stencil {
  std::array<std::int64_t, 4> neighbor{};  ///< -1 when the arm ends on an electrode
  std::array<double, 4> weight{};
  double boundary_sum = 0.0;  ///< sum of weight * potential over cut arms
  double diagonal = 0.0;
};

/// Along each grid line, runs of free nodes between fixed nodes held at
/// different potentials must span at least min_cells cells.
inline void check_gaps(const PotentialGrid& g, const std::vector<double>& fixed_value, int min_cells) {
  auto scan = [&](int count, int length, auto node) {
    for (int line = 0; line < count; ++line) {
      int last = -1;
      for (int k = 0; k < length; ++k) {
        const auto [i, j] = node(line, k);
        if (!g.fixed(i, j)) continue;
        if (last >= 0 && k - last > 1) {
          const auto [pi, pj] = node(line, last);
          if (fixed_value[g.index(pi, pj)] != fixed_value[g.index(i, j)] && k - last < min_cells) {
            std::ostringstream msg;
            msg << "grid spacing resolves an electrode gap by only " << (k - last) << " cells (need "
                << min_cells << ")";
            throw DomainError(msg.str());
          }
        }
        last = k;
      }
    }
  };
  scan(g.ny(), g.nx(), [](int line, int k) { return std::pair{k, line}; });
  scan(g.nx(), g.ny(), [](int line, int k) { return std::pair{line, k}; });
}

}  // namespace detail

inline PotentialGrid solve_potential(const ElectrodeGeometry2D& geom, double h, const SolverOptions& opts = {}) {
  geom.validate();
  PotentialGrid g(geom.domain, h);
  const int nx = g.nx(), ny = g.ny();

  double vmax = 0.0;
  for (const auto& e : geom.electrodes) vmax = std::max(vmax, std::abs(e.potential));

  // Classify nodes.
  std::vector<double> fixed_value(g.phi_.size(), 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Point p{g.x(i), g.y(j)};
      const auto k = g.index(i, j);
      for (std::size_t e = 0; e < geom.electrodes.size(); ++e)
        if (detail::inside_electrode(geom.electrodes[e], p)) {
          g.owner_[k] = static_cast<int>(e);
          fixed_value[k] = geom.electrodes[e].potential;
          break;
        }
      const bool edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
      if (edge && geom.grounded_boundary && g.owner_[k] == PotentialGrid::kFree) {
        g.owner_[k] = PotentialGrid::kBoundary;
        fixed_value[k] = 0.0;
      }
      g.phi_[k] = fixed_value[k];
    }
  detail::check_gaps(g, fixed_value, opts.min_gap_cells);

  // Build stencils for free nodes.
  std::vector<std::int64_t> free_nodes;
  std::vector<detail::Stencil> stencils;
  constexpr std::array<int, 4> di{1, -1, 0, 0};
  constexpr std::array<int, 4> dj{0, 0, 1, -1};
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (g.fixed(i, j)) continue;
      std::array<double, 4> arm{h, h, h, h};
      std::array<std::int64_t, 4> nb{};
      std::array<double, 4> cut_value{};
      std::array<bool, 4> cut{};
      for (int d = 0; d < 4; ++d) {
        int ii = i + di[d], jj = j + dj[d];
        // Insulating edge: mirror the node across the boundary.
        if (ii < 0 || ii >= nx) ii = i - di[d];
        if (jj < 0 || jj >= ny) jj = j - dj[d];
        nb[d] = static_cast<std::int64_t>(g.index(ii, jj));
        const int own = g.owner(ii, jj);
        if (own >= 0) {
          const auto& e = geom.electrodes[static_cast<std::size_t>(own)];
          const double t = detail::boundary_crossing(e.shape, {g.x(i), g.y(j)}, {g.x(ii), g.y(jj)});
          arm[d] = std::max(t, 1e-6) * h;
          cut[d] = true;
          cut_value[d] = e.potential;
        } else if (own == PotentialGrid::kBoundary) {
          cut[d] = true;
          cut_value[d] = 0.0;
        }
      }
      detail::Stencil s;
      for (int d = 0; d < 4; ++d) {
        const double span = (d < 2) ? arm[0] + arm[1] : arm[2] + arm[3];
        const double w = 2.0 / (arm[d] * span);
        s.weight[d] = w;
        s.diagonal += w;
        if (cut[d]) {
          s.neighbor[d] = -1;
          s.boundary_sum += w * cut_value[d];
        } else {
          s.neighbor[d] = nb[d];
        }
      }
      free_nodes.push_back(static_cast<std::int64_t>(g.index(i, j)));
      stencils.push_back(s);
    }

  const double omega =
      opts.omega.value_or(2.0 / (1.0 + std::sin(constants::pi / static_cast<double>(std::max(nx, ny)))));
  const double target = opts.tol * std::max(vmax, 1e-300);
  auto& phi = g.phi_;

  // Red-black split of the free nodes.
  std::array<std::vector<std::size_t>, 2> color;
  for (std::size_t n = 0; n < free_nodes.size(); ++n) {
    const auto k = free_nodes[n];
    const auto i = k % nx, j = k / nx;
    color[static_cast<std::size_t>((i + j) % 2)].push_back(n);
  }

  auto gauss_seidel_value = [&](std::size_t n) {
    const auto& s = stencils[n];
    double acc = s.boundary_sum;
    for (int d = 0; d < 4; ++d)
      if (s.neighbor[d] >= 0) acc += s.weight[d] * phi[static_cast<std::size_t>(s.neighbor[d])];
    return acc / s.diagonal;
  };

  double res = 0.0;
  int it = 0;
  if (!free_nodes.empty()) {
    for (;;) {
      for (const auto& part : color)
        for (std::size_t n : part) {
          auto& u = phi[static_cast<std::size_t>(free_nodes[n])];
          u += omega * (gauss_seidel_value(n) - u);
        }
      ++it;
      res = 0.0;
      for (std::size_t n = 0; n < free_nodes.size(); ++n)
        res = std::max(res, std::abs(gauss_seidel_value(n) - phi[static_cast<std::size_t>(free_nodes[n])]));
      if (res <= target) break;
      if (it >= opts.max_iterations) {
        std::ostringstream msg;
        msg << "relaxation did not converge: residual " << res << " V after " << it << " iterations (target "
            << target << " V)";
        throw NumericError(msg.str());
      }
    }
  }
  g.residual_ = res;
  g.iterations_ = it;
  return g;
}

struct FieldSample {
  double ex = 0.0, ey = 0.0;
  double grad_product = 0.0;  ///< (E.grad)E_x, V^2/m^3
};

namespace detail {

inline FieldSample node_field(const PotentialGrid& g, int i, int j) {
  const double h = g.h();
  const double px = (g(i + 1, j) - g(i - 1, j)) / (2 * h);
  const double py = (g(i, j + 1) - g(i, j - 1)) / (2 * h);
  const double pxx = (g(i + 1, j) - 2 * g(i, j) + g(i - 1, j)) / (h * h);
  const double pxy = (g(i + 1, j + 1) - g(i + 1, j - 1) - g(i - 1, j + 1) + g(i - 1, j - 1)) / (4 * h * h);
  // E = -grad phi, so (E.grad)E_x = phi_x phi_xx + phi_y phi_xy.
  return {-px, -py, px * pxx + py * pxy};
}

}  // namespace detail

/// Field and (E.grad)E_x at an arbitrary point, bilinear between nodes.
/// Every node of the 4x4 block around the point must be free and away from
/// the domain edge.
inline FieldSample sample_field(const PotentialGrid& g, Point p) {
  const double fx = (p.x - g.box().xmin) / g.h();
  const double fy = (p.y - g.box().ymin) / g.h();
  const int i0 = static_cast<int>(std::floor(fx));
  const int j0 = static_cast<int>(std::floor(fy));
  for (int j = j0 - 1; j <= j0 + 2; ++j)
    for (int i = i0 - 1; i <= i0 + 2; ++i) {
      if (i < 1 || j < 1 || i > g.nx() - 2 || j > g.ny() - 2 || g.fixed(i, j)) {
        std::ostringstream msg;
        msg << "point (" << p.x << ", " << p.y << ") lies within two grid cells of an electrode or the domain edge";
        throw DomainError(msg.str());
      }
    }
  const double tx = fx - i0, ty = fy - j0;
  FieldSample out;
  const std::array<std::pair<int, int>, 4> corners{{{0, 0}, {1, 0}, {0, 1}, {1, 1}}};
  for (const auto& [ci, cj] : corners) {
    const double w = (ci ? tx : 1 - tx) * (cj ? ty : 1 - ty);
    const auto s = detail::node_field(g, i0 + ci, j0 + cj);
    out.ex += w * s.ex;
    out.ey += w * s.ey;
    out.grad_product += w * s.grad_product;
  }
  return out;
}

inline double gradient_product(const PotentialGrid& g, Point p) { return sample_field(g, p).grad_product; }

/// Top-hat-equivalent length of a force profile sampled along the beam:
/// trapezoidal area divided by the value at the profile center.
inline double effective_length(const std::vector<double>& z, const std::vector<double>& k,
                               std::optional<double> center = std::nullopt) {
  if (z.size() < 3 || z.size() != k.size()) throw DomainError("profile needs at least three samples");
  for (std::size_t i = 1; i < z.size(); ++i)
    if (!(z[i] > z[i - 1])) throw DomainError("profile positions must increase");
  double peak = 0.0;
  for (double v : k) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) throw DomainError("profile is identically zero");
  if (std::abs(k.front()) > 0.01 * peak || std::abs(k.back()) > 0.01 * peak)
    throw DomainError("profile does not decay to 1% of its peak at the ends; enlarge the domain");
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < z.size(); ++i) area += 0.5 * (z[i + 1] - z[i]) * (k[i] + k[i + 1]);
  const double zc = center.value_or(0.5 * (z.front() + z.back()));
  if (zc < z.front() || zc > z.back()) throw DomainError("profile center outside the samples");
  const auto it = std::upper_bound(z.begin(), z.end(), zc);
  std::size_t hi = static_cast<std::size_t>(it - z.begin());
  if (hi >= z.size()) hi = z.size() - 1;
  const std::size_t lo = hi - 1;
  const double t = (zc - z[lo]) / (z[hi] - z[lo]);
  const double kc = (1 - t) * k[lo] + t * k[hi];
  if (kc == 0.0) throw DomainError("profile vanishes at its center");
  return area / kc;
}

/// Squared field magnitude along a line of constant x (the beam axis in the
/// longitudinal plane). Used as the longitudinal profile of the deflection
/// force, which scales with the local field squared.
inline std::pair<std::vector<double>, std::vector<double>> axial_field_squared(const PotentialGrid& g, double x,
                                                                               double z_from, double z_to,
                                                                               int samples) {
  if (samples < 3) throw DomainError("axial profile needs at least three samples");
  std::vector<double> z(static_cast<std::size_t>(samples)), k(z.size());
  for (int n = 0; n < samples; ++n) {
    z[n] = z_from + (z_to - z_from) * n / (samples - 1);
    const auto s = sample_field(g, {x, z[n]});
    k[n] = s.ex * s.ex + s.ey * s.ey;
  }
  return {z, k};
}

struct Homogeneity {
  double reference = 0.0;        ///< (E.grad)E_x at the segment midpoint
  double max_abs_deviation = 0.0;
  /// Empty when the reference sits at the discretization floor, where a
  /// relative number carries no meaning.
  std::optional<double> max_rel_deviation;
};

/// Variation of (E.grad)E_x along a beam segment relative to its midpoint.
inline Homogeneity homogeneity(const PotentialGrid& g, Point from, Point to, int samples = 21) {
  if (samples < 1) throw DomainError("homogeneity needs at least one sample");
  const Point mid{0.5 * (from.x + to.x), 0.5 * (from.y + to.y)};
  Homogeneity out;
  out.reference = gradient_product(g, mid);
  const bool degenerate = from.x == to.x && from.y == to.y;
  const int n = degenerate ? 1 : std::max(samples, 2);
  for (int s = 0; s < n; ++s) {
    const double t = n == 1 ? 0.5 : static_cast<double>(s) / (n - 1);
    const double k = gradient_product(g, {from.x + t * (to.x - from.x), from.y + t * (to.y - from.y)});
    out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(k - out.reference));
  }
  // Floor: (potential span / domain size)^2 / domain size, times 1e-6.
  double vmax = 0.0;
  for (double v : g.values()) vmax = std::max(vmax, std::abs(v));
  const double size = std::max(g.box().xmax - g.box().xmin, g.box().ymax - g.box().ymin);
  const double floor = 1e-6 * vmax * vmax / (size * size * size);
  if (std::abs(out.reference) > floor) out.max_rel_deviation = out.max_abs_deviation / std::abs(out.reference);
  return out;
}

}  // namespace tlstark::field
