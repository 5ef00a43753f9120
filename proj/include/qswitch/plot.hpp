#pragma once

// Static SVG rendering of 3-flow sweeps: stable and unstable grid points over
// the wireframe of the analytic region, in a fixed isometric projection.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qswitch/region.hpp"
#include "qswitch/report.hpp"

namespace qswitch {

using Vec3 = std::array<double, 3>;

struct Wireframe {
  std::vector<Vec3> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Vertices and edges of {x >= 0 : sum_{i in S} x_i <= c_S} for a 3-flow
/// region.
inline Wireframe region_wireframe(const RateRegion& region, double tol = 1e-9) {
  if (region.num_flows != 3) throw std::invalid_argument("wireframes are drawn for three flows only");
  std::vector<Vec3> normal;
  std::vector<double> rhs;
  for (const auto& b : region.bounds) {
    normal.push_back({double(b.subset & 1U), double((b.subset >> 1) & 1U), double((b.subset >> 2) & 1U)});
    rhs.push_back(b.bound);
  }
  for (int i = 0; i < 3; ++i) {
    Vec3 n{0, 0, 0};
    n[i] = -1.0;
    normal.push_back(n);
    rhs.push_back(0.0);
  }
  const std::size_t m = normal.size();
  auto det3 = [](const Vec3& a, const Vec3& b, const Vec3& c) {
    return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
  };
  auto tight = [&](const Vec3& v, std::size_t r) {
    return std::abs(normal[r][0] * v[0] + normal[r][1] * v[1] + normal[r][2] * v[2] - rhs[r]) <= tol;
  };
  auto feasible = [&](const Vec3& v) {
    for (std::size_t r = 0; r < m; ++r) {
      if (normal[r][0] * v[0] + normal[r][1] * v[1] + normal[r][2] * v[2] > rhs[r] + tol) return false;
    }
    return true;
  };

  Wireframe w;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      for (std::size_t c = b + 1; c < m; ++c) {
        const double d = det3(normal[a], normal[b], normal[c]);
        if (std::abs(d) < 1e-12) continue;
        // Cramer's rule
        Vec3 v{};
        for (int i = 0; i < 3; ++i) {
          Vec3 ca = normal[a], cb = normal[b], cc = normal[c];
          ca[i] = rhs[a];
          cb[i] = rhs[b];
          cc[i] = rhs[c];
          v[i] = det3(ca, cb, cc) / d;
        }
        if (!feasible(v)) continue;
        bool dup = false;
        for (const auto& u : w.vertices) {
          if (std::abs(u[0] - v[0]) <= tol && std::abs(u[1] - v[1]) <= tol && std::abs(u[2] - v[2]) <= tol) dup = true;
        }
        if (!dup) w.vertices.push_back(v);
      }
    }
  }

  // two vertices span an edge iff their common tight constraints have rank 2
  for (std::size_t i = 0; i < w.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < w.vertices.size(); ++j) {
      std::vector<Vec3> common;
      for (std::size_t r = 0; r < m; ++r) {
        if (tight(w.vertices[i], r) && tight(w.vertices[j], r)) common.push_back(normal[r]);
      }
      bool rank2 = false;
      for (std::size_t a = 0; a < common.size() && !rank2; ++a) {
        for (std::size_t b = a + 1; b < common.size() && !rank2; ++b) {
          const Vec3& x = common[a];
          const Vec3& y = common[b];
          const Vec3 cr{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
          rank2 = std::abs(cr[0]) + std::abs(cr[1]) + std::abs(cr[2]) > 1e-12;
        }
      }
      if (rank2) w.edges.emplace_back(i, j);
    }
  }
  return w;
}

namespace detail {

struct Projection {
  double scale = 300.0;
  double ox = 300.0;
  double oy = 380.0;

  std::pair<double, double> operator()(const Vec3& v) const {
    const double c30 = std::sqrt(3.0) / 2.0;
    const double u = (v[0] - v[1]) * c30;
    const double h = (v[0] + v[1]) * 0.5 - v[2];
    return {ox + scale * u, oy + scale * h};
  }
};

inline std::string fixed2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

}  // namespace detail

/// Deterministic SVG: identical inputs give identical bytes.
inline void write_region_svg(std::ostream& out, const RateRegion& region, const std::vector<SweepPoint>& points,
                             const std::string& title = "") {
  if (region.num_flows != 3) throw std::invalid_argument("plots are drawn for three flows only");
  for (const auto& p : points) {
    if (p.lambda.size() != 3) throw std::invalid_argument("plots are drawn for three flows only");
  }
  const detail::Projection proj;
  const auto wf = region_wireframe(region);
  using detail::fixed2;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n"
      << "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"320\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << title
        << "</text>\n";
  }

  // unit axes
  const std::array<std::pair<Vec3, const char*>, 3> axes{
      {{{1.0, 0.0, 0.0}, "lambda1"}, {{0.0, 1.0, 0.0}, "lambda2"}, {{0.0, 0.0, 1.0}, "lambda3"}}};
  const auto origin = proj({0, 0, 0});
  out << "<g stroke=\"#888\" stroke-width=\"1\">\n";
  for (const auto& [tip, label] : axes) {
    const auto t = proj(tip);
    out << "<line x1=\"" << fixed2(origin.first) << "\" y1=\"" << fixed2(origin.second) << "\" x2=\""
        << fixed2(t.first) << "\" y2=\"" << fixed2(t.second) << "\"/>\n";
  }
  out << "</g>\n<g font-family=\"sans-serif\" font-size=\"13\" fill=\"#444\">\n";
  for (const auto& [tip, label] : axes) {
    const auto t = proj(tip);
    out << "<text x=\"" << fixed2(t.first + 6) << "\" y=\"" << fixed2(t.second + 4) << "\">" << label << "</text>\n";
  }
  out << "</g>\n";

  out << "<g id=\"points\">\n";
  for (const auto& p : points) {
    const auto xy = proj({p.lambda[0], p.lambda[1], p.lambda[2]});
    if (p.stable) {
      out << "<circle cx=\"" << fixed2(xy.first) << "\" cy=\"" << fixed2(xy.second)
          << "\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.6\"/>\n";
    } else {
      out << "<circle cx=\"" << fixed2(xy.first) << "\" cy=\"" << fixed2(xy.second)
          << "\" r=\"1\" fill=\"#d62728\" fill-opacity=\"0.25\"/>\n";
    }
  }
  out << "</g>\n";

  out << "<g id=\"region\" stroke=\"black\" stroke-width=\"1.5\" fill=\"none\">\n";
  for (const auto& [a, b] : wf.edges) {
    const auto pa = proj(wf.vertices[a]);
    const auto pb = proj(wf.vertices[b]);
    out << "<line x1=\"" << fixed2(pa.first) << "\" y1=\"" << fixed2(pa.second) << "\" x2=\"" << fixed2(pb.first)
        << "\" y2=\"" << fixed2(pb.second) << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
}

}  // namespace qswitch
