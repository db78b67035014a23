#pragma once

// Deterministic standalone SVG output: scalar-field level curves via
// marching squares on 2D slices, plus cone glyphs at sampled nodes.
// All coordinates go through format_real so reruns are byte-identical.

#include <sstream>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "util.hpp"

namespace conegrid {

struct SvgCanvas {
  double width = 640, height = 640;
  double margin = 40;
  // chart bounds mapped onto the canvas; y (time) axis points up
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  std::ostringstream body;

  double px(double x) const {
    return margin + (x - x0) / (x1 - x0) * (width - 2 * margin);
  }
  double py(double y) const {
    return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin);
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke, double stroke_width) {
    if (pts.size() < 2) return;
    body << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
         << format_real(stroke_width) << "\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
      if (i) body << " ";
      body << format_real(px(pts[i].first)) << "," << format_real(py(pts[i].second));
    }
    body << "\"/>\n";
  }

  void line(double xa, double ya, double xb, double yb, const std::string& stroke,
            double stroke_width) {
    body << "<line x1=\"" << format_real(px(xa)) << "\" y1=\"" << format_real(py(ya))
         << "\" x2=\"" << format_real(px(xb)) << "\" y2=\"" << format_real(py(yb))
         << "\" stroke=\"" << stroke << "\" stroke-width=\""
         << format_real(stroke_width) << "\"/>\n";
  }

  void circle(double x, double y, double r_px, const std::string& fill) {
    body << "<circle cx=\"" << format_real(px(x)) << "\" cy=\"" << format_real(py(y))
         << "\" r=\"" << format_real(r_px) << "\" fill=\"" << fill << "\"/>\n";
  }

  void text(double x, double y, const std::string& s) {
    body << "<text x=\"" << format_real(px(x)) << "\" y=\"" << format_real(py(y))
         << "\" font-size=\"12\" font-family=\"monospace\">" << s << "</text>\n";
  }

  std::string render() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
       << format_real(width) << "\" height=\"" << format_real(height) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << body.str();
    os << "</svg>\n";
    return os.str();
  }
};

namespace detail {

// Marching squares on one cell; appends the level-crossing segments.
inline void cell_segments(double x[2], double y[2], double v[4], double level,
                          std::vector<std::array<double, 4>>& segs) {
  // corner order: (0,0) (1,0) (1,1) (0,1) in (x index, y index)
  double cx[4] = {x[0], x[1], x[1], x[0]};
  double cy[4] = {y[0], y[0], y[1], y[1]};
  int edges[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  std::vector<std::pair<double, double>> pts;
  for (auto& e : edges) {
    double a = v[e[0]] - level, b = v[e[1]] - level;
    if ((a < 0 && b >= 0) || (a >= 0 && b < 0)) {
      double t = a / (a - b);
      pts.push_back({cx[e[0]] + t * (cx[e[1]] - cx[e[0]]),
                     cy[e[0]] + t * (cy[e[1]] - cy[e[0]])});
    }
  }
  for (size_t i = 0; i + 1 < pts.size(); i += 2)
    segs.push_back({pts[i].first, pts[i].second, pts[i + 1].first, pts[i + 1].second});
}

}  // namespace detail

// Level curves of a per-node scalar field on a 2D grid (3D grids use the
// y=mid slice), plus cone glyphs on a coarse subsample of nodes.
inline std::string render_field_svg(const Spacetime& st, const std::vector<double>& field,
                                    const std::vector<double>& levels,
                                    int cone_stride = 4, double cone_scale = 0.8) {
  const Grid& gr = st.grid;
  if (static_cast<int>(field.size()) != gr.node_count())
    throw std::invalid_argument("render_field_svg: field size mismatch");

  int slice_y = gr.dim == 3 ? gr.dims[2] / 2 : 0;
  auto node_at = [&](int it, int ix) {
    std::array<int, kMaxDim> c{it, ix, slice_y};
    return gr.index(c);
  };

  SvgCanvas cv;
  cv.x0 = gr.origin[1] - gr.spacing[1];
  cv.x1 = gr.origin[1] + gr.dims[1] * gr.spacing[1];
  cv.y0 = gr.origin[0] - gr.spacing[0];
  cv.y1 = gr.origin[0] + gr.dims[0] * gr.spacing[0];

  // grid frame
  cv.line(gr.origin[1], gr.origin[0], gr.origin[1] + (gr.dims[1] - 1) * gr.spacing[1],
          gr.origin[0], "#cccccc", 1.0);
  cv.line(gr.origin[1], gr.origin[0], gr.origin[1],
          gr.origin[0] + (gr.dims[0] - 1) * gr.spacing[0], "#cccccc", 1.0);

  // level curves
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b",
                           "#e377c2"};
  for (size_t li = 0; li < levels.size(); ++li) {
    std::vector<std::array<double, 4>> segs;
    for (int it = 0; it + 1 < gr.dims[0]; ++it)
      for (int ix = 0; ix + 1 < gr.dims[1]; ++ix) {
        double xs[2] = {gr.origin[1] + ix * gr.spacing[1],
                        gr.origin[1] + (ix + 1) * gr.spacing[1]};
        double ys[2] = {gr.origin[0] + it * gr.spacing[0],
                        gr.origin[0] + (it + 1) * gr.spacing[0]};
        double v[4] = {field[node_at(it, ix)], field[node_at(it, ix + 1)],
                       field[node_at(it + 1, ix + 1)], field[node_at(it + 1, ix)]};
        bool finite = true;
        for (double w : v)
          if (!std::isfinite(w)) finite = false;
        if (!finite) continue;
        detail::cell_segments(xs, ys, v, levels[li], segs);
      }
    const std::string color = palette[li % 6];
    for (const auto& s : segs) cv.polyline({{s[0], s[1]}, {s[2], s[3]}}, color, 1.5);
  }

  // cone glyphs: the two boundary rays (2D) of the local cone, drawn short
  if (gr.dim == 2)
    for (int it = 0; it < gr.dims[0]; it += cone_stride)
      for (int ix = 0; ix < gr.dims[1]; ix += cone_stride) {
      int node = node_at(it, ix);
      double cxp = gr.origin[1] + ix * gr.spacing[1];
      double cyp = gr.origin[0] + it * gr.spacing[0];
      const ConeSpec& cone = st.cone(node);
      Vec ax = cone.axis();
      double len = cone_scale * std::min(gr.spacing[0], gr.spacing[1]);
      // sweep directions around the axis; draw the extreme cone members
      Vec lo = ax, hi = ax;
      bool found = false;
      for (int k = -90; k <= 90; ++k) {
        double th = k * (3.14159265358979323846 / 180.0);
        Vec d(ax[0] * std::cos(th) - ax[1] * std::sin(th),
              ax[0] * std::sin(th) + ax[1] * std::cos(th));
        if (cone.contains(d)) {
          if (!found) lo = d;
          hi = d;
          found = true;
        }
      }
      if (!found) continue;
      for (const Vec& d : {lo, hi}) {
        double nn = d.norm();
        cv.line(cxp, cyp, cxp + len * d[1] / nn, cyp + len * d[0] / nn, "#ff9900", 1.0);
      }
      cv.circle(cxp, cyp, 1.5, "#333333");
    }

  return cv.render();
}

}  // namespace conegrid
