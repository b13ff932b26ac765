#include "hjlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hjlab {

namespace {

const char* kSeriesColors[] = {"#1f6fb2", "#d03a2c", "#2c8a4b",
                               "#8a5bb8", "#b28a1f", "#3ab2a8"};

double tf(double v, bool log_scale) {
  return log_scale ? std::log10(v) : v;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// Piecewise-linear blue -> white -> red map on [0, 1].
std::string colormap(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto mix = [](int a, int b, double u) {
    return static_cast<int>(a + (b - a) * u);
  };
  int r, g, b;
  if (t < 0.5) {
    double u = t / 0.5;
    r = mix(33, 247, u);
    g = mix(102, 247, u);
    b = mix(172, 247, u);
  } else {
    double u = (t - 0.5) / 0.5;
    r = mix(247, 178, u);
    g = mix(247, 24, u);
    b = mix(247, 43, u);
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

void write_line_plot(const std::string& path,
                     const std::vector<PlotSeries>& series,
                     const PlotOptions& opt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("svg: cannot open " + path);

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (opt.log_x && s.x[k] <= 0.0) continue;
      if (opt.log_y && s.y[k] <= 0.0) continue;
      xmin = std::min(xmin, tf(s.x[k], opt.log_x));
      xmax = std::max(xmax, tf(s.x[k], opt.log_x));
      ymin = std::min(ymin, tf(s.y[k], opt.log_y));
      ymax = std::max(ymax, tf(s.y[k], opt.log_y));
    }
  if (!(xmin <= xmax)) throw std::runtime_error("svg: no plottable points");
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }

  const int ml = 70, mr = 20, mt = 40, mb = 50;
  double pw = opt.width - ml - mr, ph = opt.height - mt - mb;
  auto px = [&](double x) { return ml + (tf(x, opt.log_x) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (tf(y, opt.log_y) - ymin) / (ymax - ymin) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
      << "\" height=\"" << opt.height << "\" font-family=\"monospace\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << opt.width / 2 << "\" y=\"20\" text-anchor=\"middle\">"
      << opt.title << "</text>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    double gx = xmin + (xmax - xmin) * k / 4.0;
    double gy = ymin + (ymax - ymin) * k / 4.0;
    double sx = ml + pw * k / 4.0;
    double sy = mt + ph - ph * k / 4.0;
    double lx = opt.log_x ? std::pow(10.0, gx) : gx;
    double ly = opt.log_y ? std::pow(10.0, gy) : gy;
    out << "<line x1=\"" << sx << "\" y1=\"" << mt + ph << "\" x2=\"" << sx
        << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << sx << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << fmt(lx) << "</text>\n";
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy << "\" x2=\"" << ml
        << "\" y2=\"" << sy << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << sy + 4
        << "\" text-anchor=\"end\">" << fmt(ly) << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opt.height - 12
      << "\" text-anchor=\"middle\">" << opt.x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << opt.y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kSeriesColors[s % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      if (opt.log_x && series[s].x[k] <= 0.0) continue;
      if (opt.log_y && series[s].y[k] <= 0.0) continue;
      out << px(series[s].x[k]) << "," << py(series[s].y[k]) << " ";
    }
    out << "\"/>\n";
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      if (opt.log_x && series[s].x[k] <= 0.0) continue;
      if (opt.log_y && series[s].y[k] <= 0.0) continue;
      out << "<circle cx=\"" << px(series[s].x[k]) << "\" cy=\""
          << py(series[s].y[k]) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    double ly = mt + 14 + 16.0 * s;
    out << "<line x1=\"" << ml + pw - 120 << "\" y1=\"" << ly << "\" x2=\""
        << ml + pw - 100 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << ml + pw - 94 << "\" y=\"" << ly + 4 << "\">"
        << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
}

void write_heatmap(const std::string& path, int nx, int ny,
                   const std::vector<double>& values, Model::BBox bbox,
                   const std::vector<std::vector<Vec2>>& overlays,
                   const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("svg: cannot open " + path);

  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (double v : values)
    if (std::isfinite(v)) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  if (!(vmin <= vmax)) throw std::runtime_error("svg: heatmap is all NaN");
  if (vmax - vmin < 1e-15) vmax = vmin + 1.0;

  const int ml = 50, mt = 40, mb = 30, mr = 20;
  const int pw = 560, ph = 520;
  auto px = [&](double x) {
    return ml + (x - bbox.x1_min) / (bbox.x1_max - bbox.x1_min) * pw;
  };
  auto py = [&](double y) {
    return mt + ph - (y - bbox.x2_min) / (bbox.x2_max - bbox.x2_min) * ph;
  };
  double cw = static_cast<double>(pw) / nx, chh = static_cast<double>(ph) / ny;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << ml + pw + mr
      << "\" height=\"" << mt + ph + mb
      << "\" font-family=\"monospace\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"20\" text-anchor=\"middle\">"
      << title << " (range " << fmt(vmin) << " .. " << fmt(vmax)
      << ")</text>\n";

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double v = values[static_cast<std::size_t>(j) * nx + i];
      if (!std::isfinite(v)) continue;
      double t = (v - vmin) / (vmax - vmin);
      out << "<rect x=\"" << ml + i * cw << "\" y=\"" << mt + ph - (j + 1) * chh
          << "\" width=\"" << cw + 0.5 << "\" height=\"" << chh + 0.5
          << "\" fill=\"" << colormap(t) << "\"/>\n";
    }

  for (const auto& line : overlays) {
    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
    for (Vec2 p : line) out << px(p.x1) << "," << py(p.x2) << " ";
    out << "\"/>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "</svg>\n";
}

}  // namespace hjlab
