#include "glmos/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "glmos/errors.hpp"

namespace glmos {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double raw_transform(const FittedVariable& var, double x) {
  if (var.has_spline) {
    std::vector<double> row(static_cast<std::size_t>(var.basis.dim()), 0.0);
    var.basis.eval_row(x, row.data());
    double t = var.spline_intercept;
    for (Eigen::Index j = 0; j < var.spline_coef.size(); ++j)
      t += var.spline_coef(j) * row[static_cast<std::size_t>(j)];
    return var.std.apply(t);
  }
  return var.std.apply(x);
}

}  // namespace

PlotData transformation_plot_data(const FittedVariable& var, int samples) {
  PlotData pd;
  const int C = var.num_categories();
  if (C == 0) return pd;

  std::vector<int> order(C);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return var.values[a] < var.values[b]; });

  for (int c : order)
    pd.points.push_back({var.values[c], var.v[c], var.counts[c]});

  double lo = pd.points.front().x;
  double hi = pd.points.back().x;

  switch (var.level) {
    case Level::NominalStep:
    case Level::OrdinalStep: {
      // Horizontal segment per category, split at midpoints between
      // neighbouring category values.
      for (std::size_t i = 0; i < pd.points.size(); ++i) {
        double left = i == 0 ? pd.points[i].x
                             : 0.5 * (pd.points[i - 1].x + pd.points[i].x);
        double right = i + 1 == pd.points.size()
                           ? pd.points[i].x
                           : 0.5 * (pd.points[i].x + pd.points[i + 1].x);
        pd.curve.push_back({left, pd.points[i].y, 0.0});
        pd.curve.push_back({right, pd.points[i].y, 0.0});
      }
      break;
    }
    case Level::SplineNonmonotone:
    case Level::SplineMonotone: {
      int m = std::max(2, samples);
      for (int i = 0; i < m; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / (m - 1);
        pd.curve.push_back({x, raw_transform(var, x), 0.0});
      }
      break;
    }
    case Level::Numeric: {
      pd.curve.push_back({lo, var.std.apply(lo), 0.0});
      pd.curve.push_back({hi, var.std.apply(hi), 0.0});
      break;
    }
  }
  return pd;
}

std::string transformation_svg(const FittedVariable& var, bool timestamp) {
  PlotData pd = transformation_plot_data(var);
  if (pd.points.empty()) throw DataError("no categories to plot");

  const double W = 640, H = 440;
  const double ml = 64, mr = 24, mt = 56, mb = 48;

  double xlo = pd.points.front().x, xhi = pd.points.back().x;
  double ylo = pd.points.front().y, yhi = ylo;
  for (const auto& p : pd.points) { ylo = std::min(ylo, p.y); yhi = std::max(yhi, p.y); }
  for (const auto& p : pd.curve) { ylo = std::min(ylo, p.y); yhi = std::max(yhi, p.y); }
  if (xhi - xlo < 1e-12) { xlo -= 0.5; xhi += 0.5; }
  if (yhi - ylo < 1e-12) { ylo -= 0.5; yhi += 0.5; }
  double xpad = 0.04 * (xhi - xlo), ypad = 0.08 * (yhi - ylo);
  xlo -= xpad; xhi += xpad; ylo -= ypad; yhi += ypad;

  auto X = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * (W - ml - mr); };
  auto Y = [&](double y) { return H - mb - (y - ylo) / (yhi - ylo) * (H - mt - mb); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
    << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  if (timestamp) {
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    s << "<!-- generated " << buf << " -->\n";
  }
  s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"16\" font-weight=\"bold\">"
    << var.name << "</text>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"42\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"12\" fill=\"#555\">"
    << to_string(var.level) << ", beta = " << fmt(var.beta) << "</text>\n";

  // Axes with a dotted zero line when zero is inside the y range.
  s << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
    << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
    << H - mb << "\" stroke=\"black\"/>\n";
  if (ylo < 0.0 && yhi > 0.0)
    s << "<line x1=\"" << ml << "\" y1=\"" << Y(0) << "\" x2=\"" << W - mr
      << "\" y2=\"" << Y(0)
      << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    double fx = xlo + (xhi - xlo) * i / 4.0;
    double fy = ylo + (yhi - ylo) * i / 4.0;
    s << "<line x1=\"" << X(fx) << "\" y1=\"" << H - mb << "\" x2=\"" << X(fx)
      << "\" y2=\"" << H - mb + 4 << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << X(fx) << "\" y=\"" << H - mb + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(fx) << "</text>\n";
    s << "<line x1=\"" << ml - 4 << "\" y1=\"" << Y(fy) << "\" x2=\"" << ml
      << "\" y2=\"" << Y(fy) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << ml - 8 << "\" y=\"" << Y(fy) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(fy) << "</text>\n";
  }
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 10
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
    << (var.rank_values ? "category rank" : "original value") << "</text>\n";
  s << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       "transform=\"rotate(-90 16 " << (mt + H - mb) / 2 << ")\">quantification</text>\n";

  if (!pd.curve.empty()) {
    s << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pd.curve.size(); ++i) {
      if (i) s << " ";
      s << fmt(X(pd.curve[i].x)) << "," << fmt(Y(pd.curve[i].y));
    }
    s << "\"/>\n";
  }
  if (pd.points.size() <= 60) {
    for (const auto& p : pd.points)
      s << "<circle cx=\"" << fmt(X(p.x)) << "\" cy=\"" << fmt(Y(p.y))
        << "\" r=\"3.5\" fill=\"#d1495b\"><title>value " << fmt(p.x)
        << ", count " << fmt(p.count) << "</title></circle>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void write_transformation_svg(const FittedVariable& var, const std::string& path,
                              bool timestamp) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << transformation_svg(var, timestamp);
}

}  // namespace glmos
