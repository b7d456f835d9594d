#include "premium/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "premium/error.hpp"
#include "premium/style.hpp"

namespace premium {

namespace {

std::string num(double v) { return format_fixed(v, 2); }

struct Scale {
  double lo = 0.0;
  double hi = 1.0;
  double px0 = 0.0;
  double px1 = 1.0;

  double operator()(double v) const {
    return px0 + (v - lo) / (hi - lo) * (px1 - px0);
  }
};

struct Ticks {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> values;
  int decimals = 0;
};

// Domain widened to multiples of a 1/2/5 step.
Ticks nice_ticks(double lo, double hi, int target = 5) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw NumericError("figure data contains a non-finite value");
  }
  if (hi < lo) std::swap(lo, hi);
  if (hi == lo) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double unit = raw / mag;
  const double step = (unit <= 1.0 ? 1.0 : unit <= 2.0 ? 2.0 : unit <= 5.0 ? 5.0 : 10.0) * mag;
  Ticks t;
  t.lo = std::floor(lo / step + 1e-9) * step;
  t.hi = std::ceil(hi / step - 1e-9) * step;
  const auto count = static_cast<long>(std::llround((t.hi - t.lo) / step));
  for (long i = 0; i <= count; ++i) t.values.push_back(t.lo + step * static_cast<double>(i));
  t.decimals = std::clamp(static_cast<int>(-std::floor(std::log10(step) + 1e-9)), 0, 6);
  return t;
}

std::pair<double, double> min_max(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

std::string mix_color(std::string_view from, std::string_view to, double t) {
  auto channel = [](std::string_view hex, int i) {
    return std::stoi(std::string(hex.substr(1 + 2 * i, 2)), nullptr, 16);
  };
  t = std::clamp(t, 0.0, 1.0);
  char out[8];
  int rgb[3];
  for (int i = 0; i < 3; ++i) {
    rgb[i] = static_cast<int>(std::lround(channel(from, i) +
                                          (channel(to, i) - channel(from, i)) * t));
  }
  std::snprintf(out, sizeof out, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return out;
}

std::string diverging_color(double r) {
  r = std::clamp(r, -1.0, 1.0);
  return r < 0 ? mix_color(style::kNeutral, style::kNegative, -r)
               : mix_color(style::kNeutral, style::kPositive, r);
}

class Svg {
 public:
  Svg(double width, double height, const FigureSpec& spec) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
         << num(width) << "\" height=\"" << num(height) << "\" viewBox=\"0 0 "
         << num(width) << ' ' << num(height) << "\" font-family=\""
         << style::kFont << "\">\n";
    if (!spec.meta.is_null()) {
      out_ << "<metadata>" << xml_escape(spec.meta.dump()) << "</metadata>\n";
    }
    rect(0, 0, width, height, style::kBackground);
    text(width / 2, 24, spec.title, style::kTitleSize, "middle", "bold");
  }

  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view stroke = {}) {
    out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
         << num(w) << "\" height=\"" << num(h) << "\" fill=\"" << fill << '"';
    if (!stroke.empty()) out_ << " stroke=\"" << stroke << "\" stroke-width=\"1\"";
    out_ << "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, std::string_view color,
            double width = 1.0, std::string_view dash = {}) {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\""
         << num(x2) << "\" y2=\"" << num(y2) << "\" stroke=\"" << color
         << "\" stroke-width=\"" << num(width) << '"';
    if (!dash.empty()) out_ << " stroke-dasharray=\"" << dash << '"';
    out_ << "/>\n";
  }

  void circle(double cx, double cy, double r, std::string_view fill,
              double opacity = 1.0) {
    out_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\""
         << num(r) << "\" fill=\"" << fill << '"';
    if (opacity < 1.0) out_ << " fill-opacity=\"" << num(opacity) << '"';
    out_ << "/>\n";
  }

  void polyline(std::span<const double> xs, std::span<const double> ys,
                std::string_view color, double width, double opacity = 1.0) {
    out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
         << num(width) << '"';
    if (opacity < 1.0) out_ << " stroke-opacity=\"" << num(opacity) << '"';
    out_ << " points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) out_ << ' ';
      out_ << num(xs[i]) << ',' << num(ys[i]);
    }
    out_ << "\"/>\n";
  }

  void text(double x, double y, std::string_view content, double size,
            std::string_view anchor = "start", std::string_view weight = {},
            double rotate = 0.0, std::string_view fill = style::kAxis) {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\""
         << num(size) << "\" text-anchor=\"" << anchor << '"';
    if (!weight.empty()) out_ << " font-weight=\"" << weight << '"';
    if (rotate != 0.0) {
      out_ << " transform=\"rotate(" << num(rotate) << ' ' << num(x) << ' '
           << num(y) << ")\"";
    }
    out_ << " fill=\"" << fill << "\">" << xml_escape(content)
         << "</text>\n";
  }

  void raw(std::string_view s) { out_ << s; }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

struct Frame {
  double left = style::kMarginLeft;
  double top = style::kMarginTop;
  double right = style::kWidth - style::kMarginRight;
  double bottom = style::kHeight - style::kMarginBottom;
};

// Grid, tick labels, frame and axis titles for a numeric x/y plot.
void draw_axes(Svg& svg, const Frame& f, const Ticks& xt, const Scale& sx,
               const Ticks& yt, const Scale& sy, const FigureSpec& spec,
               bool x_ticks = true) {
  for (const double v : yt.values) {
    const double y = sy(v);
    svg.line(f.left, y, f.right, y, style::kGrid);
    svg.text(f.left - 6, y + 3.5, format_fixed(v, yt.decimals), style::kTickSize, "end");
  }
  if (x_ticks) {
    for (const double v : xt.values) {
      const double x = sx(v);
      svg.line(x, f.top, x, f.bottom, style::kGrid);
      svg.text(x, f.bottom + 15, format_fixed(v, xt.decimals), style::kTickSize, "middle");
    }
  }
  svg.line(f.left, f.bottom, f.right, f.bottom, style::kAxis);
  svg.line(f.left, f.top, f.left, f.bottom, style::kAxis);
  svg.text((f.left + f.right) / 2, f.bottom + 38, spec.x_label, style::kLabelSize, "middle");
  svg.text(18, (f.top + f.bottom) / 2, spec.y_label, style::kLabelSize, "middle", {}, -90);
}

void legend(Svg& svg, double x, double y,
            std::span<const std::pair<std::string, std::string_view>> entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double yy = y + 16.0 * static_cast<double>(i);
    svg.line(x, yy, x + 18, yy, entries[i].second, 2.5);
    svg.text(x + 24, yy + 4, entries[i].first, style::kTickSize);
  }
}

void require(bool ok, FigureKind kind, std::string_view what) {
  if (!ok) {
    throw ValidationError(std::string(figure_kind_name(kind)) + ": " +
                          std::string(what));
  }
}

void require_finite(std::span<const double> v, FigureKind kind) {
  for (const double x : v) require(std::isfinite(x), kind, "non-finite value");
}

// ---------------------------------------------------------------------------

std::string heatmap(const FigureSpec& spec, const CorrelationMatrix& c) {
  const std::size_t n = c.names.size();
  require(n > 0, spec.kind, "empty correlation matrix");
  require(c.r.rows() == n && c.r.cols() == n, spec.kind,
          "matrix shape does not match the names");
  require_finite(c.r.values(), spec.kind);
  const double cell = 44.0;
  const double left = 170.0;
  const double top = 50.0;
  const double width = left + cell * n + 90.0;
  const double height = top + cell * n + 150.0;
  Svg svg(width, height, spec);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = left + cell * j;
      const double y = top + cell * i;
      const double r = c.r(i, j);
      svg.rect(x, y, cell, cell, diverging_color(r), style::kBackground);
      svg.text(x + cell / 2, y + cell / 2 + 4, format_fixed(r, 2), style::kTickSize, "middle",
               {}, 0.0, std::abs(r) > 0.6 ? style::kBackground : style::kAxis);
    }
    svg.text(left - 6, top + cell * i + cell / 2 + 4, c.names[i], style::kTickSize, "end");
    const double lx = left + cell * i + cell / 2;
    const double ly = top + cell * n + 8;
    svg.text(lx, ly, c.names[i], style::kTickSize, "end", {}, -60);
  }
  const double bx = left + cell * n + 24;
  const double bh = cell * n;
  const int steps = 40;
  for (int k = 0; k < steps; ++k) {
    const double r = 1.0 - 2.0 * (k + 0.5) / steps;
    svg.rect(bx, top + bh * k / steps, 16, bh / steps + 0.5, diverging_color(r));
  }
  svg.text(bx + 20, top + 8, "1.00", style::kTickSize);
  svg.text(bx + 20, top + bh / 2 + 4, "0.00", style::kTickSize);
  svg.text(bx + 20, top + bh, "-1.00", style::kTickSize);
  return svg.finish();
}

std::string boxplot(const FigureSpec& spec, const std::vector<BoxGroup>& groups) {
  require(!groups.empty(), spec.kind, "no groups");
  std::vector<BoxStats> stats;
  std::vector<double> all;
  for (const auto& g : groups) {
    require(!g.values.empty(), spec.kind, "group '" + g.label + "' is empty");
    require_finite(g.values, spec.kind);
    stats.push_back(box_stats(g.values));
    all.insert(all.end(), g.values.begin(), g.values.end());
  }
  const auto [lo, hi] = min_max(all);
  const Frame f;
  const Ticks yt = nice_ticks(lo, hi);
  const Scale sy{yt.lo, yt.hi, f.bottom, f.top};
  Svg svg(style::kWidth, style::kHeight, spec);
  draw_axes(svg, f, {}, {}, yt, sy, spec, false);
  const double slot = (f.right - f.left) / static_cast<double>(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& s = stats[i];
    const double cx = f.left + slot * (static_cast<double>(i) + 0.5);
    const double half = std::min(40.0, slot * 0.3);
    svg.line(cx, sy(s.whisker_low), cx, sy(s.q1), style::kAxis);
    svg.line(cx, sy(s.q3), cx, sy(s.whisker_high), style::kAxis);
    svg.line(cx - half / 2, sy(s.whisker_low), cx + half / 2, sy(s.whisker_low), style::kAxis);
    svg.line(cx - half / 2, sy(s.whisker_high), cx + half / 2, sy(s.whisker_high), style::kAxis);
    svg.rect(cx - half, sy(s.q3), 2 * half, sy(s.q1) - sy(s.q3), style::kBox, style::kAxis);
    svg.line(cx - half, sy(s.median), cx + half, sy(s.median), style::kSecondary, 2);
    for (const double o : s.outliers) svg.circle(cx, sy(o), style::kPointRadius, style::kAxis);
    svg.text(cx, f.bottom + 15, groups[i].label, style::kTickSize, "middle");
  }
  return svg.finish();
}

std::string learning(const FigureSpec& spec, const LearningCurve& c) {
  const std::size_t n = c.mean_rows.size();
  require(n > 0, spec.kind, "no points");
  require(c.train_r2.size() == n && c.validation_r2.size() == n, spec.kind,
          "series lengths differ");
  require_finite(c.mean_rows, spec.kind);
  require_finite(c.train_r2, spec.kind);
  require_finite(c.validation_r2, spec.kind);
  std::vector<double> ys = c.train_r2;
  ys.insert(ys.end(), c.validation_r2.begin(), c.validation_r2.end());
  const auto [xlo, xhi] = min_max(c.mean_rows);
  const auto [ylo, yhi] = min_max(ys);
  const Frame f;
  const Ticks xt = nice_ticks(xlo, xhi);
  const Ticks yt = nice_ticks(ylo, yhi);
  const Scale sx{xt.lo, xt.hi, f.left, f.right};
  const Scale sy{yt.lo, yt.hi, f.bottom, f.top};
  Svg svg(style::kWidth, style::kHeight, spec);
  draw_axes(svg, f, xt, sx, yt, sy, spec);
  auto series = [&](const std::vector<double>& y, std::string_view color) {
    std::vector<double> px(n);
    std::vector<double> py(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = sx(c.mean_rows[i]);
      py[i] = sy(y[i]);
    }
    svg.polyline(px, py, color, 2);
    for (std::size_t i = 0; i < n; ++i) svg.circle(px[i], py[i], 3, color);
  };
  series(c.train_r2, style::kPrimary);
  series(c.validation_r2, style::kSecondary);
  const std::pair<std::string, std::string_view> entries[] = {
      {"Training score", style::kPrimary}, {"Cross-validation score", style::kSecondary}};
  legend(svg, f.right - 160, f.bottom - 40, entries);
  return svg.finish();
}

std::string scatter(const FigureSpec& spec, const XyData& d) {
  require(!d.x.empty(), spec.kind, "no points");
  require(d.x.size() == d.y.size(), spec.kind, "x and y lengths differ");
  require_finite(d.x, spec.kind);
  require_finite(d.y, spec.kind);
  const Frame f;
  Svg svg(style::kWidth, style::kHeight, spec);
  if (spec.kind == FigureKind::kPredictionError) {
    std::vector<double> all = d.x;
    all.insert(all.end(), d.y.begin(), d.y.end());
    const auto [lo, hi] = min_max(all);
    const Ticks t = nice_ticks(lo, hi);
    // Square plotting area so the identity line sits at 45 degrees.
    const double side = std::min(f.right - f.left, f.bottom - f.top);
    Frame sq{f.left, f.top, f.left + side, f.top + side};
    const Scale sx{t.lo, t.hi, sq.left, sq.right};
    const Scale sy{t.lo, t.hi, sq.bottom, sq.top};
    draw_axes(svg, sq, t, sx, t, sy, spec);
    for (std::size_t i = 0; i < d.x.size(); ++i) {
      svg.circle(sx(d.x[i]), sy(d.y[i]), style::kPointRadius, style::kPrimary, 0.6);
    }
    svg.line(sx(t.lo), sy(t.lo), sx(t.hi), sy(t.hi), style::kReference, 1.5, "6 4");
    return svg.finish();
  }
  const auto [xlo, xhi] = min_max(d.x);
  auto [ylo, yhi] = min_max(d.y);
  ylo = std::min(ylo, 0.0);
  yhi = std::max(yhi, 0.0);
  const Ticks xt = nice_ticks(xlo, xhi);
  const Ticks yt = nice_ticks(ylo, yhi);
  const Scale sx{xt.lo, xt.hi, f.left, f.right};
  const Scale sy{yt.lo, yt.hi, f.bottom, f.top};
  draw_axes(svg, f, xt, sx, yt, sy, spec);
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    svg.circle(sx(d.x[i]), sy(d.y[i]), style::kPointRadius, style::kPrimary, 0.6);
  }
  svg.line(f.left, sy(0.0), f.right, sy(0.0), style::kSecondary, 1.5, "6 4");
  return svg.finish();
}

std::string qq(const FigureSpec& spec, const std::vector<QqPoint>& points) {
  require(!points.empty(), spec.kind, "no points");
  std::vector<double> all;
  for (const auto& p : points) {
    all.push_back(p.theoretical);
    all.push_back(p.sample);
  }
  require_finite(all, spec.kind);
  const auto [lo, hi] = min_max(all);
  const Frame f;
  const Ticks t = nice_ticks(lo, hi);
  const Scale sx{t.lo, t.hi, f.left, f.right};
  const Scale sy{t.lo, t.hi, f.bottom, f.top};
  Svg svg(style::kWidth, style::kHeight, spec);
  draw_axes(svg, f, t, sx, t, sy, spec);
  svg.line(sx(t.lo), sy(t.lo), sx(t.hi), sy(t.hi), style::kSecondary, 1.5);
  for (const auto& p : points) {
    svg.circle(sx(p.theoretical), sy(p.sample), style::kPointRadius, style::kPrimary, 0.7);
  }
  return svg.finish();
}

std::string beeswarm(const FigureSpec& spec,
                     const std::vector<BeeswarmFeature>& features) {
  require(!features.empty(), spec.kind, "no features");
  for (const auto& feat : features) {
    require(!feat.shap.empty(), spec.kind, "feature '" + feat.name + "' has no values");
    require(feat.shap.size() == feat.color.size(), spec.kind,
            "feature '" + feat.name + "' has mismatched colour values");
    require_finite(feat.shap, spec.kind);
  }
  const double band = 36.0;
  const double left = 190.0;
  const double right_pad = 90.0;
  const double plot_w = 440.0;
  const double top = 48.0;
  const double width = left + plot_w + right_pad;
  const double height = top + band * static_cast<double>(features.size()) + 60.0;
  const auto [lo, hi] = beeswarm_axis_range(features);
  const Ticks t = nice_ticks(lo, hi);
  const Scale sx{t.lo, t.hi, left, left + plot_w};
  const double bottom = top + band * static_cast<double>(features.size());
  Svg svg(width, height, spec);
  for (const double v : t.values) {
    svg.line(sx(v), top, sx(v), bottom, style::kGrid);
    svg.text(sx(v), bottom + 15, format_fixed(v, t.decimals), style::kTickSize, "middle");
  }
  svg.line(sx(0.0), top, sx(0.0), bottom, style::kReference);
  svg.line(left, bottom, left + plot_w, bottom, style::kAxis);
  svg.text(left + plot_w / 2, bottom + 38, spec.x_label, style::kLabelSize, "middle");
  const double diameter = 2.0 * style::kSwarmRadius;
  for (std::size_t r = 0; r < features.size(); ++r) {
    const auto& feat = features[r];
    const double cy = top + band * (static_cast<double>(r) + 0.5);
    svg.text(left - 8, cy + 4, feat.name, style::kLabelSize, "end");
    std::vector<double> px(feat.shap.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = sx(feat.shap[i]);
    const auto offsets = swarm_offsets(px, diameter);
    double reach = 0.0;
    for (const double o : offsets) reach = std::max(reach, std::abs(o));
    const double half = band / 2 - style::kSwarmRadius;
    const double scale = reach * diameter > half ? half / (reach * diameter) : 1.0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      svg.circle(px[i], cy + offsets[i] * diameter * scale, style::kSwarmRadius,
                 mix_color(style::kLowColor, style::kHighColor, feat.color[i]));
    }
  }
  const double bx = left + plot_w + 30;
  const double bh = bottom - top;
  const int steps = 40;
  for (int k = 0; k < steps; ++k) {
    const double v = 1.0 - (k + 0.5) / steps;
    svg.rect(bx, top + bh * k / steps, 10, bh / steps + 0.5,
             mix_color(style::kLowColor, style::kHighColor, v));
  }
  svg.text(bx + 14, top + 8, "High", style::kTickSize);
  svg.text(bx + 14, bottom, "Low", style::kTickSize);
  svg.text(bx + 24, top + bh / 2, "Feature value", style::kTickSize, "middle", {}, -90);
  return svg.finish();
}

std::string importance(const FigureSpec& spec, const GlobalImportance& g) {
  const std::size_t p = g.feature_names.size();
  require(p > 0, spec.kind, "no features");
  require(g.mean_abs.size() == p && g.sum_abs.size() == p && g.ranking.size() == p,
          spec.kind, "importance vectors differ in length");
  std::vector<std::size_t> check = g.ranking;
  std::sort(check.begin(), check.end());
  for (std::size_t j = 0; j < p; ++j) {
    require(check[j] == j, spec.kind, "ranking is not a permutation");
  }
  require_finite(g.mean_abs, spec.kind);
  const double band = 30.0;
  const double left = 190.0;
  const double plot_w = 400.0;
  const double top = 48.0;
  const double bottom = top + band * static_cast<double>(p);
  Svg svg(left + plot_w + 40.0, bottom + 60.0, spec);
  const auto [lo, hi] = min_max(g.mean_abs);
  const Ticks t = nice_ticks(0.0, std::max(hi, lo));
  const Scale sx{t.lo, t.hi, left, left + plot_w};
  for (const double v : t.values) {
    svg.line(sx(v), top, sx(v), bottom, style::kGrid);
    svg.text(sx(v), bottom + 15, format_fixed(v, t.decimals), style::kTickSize, "middle");
  }
  for (std::size_t r = 0; r < p; ++r) {
    const std::size_t j = g.ranking[r];
    const double y = top + band * static_cast<double>(r);
    svg.rect(left, y + 5, sx(g.mean_abs[j]) - left, band - 10, style::kBar);
    svg.text(left - 8, y + band / 2 + 4, g.feature_names[j], style::kLabelSize, "end");
  }
  svg.line(left, top, left, bottom, style::kAxis);
  svg.line(left, bottom, left + plot_w, bottom, style::kAxis);
  svg.text(left + plot_w / 2, bottom + 38, spec.x_label, style::kLabelSize, "middle");
  return svg.finish();
}

std::string ice_panel(const FigureSpec& spec, const IceCurveSet& s) {
  const std::size_t g = s.grid.size();
  require(g > 0, spec.kind, "empty grid");
  require(s.curves.cols() == g || s.curves.rows() == 0, spec.kind,
          "curve width does not match the grid");
  require(s.pdp.size() == g, spec.kind, "PDP length does not match the grid");
  require_finite(s.grid, spec.kind);
  require_finite(s.curves.values(), spec.kind);
  require_finite(s.pdp, spec.kind);
  std::vector<double> ys(s.curves.values().begin(), s.curves.values().end());
  ys.insert(ys.end(), s.pdp.begin(), s.pdp.end());
  const auto [xlo, xhi] = min_max(s.grid);
  const auto [ylo, yhi] = min_max(ys);
  const Frame f;
  const Ticks xt = nice_ticks(xlo, xhi);
  const Ticks yt = nice_ticks(ylo, yhi);
  const Scale sx{xt.lo, xt.hi, f.left, f.right};
  const Scale sy{yt.lo, yt.hi, f.bottom, f.top};
  Svg svg(style::kWidth, style::kHeight, spec);
  draw_axes(svg, f, xt, sx, yt, sy, spec);
  std::vector<double> px(g);
  std::vector<double> py(g);
  for (std::size_t k = 0; k < g; ++k) px[k] = sx(s.grid[k]);
  for (std::size_t i = 0; i < s.curves.rows(); ++i) {
    for (std::size_t k = 0; k < g; ++k) py[k] = sy(s.curves(i, k));
    svg.polyline(px, py, style::kCurve, 1, 0.5);
  }
  for (std::size_t k = 0; k < g; ++k) py[k] = sy(s.pdp[k]);
  svg.polyline(px, py, style::kSecondary, 3);
  if (s.anchor && *s.anchor < g) {
    const double ax = sx(s.grid[*s.anchor]);
    svg.line(ax, f.top, ax, f.bottom, style::kReference, 1, "4 3");
  }
  const std::pair<std::string, std::string_view> entries[] = {
      {"ICE (" + std::string(ice_variant_name(s.variant)) + ")", style::kCurve},
      {"PDP", style::kSecondary}};
  legend(svg, f.right - 130, f.top + 14, entries);
  return svg.finish();
}

template <class T>
const T& expect(const FigureSpec& spec, const FigureData& data) {
  const T* p = std::get_if<T>(&data);
  require(p != nullptr, spec.kind, "data does not match the figure kind");
  return *p;
}

}  // namespace

std::string_view figure_kind_name(FigureKind kind) {
  switch (kind) {
    case FigureKind::kCorrelationHeatmap: return "correlation_heatmap";
    case FigureKind::kGroupBoxplot: return "group_boxplot";
    case FigureKind::kLearningCurve: return "learning_curve";
    case FigureKind::kResidualScatter: return "residual_scatter";
    case FigureKind::kQq: return "qq";
    case FigureKind::kPredictionError: return "prediction_error";
    case FigureKind::kBeeswarm: return "beeswarm";
    case FigureKind::kImportanceBar: return "importance_bar";
    case FigureKind::kIcePanel: return "ice_panel";
  }
  return "unknown";
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
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

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw ValidationError("box statistics of no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxStats s;
  s.q1 = quantile_linear(sorted, 0.25);
  s.median = quantile_linear(sorted, 0.5);
  s.q3 = quantile_linear(sorted, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q1;
  s.whisker_high = s.q3;
  for (const double v : sorted) {
    if (v < lo_fence || v > hi_fence) {
      s.outliers.push_back(v);
      continue;
    }
    s.whisker_low = std::min(s.whisker_low, v);
    s.whisker_high = std::max(s.whisker_high, v);
  }
  return s;
}

std::pair<double, double> beeswarm_axis_range(
    std::span<const BeeswarmFeature> features) {
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& f : features) {
    for (const double v : f.shap) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const Ticks t = nice_ticks(lo, hi);
  return {t.lo, t.hi};
}

std::vector<double> swarm_offsets(std::span<const double> pixel_x,
                                  double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("bin width must be positive");
  std::map<long long, std::size_t> filled;
  std::vector<double> out(pixel_x.size());
  for (std::size_t i = 0; i < pixel_x.size(); ++i) {
    const auto bin = static_cast<long long>(std::floor(pixel_x[i] / bin_width));
    const std::size_t k = filled[bin]++;
    const double step = static_cast<double>((k + 1) / 2);
    out[i] = k % 2 == 1 ? step : -step;
  }
  return out;
}

std::string render(const FigureSpec& spec, const FigureData& data) {
  switch (spec.kind) {
    case FigureKind::kCorrelationHeatmap:
      return heatmap(spec, expect<CorrelationMatrix>(spec, data));
    case FigureKind::kGroupBoxplot:
      return boxplot(spec, expect<std::vector<BoxGroup>>(spec, data));
    case FigureKind::kLearningCurve:
      return learning(spec, expect<LearningCurve>(spec, data));
    case FigureKind::kResidualScatter:
    case FigureKind::kPredictionError:
      return scatter(spec, expect<XyData>(spec, data));
    case FigureKind::kQq:
      return qq(spec, expect<std::vector<QqPoint>>(spec, data));
    case FigureKind::kBeeswarm:
      return beeswarm(spec, expect<std::vector<BeeswarmFeature>>(spec, data));
    case FigureKind::kImportanceBar:
      return importance(spec, expect<GlobalImportance>(spec, data));
    case FigureKind::kIcePanel:
      return ice_panel(spec, expect<IceCurveSet>(spec, data));
  }
  throw ValidationError("unknown figure kind");
}

void write_figure(const std::filesystem::path& path, const FigureSpec& spec,
                  const FigureData& data) {
  const std::string svg = render(spec, data);
  write_file_atomic(path, svg);
}

// ---------------------------------------------------------------------------

std::string summary_table_csv(const SummaryStats& stats,
                              std::string_view provenance) {
  if (stats.columns.empty()) throw ValidationError("summary has no columns");
  CsvBuilder csv;
  csv.comment(provenance);
  csv.header({"Features", "Mean", "STD", "Min", "Q1", "Median", "Q3", "Max"});
  for (const auto& c : stats.columns) {
    csv.row({c.name, format_fixed(c.mean, 2), format_fixed(c.stddev, 2),
             format_fixed(c.min, 2), format_fixed(c.q1, 2),
             format_fixed(c.median, 2), format_fixed(c.q3, 2),
             format_fixed(c.max, 2)});
  }
  return csv.str();
}

std::string metrics_table_csv(std::span<const ModelMetricsRow> rows,
                              std::string_view provenance) {
  if (rows.empty()) throw ValidationError("metrics table needs at least one model");
  CsvBuilder csv;
  csv.comment(provenance);
  csv.header({"Model", "R2", "MAE", "RMSE", "MAPE"});
  for (const auto& r : rows) {
    if (r.model.empty()) throw ValidationError("metrics row without a model name");
    csv.row({r.model, format_fixed(100.0 * r.metrics.r_squared, 3),
             format_fixed(r.metrics.mae, 3), format_fixed(r.metrics.rmse, 3),
             format_fixed(r.metrics.mape, 3)});
  }
  return csv.str();
}

std::string tuning_table_csv(std::span<const TuningRow> rows,
                             std::string_view provenance) {
  if (rows.empty()) throw ValidationError("tuning table needs at least one model");
  CsvBuilder csv;
  csv.comment(provenance);
  csv.header({"Model", "TrainR2", "TuningParameters", "CvR2", "BestParameters"});
  for (const auto& r : rows) {
    csv.row({r.model, format_fixed(100.0 * r.train_r2, 3), r.tuning_parameters,
             format_fixed(100.0 * r.cv_r2, 3), r.best_parameters});
  }
  return csv.str();
}

std::string improvement_table_csv(std::span<const ImprovementRow> rows,
                                  std::string_view provenance) {
  if (rows.empty()) throw ValidationError("improvement table needs at least one model");
  CsvBuilder csv;
  csv.comment(provenance);
  csv.header({"Model", "TrainR2", "CvR2", "TestR2", "Improvement"});
  for (const auto& r : rows) {
    csv.row({r.model, format_fixed(r.train_r2, 3), format_fixed(r.cv_r2, 3),
             format_fixed(r.test_r2, 3), format_fixed(r.improvement, 3)});
  }
  return csv.str();
}

std::string describe_params(const Json& params) {
  std::string out;
  for (const auto& [key, value] : params.items()) {
    if (!out.empty()) out += "; ";
    out += key + ": " + value.dump();
  }
  return out;
}

}  // namespace premium
