#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "csv.hpp"

namespace brillouin {

struct SvgSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// round a raw tick step to 1/2/5 * 10^k
inline double nice_step(double range, int target_ticks) {
    if (range <= 0.0) return 1.0;
    const double raw = range / std::max(target_ticks, 1);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double step = 10.0;
    if (frac <= 1.0) step = 1.0;
    else if (frac <= 2.0) step = 2.0;
    else if (frac <= 5.0) step = 5.0;
    return step * mag;
}

}  // namespace detail

/// Minimal line-plot SVG: axes with 1/2/5 ticks, one polyline per series,
/// legend in the top-right corner. Good enough for quick-look benchmark
/// figures without a plotting dependency.
inline std::string render_line_plot(const std::string& title, const std::string& x_label,
                                    const std::string& y_label, const std::vector<SvgSeries>& series,
                                    int width = 720, int height = 480) {
    const double ml = 70, mr = 160, mt = 40, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
        for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    }
    if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
    if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
    const double xpad = 0.03 * (xmax - xmin), ypad = 0.06 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
           std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " + std::to_string(height) +
           "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
           "font-family=\"sans-serif\">" + title + "</text>\n";

    const double xstep = detail::nice_step(xmax - xmin, 6);
    for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-12 * xstep; t += xstep) {
        out += "<line x1=\"" + detail::svg_num(px(t)) + "\" y1=\"" + detail::svg_num(mt) + "\" x2=\"" +
               detail::svg_num(px(t)) + "\" y2=\"" + detail::svg_num(mt + ph) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + detail::svg_num(px(t)) + "\" y=\"" + detail::svg_num(mt + ph + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" + format_double(t) +
               "</text>\n";
    }
    const double ystep = detail::nice_step(ymax - ymin, 6);
    for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-12 * ystep; t += ystep) {
        out += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(py(t)) + "\" x2=\"" +
               detail::svg_num(ml + pw) + "\" y2=\"" + detail::svg_num(py(t)) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        char label[32];
        std::snprintf(label, sizeof(label), "%g", t);
        out += "<text x=\"" + detail::svg_num(ml - 8) + "\" y=\"" + detail::svg_num(py(t) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" + label + "</text>\n";
    }
    out += "<rect x=\"" + detail::svg_num(ml) + "\" y=\"" + detail::svg_num(mt) + "\" width=\"" +
           detail::svg_num(pw) + "\" height=\"" + detail::svg_num(ph) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" + detail::svg_num(height - 12.0) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" + x_label + "</text>\n";
    out += "<text x=\"18\" y=\"" + detail::svg_num(mt + ph / 2) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 18 " +
           detail::svg_num(mt + ph / 2) + ")\">" + y_label + "</text>\n";

    double legend_y = mt + 12;
    for (const auto& s : series) {
        if (s.x.empty()) continue;
        std::string points;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            points += detail::svg_num(px(s.x[i]));
            points += ',';
            points += detail::svg_num(py(s.y[i]));
            points += ' ';
        }
        out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"2\"" +
               (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" + points + "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            out += "<circle cx=\"" + detail::svg_num(px(s.x[i])) + "\" cy=\"" + detail::svg_num(py(s.y[i])) +
                   "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
        }
        out += "<line x1=\"" + detail::svg_num(ml + pw + 12) + "\" y1=\"" + detail::svg_num(legend_y) +
               "\" x2=\"" + detail::svg_num(ml + pw + 36) + "\" y2=\"" + detail::svg_num(legend_y) +
               "\" stroke=\"" + s.color + "\" stroke-width=\"2\"" + (s.dashed ? " stroke-dasharray=\"6 4\"" : "") +
               "/>\n";
        out += "<text x=\"" + detail::svg_num(ml + pw + 42) + "\" y=\"" + detail::svg_num(legend_y + 4) +
               "\" font-size=\"12\" font-family=\"sans-serif\">" + s.label + "</text>\n";
        legend_y += 18;
    }
    out += "</svg>\n";
    return out;
}

}  // namespace brillouin
