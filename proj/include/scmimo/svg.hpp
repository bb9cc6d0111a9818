// scmimo - single-carrier massive MIMO frequency-domain precoding simulator
// Copyright (C) 2025-2026 the scmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "scmimo/common.hpp"

namespace scmimo {

// Small self-contained SVG line-chart writer; keeps plot output free of
// external tooling. Linear x axis, linear or log10 y axis.

struct svg_series {
    std::string name;
    std::string color = "#1f77b4";
    bool dashed = false;
    bool markers = true;
    std::vector<std::pair<double, double>> points;
};

struct svg_plot_options {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::string comment;  // embedded verbatim as an XML comment
};

namespace detail {

inline std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::vector<double> linear_ticks(double lo, double hi, int target = 8) {
    std::vector<double> ticks;
    if (!(hi > lo)) {
        ticks.push_back(lo);
        return ticks;
    }
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * mult >= raw) {
            step = mag * mult;
            break;
        }
    }
    const double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 1e-9 * step; t += step) ticks.push_back(t);
    return ticks;
}

}  // namespace detail

inline void write_svg_plot(const std::filesystem::path& path,
                           const std::vector<svg_series>& series,
                           const svg_plot_options& opts) {
    if (series.empty()) throw config_error("write_svg_plot: no series");
    const double width = 760, height = 520;
    const double ml = 78, mr = 24, mt = 46, mb = 62;  // margins
    const double pw = width - ml - mr, ph = height - mt - mb;

    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool first = true;
    for (const auto& s : series) {
        for (auto [x, y] : s.points) {
            const double yy = opts.log_y ? std::log10(y) : y;
            if (first) {
                x_lo = x_hi = x;
                y_lo = y_hi = yy;
                first = false;
            } else {
                x_lo = std::min(x_lo, x);
                x_hi = std::max(x_hi, x);
                y_lo = std::min(y_lo, yy);
                y_hi = std::max(y_hi, yy);
            }
        }
    }
    if (first) throw config_error("write_svg_plot: all series empty");
    if (x_hi == x_lo) {
        x_lo -= 1;
        x_hi += 1;
    }
    const double y_pad = (y_hi - y_lo) * 0.08 + 1e-12;
    y_lo -= y_pad;
    y_hi += y_pad;

    auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) {
        const double yy = opts.log_y ? std::log10(y) : y;
        return mt + (y_hi - yy) / (y_hi - y_lo) * ph;
    };

    std::ofstream os(path);
    if (!os) throw config_error("write_svg_plot: cannot open " + path.string());
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (!opts.comment.empty()) os << "<!-- " << opts.comment << " -->\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"16\">" << opts.title << "</text>\n";

    // axes grid and ticks
    const auto x_ticks = detail::linear_ticks(x_lo, x_hi);
    std::vector<double> y_ticks;
    if (opts.log_y) {
        for (double d = std::floor(y_lo); d <= std::ceil(y_hi); d += 1.0)
            if (d >= y_lo - 1e-9 && d <= y_hi + 1e-9) y_ticks.push_back(d);
        if (y_ticks.size() < 2) y_ticks = detail::linear_ticks(y_lo, y_hi);
    } else {
        y_ticks = detail::linear_ticks(y_lo, y_hi);
    }
    os << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
    for (double t : x_ticks) {
        const double x = px(t);
        os << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\""
           << mt + ph << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
           << "\" text-anchor=\"middle\">" << detail::fmt_num(t) << "</text>\n";
    }
    for (double t : y_ticks) {
        const double yv = opts.log_y ? std::pow(10.0, t) : t;
        const double y = py(yv);
        os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\"" << y
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
           << (opts.log_y ? ("1e" + detail::fmt_num(t)) : detail::fmt_num(t)) << "</text>\n";
    }
    os << "</g>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#333\"/>\n";

    // axis labels
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
       << opts.x_label << "</text>\n";
    os << "<text x=\"20\" y=\"" << mt + ph / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       << "transform=\"rotate(-90 20 " << mt + ph / 2 << ")\">" << opts.y_label << "</text>\n";

    // series
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\"";
        if (s.dashed) os << " stroke-dasharray=\"6 4\"";
        os << " points=\"";
        for (auto [x, y] : s.points) os << detail::fmt_num(px(x)) << "," << detail::fmt_num(py(y)) << " ";
        os << "\"/>\n";
        if (s.markers)
            for (auto [x, y] : s.points)
                os << "<circle cx=\"" << detail::fmt_num(px(x)) << "\" cy=\""
                   << detail::fmt_num(py(y)) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    }

    // legend
    double ly = mt + 14;
    for (const auto& s : series) {
        os << "<line x1=\"" << ml + pw - 150 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw - 122
           << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
        if (s.dashed) os << " stroke-dasharray=\"6 4\"";
        os << "/>\n";
        os << "<text x=\"" << ml + pw - 116 << "\" y=\"" << ly + 4
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name << "</text>\n";
        ly += 18;
    }
    os << "</svg>\n";
    if (!os) throw config_error("write_svg_plot: write failed for " + path.string());
}

}  // namespace scmimo
