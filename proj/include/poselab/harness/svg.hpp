#pragma once

// Minimal static SVG line charts for the learning curves; no dependencies.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "poselab/util/error.hpp"

namespace poselab::harness {

struct CurveSeries {
    std::string label;
    std::string color;  // e.g. "#1f77b4"
    std::vector<double> x;
    std::vector<double> y;
};

inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::vector<CurveSeries>& series) {
    const int w = 640, h = 400, ml = 60, mr = 20, mt = 40, mb = 40;
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool any = false;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!any) {
                x_lo = x_hi = s.x[i];
                y_lo = y_hi = s.y[i];
                any = true;
            }
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    if (x_hi == x_lo) x_hi = x_lo + 1;
    if (y_hi == y_lo) y_hi = y_lo + 1;
    y_lo = std::min(y_lo, 0.0);

    const auto px = [&](double x) {
        return ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr);
    };
    const auto py = [&](double y) {
        return h - mb - (y - y_lo) / (y_hi - y_lo) * (h - mt - mb);
    };

    std::ofstream out(path);
    if (!out) throw DataError("write_svg_chart: cannot open " + path);
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
        << "\" height=\"" << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" << title
        << "</text>\n";
    // axes
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                  "stroke=\"black\"/>\n",
                  ml, h - mb, w - mr, h - mb);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                  "stroke=\"black\"/>\n",
                  ml, mt, ml, h - mb);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" "
                  "font-size=\"12\">%.3g</text>\n",
                  4, mt + 8, y_hi);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" "
                  "font-size=\"12\">%.3g</text>\n",
                  4, h - mb, y_lo);
    out << buf;

    int legend_y = mt + 8;
    for (const auto& s : series) {
        if (s.x.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", px(s.x[i]), py(s.y[i]));
            out << buf;
        }
        out << "\"/>\n";
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" "
                      "font-size=\"12\" fill=\"%s\">%s</text>\n",
                      w - mr - 120, legend_y, s.color.c_str(), s.label.c_str());
        out << buf;
        legend_y += 16;
    }
    out << "</svg>\n";
}

}  // namespace poselab::harness
