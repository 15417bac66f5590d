#pragma once

// Median-error aggregation and table-cell formatting. Display values are
// truncated toward zero by default (matching the reference tables'
// arithmetic; a rounding mode exists for comparison and is flagged in the
// output when used).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace poselab::harness {

// even count: mean of the two middle values
inline double median(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("median: empty input");
    const std::size_t n = values.size();
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    const double hi = *mid;
    if (n % 2 == 1) return hi;
    auto lo_it = values.begin() + static_cast<std::ptrdiff_t>(n / 2 - 1);
    std::nth_element(values.begin(), lo_it, values.end());
    return (*lo_it + hi) / 2.0;
}

// (baseline - new) / baseline * 100; negative when worse
inline double improvement_percent(double baseline, double new_value) {
    if (!(baseline > 0.0))
        throw std::invalid_argument("improvement_percent: baseline must be > 0");
    return (baseline - new_value) / baseline * 100.0;
}

enum class RoundingMode { truncate, round };

// fixed decimals; truncation is toward zero, with a small forgiving nudge so
// that values sitting a few ulps under a decimal boundary do not fall
// through (0.97 printing as 0.96).
inline std::string format_decimals(double v, int decimals, RoundingMode mode) {
    double p = 1.0;
    for (int i = 0; i < decimals; ++i) p *= 10.0;
    const double scaled = v * p;
    double cell;
    if (mode == RoundingMode::truncate)
        cell = std::trunc(scaled + std::copysign(1e-7, scaled));
    else
        cell = std::round(scaled);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, cell / p);
    return buf;
}

inline std::string format_meters(double v, RoundingMode mode = RoundingMode::truncate) {
    return format_decimals(v, 2, mode) + "m";
}

inline std::string format_degrees(double v, RoundingMode mode = RoundingMode::truncate) {
    return format_decimals(v, 2, mode) + "°";
}

inline std::string format_improvement(double pct,
                                      RoundingMode mode = RoundingMode::truncate) {
    return format_decimals(pct, 1, mode) + "%";
}

}  // namespace poselab::harness
