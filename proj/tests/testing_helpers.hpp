#pragma once

// Shared helpers for the test suites only.

#include <cmath>
#include <cstddef>
#include <vector>

namespace testhelp {

// Wilson-Hilferty approximation of the chi-square quantile; plenty for the
// 1%-significance uniformity checks used here.
inline double chi2_critical(int df, double z_alpha = 2.3263478740408408) {
    const double d = static_cast<double>(df);
    const double t = 1.0 - 2.0 / (9.0 * d) + z_alpha * std::sqrt(2.0 / (9.0 * d));
    return d * t * t * t;
}

// Pearson statistic for observed counts against a uniform expectation.
inline double chi2_uniform_stat(const std::vector<std::size_t>& counts,
                                std::size_t total) {
    const double expected =
        static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (std::size_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

}  // namespace testhelp
