#include "apax/stats.hpp"

#include <cmath>
#include <limits>

#include "apax/errors.hpp"

namespace apax::stats {

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

double rms(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (const double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

double srr_db(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InternalError("srr_db: length mismatch");
    double sx = 0.0;
    double sd = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sx += x[i] * x[i];
        sd += d * d;
    }
    if (sx == 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (sd == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(sx / sd);
}

}  // namespace apax::stats
