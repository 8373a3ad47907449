#pragma once

#include <span>

namespace apax::stats {

double mean(std::span<const double> v);
/// Population standard deviation.
double stddev(std::span<const double> v);
double rms(std::span<const double> v);

/// 20*log10(rms(x) / rms(x - y)). +inf when x == y, nan when x is all zero.
double srr_db(std::span<const double> x, std::span<const double> y);

}  // namespace apax::stats
