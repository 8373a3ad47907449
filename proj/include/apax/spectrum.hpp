#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace apax::spectrum {

inline constexpr std::size_t kDefaultSegment = 4096;
inline constexpr double kPowerEpsilon = 1e-30;

struct SpectrumStats {
    std::vector<double> bins_db;  // one-sided, segment/2 + 1 bins
    std::size_t segment_length = 0;
    std::size_t segments = 0;
    double peak_db = 0.0;
    std::size_t peak_bin = 0;
    double floor_db = 0.0;  // median bin
    double mean_db = 0.0;
    double dynamic_range_db = 0.0;
};

/// Hann-windowed, 50%-overlap averaged periodogram. If x is shorter than
/// segment_length, the largest power of two <= |x| is used as a single segment.
/// Throws InvalidConfig for an empty input or a non-power-of-two segment length.
SpectrumStats welch_spectrum(std::span<const double> x, std::size_t segment_length = kDefaultSegment);

/// Geometric over arithmetic mean of the bin powers; 1 for a perfectly flat spectrum.
double spectral_flatness(const SpectrumStats& s);

}  // namespace apax::spectrum
