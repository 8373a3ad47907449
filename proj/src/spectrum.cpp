#include "apax/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "apax/errors.hpp"

namespace apax::spectrum {
namespace {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

// FFTW's planner is not thread-safe; plans are created once per length under
// a lock and executed afterwards on per-call buffers (new-array execute).
fftw_plan plan_for(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, fftw_plan> plans;
    std::lock_guard lock(mu);
    auto it = plans.find(n);
    if (it != plans.end()) return it->second;
    RealBuffer in(fftw_alloc_real(n));
    ComplexBuffer out(fftw_alloc_complex(n / 2 + 1));
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    plans.emplace(n, p);
    return p;
}

double median(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    if (v.size() % 2 == 1) return v[mid];
    const double upper = v[mid];
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace

SpectrumStats welch_spectrum(std::span<const double> x, std::size_t segment_length) {
    if (x.empty()) throw InvalidConfig("spectrum of an empty signal");
    if (!std::has_single_bit(segment_length)) throw InvalidConfig("segment length must be a power of two");
    std::size_t len = segment_length;
    if (x.size() < len) len = std::bit_floor(x.size());

    std::vector<double> window(len, 1.0);
    if (len >= 4) {
        for (std::size_t i = 0; i < len; ++i) {
            window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len));
        }
    }
    double window_power = 0.0;
    for (const double w : window) window_power += w * w;

    const std::size_t n_bins = len / 2 + 1;
    std::vector<double> power(n_bins, 0.0);
    const std::size_t hop = std::max<std::size_t>(1, len / 2);

    const fftw_plan plan = plan_for(len);
    RealBuffer in(fftw_alloc_real(len));
    ComplexBuffer out(fftw_alloc_complex(n_bins));

    std::size_t segments = 0;
    for (std::size_t start = 0; start + len <= x.size(); start += hop) {
        for (std::size_t i = 0; i < len; ++i) in[i] = x[start + i] * window[i];
        fftw_execute_dft_r2c(plan, in.get(), out.get());
        for (std::size_t k = 0; k < n_bins; ++k) {
            power[k] += out[k][0] * out[k][0] + out[k][1] * out[k][1];
        }
        ++segments;
    }

    SpectrumStats s;
    s.segment_length = len;
    s.segments = segments;
    s.bins_db.resize(n_bins);
    const double norm = 1.0 / (window_power * static_cast<double>(segments));
    double sum_db = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
        s.bins_db[k] = 10.0 * std::log10(power[k] * norm + kPowerEpsilon);
        sum_db += s.bins_db[k];
    }
    const auto peak = std::max_element(s.bins_db.begin(), s.bins_db.end());
    s.peak_db = *peak;
    s.peak_bin = static_cast<std::size_t>(peak - s.bins_db.begin());
    s.floor_db = median(s.bins_db);
    s.mean_db = sum_db / static_cast<double>(n_bins);
    s.dynamic_range_db = s.peak_db - s.floor_db;
    return s;
}

double spectral_flatness(const SpectrumStats& s) {
    if (s.bins_db.empty()) return 0.0;
    double sum_db = 0.0;
    double sum_power = 0.0;
    for (const double db : s.bins_db) {
        sum_db += db;
        sum_power += std::pow(10.0, db / 10.0);
    }
    const double n = static_cast<double>(s.bins_db.size());
    const double geometric = std::pow(10.0, sum_db / n / 10.0);
    return geometric / (sum_power / n);
}

}  // namespace apax::spectrum
