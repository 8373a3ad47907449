#pragma once

// Dataset profiler: rate-correlation sweep, operating-point recommendation and
// the per-operating-point analysis windows (metrics table, spectra, S2R).

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apax/spectrum.hpp"
#include "apax/types.hpp"

namespace apax::profiler {

/// Correlation at which the profiler recommends an operating point.
inline constexpr double kFiveNines = 0.99999;

/// Uncentered correlation sum(xy) / sqrt(sum(x^2) sum(y^2)).
/// Throws UndefinedCorrelation if either energy is zero.
double pearson_r(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Window 4: per-sample signal-to-residual distribution.

struct CdfPoint {
    double db = 0.0;
    double fraction_below = 0.0;  // P(s2r <= db)
};

struct S2RDistribution {
    std::vector<double> finite_sorted;  // ascending, finite s2r values in dB
    std::size_t neg_inf = 0;            // x == 0, d != 0
    std::size_t pos_inf = 0;            // d == 0
    double two_sigma_margin_db = 0.0;   // may be +/-inf

    std::size_t count() const { return finite_sorted.size() + neg_inf + pos_inf; }
    /// Empirical CDF sampled on an even dB grid of at most max_points points.
    std::vector<CdfPoint> cdf(std::size_t max_points = 201) const;
};

inline constexpr double kTwoSigmaFraction = 0.955;

S2RDistribution s2r_distribution(std::span<const double> x, std::span<const double> d);

// ---------------------------------------------------------------------------
// Window 2.

struct SignalSummary {
    double mean = 0.0;
    double stddev = 0.0;
    double spectral_peak_db = 0.0;
    double spectral_floor_db = 0.0;
};

struct MetricsTable {
    static constexpr std::size_t kCount = 18;

    SignalSummary x, y, d;
    double rms_resid_pct = 0.0;
    double rms_resid_db = 0.0;
    double srr_db = 0.0;
    double pearson_r = 0.0;
    double fft_s2r_margin_db = 0.0;
    double two_sigma_s2r_margin_db = 0.0;

    /// All metrics as (key, value) in the fixed report order.
    std::array<std::pair<std::string_view, double>, kCount> entries() const;
};

/// Input floor minus residual mean spectral level.
double fft_s2r_margin(const spectrum::SpectrumStats& x_spec, const spectrum::SpectrumStats& d_spec);

struct WindowSpectra {
    spectrum::SpectrumStats x, y, d;
};

MetricsTable window2_metrics(std::span<const double> x, std::span<const double> y, std::span<const double> d,
                             const WindowSpectra& spectra, const S2RDistribution& s2r);

// ---------------------------------------------------------------------------
// Window 1.

struct ProfileOptions {
    std::size_t block_size = kDefaultBlockSize;
    std::size_t segment_length = spectrum::kDefaultSegment;
    std::size_t workers = 0;  // 0 = hardware concurrency
    std::size_t refine_iterations = 8;
};

/// 20..120 dB in 5 dB steps.
std::vector<double> default_grid();

struct CurvePoint {
    double srr_target = 0.0;
    double ratio = 0.0;
    double r = 0.0;
    double achieved_srr_db = 0.0;
};

struct RateCorrelationCurve {
    std::vector<CurvePoint> points;  // sorted by srr_target
    std::vector<std::string> warnings;
};

struct OperatingPoint {
    CurvePoint point;
    bool reachable = true;  // false when no swept point reaches five nines
};

/// FixedQuality encode/decode of x at one SRR target.
struct EncodedPoint {
    CurvePoint point;
    std::vector<double> decoded;
    std::size_t encoded_bytes = 0;
};

/// Throws UndefinedCorrelation when the decoded output is all zero.
EncodedPoint evaluate_point(const SampleArray& x, double srr_target, const ProfileOptions& opts = {});

RateCorrelationCurve rate_correlation_sweep(const SampleArray& x, std::span<const double> grid,
                                            const ProfileOptions& opts = {});

using PointEvaluator = std::function<CurvePoint(double srr_target)>;

/// Picks the smallest SRR target reaching five nines. Throws NoData on an empty curve.
OperatingPoint recommend_operating_point(const RateCorrelationCurve& curve, const PointEvaluator& evaluate,
                                         std::size_t refine_iterations = 8);
OperatingPoint recommend_operating_point(const RateCorrelationCurve& curve, const SampleArray& x,
                                         const ProfileOptions& opts = {});

// ---------------------------------------------------------------------------

struct Windows {
    double srr_target = 0.0;
    CurvePoint point;
    MetricsTable metrics;
    WindowSpectra spectra;
    S2RDistribution s2r;
};

/// Runs `count` independent jobs on up to `workers` threads; rethrows the first failure.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job);

/// Profiling state for one dataset: input, sweep, recommendation and a cache of
/// analysis windows per SRR target. Window queries are safe from many threads.
class ProfileSession {
public:
    ProfileSession(std::string dataset, SampleArray x, ProfileOptions opts = {});

    /// Runs the sweep and the recommendation, and caches the recommended windows.
    void run(std::span<const double> grid);

    const std::string& dataset() const { return dataset_; }
    const SampleArray& input() const { return x_; }
    const RateCorrelationCurve& curve() const { return curve_; }
    const OperatingPoint& recommended() const { return recommended_; }
    const ProfileOptions& options() const { return opts_; }

    std::shared_ptr<const Windows> windows(double srr_target) const;

    /// Number of cached operating points.
    std::size_t cache_size() const;
    void clear_cache();

private:
    std::string dataset_;
    SampleArray x_;
    ProfileOptions opts_;
    RateCorrelationCurve curve_;
    OperatingPoint recommended_;
    spectrum::SpectrumStats x_spectrum_;

    mutable std::shared_mutex cache_mu_;
    mutable std::mutex compute_mu_;
    mutable std::map<double, std::shared_ptr<const Windows>> cache_;
};

}  // namespace apax::profiler
