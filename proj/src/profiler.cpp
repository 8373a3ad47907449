#include "apax/profiler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "apax/codec.hpp"
#include "apax/errors.hpp"
#include "apax/stats.hpp"

namespace apax::profiler {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SignalSummary summarize(std::span<const double> v, const spectrum::SpectrumStats& spec) {
    return {stats::mean(v), stats::stddev(v), spec.peak_db, spec.floor_db};
}

}  // namespace

double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty()) throw UndefinedCorrelation("pearson_r needs two equal-length, non-empty inputs");
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("correlation undefined for an all-zero input");
    return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------

S2RDistribution s2r_distribution(std::span<const double> x, std::span<const double> d) {
    if (x.size() != d.size()) throw InternalError("s2r_distribution: length mismatch");
    S2RDistribution out;
    out.finite_sorted.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ad = std::fabs(d[i]);
        const double ax = std::fabs(x[i]);
        if (ad == 0.0) {
            ++out.pos_inf;
        } else if (ax == 0.0) {
            ++out.neg_inf;
        } else {
            out.finite_sorted.push_back(20.0 * std::log10(ax / ad));
        }
    }
    std::sort(out.finite_sorted.begin(), out.finite_sorted.end());

    const std::size_t n = out.count();
    if (n == 0) {
        out.two_sigma_margin_db = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    // Largest M with #{s2r >= M} >= 0.955 n is the value at ascending index n - ceil(0.955 n).
    const std::size_t need = (955 * n + 999) / 1000;
    const std::size_t k = n - need;
    if (k < out.neg_inf) {
        out.two_sigma_margin_db = -kInf;
    } else if (k < out.neg_inf + out.finite_sorted.size()) {
        out.two_sigma_margin_db = out.finite_sorted[k - out.neg_inf];
    } else {
        out.two_sigma_margin_db = kInf;
    }
    return out;
}

std::vector<CdfPoint> S2RDistribution::cdf(std::size_t max_points) const {
    std::vector<CdfPoint> out;
    const std::size_t n = count();
    if (n == 0 || finite_sorted.empty() || max_points == 0) return out;
    const double lo = std::floor(finite_sorted.front());
    const double hi = std::ceil(finite_sorted.back());
    const std::size_t points = hi > lo ? max_points : 1;
    const double step = points > 1 ? (hi - lo) / static_cast<double>(points - 1) : 0.0;
    out.reserve(points);
    for (std::size_t j = 0; j < points; ++j) {
        const double db = j + 1 == points ? hi : lo + step * static_cast<double>(j);
        const auto below = static_cast<std::size_t>(
            std::upper_bound(finite_sorted.begin(), finite_sorted.end(), db) - finite_sorted.begin());
        out.push_back({db, static_cast<double>(neg_inf + below) / static_cast<double>(n)});
    }
    return out;
}

// ---------------------------------------------------------------------------

std::array<std::pair<std::string_view, double>, MetricsTable::kCount> MetricsTable::entries() const {
    return {{
        {"x_mean", x.mean},
        {"x_std", x.stddev},
        {"x_spectral_peak_db", x.spectral_peak_db},
        {"x_spectral_floor_db", x.spectral_floor_db},
        {"y_mean", y.mean},
        {"y_std", y.stddev},
        {"y_spectral_peak_db", y.spectral_peak_db},
        {"y_spectral_floor_db", y.spectral_floor_db},
        {"d_mean", d.mean},
        {"d_std", d.stddev},
        {"d_spectral_peak_db", d.spectral_peak_db},
        {"d_spectral_floor_db", d.spectral_floor_db},
        {"rms_resid_pct", rms_resid_pct},
        {"rms_resid_db", rms_resid_db},
        {"srr_db", srr_db},
        {"pearson_r", pearson_r},
        {"fft_s2r_margin_db", fft_s2r_margin_db},
        {"two_sigma_s2r_margin_db", two_sigma_s2r_margin_db},
    }};
}

double fft_s2r_margin(const spectrum::SpectrumStats& x_spec, const spectrum::SpectrumStats& d_spec) {
    return x_spec.floor_db - d_spec.mean_db;
}

MetricsTable window2_metrics(std::span<const double> x, std::span<const double> y, std::span<const double> d,
                             const WindowSpectra& spectra, const S2RDistribution& s2r) {
    MetricsTable m;
    m.x = summarize(x, spectra.x);
    m.y = summarize(y, spectra.y);
    m.d = summarize(d, spectra.d);
    const double rx = stats::rms(x);
    const double rd = stats::rms(d);
    m.rms_resid_pct = rx > 0.0 ? 100.0 * rd / rx : std::numeric_limits<double>::quiet_NaN();
    m.rms_resid_db = rd == 0.0 ? -kInf : 20.0 * std::log10(rd / rx);
    m.srr_db = -m.rms_resid_db;
    m.pearson_r = profiler::pearson_r(x, y);
    m.fft_s2r_margin_db = fft_s2r_margin(spectra.x, spectra.d);
    m.two_sigma_s2r_margin_db = s2r.two_sigma_margin_db;
    return m;
}

// ---------------------------------------------------------------------------

std::vector<double> default_grid() {
    std::vector<double> g;
    for (int t = 20; t <= 120; t += 5) g.push_back(t);
    return g;
}

EncodedPoint evaluate_point(const SampleArray& x, double srr_target, const ProfileOptions& opts) {
    StreamConfig cfg;
    cfg.dtype = x.dtype;
    cfg.block_size = opts.block_size;
    cfg.mode = CodecMode::FixedQuality;
    cfg.target = srr_target;
    const auto stream = codec::encode_stream(x, cfg);

    EncodedPoint ep;
    ep.encoded_bytes = stream.size_bytes();
    ep.decoded = codec::decode_stream(stream).values;
    ep.point.srr_target = srr_target;
    ep.point.ratio = static_cast<double>(x.size_bytes()) / static_cast<double>(ep.encoded_bytes);
    ep.point.r = pearson_r(x.values, ep.decoded);
    ep.point.achieved_srr_db = stats::srr_db(x.values, ep.decoded);
    return ep;
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

RateCorrelationCurve rate_correlation_sweep(const SampleArray& x, std::span<const double> grid,
                                            const ProfileOptions& opts) {
    std::vector<double> targets(grid.begin(), grid.end());
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    std::vector<std::optional<CurvePoint>> results(targets.size());
    std::vector<std::string> failures(targets.size());
    parallel_for(targets.size(), opts.workers, [&](std::size_t i) {
        try {
            results[i] = evaluate_point(x, targets[i], opts).point;
        } catch (const UndefinedCorrelation& e) {
            failures[i] = "dropped SRR target " + std::to_string(targets[i]) + " dB: " + e.what();
        }
    });

    RateCorrelationCurve curve;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (results[i]) curve.points.push_back(*results[i]);
        if (!failures[i].empty()) curve.warnings.push_back(failures[i]);
    }
    return curve;
}

OperatingPoint recommend_operating_point(const RateCorrelationCurve& curve, const PointEvaluator& evaluate,
                                         std::size_t refine_iterations) {
    const auto& pts = curve.points;
    if (pts.empty()) throw NoData("rate-correlation curve has no points");

    const auto all_pass = std::all_of(pts.begin(), pts.end(), [](const CurvePoint& p) { return p.r >= kFiveNines; });
    if (all_pass) {
        const auto best = std::max_element(pts.begin(), pts.end(),
                                           [](const CurvePoint& a, const CurvePoint& b) { return a.ratio < b.ratio; });
        return {*best, true};
    }
    const auto first = std::find_if(pts.begin(), pts.end(), [](const CurvePoint& p) { return p.r >= kFiveNines; });
    if (first == pts.end()) {
        const auto best = std::max_element(pts.begin(), pts.end(),
                                           [](const CurvePoint& a, const CurvePoint& b) { return a.r < b.r; });
        return {*best, false};
    }
    if (first == pts.begin()) return {*first, true};

    const CurvePoint& below = *(first - 1);
    const CurvePoint& above = *first;
    auto try_eval = [&](double t) -> std::optional<CurvePoint> {
        try {
            return evaluate(t);
        } catch (const UndefinedCorrelation&) {
            return std::nullopt;
        }
    };

    const double frac = (kFiveNines - below.r) / (above.r - below.r);
    double lo = below.srr_target;
    double hi = above.srr_target;
    const double guess = lo + std::clamp(frac, 0.0, 1.0) * (hi - lo);
    if (const auto p = try_eval(guess); p && p->r >= kFiveNines) return {*p, true};

    // Interpolation undershot; bisect between the guess and the passing grid point.
    CurvePoint best = above;
    lo = guess;
    for (std::size_t i = 0; i < refine_iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const auto p = try_eval(mid);
        if (p && p->r >= kFiveNines) {
            best = *p;
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {best, true};
}

OperatingPoint recommend_operating_point(const RateCorrelationCurve& curve, const SampleArray& x,
                                         const ProfileOptions& opts) {
    return recommend_operating_point(
        curve, [&](double t) { return evaluate_point(x, t, opts).point; }, opts.refine_iterations);
}

// ---------------------------------------------------------------------------

ProfileSession::ProfileSession(std::string dataset, SampleArray x, ProfileOptions opts)
    : dataset_(std::move(dataset)), x_(std::move(x)), opts_(opts) {
    if (x_.values.empty()) throw NoData("cannot profile an empty dataset");
    x_spectrum_ = spectrum::welch_spectrum(x_.values, opts_.segment_length);
}

void ProfileSession::run(std::span<const double> grid) {
    curve_ = rate_correlation_sweep(x_, grid, opts_);
    recommended_ = recommend_operating_point(curve_, x_, opts_);
    windows(recommended_.point.srr_target);
}

std::shared_ptr<const Windows> ProfileSession::windows(double srr_target) const {
    {
        std::shared_lock lock(cache_mu_);
        if (auto it = cache_.find(srr_target); it != cache_.end()) return it->second;
    }
    std::lock_guard compute_lock(compute_mu_);
    {
        std::shared_lock lock(cache_mu_);
        if (auto it = cache_.find(srr_target); it != cache_.end()) return it->second;
    }

    auto w = std::make_shared<Windows>();
    w->srr_target = srr_target;
    EncodedPoint ep = evaluate_point(x_, srr_target, opts_);
    w->point = ep.point;
    const auto& x = x_.values;
    const auto& y = ep.decoded;
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];

    w->spectra.x = x_spectrum_;
    w->spectra.y = spectrum::welch_spectrum(y, opts_.segment_length);
    w->spectra.d = spectrum::welch_spectrum(d, opts_.segment_length);
    w->s2r = s2r_distribution(x, d);
    w->metrics = window2_metrics(x, y, d, w->spectra, w->s2r);

    std::unique_lock lock(cache_mu_);
    auto [it, inserted] = cache_.emplace(srr_target, std::move(w));
    return it->second;
}

std::size_t ProfileSession::cache_size() const {
    std::shared_lock lock(cache_mu_);
    return cache_.size();
}

void ProfileSession::clear_cache() {
    std::unique_lock lock(cache_mu_);
    cache_.clear();
}

}  // namespace apax::profiler
