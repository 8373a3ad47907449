// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any gating line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "apax/codec.hpp"
#include "apax/entropy.hpp"
#include "apax/io.hpp"
#include "apax/profiler.hpp"
#include "apax/spectrum.hpp"
#include "apax/stats.hpp"

using namespace apax;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const char* name, bool pass, const std::string& detail, bool gating = true) {
    const char* tag = gating ? (pass ? "PASS" : "FAIL") : "INFO";
    std::printf("%s  %-28s %s\n", tag, name, detail.c_str());
    std::fflush(stdout);
    if (gating && !pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void lossless_bit_exactness() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::size_t streams = 0, mismatches = 0;
    const io::SynthKind kinds[] = {io::SynthKind::WhiteNoise, io::SynthKind::Constant, io::SynthKind::Ramp,
                                   io::SynthKind::BandlimitedNoise};
    for (const auto dt : {kI8, kI16, kI32}) {
        for (int i = 0; i < 1000; ++i) {
            io::SynthSpec s;
            s.kind = kinds[i % 4];
            s.dtype = dt;
            s.length = 1 + rng() % 8192;
            s.seed = rng();
            s.amplitude = dt.int_max() * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            s.oversampling_ratio = 1.0 + static_cast<double>(rng() % 8);
            if (s.kind == io::SynthKind::BandlimitedNoise) s.snr_db = 40.0 + static_cast<double>(rng() % 50);
            const auto x = io::synth(s);

            StreamConfig c;
            c.dtype = dt;
            c.mode = CodecMode::Lossless;
            c.block_size = 64 + 4 * (rng() % 500);
            c.restart_interval = rng() % 5;
            const auto bytes = codec::encode_stream(x, c).serialize();
            mismatches += codec::decode_bytes(bytes).values != x.values;
            ++streams;
        }
    }
    const double secs = seconds_since(t0);
    report("lossless_bit_exactness", mismatches == 0 && secs < 60.0,
           fmt("%zu streams, %zu mismatches, %.1f s (limit 60 s)", streams, mismatches, secs));
}

struct MemberResult {
    std::string name;
    bool bandlimited = false;
    double os = 1.0;
    double target = 0.0;
    double r = 0.0;
    double ratio = 0.0;
    double flatness = 0.0;
    double fq_srr[3] = {0, 0, 0};
};

constexpr double kQualityTargets[3] = {40.0, 60.0, 80.0};

void corpus_criteria(const std::filesystem::path& corpus_path) {
    const auto specs = io::load_corpus(corpus_path);
    std::vector<MemberResult> res(specs.size());
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        const auto x = io::synth(s);
        auto& m = res[i];
        m.name = s.name;
        m.bandlimited = s.kind == io::SynthKind::BandlimitedNoise;
        m.os = s.oversampling_ratio;

        const auto curve = profiler::rate_correlation_sweep(x, profiler::default_grid());
        const auto op = profiler::recommend_operating_point(curve, x);
        // Re-encode at the recommended target rather than trusting the cached point.
        const auto ep = profiler::evaluate_point(x, op.point.srr_target);
        m.target = op.point.srr_target;
        m.r = profiler::pearson_r(x.values, ep.decoded);
        m.ratio = static_cast<double>(x.size_bytes()) / static_cast<double>(ep.encoded_bytes);

        std::vector<double> d(x.size());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = x.values[k] - ep.decoded[k];
        m.flatness = spectrum::spectral_flatness(spectrum::welch_spectrum(d));
    }
    const double sweep_secs = seconds_since(t0);

    std::mutex mu;
    profiler::parallel_for(specs.size() * 3, 0, [&](std::size_t job) {
        const std::size_t i = job / 3, t = job % 3;
        const auto x = io::synth(specs[i]);
        StreamConfig c;
        c.dtype = x.dtype;
        c.mode = CodecMode::FixedQuality;
        c.target = kQualityTargets[t];
        const auto y = codec::decode_stream(codec::encode_stream(x, c));
        const double srr = stats::srr_db(x.values, y.values);
        std::lock_guard lock(mu);
        res[i].fq_srr[t] = srr;
    });

    double sum = 0, sum_os = 0;
    std::size_t n_os = 0;
    for (const auto& m : res) {
        std::printf("      %-22s target %6.2f dB  r %.7f  ratio %6.2f  flatness %.3f  fq %.2f/%.2f/%.2f\n",
                    m.name.c_str(), m.target, m.r, m.ratio, m.flatness, m.fq_srr[0], m.fq_srr[1], m.fq_srr[2]);
        sum += m.ratio;
        if (m.os >= 4.0) {
            sum_os += m.ratio;
            ++n_os;
        }
    }
    std::size_t below = 0;
    for (const auto& m : res) below += m.r < profiler::kFiveNines;
    report("five_nines_contract", below == 0 && !res.empty(),
           fmt("%zu/%zu members with r >= 0.99999", res.size() - below, res.size()));

    const double mean = sum / static_cast<double>(res.size());
    const double mean_os = n_os ? sum_os / static_cast<double>(n_os) : 0.0;
    report("compression_at_five_nines", mean >= 3.0 && mean_os >= 5.0 && sweep_secs < 300.0,
           fmt("mean %.2f:1 (>= 3), oversampled>=4 mean %.2f:1 over %zu (>= 5), %.1f s (limit 300 s)", mean,
               mean_os, n_os, sweep_secs));

    double worst = 0;
    std::string worst_at;
    for (const auto& m : res) {
        for (int t = 0; t < 3; ++t) {
            const double err = std::fabs(m.fq_srr[t] - kQualityTargets[t]);
            if (!(err <= worst)) {
                worst = err;
                worst_at = fmt("%s @ %.0f dB", m.name.c_str(), kQualityTargets[t]);
            }
        }
    }
    report("fixed_quality_accuracy", worst <= 3.0,
           fmt("max |SRR - target| %.2f dB at %s (limit 3 dB)", worst, worst_at.c_str()));

    double min_flat = 1.0;
    std::size_t n_bl = 0;
    for (const auto& m : res) {
        if (!m.bandlimited) continue;
        ++n_bl;
        min_flat = std::min(min_flat, m.flatness);
    }
    report("residual_whiteness", n_bl > 0 && min_flat >= 0.7,
           fmt("min flatness %.3f over %zu bandlimited members (>= 0.7)", min_flat, n_bl));
}

void fixed_rate_convergence() {
    io::SynthSpec spec;
    spec.kind = io::SynthKind::BandlimitedNoise;
    spec.dtype = kI16;
    spec.oversampling_ratio = 4;
    spec.amplitude = 20000;
    spec.snr_db = 70;
    spec.length = 1 << 18;
    spec.seed = 77;
    const auto x = io::synth(spec);
    StreamConfig c;
    c.dtype = kI16;
    c.mode = CodecMode::FixedRate;
    c.target = 4.0;
    const auto s = codec::encode_stream(x, c);
    double bits = 0, samples = 0;
    for (std::size_t b = 10; b < s.blocks.size(); ++b) {
        bits += 8.0 * static_cast<double>(s.blocks[b].size_bytes(kI16));
        samples += static_cast<double>(s.blocks[b].sample_count);
    }
    const double bps = bits / samples;
    report("fixed_rate_convergence", std::fabs(bps - 4.0) <= 0.05 * 4.0,
           fmt("mean %.3f bits/sample after block 10, target 4.000 (+-5%%)", bps));
}

void jee_efficiency() {
    std::mt19937_64 rng(99);
    std::vector<std::uint8_t> e(1 << 18);
    // Exactly 80% unit steps, 10% zero, 5% two, 5% three, in random order and sign.
    std::vector<int> mags(e.size(), 1);
    std::fill(mags.begin(), mags.begin() + e.size() / 10, 0);
    std::fill(mags.begin() + e.size() / 10, mags.begin() + 3 * e.size() / 20, 2);
    std::fill(mags.begin() + 3 * e.size() / 20, mags.begin() + e.size() / 5, 3);
    std::shuffle(mags.begin(), mags.end(), rng);
    int cur = 16;
    std::size_t unit = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        int d = (rng() & 1) ? mags[i] : -mags[i];
        if (cur + d < 1 || cur + d > 33) d = -d;
        unit += std::abs(d) == 1;
        cur += d;
        e[i] = static_cast<std::uint8_t>(cur);
    }
    const double frac = static_cast<double>(unit) / static_cast<double>(e.size());
    const double samples = static_cast<double>(e.size() * entropy::kGroupSize);
    const double bps = static_cast<double>(entropy::jee_bits(e)) / samples;
    const double baseline = 8.0 * static_cast<double>(e.size()) / samples;
    const bool round_trip = entropy::jee_decode(entropy::jee_encode(e), e.size()) == e;
    report("jee_efficiency", frac >= 0.8 && bps <= 0.8 && round_trip,
           fmt("%.3f bits/sample vs absolute baseline %.3f, %.1f%% unit diffs", bps, baseline, 100.0 * frac));
}

double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += static_cast<long double>(x[i]) * y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        syy += static_cast<long double>(y[i]) * y[i];
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

double margin_oracle(const std::vector<double>& x, const std::vector<double>& d) {
    std::vector<double> s2r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (d[i] == 0) s2r[i] = INFINITY;
        else if (x[i] == 0) s2r[i] = -INFINITY;
        else s2r[i] = 20.0 * std::log10(std::fabs(x[i]) / std::fabs(d[i]));
    }
    std::sort(s2r.begin(), s2r.end());
    // Largest value with at least 95.5% of the samples at or above it.
    double best = -INFINITY;
    for (std::size_t k = 0; k < s2r.size(); ++k) {
        const auto above = s2r.end() - std::lower_bound(s2r.begin(), s2r.end(), s2r[k]);
        if (static_cast<double>(above) >= 0.955 * static_cast<double>(s2r.size())) best = std::max(best, s2r[k]);
    }
    return best;
}

void oracle_equivalence() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);

    double worst_r = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng() % 100000;
        const double sx = std::pow(10.0, g(rng) * 3), off = g(rng);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = sx * (off + g(rng));
            y[i] = x[i] + sx * 1e-3 * g(rng);
        }
        worst_r = std::max(worst_r, std::fabs(profiler::pearson_r(x, y) - pearson_oracle(x, y)));
    }

    std::size_t margin_bad = 0, margin_cases = 0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 1 + rng() % 2000;
        std::vector<double> x(n), d(n);
        const unsigned zero_x = rng() % 4, zero_d = rng() % 4;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng() % 10 < zero_x ? 0.0 : std::round(g(rng) * 100.0);
            d[i] = rng() % 10 < zero_d ? 0.0 : std::round(g(rng) * 4.0) / 8.0;
        }
        const double got = profiler::s2r_distribution(x, d).two_sigma_margin_db;
        const double want = margin_oracle(x, d);
        margin_bad += !(got == want);
        ++margin_cases;
    }

    std::size_t pack_bad = 0;
    constexpr std::size_t kBlocks = 100000;
    for (std::size_t b = 0; b < kBlocks; ++b) {
        const std::size_t groups = 1 + rng() % 64;
        std::vector<std::int64_t> s(groups * entropy::kGroupSize);
        int w = static_cast<int>(rng() % (entropy::kMaxExponent + 1));
        for (std::size_t gi = 0; gi < groups; ++gi) {
            w = std::clamp(w + static_cast<int>(rng() % 5) - 2, 0, entropy::kMaxExponent);
            if (rng() % 16 == 0) w = static_cast<int>(rng() % (entropy::kMaxExponent + 1));
            for (std::size_t k = 0; k < entropy::kGroupSize; ++k) {
                std::int64_t v = 0;
                if (w > 0) {
                    const std::int64_t lo = -(std::int64_t{1} << (w - 1));
                    v = lo + static_cast<std::int64_t>(rng() % (std::uint64_t{1} << w));
                }
                s[gi * entropy::kGroupSize + k] = v;
            }
        }
        const auto exps = entropy::group_exponents(s);
        auto p = entropy::pack_block(s, exps);
        const std::size_t len = p.size();
        p.push_back(static_cast<std::uint8_t>(rng()));
        const auto u = entropy::unpack_block(p, groups);
        pack_bad += u.samples != s || u.exponents != exps || u.bytes_consumed != len;
    }

    report("oracle_equivalence", worst_r <= 1e-12 && margin_bad == 0 && pack_bad == 0,
           fmt("pearson max diff %.2e (<= 1e-12), margin %zu/%zu exact, pack fuzz %zu/%zu ok", worst_r,
               margin_cases - margin_bad, margin_cases, kBlocks - pack_bad, kBlocks));
}

void throughput() {
    io::SynthSpec spec;
    spec.kind = io::SynthKind::BandlimitedNoise;
    spec.dtype = kF64;
    spec.oversampling_ratio = 4;
    spec.snr_db = 80;
    spec.length = 1 << 22;
    const auto x = io::synth(spec);
    StreamConfig c;
    c.dtype = kF64;
    c.mode = CodecMode::FixedQuality;
    c.target = 60.0;
    const double mb = static_cast<double>(x.size_bytes()) / 1e6;

    auto t0 = Clock::now();
    const auto bytes = codec::encode_stream(x, c).serialize();
    const double enc = mb / seconds_since(t0);
    t0 = Clock::now();
    const auto y = codec::decode_bytes(bytes);
    const double dec = mb / seconds_since(t0);
    report("throughput_f64", enc >= 50.0,
           fmt("encode %.1f MB/s (reference 50), decode %.1f MB/s, %zu samples", enc, dec, y.size()), false);
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path corpus =
        argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::path(APAX_SOURCE_DIR) / "docs/corpus-v1.json";
    lossless_bit_exactness();
    corpus_criteria(corpus);
    fixed_rate_convergence();
    jee_efficiency();
    oracle_equivalence();
    throughput();
    std::printf("%s: %d gating criteria failed\n", failures ? "FAILED" : "OK", failures);
    return failures ? 1 : 0;
}
