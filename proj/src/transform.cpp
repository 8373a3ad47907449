#include "apax/transform.hpp"

#include <cmath>
#include <cstdlib>

#include "apax/entropy.hpp"

namespace apax::transform {

std::span<const std::int64_t> DerivedStreams::get(StreamSelector s) const {
    switch (s) {
        case StreamSelector::D0: return d0;
        case StreamSelector::D1: return d1;
        case StreamSelector::D2: return d2;
    }
    return d0;
}

std::uint64_t StreamCosts::get(StreamSelector s) const {
    switch (s) {
        case StreamSelector::D0: return bits_d0;
        case StreamSelector::D1: return bits_d1;
        case StreamSelector::D2: return bits_d2;
    }
    return bits_d0;
}

BlockStats monitor(std::span<const std::int64_t> block) {
    BlockStats st;
    if (block.empty()) return st;
    std::size_t sign_changes = 0;
    double peak = 0.0;
    double sum_abs = 0.0;
    int prev_sign = 0;
    for (const std::int64_t v : block) {
        const double a = std::fabs(static_cast<double>(v));
        peak = std::max(peak, a);
        sum_abs += a;
        // Zeros carry no sign; a change is counted between consecutive nonzero signs.
        const int s = (v > 0) - (v < 0);
        if (s != 0) {
            if (prev_sign != 0 && s != prev_sign) ++sign_changes;
            prev_sign = s;
        }
    }
    const std::size_t n = block.size();
    st.center_freq_norm = n > 1 ? static_cast<double>(sign_changes) / (2.0 * static_cast<double>(n - 1)) : 0.0;
    st.peak_abs = peak;
    st.mean_abs = sum_abs / static_cast<double>(n);
    st.par_db = st.mean_abs > 0.0 ? 20.0 * std::log10(st.peak_abs / st.mean_abs) : 0.0;
    return st;
}

DerivedStreams derive_streams(std::span<const std::int64_t> q, const DerivativeHistory& h) {
    DerivedStreams s;
    const std::size_t n = q.size();
    s.d0.assign(q.begin(), q.end());
    s.d1.resize(n);
    s.d2.resize(n);
    std::int64_t prev = h.prev1;
    std::int64_t prev_d1 = h.prev1 - h.prev2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t d1 = q[i] - prev;
        s.d1[i] = d1;
        s.d2[i] = d1 - prev_d1;
        prev = q[i];
        prev_d1 = d1;
    }
    return s;
}

namespace {

std::uint64_t stream_cost(std::span<const std::int64_t> stream) {
    std::uint64_t bits = 0;
    const std::size_t groups = stream.size() / entropy::kGroupSize;
    for (std::size_t g = 0; g < groups; ++g) {
        const int e = entropy::group_exponent(stream.subspan(g * entropy::kGroupSize, entropy::kGroupSize));
        bits += entropy::kGroupSize * static_cast<std::uint64_t>(e) + 4;
    }
    return bits;
}

}  // namespace

StreamCosts estimate_stream_costs(const DerivedStreams& streams) {
    return {stream_cost(streams.d0), stream_cost(streams.d1), stream_cost(streams.d2)};
}

StreamSelector select_stream(const std::optional<StreamCosts>& prev_costs, const BlockStats& stats) {
    if (!prev_costs) return StreamSelector::D0;
    if (stats.center_freq_norm > kDifferencingCutoff) return StreamSelector::D0;
    StreamSelector best = StreamSelector::D0;
    if (prev_costs->bits_d1 < prev_costs->get(best)) best = StreamSelector::D1;
    if (prev_costs->bits_d2 < prev_costs->get(best)) best = StreamSelector::D2;
    return best;
}

void reconstruct_in_place(std::span<std::int64_t> block, StreamSelector selector, DerivativeHistory& h) {
    switch (selector) {
        case StreamSelector::D0:
            break;
        case StreamSelector::D1: {
            std::int64_t prev = h.prev1;
            for (auto& v : block) {
                v += prev;
                prev = v;
            }
            break;
        }
        case StreamSelector::D2: {
            std::int64_t prev = h.prev1;
            std::int64_t prev_d1 = h.prev1 - h.prev2;
            for (auto& v : block) {
                prev_d1 += v;
                prev += prev_d1;
                v = prev;
            }
            break;
        }
    }
    h = advance_history(block, h);
}

std::vector<std::int64_t> reconstruct(std::span<const std::int64_t> decoded, StreamSelector selector,
                                      DerivativeHistory& h) {
    std::vector<std::int64_t> q(decoded.begin(), decoded.end());
    reconstruct_in_place(q, selector, h);
    return q;
}

DerivativeHistory advance_history(std::span<const std::int64_t> q, const DerivativeHistory& h) {
    const std::size_t n = q.size();
    if (n == 0) return h;
    if (n == 1) return {q[0], h.prev1};
    return {q[n - 1], q[n - 2]};
}

}  // namespace apax::transform
