#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "apax/types.hpp"

namespace apax::transform {

/// Trailing quantized samples of everything processed so far in this stream.
struct DerivativeHistory {
    std::int64_t prev1 = 0;  // last sample
    std::int64_t prev2 = 0;  // second-to-last sample

    friend bool operator==(const DerivativeHistory&, const DerivativeHistory&) = default;
};

struct DerivedStreams {
    std::vector<std::int64_t> d0;
    std::vector<std::int64_t> d1;
    std::vector<std::int64_t> d2;

    std::span<const std::int64_t> get(StreamSelector s) const;
};

/// Estimated payload bits of each candidate stream for one block.
struct StreamCosts {
    std::uint64_t bits_d0 = 0;
    std::uint64_t bits_d1 = 0;
    std::uint64_t bits_d2 = 0;

    std::uint64_t get(StreamSelector s) const;
    friend bool operator==(const StreamCosts&, const StreamCosts&) = default;
};

/// Above this normalized center frequency differencing amplifies the signal.
inline constexpr double kDifferencingCutoff = 1.0 / 3.0;

BlockStats monitor(std::span<const std::int64_t> block);

DerivedStreams derive_streams(std::span<const std::int64_t> q, const DerivativeHistory& h);

StreamCosts estimate_stream_costs(const DerivedStreams& streams);

/// prev_costs is empty for the first block of a stream.
StreamSelector select_stream(const std::optional<StreamCosts>& prev_costs, const BlockStats& stats);

/// Inverts derive_streams for one selector; h is advanced past this block.
std::vector<std::int64_t> reconstruct(std::span<const std::int64_t> decoded, StreamSelector selector,
                                      DerivativeHistory& h);

/// In-place variant used by the decoder.
void reconstruct_in_place(std::span<std::int64_t> block, StreamSelector selector, DerivativeHistory& h);

/// History after appending q to the stream.
DerivativeHistory advance_history(std::span<const std::int64_t> q, const DerivativeHistory& h);

}  // namespace apax::transform
