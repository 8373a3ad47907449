#pragma once

// Block floating point packing of 4-sample groups with joint exponent
// encoding (JEE) of the per-group exponent differences.
//
// Payload layout: [JEE nibbles, high nibble first, zero-padded to a byte]
//                 [mantissas, MSB first, zero-padded to a byte]
//
// Token table (one nibble unless noted):
//   0..8   two diffs d1, d2 in {-1, 0, +1}: (d1 + 1) * 3 + (d2 + 1)
//   9..13  one diff d in {-2..+2}: 9 + (d + 2)
//   14     reserved
//   15     escape, followed by the absolute exponent in 8 bits (two nibbles)
// The first exponent of a block is always escaped.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace apax::entropy {

inline constexpr std::size_t kGroupSize = 4;
inline constexpr int kMaxExponent = 34;

inline constexpr std::uint8_t kEscapeNibble = 15;
inline constexpr std::uint8_t kReservedNibble = 14;
inline constexpr std::uint8_t kSingleBase = 9;

using ExponentStream = std::vector<std::uint8_t>;
using PackedPayload = std::vector<std::uint8_t>;

struct JeeTokenStream {
    std::vector<std::uint8_t> nibbles;
};

/// Minimal two's-complement width holding every value of the group; 0 iff all zero.
int group_exponent(std::span<const std::int64_t> group);

/// One exponent per 4-sample group. samples.size() must be a multiple of 4.
ExponentStream group_exponents(std::span<const std::int64_t> samples);

JeeTokenStream jee_encode(std::span<const std::uint8_t> exponents);

/// Throws CorruptStream (reserved nibble, exponent > 34, malformed token) or
/// TruncatedStream (tokens exhausted before n_groups exponents).
ExponentStream jee_decode(const JeeTokenStream& tokens, std::size_t n_groups);

/// Encodes samples with the given exponents; appends to out.
/// Throws InternalError if a sample does not fit its group's width.
void pack_block(std::span<const std::int64_t> samples, std::span<const std::uint8_t> exponents,
                std::vector<std::uint8_t>& out);

PackedPayload pack_block(std::span<const std::int64_t> samples, std::span<const std::uint8_t> exponents);

struct UnpackedBlock {
    std::vector<std::int64_t> samples;
    ExponentStream exponents;
    std::size_t bytes_consumed = 0;
};

/// Inverse of pack_block. Reads exactly the bytes the payload occupies; any
/// trailing bytes are ignored (bytes_consumed reports the payload length).
UnpackedBlock unpack_block(std::span<const std::uint8_t> payload, std::size_t n_groups);

/// Decodes samples into out (size 4 * n_groups), returning bytes consumed.
std::size_t unpack_block_into(std::span<const std::uint8_t> payload, std::size_t n_groups,
                              std::span<std::int64_t> out);

/// Payload length in bytes without decoding mantissas.
std::size_t payload_size(std::span<const std::uint8_t> payload, std::size_t n_groups);

/// Bits spent on JEE tokens (including padding) for an exponent stream.
std::size_t jee_bits(std::span<const std::uint8_t> exponents);

}  // namespace apax::entropy
