#include "apax/entropy.hpp"

#include <bit>
#include <string>

#include "apax/errors.hpp"

namespace apax::entropy {
namespace {

constexpr bool small_diff(int d) { return d >= -1 && d <= 1; }
constexpr bool single_diff(int d) { return d >= -2 && d <= 2; }

// Calls emit(nibble) for every token nibble of the exponent stream.
template <class Emit>
void for_each_token(std::span<const std::uint8_t> exps, Emit&& emit) {
    if (exps.empty()) return;
    auto escape = [&](std::uint8_t e) {
        emit(kEscapeNibble);
        emit(static_cast<std::uint8_t>(e >> 4));
        emit(static_cast<std::uint8_t>(e & 0x0Fu));
    };
    escape(exps[0]);
    std::size_t g = 1;
    while (g < exps.size()) {
        const int d1 = int(exps[g]) - int(exps[g - 1]);
        if (g + 1 < exps.size()) {
            const int d2 = int(exps[g + 1]) - int(exps[g]);
            if (small_diff(d1) && small_diff(d2)) {
                emit(static_cast<std::uint8_t>((d1 + 1) * 3 + (d2 + 1)));
                g += 2;
                continue;
            }
        }
        if (single_diff(d1)) {
            emit(static_cast<std::uint8_t>(kSingleBase + (d1 + 2)));
        } else {
            escape(exps[g]);
        }
        ++g;
    }
}

// Token decoder shared by the nibble-vector and packed-byte entry points.
// next() must return the next nibble or throw TruncatedStream.
template <class Next>
void decode_tokens(Next&& next, std::size_t n_groups, std::span<std::uint8_t> out) {
    std::size_t g = 0;
    int prev = 0;
    auto put = [&](int e) {
        if (e < 0 || e > kMaxExponent) {
            throw CorruptStream("decoded exponent " + std::to_string(e) + " out of range");
        }
        out[g++] = static_cast<std::uint8_t>(e);
        prev = e;
    };
    while (g < n_groups) {
        const std::uint8_t t = next();
        if (g == 0 && t != kEscapeNibble) throw CorruptStream("first exponent must be absolute");
        if (t <= 8) {
            if (g + 2 > n_groups) throw CorruptStream("joint token past end of block");
            const int d1 = t / 3 - 1;
            const int d2 = t % 3 - 1;
            put(prev + d1);
            put(prev + d2);
        } else if (t <= 13) {
            put(prev + (t - kSingleBase) - 2);
        } else if (t == kReservedNibble) {
            throw CorruptStream("reserved JEE token 14");
        } else {
            const std::uint8_t hi = next();
            const std::uint8_t lo = next();
            put((hi << 4) | lo);
        }
    }
}

class BitWriter {
public:
    explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void write(std::uint64_t value, unsigned width) {
        if (width == 0) return;
        acc_ = (acc_ << width) | (value & ((std::uint64_t{1} << width) - 1));
        bits_ += width;
        while (bits_ >= 8) {
            bits_ -= 8;
            out_.push_back(static_cast<std::uint8_t>(acc_ >> bits_));
        }
    }

    void flush() {
        if (bits_ > 0) {
            out_.push_back(static_cast<std::uint8_t>(acc_ << (8 - bits_)));
            bits_ = 0;
        }
        acc_ = 0;
    }

private:
    std::vector<std::uint8_t>& out_;
    std::uint64_t acc_ = 0;
    unsigned bits_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint64_t read(unsigned width) {
        while (bits_ < width) {
            if (pos_ >= in_.size()) throw TruncatedStream("payload truncated");
            acc_ = (acc_ << 8) | in_[pos_++];
            bits_ += 8;
        }
        bits_ -= width;
        const std::uint64_t v = (acc_ >> bits_) & ((std::uint64_t{1} << width) - 1);
        return v;
    }

    // Drops any partial byte; returns the byte offset consumed so far.
    std::size_t align() {
        bits_ = 0;
        acc_ = 0;
        return pos_;
    }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    std::uint64_t acc_ = 0;
    unsigned bits_ = 0;
};

std::int64_t sign_extend(std::uint64_t v, unsigned width) {
    const std::uint64_t sign = std::uint64_t{1} << (width - 1);
    return static_cast<std::int64_t>((v ^ sign) - sign);
}

std::size_t decode_exponents_from_bytes(std::span<const std::uint8_t> payload, std::size_t n_groups,
                                        ExponentStream& exps) {
    exps.resize(n_groups);
    BitReader reader(payload);
    decode_tokens([&] { return static_cast<std::uint8_t>(reader.read(4)); }, n_groups, exps);
    return reader.align();
}

}  // namespace

int group_exponent(std::span<const std::int64_t> group) {
    std::uint64_t any = 0;
    std::uint64_t magnitude = 0;
    for (const std::int64_t v : group) {
        any |= static_cast<std::uint64_t>(v);
        // v >= 0: v; v < 0: ~v. Width is bit_width of that plus the sign bit.
        magnitude |= static_cast<std::uint64_t>(v ^ (v >> 63));
    }
    if (any == 0) return 0;
    return static_cast<int>(std::bit_width(magnitude)) + 1;
}

ExponentStream group_exponents(std::span<const std::int64_t> samples) {
    ExponentStream exps(samples.size() / kGroupSize);
    for (std::size_t g = 0; g < exps.size(); ++g) {
        exps[g] = static_cast<std::uint8_t>(group_exponent(samples.subspan(g * kGroupSize, kGroupSize)));
    }
    return exps;
}

JeeTokenStream jee_encode(std::span<const std::uint8_t> exponents) {
    JeeTokenStream tokens;
    tokens.nibbles.reserve(exponents.size() + 3);
    for_each_token(exponents, [&](std::uint8_t n) { tokens.nibbles.push_back(n); });
    return tokens;
}

ExponentStream jee_decode(const JeeTokenStream& tokens, std::size_t n_groups) {
    ExponentStream exps(n_groups);
    std::size_t pos = 0;
    decode_tokens(
        [&] {
            if (pos >= tokens.nibbles.size()) throw TruncatedStream("JEE token stream exhausted");
            const std::uint8_t n = tokens.nibbles[pos++];
            if (n > 15) throw CorruptStream("token value exceeds 4 bits");
            return n;
        },
        n_groups, exps);
    if (pos != tokens.nibbles.size()) throw CorruptStream("trailing JEE tokens");
    return exps;
}

std::size_t jee_bits(std::span<const std::uint8_t> exponents) {
    std::size_t nibbles = 0;
    for_each_token(exponents, [&](std::uint8_t) { ++nibbles; });
    return (nibbles + 1) / 2 * 8;
}

void pack_block(std::span<const std::int64_t> samples, std::span<const std::uint8_t> exponents,
                std::vector<std::uint8_t>& out) {
    if (samples.size() != exponents.size() * kGroupSize) {
        throw InternalError("pack_block: sample count does not match exponent count");
    }
    BitWriter writer(out);
    for_each_token(exponents, [&](std::uint8_t n) { writer.write(n, 4); });
    writer.flush();
    for (std::size_t g = 0; g < exponents.size(); ++g) {
        const unsigned e = exponents[g];
        if (e == 0) {
            for (std::size_t i = 0; i < kGroupSize; ++i) {
                if (samples[g * kGroupSize + i] != 0) throw InternalError("nonzero sample in zero-width group");
            }
            continue;
        }
        const std::int64_t lo = -(std::int64_t{1} << (e - 1));
        const std::int64_t hi = (std::int64_t{1} << (e - 1)) - 1;
        for (std::size_t i = 0; i < kGroupSize; ++i) {
            const std::int64_t v = samples[g * kGroupSize + i];
            if (v < lo || v > hi) {
                throw InternalError("sample " + std::to_string(v) + " exceeds group width " + std::to_string(e));
            }
            writer.write(static_cast<std::uint64_t>(v), e);
        }
    }
    writer.flush();
}

PackedPayload pack_block(std::span<const std::int64_t> samples, std::span<const std::uint8_t> exponents) {
    PackedPayload out;
    pack_block(samples, exponents, out);
    return out;
}

std::size_t unpack_block_into(std::span<const std::uint8_t> payload, std::size_t n_groups,
                              std::span<std::int64_t> out) {
    if (out.size() != n_groups * kGroupSize) throw InternalError("unpack_block: output size mismatch");
    ExponentStream exps;
    const std::size_t jee_bytes = decode_exponents_from_bytes(payload, n_groups, exps);
    BitReader reader(payload.subspan(jee_bytes));
    for (std::size_t g = 0; g < n_groups; ++g) {
        const unsigned e = exps[g];
        for (std::size_t i = 0; i < kGroupSize; ++i) {
            out[g * kGroupSize + i] = e == 0 ? 0 : sign_extend(reader.read(e), e);
        }
    }
    return jee_bytes + reader.align();
}

UnpackedBlock unpack_block(std::span<const std::uint8_t> payload, std::size_t n_groups) {
    UnpackedBlock block;
    block.samples.resize(n_groups * kGroupSize);
    block.bytes_consumed = unpack_block_into(payload, n_groups, block.samples);
    decode_exponents_from_bytes(payload, n_groups, block.exponents);
    return block;
}

std::size_t payload_size(std::span<const std::uint8_t> payload, std::size_t n_groups) {
    ExponentStream exps;
    const std::size_t jee_bytes = decode_exponents_from_bytes(payload, n_groups, exps);
    std::size_t mantissa_bits = 0;
    for (const std::uint8_t e : exps) mantissa_bits += kGroupSize * e;
    const std::size_t total = jee_bytes + (mantissa_bits + 7) / 8;
    if (total > payload.size()) throw TruncatedStream("payload truncated");
    return total;
}

}  // namespace apax::entropy
