#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace apax {

enum class DTypeCode : std::uint8_t { I8 = 0, I16 = 1, I32 = 2, F32 = 3, F64 = 4 };

/// Element type of an input array. The width always follows from the code.
class NumericDatatype {
public:
    constexpr NumericDatatype() = default;
    constexpr explicit NumericDatatype(DTypeCode code) : code_(code) {}

    constexpr DTypeCode code() const { return code_; }

    constexpr std::size_t width_bytes() const {
        switch (code_) {
            case DTypeCode::I8: return 1;
            case DTypeCode::I16: return 2;
            case DTypeCode::I32: return 4;
            case DTypeCode::F32: return 4;
            case DTypeCode::F64: return 8;
        }
        return 0;
    }

    constexpr bool is_float() const { return code_ == DTypeCode::F32 || code_ == DTypeCode::F64; }
    constexpr bool is_integer() const { return !is_float(); }

    // Representable range for integer types; meaningless for floats.
    double int_min() const;
    double int_max() const;

    std::string_view name() const;

    /// Parses "i8", "i16", "i32", "f32", "f64". Throws InvalidConfig.
    static NumericDatatype from_name(std::string_view name);
    /// Parses the container dtype byte. Throws CorruptStream.
    static NumericDatatype from_code(std::uint8_t code);

    friend constexpr bool operator==(NumericDatatype a, NumericDatatype b) { return a.code_ == b.code_; }

private:
    DTypeCode code_ = DTypeCode::I16;
};

inline constexpr NumericDatatype kI8{DTypeCode::I8};
inline constexpr NumericDatatype kI16{DTypeCode::I16};
inline constexpr NumericDatatype kI32{DTypeCode::I32};
inline constexpr NumericDatatype kF32{DTypeCode::F32};
inline constexpr NumericDatatype kF64{DTypeCode::F64};

/// A typed numeric array. Values are held as doubles, which represent every
/// i8/i16/i32/f32 value exactly.
struct SampleArray {
    NumericDatatype dtype;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    std::size_t size_bytes() const { return values.size() * dtype.width_bytes(); }
};

enum class CodecMode : std::uint8_t { Lossless = 0, FixedRate = 1, FixedQuality = 2 };

std::string_view mode_name(CodecMode mode);
CodecMode mode_from_name(std::string_view name);

inline constexpr std::size_t kMinBlockSize = 64;
inline constexpr std::size_t kMaxBlockSize = 16384;
inline constexpr std::size_t kDefaultBlockSize = 1024;

struct StreamConfig {
    NumericDatatype dtype = kI16;
    std::size_t block_size = kDefaultBlockSize;
    CodecMode mode = CodecMode::Lossless;
    // Bits/sample for FixedRate, SRR in dB for FixedQuality, ignored for Lossless.
    double target = 0.0;
    // Encoder-only: set the restart flag (and reset history) every N blocks. 0 = only block 0.
    std::size_t restart_interval = 0;

    /// Throws InvalidConfig when any invariant is violated.
    void validate() const;
};

enum class StreamSelector : std::uint8_t { D0 = 0, D1 = 1, D2 = 2 };

// ---------------------------------------------------------------------------
// Attenuation scale code: 6-bit biased exponent e, 10-bit fraction f,
// value (1 + f/1024) * 2^(e - 31).

inline constexpr double kScaleCodeMin = 0x1p-31;
inline constexpr double kScaleCodeLimit = 0x1p33;  // exclusive; e = 63 reaches [2^32, 2^33)

/// Largest representable value <= a. Throws RangeError outside [2^-31, 2^33).
std::uint16_t encode_scale_code(double a);
double decode_scale_code(std::uint16_t code);

constexpr std::uint16_t make_scale_code(unsigned e, unsigned f) {
    return static_cast<std::uint16_t>(((e & 0x3Fu) << 10) | (f & 0x3FFu));
}
constexpr unsigned scale_code_exponent(std::uint16_t code) { return code >> 10; }
constexpr unsigned scale_code_fraction(std::uint16_t code) { return code & 0x3FFu; }

inline constexpr std::uint16_t kUnityScaleCode = make_scale_code(31, 0);

// ---------------------------------------------------------------------------

struct BlockHeader {
    StreamSelector selector = StreamSelector::D0;
    bool restart = false;
    std::uint16_t scale_code = kUnityScaleCode;
    std::int8_t float_block_exp = 0;  // float dtypes only

    static constexpr std::size_t kIntSize = 4;
    static constexpr std::size_t kFloatSize = 6;

    static constexpr std::size_t size_for(NumericDatatype dtype) {
        return dtype.is_float() ? kFloatSize : kIntSize;
    }

    /// Total multiplier applied to input samples in this block.
    double scale(NumericDatatype dtype) const;

    void serialize(NumericDatatype dtype, std::vector<std::uint8_t>& out) const;
    /// Throws TruncatedStream on short input, CorruptStream on selector 3 or
    /// nonzero reserved bits.
    static BlockHeader parse(NumericDatatype dtype, std::span<const std::uint8_t> bytes);

    friend bool operator==(const BlockHeader&, const BlockHeader&) = default;
};

/// A header-representable block scale: decode(code) * 2^float_block_exp.
struct BlockScale {
    std::uint16_t code = kUnityScaleCode;
    std::int8_t float_block_exp = 0;

    double value() const;
};

/// Largest representable scale <= s. Integer dtypes have no block exponent, so
/// s is clamped to the scale-code range; float dtypes extend it by 2^[-127, 127].
BlockScale represent_scale(double s, bool float_path);

/// Per-block multiplicative gain. gain_db is the continuous loop variable;
/// multiplier() is always exactly representable in the block header.
struct AttenuatorState {
    double gain_db = 0.0;
    double min_db = 0.0;
    double max_db = 0.0;
    bool float_path = false;

    static AttenuatorState for_dtype(NumericDatatype dtype);

    double clamp_db(double db) const;
    /// Requested multiplier 10^(gain_db/20) clamped to the bounds.
    double requested() const;
    /// Requested multiplier rounded down to the nearest header-representable value.
    double multiplier() const;
};

struct BlockStats {
    double center_freq_norm = 0.0;  // cycles/sample, [0, 0.5]
    double peak_abs = 0.0;
    double mean_abs = 0.0;
    double par_db = 0.0;
};

}  // namespace apax
