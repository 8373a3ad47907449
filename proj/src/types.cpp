#include "apax/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "apax/errors.hpp"

namespace apax {

double NumericDatatype::int_min() const {
    switch (code_) {
        case DTypeCode::I8: return -128.0;
        case DTypeCode::I16: return -32768.0;
        case DTypeCode::I32: return -2147483648.0;
        default: return -std::numeric_limits<double>::infinity();
    }
}

double NumericDatatype::int_max() const {
    switch (code_) {
        case DTypeCode::I8: return 127.0;
        case DTypeCode::I16: return 32767.0;
        case DTypeCode::I32: return 2147483647.0;
        default: return std::numeric_limits<double>::infinity();
    }
}

std::string_view NumericDatatype::name() const {
    switch (code_) {
        case DTypeCode::I8: return "i8";
        case DTypeCode::I16: return "i16";
        case DTypeCode::I32: return "i32";
        case DTypeCode::F32: return "f32";
        case DTypeCode::F64: return "f64";
    }
    return "?";
}

NumericDatatype NumericDatatype::from_name(std::string_view name) {
    if (name == "i8") return kI8;
    if (name == "i16") return kI16;
    if (name == "i32") return kI32;
    if (name == "f32") return kF32;
    if (name == "f64") return kF64;
    throw InvalidConfig("unknown dtype '" + std::string(name) + "' (expected i8, i16, i32, f32, f64)");
}

NumericDatatype NumericDatatype::from_code(std::uint8_t code) {
    if (code > static_cast<std::uint8_t>(DTypeCode::F64)) {
        throw CorruptStream("invalid dtype code " + std::to_string(code));
    }
    return NumericDatatype(static_cast<DTypeCode>(code));
}

std::string_view mode_name(CodecMode mode) {
    switch (mode) {
        case CodecMode::Lossless: return "lossless";
        case CodecMode::FixedRate: return "rate";
        case CodecMode::FixedQuality: return "quality";
    }
    return "?";
}

CodecMode mode_from_name(std::string_view name) {
    if (name == "lossless") return CodecMode::Lossless;
    if (name == "rate" || name == "fixed-rate") return CodecMode::FixedRate;
    if (name == "quality" || name == "fixed-quality") return CodecMode::FixedQuality;
    throw InvalidConfig("unknown mode '" + std::string(name) + "' (expected lossless, rate, quality)");
}

void StreamConfig::validate() const {
    if (block_size < kMinBlockSize || block_size > kMaxBlockSize || block_size % 4 != 0) {
        throw InvalidConfig("block size must be a multiple of 4 in [64, 16384], got " +
                            std::to_string(block_size));
    }
    switch (mode) {
        case CodecMode::Lossless:
            if (dtype.is_float()) throw InvalidConfig("lossless unsupported for floats");
            break;
        case CodecMode::FixedRate:
            if (!std::isfinite(target) || target <= 0.0) {
                throw InvalidConfig("fixed-rate target must be a positive bits/sample value");
            }
            break;
        case CodecMode::FixedQuality:
            if (!std::isfinite(target) || target <= 0.0) {
                throw InvalidConfig("fixed-quality target must be a positive SRR in dB");
            }
            break;
    }
}

// ---------------------------------------------------------------------------

std::uint16_t encode_scale_code(double a) {
    if (!(a >= kScaleCodeMin && a < kScaleCodeLimit)) {
        throw RangeError("attenuation " + std::to_string(a) + " outside scale-code range");
    }
    int exp2 = 0;
    const double m = std::frexp(a, &exp2);  // a = m * 2^exp2, m in [0.5, 1)
    const int e = exp2 - 1 + 31;
    const auto f = static_cast<unsigned>(std::floor((2.0 * m - 1.0) * 1024.0));
    return make_scale_code(static_cast<unsigned>(e), f);
}

double decode_scale_code(std::uint16_t code) {
    const double m = 1.0 + static_cast<double>(scale_code_fraction(code)) / 1024.0;
    return std::ldexp(m, static_cast<int>(scale_code_exponent(code)) - 31);
}

double BlockScale::value() const {
    return std::ldexp(decode_scale_code(code), float_block_exp);
}

BlockScale represent_scale(double s, bool float_path) {
    static const double kMaxCodeValue = decode_scale_code(0xFFFF);
    BlockScale out;
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw RangeError("block scale must be positive and finite");
    }
    double residual = s;
    if (float_path) {
        const int k = std::clamp(std::ilogb(s), -127, 127);
        out.float_block_exp = static_cast<std::int8_t>(k);
        residual = std::ldexp(s, -k);
    }
    residual = std::clamp(residual, kScaleCodeMin, kMaxCodeValue);
    out.code = encode_scale_code(residual);
    return out;
}

// ---------------------------------------------------------------------------

double BlockHeader::scale(NumericDatatype dtype) const {
    const double base = decode_scale_code(scale_code);
    return dtype.is_float() ? std::ldexp(base, float_block_exp) : base;
}

void BlockHeader::serialize(NumericDatatype dtype, std::vector<std::uint8_t>& out) const {
    out.push_back(static_cast<std::uint8_t>(static_cast<unsigned>(selector) | (restart ? 0x04u : 0u)));
    out.push_back(static_cast<std::uint8_t>(scale_code & 0xFFu));
    out.push_back(static_cast<std::uint8_t>(scale_code >> 8));
    out.push_back(0);
    if (dtype.is_float()) {
        out.push_back(static_cast<std::uint8_t>(float_block_exp));
        out.push_back(0);
    }
}

BlockHeader BlockHeader::parse(NumericDatatype dtype, std::span<const std::uint8_t> bytes) {
    const std::size_t need = size_for(dtype);
    if (bytes.size() < need) throw TruncatedStream("block header truncated");
    BlockHeader h;
    const std::uint8_t b0 = bytes[0];
    if ((b0 & 0x03u) == 3u) throw CorruptStream("reserved stream selector 3");
    if ((b0 & 0xF8u) != 0u || bytes[3] != 0u) throw CorruptStream("nonzero reserved header bits");
    h.selector = static_cast<StreamSelector>(b0 & 0x03u);
    h.restart = (b0 & 0x04u) != 0u;
    h.scale_code = static_cast<std::uint16_t>(bytes[1] | (bytes[2] << 8));
    if (dtype.is_float()) {
        h.float_block_exp = static_cast<std::int8_t>(bytes[4]);
        if (bytes[5] != 0u) throw CorruptStream("nonzero reserved header bits");
    }
    return h;
}

// ---------------------------------------------------------------------------

AttenuatorState AttenuatorState::for_dtype(NumericDatatype dtype) {
    AttenuatorState st;
    st.float_path = dtype.is_float();
    if (st.float_path) {
        st.min_db = 20.0 * std::log10(0x1p-150);
        st.max_db = 20.0 * std::log10(0x1p150);
    } else {
        st.min_db = 20.0 * std::log10(kScaleCodeMin);
        st.max_db = 0.0;
    }
    st.gain_db = 0.0;
    return st;
}

double AttenuatorState::clamp_db(double db) const { return std::clamp(db, min_db, max_db); }

double AttenuatorState::requested() const {
    if (!float_path && gain_db >= 0.0) return 1.0;
    return std::pow(10.0, clamp_db(gain_db) / 20.0);
}

double AttenuatorState::multiplier() const { return represent_scale(requested(), float_path).value(); }

}  // namespace apax
