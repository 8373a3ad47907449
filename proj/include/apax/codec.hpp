#pragma once

// Block encoder/decoder pipeline and the .apx container.
//
// Container (little-endian):
//   "APAX" | version u8 | dtype u8 | mode u8 | reserved u8 | block_size u32 |
//   element_count u64 | target f64 | blocks...
// Each block is a BlockHeader (4 bytes for ints, 6 for floats) followed by a
// self-delimiting entropy payload. The last block holds element_count %
// block_size samples (or a full block), zero-padded to a multiple of 4.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "apax/entropy.hpp"
#include "apax/transform.hpp"
#include "apax/types.hpp"

namespace apax::codec {

inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr std::size_t kFileHeaderSize = 28;

/// Floats are normalized so the block peak is at most this many quantization steps.
inline constexpr double kFloatFullScale = 0x1p30;

// ---------------------------------------------------------------------------
// Quantization

struct QuantizedBlock {
    std::vector<std::int64_t> q;
    BlockScale scale;
    bool capped = false;  // float scale was limited by the block peak
};

/// Integers: q = round_half_even(x * A) with A <= 1 taken from requested_scale.
/// Floats: S is requested_scale limited so max|x| * S <= 2^30.
/// Throws UnsupportedValue for NaN/Inf input.
QuantizedBlock quantize_block(std::span<const double> x, double requested_scale, NumericDatatype dtype);

/// Inverse scaling; integer results are rounded and clamped to the dtype range,
/// f32 results are rounded to single precision.
std::vector<double> dequantize_block(std::span<const std::int64_t> q, const BlockScale& scale,
                                     NumericDatatype dtype);

// ---------------------------------------------------------------------------
// Adaptive loops. Gains are in dB of the multiplier: lower gain = coarser.

inline constexpr double kMaxSlewDb = 6.0;
inline constexpr double kRateLoopStepDb = 0.75;     // dB per bit/sample of error
inline constexpr double kQualityLoopGain = 0.5;     // dB per dB of SRR error

struct RateLoopState {
    double target_bps = 0.0;
    double step_db = kRateLoopStepDb;
    double accumulated_error = 0.0;  // running sum of bits/sample error
};

/// Returns the gain for the next block; accumulates the error into loop.
double rate_loop_update(RateLoopState& loop, const AttenuatorState& att, std::uint64_t actual_bits,
                        std::size_t block_size);

/// measured_srr_db may be nan (all-zero block; gain unchanged).
double quality_loop_update(const AttenuatorState& att, double measured_srr_db, double target_srr_db);

/// Uniform-quantization SRR predicted for a block quantized with step 1/scale.
/// The encoder feeds this to the quality loop when a block decodes exactly.
double quality_model_srr_db(double block_rms, double scale);

/// Gain that makes the uniform-quantization model 20*log10(rms * A * sqrt(12)) hit the target.
double quality_initial_gain_db(double block_rms, double target_srr_db);

// ---------------------------------------------------------------------------
// Encoder

struct EncodedBlock {
    BlockHeader header;
    entropy::PackedPayload payload;
    std::size_t sample_count = 0;  // real (unpadded) samples

    std::size_t size_bytes(NumericDatatype dtype) const { return BlockHeader::size_for(dtype) + payload.size(); }
};

/// Per-block diagnostics recorded by the encoder.
struct BlockTrace {
    BlockStats stats;
    transform::StreamCosts costs;
    StreamSelector selector = StreamSelector::D0;
    double gain_db = 0.0;
    double measured_srr_db = 0.0;  // FixedQuality only
    std::uint64_t bits = 0;        // header + payload
};

struct CodecState {
    StreamConfig config;
    AttenuatorState attenuator;
    transform::DerivativeHistory history;
    std::optional<transform::StreamCosts> prev_costs;
    std::size_t blocks_emitted = 0;
    RateLoopState rate;
};

class Encoder {
public:
    /// Throws InvalidConfig.
    explicit Encoder(const StreamConfig& config);

    /// x.size() in [1, block_size]; shorter blocks are zero-padded to a multiple of 4.
    EncodedBlock encode_block(std::span<const double> x);

    const CodecState& state() const { return state_; }
    const BlockTrace& last_trace() const { return trace_; }

private:
    void initialize_gain(std::span<const double> x);

    CodecState state_;
    BlockTrace trace_;
};

// ---------------------------------------------------------------------------
// Container

struct FileHeader {
    std::uint8_t version = kContainerVersion;
    NumericDatatype dtype = kI16;
    CodecMode mode = CodecMode::Lossless;
    std::uint32_t block_size = kDefaultBlockSize;
    std::uint64_t element_count = 0;
    double target = 0.0;

    void serialize(std::vector<std::uint8_t>& out) const;
    /// Throws NotApaxFile, UnsupportedVersion, TruncatedStream, CorruptStream.
    static FileHeader parse(std::span<const std::uint8_t> bytes);
};

struct EncodedStream {
    FileHeader header;
    std::vector<EncodedBlock> blocks;

    std::vector<std::uint8_t> serialize() const;
    std::size_t size_bytes() const;
    /// Splits a container into blocks. Throws on malformed or truncated input.
    static EncodedStream parse(std::span<const std::uint8_t> bytes);
};

/// Throws InvalidConfig (bad config, Lossless + float, empty input) or UnsupportedValue.
EncodedStream encode_stream(const SampleArray& samples, const StreamConfig& config);
EncodedStream encode_stream(std::span<const double> samples, const StreamConfig& config);

SampleArray decode_stream(const EncodedStream& stream);
SampleArray decode_bytes(std::span<const std::uint8_t> bytes);

/// input bytes / container bytes.
double encoding_ratio(const EncodedStream& stream);

}  // namespace apax::codec
