#include "apax/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "apax/errors.hpp"
#include "apax/stats.hpp"

namespace apax::codec {
namespace {

constexpr double kQuantLimit = 0x1p31;  // every |q| must stay below this
constexpr std::size_t kRateInitIterations = 48;

std::size_t round_up4(std::size_t n) { return (n + 3) / 4 * 4; }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t offset, std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v |= std::uint64_t{b[offset + i]} << (8 * i);
    return v;
}

void quantize_with(std::span<const double> x, double scale, std::vector<std::int64_t>& q) {
    q.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        q[i] = static_cast<std::int64_t>(std::nearbyint(x[i] * scale));
    }
}

bool fits(const std::vector<std::int64_t>& q) {
    constexpr auto lim = static_cast<std::int64_t>(kQuantLimit);
    return std::all_of(q.begin(), q.end(), [](std::int64_t v) { return v > -lim - 1 && v < lim; });
}

}  // namespace

// ---------------------------------------------------------------------------

QuantizedBlock quantize_block(std::span<const double> x, double requested_scale, NumericDatatype dtype) {
    QuantizedBlock out;
    double peak = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) {
            throw UnsupportedValue("non-finite sample " + std::to_string(x[i]) + " at block offset " +
                                   std::to_string(i));
        }
        peak = std::max(peak, std::fabs(x[i]));
    }

    if (dtype.is_integer()) {
        out.scale = represent_scale(std::min(requested_scale, 1.0), false);
        quantize_with(x, out.scale.value(), out.q);
        return out;
    }

    double s = requested_scale;
    if (peak > 0.0 && peak * s > kFloatFullScale) {
        s = kFloatFullScale / peak;
        out.capped = true;
    }
    out.scale = represent_scale(s, true);
    quantize_with(x, out.scale.value(), out.q);
    while (!fits(out.q)) {
        if (out.scale.float_block_exp == -127) {
            throw UnsupportedValue("sample magnitude exceeds the encodable range");
        }
        --out.scale.float_block_exp;
        quantize_with(x, out.scale.value(), out.q);
    }
    return out;
}

std::vector<double> dequantize_block(std::span<const std::int64_t> q, const BlockScale& scale,
                                     NumericDatatype dtype) {
    std::vector<double> y(q.size());
    const double s = scale.value();
    if (dtype.is_integer()) {
        const double lo = dtype.int_min();
        const double hi = dtype.int_max();
        for (std::size_t i = 0; i < q.size(); ++i) {
            y[i] = std::clamp(std::nearbyint(static_cast<double>(q[i]) / s), lo, hi);
        }
    } else if (dtype == kF32) {
        for (std::size_t i = 0; i < q.size(); ++i) {
            y[i] = static_cast<double>(static_cast<float>(static_cast<double>(q[i]) / s));
        }
    } else {
        for (std::size_t i = 0; i < q.size(); ++i) y[i] = static_cast<double>(q[i]) / s;
    }
    return y;
}

// ---------------------------------------------------------------------------

double rate_loop_update(RateLoopState& loop, const AttenuatorState& att, std::uint64_t actual_bits,
                        std::size_t block_size) {
    if (block_size == 0) return att.gain_db;
    const double error = static_cast<double>(actual_bits) / static_cast<double>(block_size) - loop.target_bps;
    loop.accumulated_error += error;
    const double delta = std::clamp(-loop.step_db * error, -kMaxSlewDb, kMaxSlewDb);
    return att.clamp_db(att.gain_db + delta);
}

double quality_loop_update(const AttenuatorState& att, double measured_srr_db, double target_srr_db) {
    if (std::isnan(measured_srr_db)) return att.gain_db;
    const double delta = std::clamp(-kQualityLoopGain * (measured_srr_db - target_srr_db), -kMaxSlewDb, kMaxSlewDb);
    return att.clamp_db(att.gain_db + delta);
}

double quality_initial_gain_db(double block_rms, double target_srr_db) {
    return target_srr_db - 20.0 * std::log10(block_rms * std::sqrt(12.0));
}

double quality_model_srr_db(double block_rms, double scale) {
    return 20.0 * std::log10(block_rms * scale * std::sqrt(12.0));
}

// ---------------------------------------------------------------------------

Encoder::Encoder(const StreamConfig& config) {
    config.validate();
    state_.config = config;
    state_.attenuator = AttenuatorState::for_dtype(config.dtype);
    state_.rate.target_bps = config.target;
}

void Encoder::initialize_gain(std::span<const double> x) {
    const StreamConfig& cfg = state_.config;
    AttenuatorState& att = state_.attenuator;
    if (cfg.mode == CodecMode::FixedQuality) {
        const double r = stats::rms(x);
        if (r > 0.0) att.gain_db = att.clamp_db(quality_initial_gain_db(r, cfg.target));
        return;
    }

    // FixedRate: bisect the gain so the cheapest stream of this block meets the target.
    const double header_bits = 8.0 * static_cast<double>(BlockHeader::size_for(cfg.dtype));
    auto bits_per_sample = [&](double gain_db) {
        const double s = std::pow(10.0, gain_db / 20.0);
        const QuantizedBlock qb = quantize_block(x, s, cfg.dtype);
        const auto costs = transform::estimate_stream_costs(transform::derive_streams(qb.q, {}));
        const auto best = std::min({costs.bits_d0, costs.bits_d1, costs.bits_d2});
        return (static_cast<double>(best) + header_bits) / static_cast<double>(x.size());
    };
    double lo = att.min_db;
    double hi = att.max_db;
    if (bits_per_sample(hi) <= cfg.target) {
        att.gain_db = hi;
        return;
    }
    if (bits_per_sample(lo) > cfg.target) {
        att.gain_db = lo;
        return;
    }
    for (std::size_t i = 0; i < kRateInitIterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        (bits_per_sample(mid) <= cfg.target ? lo : hi) = mid;
    }
    att.gain_db = lo;
}

EncodedBlock Encoder::encode_block(std::span<const double> x) {
    const StreamConfig& cfg = state_.config;
    if (x.empty() || x.size() > cfg.block_size) {
        throw InternalError("encode_block: block length " + std::to_string(x.size()) + " out of range");
    }
    std::vector<double> padded(x.begin(), x.end());
    padded.resize(round_up4(x.size()), 0.0);

    const bool lossy = cfg.mode != CodecMode::Lossless;
    if (state_.blocks_emitted == 0 && lossy) {
        std::span<const double> head(padded.data(), x.size());
        initialize_gain(head);
    }

    const bool restart = state_.blocks_emitted == 0 ||
                         (cfg.restart_interval > 0 && state_.blocks_emitted % cfg.restart_interval == 0);
    if (restart) state_.history = {};

    const double requested = lossy ? state_.attenuator.requested() : 1.0;
    const QuantizedBlock qb = quantize_block(padded, requested, cfg.dtype);

    const BlockStats block_stats = transform::monitor(qb.q);
    const transform::DerivedStreams streams = transform::derive_streams(qb.q, state_.history);
    const StreamSelector selector = transform::select_stream(state_.prev_costs, block_stats);

    EncodedBlock block;
    block.sample_count = x.size();
    block.header.selector = selector;
    block.header.restart = restart;
    block.header.scale_code = qb.scale.code;
    block.header.float_block_exp = cfg.dtype.is_float() ? qb.scale.float_block_exp : 0;

    const auto stream = streams.get(selector);
    const auto exps = entropy::group_exponents(stream);
    entropy::pack_block(stream, exps, block.payload);

    const transform::StreamCosts costs = transform::estimate_stream_costs(streams);
    state_.prev_costs = costs;
    state_.history = transform::advance_history(qb.q, state_.history);

    trace_ = {};
    trace_.stats = block_stats;
    trace_.costs = costs;
    trace_.selector = selector;
    trace_.gain_db = state_.attenuator.gain_db;
    trace_.bits = 8 * static_cast<std::uint64_t>(block.size_bytes(cfg.dtype));

    AttenuatorState& att = state_.attenuator;
    if (cfg.mode == CodecMode::FixedRate) {
        att.gain_db = rate_loop_update(state_.rate, att, trace_.bits, x.size());
    } else if (cfg.mode == CodecMode::FixedQuality) {
        const auto y = dequantize_block(std::span(qb.q).first(x.size()), qb.scale, cfg.dtype);
        trace_.measured_srr_db = stats::srr_db(x, y);
        double loop_srr = trace_.measured_srr_db;
        if (std::isinf(loop_srr)) {
            // No residual to measure: steer by what this gain would give on a non-exact block.
            loop_srr = quality_model_srr_db(stats::rms(x), qb.scale.value());
        }
        att.gain_db = quality_loop_update(att, loop_srr, cfg.target);
    }
    if (lossy && qb.capped) {
        // The block peak limited the scale; keep the loop from winding up beyond it.
        att.gain_db = std::min(att.gain_db, 20.0 * std::log10(qb.scale.value()));
    }

    ++state_.blocks_emitted;
    return block;
}

// ---------------------------------------------------------------------------

void FileHeader::serialize(std::vector<std::uint8_t>& out) const {
    out.insert(out.end(), {'A', 'P', 'A', 'X'});
    out.push_back(version);
    out.push_back(static_cast<std::uint8_t>(dtype.code()));
    out.push_back(static_cast<std::uint8_t>(mode));
    out.push_back(0);
    put_u32(out, block_size);
    put_u64(out, element_count);
    put_u64(out, std::bit_cast<std::uint64_t>(target));
}

FileHeader FileHeader::parse(std::span<const std::uint8_t> bytes) {
    static constexpr std::uint8_t kMagic[4] = {'A', 'P', 'A', 'X'};
    const std::size_t magic_len = std::min<std::size_t>(4, bytes.size());
    if (!std::equal(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(magic_len), kMagic) ||
        bytes.empty()) {
        throw NotApaxFile("missing APAX magic");
    }
    if (bytes.size() < 5) throw TruncatedStream("file header truncated");
    if (bytes[4] != kContainerVersion) {
        throw UnsupportedVersion("container version " + std::to_string(bytes[4]) + " not supported");
    }
    if (bytes.size() < kFileHeaderSize) throw TruncatedStream("file header truncated");

    FileHeader h;
    h.version = bytes[4];
    h.dtype = NumericDatatype::from_code(bytes[5]);
    if (bytes[6] > static_cast<std::uint8_t>(CodecMode::FixedQuality)) {
        throw CorruptStream("invalid mode " + std::to_string(bytes[6]));
    }
    h.mode = static_cast<CodecMode>(bytes[6]);
    if (bytes[7] != 0) throw CorruptStream("nonzero reserved file header byte");
    h.block_size = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
    h.element_count = get_le(bytes, 12, 8);
    h.target = std::bit_cast<double>(get_le(bytes, 20, 8));

    if (h.block_size < kMinBlockSize || h.block_size > kMaxBlockSize || h.block_size % 4 != 0) {
        throw CorruptStream("invalid block size " + std::to_string(h.block_size));
    }
    if (h.element_count == 0) throw CorruptStream("empty stream");
    if (h.mode == CodecMode::Lossless && h.dtype.is_float()) throw CorruptStream("lossless float stream");
    return h;
}

std::size_t EncodedStream::size_bytes() const {
    std::size_t total = kFileHeaderSize;
    for (const auto& b : blocks) total += b.size_bytes(header.dtype);
    return total;
}

std::vector<std::uint8_t> EncodedStream::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(size_bytes());
    header.serialize(out);
    for (const auto& b : blocks) {
        b.header.serialize(header.dtype, out);
        out.insert(out.end(), b.payload.begin(), b.payload.end());
    }
    return out;
}

EncodedStream EncodedStream::parse(std::span<const std::uint8_t> bytes) {
    EncodedStream s;
    s.header = FileHeader::parse(bytes);
    const std::uint64_t count = s.header.element_count;
    const std::uint64_t bs = s.header.block_size;
    const std::uint64_t n_blocks = (count + bs - 1) / bs;
    const std::size_t hsize = BlockHeader::size_for(s.header.dtype);
    // Every block costs at least its header, so a huge count in a short file is truncated.
    if (n_blocks > (bytes.size() - kFileHeaderSize) / hsize + 1) throw TruncatedStream("stream truncated");
    s.blocks.reserve(static_cast<std::size_t>(n_blocks));

    std::size_t pos = kFileHeaderSize;
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
        const std::uint64_t n = std::min(bs, count - b * bs);
        const std::size_t groups = round_up4(static_cast<std::size_t>(n)) / 4;
        EncodedBlock block;
        block.sample_count = static_cast<std::size_t>(n);
        block.header = BlockHeader::parse(s.header.dtype, bytes.subspan(pos));
        pos += hsize;
        const std::size_t psize = entropy::payload_size(bytes.subspan(pos), groups);
        block.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                             bytes.begin() + static_cast<std::ptrdiff_t>(pos + psize));
        pos += psize;
        s.blocks.push_back(std::move(block));
    }
    if (pos != bytes.size()) throw CorruptStream("trailing bytes after last block");
    return s;
}

// ---------------------------------------------------------------------------

EncodedStream encode_stream(std::span<const double> samples, const StreamConfig& config) {
    config.validate();
    if (samples.empty()) throw InvalidConfig("cannot encode an empty stream");
    EncodedStream s;
    s.header.dtype = config.dtype;
    s.header.mode = config.mode;
    s.header.block_size = static_cast<std::uint32_t>(config.block_size);
    s.header.element_count = samples.size();
    s.header.target = config.mode == CodecMode::Lossless ? 0.0 : config.target;

    Encoder enc(config);
    s.blocks.reserve((samples.size() + config.block_size - 1) / config.block_size);
    for (std::size_t off = 0; off < samples.size(); off += config.block_size) {
        const std::size_t n = std::min(config.block_size, samples.size() - off);
        s.blocks.push_back(enc.encode_block(samples.subspan(off, n)));
    }
    return s;
}

EncodedStream encode_stream(const SampleArray& samples, const StreamConfig& config) {
    if (!(samples.dtype == config.dtype)) throw InvalidConfig("sample dtype does not match stream config");
    return encode_stream(std::span<const double>(samples.values), config);
}

SampleArray decode_stream(const EncodedStream& stream) {
    const FileHeader& fh = stream.header;
    const std::uint64_t bs = fh.block_size;
    const std::uint64_t n_blocks = (fh.element_count + bs - 1) / bs;
    if (stream.blocks.size() != n_blocks) throw CorruptStream("block count does not match element count");

    SampleArray out;
    out.dtype = fh.dtype;
    out.values.reserve(static_cast<std::size_t>(fh.element_count));

    constexpr auto lim = static_cast<std::int64_t>(kQuantLimit);
    transform::DerivativeHistory history;
    std::vector<std::int64_t> q;
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
        const EncodedBlock& block = stream.blocks[b];
        const auto n = static_cast<std::size_t>(std::min(bs, fh.element_count - b * bs));
        q.assign(round_up4(n), 0);
        const std::size_t used = entropy::unpack_block_into(block.payload, q.size() / 4, q);
        if (used != block.payload.size()) throw CorruptStream("payload length mismatch");
        if (block.header.restart) history = {};
        transform::reconstruct_in_place(q, block.header.selector, history);
        for (const std::int64_t v : q) {
            if (v < -lim || v >= lim) throw CorruptStream("reconstructed sample out of range");
        }
        BlockScale scale{block.header.scale_code, fh.dtype.is_float() ? block.header.float_block_exp : std::int8_t{0}};
        const auto y = dequantize_block(std::span(q).first(n), scale, fh.dtype);
        out.values.insert(out.values.end(), y.begin(), y.end());
    }
    return out;
}

SampleArray decode_bytes(std::span<const std::uint8_t> bytes) { return decode_stream(EncodedStream::parse(bytes)); }

double encoding_ratio(const EncodedStream& stream) {
    const double input = static_cast<double>(stream.header.element_count * stream.header.dtype.width_bytes());
    return input / static_cast<double>(stream.size_bytes());
}

}  // namespace apax::codec
