#include "apax/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include "apax/errors.hpp"
#include "apax/stats.hpp"

namespace apax::io {
namespace {

template <class T>
T load(const std::uint8_t* p, ByteOrder order) {
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        const std::size_t shift = order == ByteOrder::Little ? i : sizeof(T) - 1 - i;
        u |= static_cast<U>(U{p[i]} << (8 * shift));
    }
    return std::bit_cast<T>(u);
}

template <class T>
void store(T value, std::uint8_t* p, ByteOrder order) {
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    const U u = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        const std::size_t shift = order == ByteOrder::Little ? i : sizeof(T) - 1 - i;
        p[i] = static_cast<std::uint8_t>(u >> (8 * shift));
    }
}

double element_at(const std::uint8_t* p, NumericDatatype dtype, ByteOrder order) {
    switch (dtype.code()) {
        case DTypeCode::I8: return load<std::int8_t>(p, order);
        case DTypeCode::I16: return load<std::int16_t>(p, order);
        case DTypeCode::I32: return load<std::int32_t>(p, order);
        case DTypeCode::F32: return load<float>(p, order);
        case DTypeCode::F64: return load<double>(p, order);
    }
    return 0.0;
}

// Box-Muller over mt19937_64 raw output; std::normal_distribution is not
// reproducible across standard libraries.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>((gen_() >> 11) + 1) * 0x1p-53; }  // (0, 1]

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double t = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Blackman-windowed sinc, unit DC gain. The design cutoff sits half a
// transition band below the requested band edge so the edge lands in the stopband.
std::vector<double> lowpass_fir(double band_edge) {
    constexpr double kTransition = 5.5 / static_cast<double>(kSynthFirTaps);
    const double fc = std::max(band_edge - 0.5 * kTransition, 0.5 * band_edge);
    std::vector<double> h(kSynthFirTaps);
    const double mid = static_cast<double>(kSynthFirTaps - 1) / 2.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < kSynthFirTaps; ++i) {
        const double t = static_cast<double>(i) - mid;
        const double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(kSynthFirTaps - 1);
        const double w = 0.42 - 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a);
        h[i] = sinc * w;
        sum += h[i];
    }
    for (auto& v : h) v /= sum;
    return h;
}

std::vector<double> bandlimited(std::size_t n, double oversampling, Gaussian& g) {
    if (oversampling <= 1.0) {
        std::vector<double> w(n);
        for (auto& v : w) v = g();
        return w;
    }
    const auto h = lowpass_fir(0.5 / oversampling);
    std::vector<double> w(n + h.size() - 1);
    for (auto& v : w) v = g();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k) acc += h[k] * w[i + k];
        out[i] = acc;
    }
    return out;
}

void scale_to_peak(std::vector<double>& s, double amplitude) {
    double peak = 0.0;
    for (const double v : s) peak = std::max(peak, std::fabs(v));
    if (peak == 0.0) return;
    const double k = amplitude / peak;
    for (auto& v : s) v *= k;
}

std::vector<double> image_field(const SynthSpec& spec, Gaussian& g) {
    const std::size_t w = spec.width;
    const double fmax = 0.5 / spec.oversampling_ratio;
    struct Wave { double fx, fy, phase, amp; };
    struct Blob { double cx, cy, radius, amp; };
    const std::size_t rows = (spec.length + w - 1) / w;
    std::vector<Wave> waves(8);
    for (auto& wv : waves) {
        wv.fx = fmax * g.uniform() * 0.5;
        wv.fy = fmax * g.uniform() * 0.5;
        wv.phase = 2.0 * std::numbers::pi * g.uniform();
        wv.amp = 0.2 + g.uniform();
    }
    std::vector<Blob> blobs(5);
    for (auto& b : blobs) {
        b.cx = g.uniform() * static_cast<double>(w);
        b.cy = g.uniform() * static_cast<double>(rows);
        b.radius = (0.05 + 0.15 * g.uniform()) * static_cast<double>(std::max(w, rows)) * (2.0 / spec.oversampling_ratio);
        b.amp = 2.0 * g.uniform() - 0.5;
    }
    std::vector<double> s(spec.length);
    for (std::size_t i = 0; i < spec.length; ++i) {
        const double x = static_cast<double>(i % w);
        const double y = static_cast<double>(i / w);
        double v = 0.0;
        for (const auto& wv : waves) v += wv.amp * std::cos(2.0 * std::numbers::pi * (wv.fx * x + wv.fy * y) + wv.phase);
        for (const auto& b : blobs) {
            const double r2 = ((x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy)) / (b.radius * b.radius);
            v += 3.0 * b.amp * std::exp(-r2);
        }
        s[i] = v;
    }
    return s;
}

NumericDatatype parse_dtype(const nlohmann::json& j) {
    try {
        return NumericDatatype::from_name(j.get<std::string>());
    } catch (const InvalidConfig& e) {
        throw InvalidSpec(e.what());
    }
}

double json_db(const nlohmann::json& j) {
    if (j.is_null()) return std::numeric_limits<double>::infinity();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        throw InvalidSpec("snr_db must be a number, null, or \"inf\"");
    }
    return j.get<double>();
}

}  // namespace

// ---------------------------------------------------------------------------

SampleArray from_bytes(const std::vector<std::uint8_t>& bytes, NumericDatatype dtype, ByteOrder byte_order) {
    const std::size_t w = dtype.width_bytes();
    if (bytes.size() % w != 0) throw SizeMismatch("byte count is not a multiple of the element width");
    SampleArray out;
    out.dtype = dtype;
    out.values.resize(bytes.size() / w);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double v = element_at(bytes.data() + i * w, dtype, byte_order);
        if (!std::isfinite(v)) throw NonFiniteValue("non-finite value at index " + std::to_string(i));
        out.values[i] = v;
    }
    return out;
}

SampleArray read_raw(const RawDatasetSpec& spec) {
    std::error_code ec;
    const auto file_size = std::filesystem::file_size(spec.path, ec);
    if (ec) throw UnreadableFile("cannot stat " + spec.path.string() + ": " + ec.message());
    const std::size_t w = spec.dtype.width_bytes();
    std::uint64_t count = 0;
    if (spec.element_count) {
        count = *spec.element_count;
        if (count > file_size / w) {
            throw SizeMismatch(spec.path.string() + ": " + std::to_string(file_size) + " bytes cannot hold " +
                               std::to_string(count) + " elements");
        }
    } else {
        if (file_size % w != 0) {
            throw SizeMismatch(spec.path.string() + ": size " + std::to_string(file_size) +
                               " is not a multiple of " + std::to_string(w));
        }
        count = file_size / w;
    }
    std::ifstream in(spec.path, std::ios::binary);
    if (!in) throw UnreadableFile("cannot open " + spec.path.string());
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(count * w));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) throw UnreadableFile("short read on " + spec.path.string());
    return from_bytes(bytes, spec.dtype, spec.byte_order);
}

std::vector<std::uint8_t> to_bytes(const SampleArray& samples, ByteOrder byte_order) {
    const NumericDatatype dt = samples.dtype;
    const std::size_t w = dt.width_bytes();
    std::vector<std::uint8_t> out(samples.size() * w);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double v = samples.values[i];
        std::uint8_t* p = out.data() + i * w;
        if (dt.is_integer() && (v != std::floor(v) || v < dt.int_min() || v > dt.int_max())) {
            throw InvalidSpec("value " + std::to_string(v) + " not representable as " + std::string(dt.name()));
        }
        switch (dt.code()) {
            case DTypeCode::I8: store(static_cast<std::int8_t>(v), p, byte_order); break;
            case DTypeCode::I16: store(static_cast<std::int16_t>(v), p, byte_order); break;
            case DTypeCode::I32: store(static_cast<std::int32_t>(v), p, byte_order); break;
            case DTypeCode::F32: store(static_cast<float>(v), p, byte_order); break;
            case DTypeCode::F64: store(v, p, byte_order); break;
        }
    }
    return out;
}

void write_raw(const SampleArray& samples, const std::filesystem::path& path, ByteOrder byte_order) {
    const auto bytes = to_bytes(samples, byte_order);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UnreadableFile("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw UnreadableFile("write failed on " + path.string());
}

// ---------------------------------------------------------------------------

std::string_view synth_kind_name(SynthKind kind) {
    switch (kind) {
        case SynthKind::BandlimitedNoise: return "BandlimitedNoise";
        case SynthKind::SinePlusNoise: return "SinePlusNoise";
        case SynthKind::Ramp: return "Ramp";
        case SynthKind::Constant: return "Constant";
        case SynthKind::WhiteNoise: return "WhiteNoise";
        case SynthKind::ImageLike2D: return "ImageLike2D";
    }
    return "?";
}

void SynthSpec::validate() const {
    if (!(oversampling_ratio >= 1.0) || !std::isfinite(oversampling_ratio)) {
        throw InvalidSpec("oversampling_ratio must be >= 1");
    }
    if (length == 0) throw InvalidSpec("length must be positive");
    if (!std::isfinite(amplitude) || amplitude < 0.0) throw InvalidSpec("amplitude must be finite and >= 0");
    if (!std::isfinite(offset)) throw InvalidSpec("offset must be finite");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
        throw InvalidSpec("snr_db must be a number or +inf");
    }
    if (width == 0) throw InvalidSpec("width must be positive");
    if (frequency && !(*frequency > 0.0 && *frequency <= 0.5)) throw InvalidSpec("frequency must be in (0, 0.5]");
}

SampleArray synth(const SynthSpec& spec) {
    spec.validate();
    Gaussian g(spec.seed);
    const std::size_t n = spec.length;
    std::vector<double> s;
    switch (spec.kind) {
        case SynthKind::BandlimitedNoise:
            s = bandlimited(n, spec.oversampling_ratio, g);
            scale_to_peak(s, spec.amplitude);
            break;
        case SynthKind::SinePlusNoise: {
            const double f = spec.frequency.value_or(0.2 / spec.oversampling_ratio);
            const double phase = 2.0 * std::numbers::pi * g.uniform();
            s.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = spec.amplitude * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) + phase);
            }
            break;
        }
        case SynthKind::Ramp:
            s.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
                s[i] = spec.amplitude * (2.0 * t - 1.0);
            }
            break;
        case SynthKind::Constant:
            s.assign(n, spec.amplitude);
            break;
        case SynthKind::WhiteNoise:
            s.resize(n);
            for (auto& v : s) v = spec.amplitude * (2.0 * g.uniform() - 1.0);
            break;
        case SynthKind::ImageLike2D:
            s = image_field(spec, g);
            scale_to_peak(s, spec.amplitude);
            break;
    }

    if (std::isfinite(spec.snr_db)) {
        const double noise_rms = stats::rms(s) * std::pow(10.0, -spec.snr_db / 20.0);
        for (auto& v : s) v += noise_rms * g();
    }

    SampleArray out;
    out.dtype = spec.dtype;
    out.values = std::move(s);
    for (auto& v : out.values) {
        v += spec.offset;
        if (spec.dtype.is_integer()) {
            v = std::clamp(std::nearbyint(v), spec.dtype.int_min(), spec.dtype.int_max());
        } else if (spec.dtype == kF32) {
            v = static_cast<double>(static_cast<float>(v));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidSpec("synth spec must be a JSON object");
    SynthSpec s;
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "BandlimitedNoise") s.kind = SynthKind::BandlimitedNoise;
        else if (kind == "SinePlusNoise" || kind == "SineplusNoise") s.kind = SynthKind::SinePlusNoise;
        else if (kind == "Ramp") s.kind = SynthKind::Ramp;
        else if (kind == "Constant") s.kind = SynthKind::Constant;
        else if (kind == "WhiteNoise") s.kind = SynthKind::WhiteNoise;
        else if (kind == "ImageLike2D") s.kind = SynthKind::ImageLike2D;
        else throw InvalidSpec("unknown synth kind '" + kind + "'");

        s.name = j.value("name", std::string(synth_kind_name(s.kind)));
        if (j.contains("dtype")) s.dtype = parse_dtype(j.at("dtype"));
        s.oversampling_ratio = j.value("oversampling_ratio", 1.0);
        if (j.contains("snr_db")) s.snr_db = json_db(j.at("snr_db"));
        s.amplitude = j.value("amplitude", 1.0);
        s.offset = j.value("offset", 0.0);
        s.length = j.value("length", std::size_t{65536});
        s.seed = j.value("seed", std::uint64_t{1});
        s.width = j.value("width", std::size_t{512});
        if (j.contains("frequency") && !j.at("frequency").is_null()) s.frequency = j.at("frequency").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("malformed synth spec: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json synth_spec_to_json(const SynthSpec& s) {
    nlohmann::json j;
    j["name"] = s.name;
    j["kind"] = synth_kind_name(s.kind);
    j["dtype"] = s.dtype.name();
    j["oversampling_ratio"] = s.oversampling_ratio;
    j["snr_db"] = std::isfinite(s.snr_db) ? nlohmann::json(s.snr_db) : nlohmann::json(nullptr);
    j["amplitude"] = s.amplitude;
    j["offset"] = s.offset;
    j["length"] = s.length;
    j["seed"] = s.seed;
    j["width"] = s.width;
    if (s.frequency) j["frequency"] = *s.frequency;
    return j;
}

RawDatasetSpec raw_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw InvalidSpec("raw dataset spec must be a JSON object");
    RawDatasetSpec r;
    try {
        std::filesystem::path p = j.at("path").get<std::string>();
        r.path = (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
        r.dtype = parse_dtype(j.at("dtype"));
        const auto order = j.value("byte_order", std::string("little"));
        if (order == "little") r.byte_order = ByteOrder::Little;
        else if (order == "big") r.byte_order = ByteOrder::Big;
        else throw InvalidSpec("byte_order must be 'little' or 'big'");
        if (j.contains("element_count") && !j.at("element_count").is_null()) {
            r.element_count = j.at("element_count").get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("malformed raw spec: ") + e.what());
    }
    return r;
}

std::vector<SynthSpec> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UnreadableFile("cannot open corpus file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("corpus file is not valid JSON: ") + e.what());
    }
    const auto& list = j.is_object() ? j.at("datasets") : j;
    std::vector<SynthSpec> out;
    for (const auto& item : list) out.push_back(synth_spec_from_json(item));
    return out;
}

}  // namespace apax::io
