#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "apax/types.hpp"

namespace apax::io {

enum class ByteOrder { Little, Big };

/// A headerless typed array on disk.
struct RawDatasetSpec {
    std::filesystem::path path;
    NumericDatatype dtype = kI16;
    ByteOrder byte_order = ByteOrder::Little;
    std::optional<std::uint64_t> element_count;  // default: file size / width
};

/// Throws UnreadableFile, SizeMismatch, NonFiniteValue (floats; message carries the index).
SampleArray read_raw(const RawDatasetSpec& spec);

/// Integer values must be integral and in range (InvalidSpec otherwise). Throws UnreadableFile on IO failure.
void write_raw(const SampleArray& samples, const std::filesystem::path& path,
               ByteOrder byte_order = ByteOrder::Little);

/// Raw byte image of the samples, as write_raw would store it.
std::vector<std::uint8_t> to_bytes(const SampleArray& samples, ByteOrder byte_order = ByteOrder::Little);
SampleArray from_bytes(const std::vector<std::uint8_t>& bytes, NumericDatatype dtype,
                       ByteOrder byte_order = ByteOrder::Little);

// ---------------------------------------------------------------------------

enum class SynthKind { BandlimitedNoise, SinePlusNoise, Ramp, Constant, WhiteNoise, ImageLike2D };

struct SynthSpec {
    std::string name;  // optional label
    SynthKind kind = SynthKind::BandlimitedNoise;
    NumericDatatype dtype = kF32;
    double oversampling_ratio = 1.0;
    // Signal-to-noise ratio of the additive white noise; infinity = no noise.
    double snr_db = std::numeric_limits<double>::infinity();
    double amplitude = 1.0;  // peak |signal| before noise and offset
    double offset = 0.0;     // added after scaling
    std::size_t length = 65536;
    std::uint64_t seed = 1;
    std::size_t width = 512;            // ImageLike2D row length
    std::optional<double> frequency;   // SinePlusNoise cycles/sample; default 0.2 / oversampling_ratio

    /// Throws InvalidSpec.
    void validate() const;
};

/// Deterministic for a given spec. Throws InvalidSpec.
SampleArray synth(const SynthSpec& spec);

/// Length of the low-pass FIR used for band limiting.
inline constexpr std::size_t kSynthFirTaps = 127;

std::string_view synth_kind_name(SynthKind kind);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);
RawDatasetSpec raw_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Reads a JSON array of SynthSpecs (the corpus definition file).
std::vector<SynthSpec> load_corpus(const std::filesystem::path& path);

}  // namespace apax::io
