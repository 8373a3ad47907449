// Writes the frozen conformance fixtures: for each case a raw input, its .apx
// container and the decoded raw output, plus manifest.json.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"

#include "apax/codec.hpp"
#include "apax/io.hpp"

using namespace apax;

namespace {

struct Case {
    std::string name;
    io::SynthSpec synth;
    StreamConfig config;
};

Case make(std::string name, io::SynthKind kind, NumericDatatype dt, double amplitude, std::size_t n, CodecMode mode,
          double target, std::size_t block_size, std::uint64_t seed) {
    Case c;
    c.name = std::move(name);
    c.synth.kind = kind;
    c.synth.dtype = dt;
    c.synth.amplitude = amplitude;
    c.synth.length = n;
    c.synth.seed = seed;
    c.synth.oversampling_ratio = 3;
    c.synth.snr_db = 60;
    c.synth.width = 64;
    c.config.dtype = dt;
    c.config.mode = mode;
    c.config.target = target;
    c.config.block_size = block_size;
    return c;
}

void write(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_goldens <output-dir>\n";
        return 1;
    }
    const std::filesystem::path dir = argv[1];
    std::filesystem::create_directories(dir);

    using K = io::SynthKind;
    using M = CodecMode;
    std::vector<Case> cases{
        make("i8_lossless_white", K::WhiteNoise, kI8, 127, 1000, M::Lossless, 0, 256, 1),
        make("i16_lossless_bandlimited", K::BandlimitedNoise, kI16, 9000, 3001, M::Lossless, 0, 512, 2),
        make("i32_lossless_ramp", K::Ramp, kI32, 1e6, 2000, M::Lossless, 0, 128, 3),
        make("i16_quality_40", K::SinePlusNoise, kI16, 20000, 2048, M::FixedQuality, 40, 256, 4),
        make("f32_quality_60", K::BandlimitedNoise, kF32, 1.0, 3000, M::FixedQuality, 60, 256, 5),
        make("f64_rate_8", K::BandlimitedNoise, kF64, 100.0, 2500, M::FixedRate, 8, 256, 6),
        make("f32_rate_6_image", K::ImageLike2D, kF32, 50.0, 4096, M::FixedRate, 6, 512, 7),
    };
    cases[2].config.restart_interval = 4;

    nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
    for (const auto& c : cases) {
        const auto x = io::synth(c.synth);
        const auto stream = codec::encode_stream(x, c.config);
        const auto y = codec::decode_stream(stream);
        write(dir / (c.name + ".raw"), io::to_bytes(x));
        write(dir / (c.name + ".apx"), stream.serialize());
        write(dir / (c.name + ".dec"), io::to_bytes(y));
        manifest.push_back({{"name", c.name},
                            {"dtype", std::string(c.config.dtype.name())},
                            {"mode", std::string(mode_name(c.config.mode))},
                            {"target", c.config.target},
                            {"block_size", c.config.block_size},
                            {"restart_interval", c.config.restart_interval}});
    }
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
    std::cout << "wrote " << cases.size() << " cases to " << dir << "\n";
    return 0;
}
