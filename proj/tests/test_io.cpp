#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "apax/errors.hpp"
#include "apax/io.hpp"
#include "apax/stats.hpp"

using namespace apax;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("apax_io_" + name); }

void write_bytes(const fs::path& p, std::size_t n) {
    std::ofstream f(p, std::ios::binary);
    for (std::size_t i = 0; i < n; ++i) f.put(static_cast<char>(i));
}

}  // namespace

TEST(Raw, ElementCountFromSize) {
    const auto p = temp_file("8.raw");
    write_bytes(p, 8);
    EXPECT_EQ(io::read_raw({p, kI16, io::ByteOrder::Little, std::nullopt}).values.size(), 4u);
    write_bytes(p, 9);
    EXPECT_THROW(io::read_raw({p, kI16, io::ByteOrder::Little, std::nullopt}), SizeMismatch);
    EXPECT_THROW(io::read_raw({p, kI16, io::ByteOrder::Little, 5}), SizeMismatch);
    EXPECT_EQ(io::read_raw({p, kI16, io::ByteOrder::Little, 2}).values.size(), 2u);
    fs::remove(p);
    EXPECT_THROW(io::read_raw({p, kI16, io::ByteOrder::Little, std::nullopt}), UnreadableFile);
}

TEST(Raw, ByteOrder) {
    const auto p = temp_file("bo.raw");
    write_bytes(p, 4);  // 00 01 02 03
    EXPECT_EQ(io::read_raw({p, kI16, io::ByteOrder::Little, std::nullopt}).values, (std::vector<double>{256, 770}));
    EXPECT_EQ(io::read_raw({p, kI16, io::ByteOrder::Big, std::nullopt}).values, (std::vector<double>{1, 515}));
    fs::remove(p);
}

TEST(Raw, RoundTripEveryType) {
    const std::vector<std::pair<NumericDatatype, std::vector<double>>> cases{
        {kI8, {-128, -1, 0, 127}},
        {kI16, {-32768, 12345, 32767}},
        {kI32, {-2147483648.0, 7, 2147483647.0}},
        {kF32, {1.5, -0.0, 3.4028234663852886e38, static_cast<double>(0.1f)}},
        {kF64, {0.1, -1e-300, 1e300}},
    };
    for (const auto& [dt, v] : cases) {
        for (const auto order : {io::ByteOrder::Little, io::ByteOrder::Big}) {
            const auto p = temp_file("rt.raw");
            io::write_raw({dt, v}, p, order);
            const auto back = io::read_raw({p, dt, order, std::nullopt});
            ASSERT_EQ(back.values.size(), v.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
                EXPECT_EQ(std::signbit(back.values[i]), std::signbit(v[i]));
                EXPECT_EQ(back.values[i], v[i]);
            }
            fs::remove(p);
        }
    }
}

TEST(Raw, NonFiniteReportsIndex) {
    const auto p = temp_file("nan.raw");
    io::write_raw({kF64, {1.0, 2.0, 3.0}}, p);
    {
        std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(16);
        const double nan = std::nan("");
        f.write(reinterpret_cast<const char*>(&nan), 8);
    }
    try {
        io::read_raw({p, kF64, io::ByteOrder::Little, std::nullopt});
        FAIL();
    } catch (const NonFiniteValue& e) {
        EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos);
    }
    fs::remove(p);
}

TEST(Raw, UnrepresentableIntegers) {
    EXPECT_THROW(io::to_bytes({kI8, {128}}), InvalidSpec);
    EXPECT_THROW(io::to_bytes({kI16, {0.5}}), InvalidSpec);
}

TEST(Synth, Constant) {
    io::SynthSpec s;
    s.kind = io::SynthKind::Constant;
    s.length = 1024;
    s.amplitude = 3.25;
    const auto x = io::synth(s);
    ASSERT_EQ(x.size(), 1024u);
    for (auto v : x.values) EXPECT_EQ(v, 3.25);
}

TEST(Synth, Deterministic) {
    io::SynthSpec s;
    s.seed = 42;
    EXPECT_EQ(io::synth(s).values, io::synth(s).values);
    auto t = s;
    t.seed = 43;
    EXPECT_NE(io::synth(s).values, io::synth(t).values);
}

TEST(Synth, BandlimitedPowerBelowBandEdge) {
    io::SynthSpec s;
    s.kind = io::SynthKind::BandlimitedNoise;
    s.dtype = kF64;
    s.oversampling_ratio = 4;
    s.length = 8192;
    s.seed = 5;
    const auto x = io::synth(s);
    // Direct DFT periodogram over four rectangular segments of 2048.
    const std::size_t seg = 2048;
    double below = 0.0, total = 0.0;
    for (std::size_t start = 0; start + seg <= x.size(); start += seg) {
        for (std::size_t k = 0; k <= seg / 2; ++k) {
            std::complex<double> acc = 0.0;
            for (std::size_t n = 0; n < seg; ++n) {
                acc += x.values[start + n] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n % seg) / seg);
            }
            const double p = std::norm(acc);
            total += p;
            if (static_cast<double>(k) / seg <= 0.125) below += p;
        }
    }
    EXPECT_GE(below / total, 0.99);
}

TEST(Synth, SineSnrMatchesSpec) {
    io::SynthSpec s;
    s.kind = io::SynthKind::SinePlusNoise;
    s.dtype = kF64;
    s.snr_db = 60;
    s.length = 1 << 16;
    auto clean_spec = s;
    clean_spec.snr_db = INFINITY;
    const auto noisy = io::synth(s);
    const auto clean = io::synth(clean_spec);
    EXPECT_NEAR(stats::srr_db(clean.values, noisy.values), 60.0, 1.0);
}

TEST(Synth, IntegerOutputIsQuantizedAndClamped) {
    io::SynthSpec s;
    s.kind = io::SynthKind::WhiteNoise;
    s.dtype = kI8;
    s.amplitude = 500;
    const auto x = io::synth(s);
    for (auto v : x.values) {
        ASSERT_EQ(v, std::nearbyint(v));
        ASSERT_GE(v, -128);
        ASSERT_LE(v, 127);
    }
}

TEST(Synth, RejectsBadSpecs) {
    io::SynthSpec s;
    s.oversampling_ratio = 0.5;
    EXPECT_THROW(io::synth(s), InvalidSpec);
    s.oversampling_ratio = 1;
    s.length = 0;
    EXPECT_THROW(io::synth(s), InvalidSpec);
}

TEST(SynthJson, ParsesAndRoundTrips) {
    const auto j = nlohmann::json::parse(R"({"kind":"SineplusNoise","dtype":"i16","oversampling_ratio":2,
        "snr_db":"inf","amplitude":1000,"length":4096,"seed":9})");
    const auto s = io::synth_spec_from_json(j);
    EXPECT_EQ(s.kind, io::SynthKind::SinePlusNoise);
    EXPECT_EQ(s.dtype, kI16);
    EXPECT_TRUE(std::isinf(s.snr_db));
    const auto back = io::synth_spec_from_json(io::synth_spec_to_json(s));
    EXPECT_EQ(io::synth(back).values, io::synth(s).values);

    EXPECT_THROW(io::synth_spec_from_json(nlohmann::json::parse(R"({"kind":"Square"})")), InvalidSpec);
    EXPECT_THROW(io::synth_spec_from_json(nlohmann::json::parse(R"({"kind":"Ramp","dtype":"u8"})")), InvalidSpec);
    EXPECT_THROW(io::synth_spec_from_json(nlohmann::json::parse(R"({"kind":"Ramp","length":"x"})")), InvalidSpec);
}

TEST(Corpus, V1Definition) {
    const auto corpus = io::load_corpus(APAX_SOURCE_DIR "/docs/corpus-v1.json");
    ASSERT_EQ(corpus.size(), 12u);
    bool has[5] = {};
    for (const auto& s : corpus) {
        EXPECT_NO_THROW(s.validate());
        EXPECT_GE(s.oversampling_ratio, 1.0);
        EXPECT_LE(s.oversampling_ratio, 8.0);
        EXPECT_GE(s.snr_db, 30.0);
        EXPECT_LE(s.snr_db, 90.0);
        has[static_cast<int>(s.dtype.code())] = true;
    }
    EXPECT_TRUE(has[1] && has[2] && has[3] && has[4]);
}
