#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "apax/codec.hpp"
#include "apax/io.hpp"

using namespace apax;

namespace {

const std::filesystem::path kDir = APAX_SOURCE_DIR "/tests/golden";

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    EXPECT_TRUE(f) << p;
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

nlohmann::json manifest() {
    std::ifstream f(kDir / "manifest.json");
    return nlohmann::json::parse(f);
}

}  // namespace

TEST(Golden, ManifestPresent) { EXPECT_GE(manifest().size(), 7u); }

TEST(Golden, DecodeMatchesFrozenOutput) {
    for (const auto& c : manifest()) {
        const std::string name = c["name"];
        const auto decoded = codec::decode_bytes(slurp(kDir / (name + ".apx")));
        EXPECT_EQ(decoded.dtype.name(), c["dtype"].get<std::string>());
        EXPECT_EQ(io::to_bytes(decoded), slurp(kDir / (name + ".dec"))) << name;
    }
}

TEST(Golden, EncodeReproducesFrozenContainer) {
    for (const auto& c : manifest()) {
        const std::string name = c["name"];
        const auto dtype = NumericDatatype::from_name(c["dtype"].get<std::string>());
        const auto x = io::from_bytes(slurp(kDir / (name + ".raw")), dtype);
        StreamConfig cfg;
        cfg.dtype = dtype;
        cfg.mode = mode_from_name(c["mode"].get<std::string>());
        cfg.target = c["target"];
        cfg.block_size = c["block_size"];
        cfg.restart_interval = c["restart_interval"];
        EXPECT_EQ(codec::encode_stream(x, cfg).serialize(), slurp(kDir / (name + ".apx"))) << name;
    }
}

TEST(Golden, LosslessCasesReturnTheInput) {
    for (const auto& c : manifest()) {
        if (c["mode"] != "lossless") continue;
        const std::string name = c["name"];
        EXPECT_EQ(slurp(kDir / (name + ".raw")), slurp(kDir / (name + ".dec"))) << name;
    }
}
