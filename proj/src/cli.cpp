#include "apax/cli.hpp"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "apax/codec.hpp"
#include "apax/errors.hpp"
#include "apax/io.hpp"
#include "apax/profiler.hpp"
#include "apax/report.hpp"
#include "apax/service.hpp"
#include "apax/stats.hpp"

namespace apax::cli {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UnreadableFile("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw UnreadableFile("cannot write " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path);
    f << text;
    if (!f) throw UnreadableFile("cannot write " + path.string());
}

// "a:b:step" or "a,b,c".
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (text.empty()) return profiler::default_grid();
    try {
        if (text.find(':') != std::string::npos) {
            double lo = 0.0, hi = 0.0, step = 0.0;
            char c1 = 0, c2 = 0;
            std::istringstream in(text);
            if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !in.eof() || step <= 0.0 || hi < lo) {
                throw InvalidConfig("");
            }
            for (int i = 0; lo + i * step <= hi + 1e-9 * step; ++i) out.push_back(lo + i * step);
        } else {
            std::istringstream in(text);
            std::string tok;
            while (std::getline(in, tok, ',')) {
                std::size_t used = 0;
                out.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw InvalidConfig("");
            }
        }
    } catch (const std::exception&) {
        throw InvalidConfig("invalid --grid '" + text + "' (use lo:hi:step or a,b,c)");
    }
    if (out.empty() || out.size() > 1000) throw InvalidConfig("invalid --grid '" + text + "'");
    return out;
}

struct Options {
    std::string in, out, dtype, mode = "lossless", json_out, grid, spec, name, host = "127.0.0.1";
    std::string corpus_dir, ui_dir;
    std::optional<double> target;
    std::size_t block_size = kDefaultBlockSize;
    std::size_t workers = 0;
    std::size_t max_sessions = 16;
    int port = service::kDefaultPort;
};

int cmd_encode(const Options& o, std::ostream& out) {
    StreamConfig cfg;
    cfg.dtype = NumericDatatype::from_name(o.dtype);
    cfg.mode = mode_from_name(o.mode);
    cfg.block_size = o.block_size;
    if (cfg.mode != CodecMode::Lossless) {
        if (!o.target) throw InvalidConfig("--target is required for mode '" + o.mode + "'");
        cfg.target = *o.target;
    }
    cfg.validate();

    const auto x = io::read_raw({o.in, cfg.dtype, io::ByteOrder::Little, std::nullopt});
    const auto stream = codec::encode_stream(x, cfg);
    write_file(o.out, stream.serialize());

    char line[128];
    std::snprintf(line, sizeof line, "ratio %.4f\n", codec::encoding_ratio(stream));
    out << line;
    if (cfg.mode != CodecMode::Lossless) {
        const auto y = codec::decode_stream(stream);
        std::snprintf(line, sizeof line, "bits_per_sample %.4f\nsrr_db %.4f\n",
                      8.0 * static_cast<double>(stream.size_bytes()) / static_cast<double>(x.size()),
                      stats::srr_db(x.values, y.values));
        out << line;
    }
    return kOk;
}

int cmd_decode(const Options& o, std::ostream& out) {
    const auto y = codec::decode_bytes(read_file(o.in));
    io::write_raw(y, o.out);
    out << "decoded " << y.size() << " " << y.dtype.name() << " samples\n";
    return kOk;
}

profiler::ProfileOptions profile_options(const Options& o) {
    profiler::ProfileOptions p;
    p.block_size = o.block_size;
    p.workers = o.workers;
    StreamConfig probe;
    probe.block_size = o.block_size;
    probe.validate();
    return p;
}

int cmd_profile(const Options& o, std::ostream& out) {
    const auto dtype = NumericDatatype::from_name(o.dtype);
    const auto grid = parse_grid(o.grid);
    const auto popts = profile_options(o);

    auto x = io::read_raw({o.in, dtype, io::ByteOrder::Little, std::nullopt});
    profiler::ProfileSession session(std::filesystem::path(o.in).filename().string(), std::move(x), popts);
    session.run(grid);
    const auto report = report::profile_report(session);
    if (!o.json_out.empty()) write_text(o.json_out, report::dump(report, 2) + "\n");

    const auto& rec = session.recommended();
    char line[160];
    std::snprintf(line, sizeof line, "recommended srr_target %.4f dB  ratio %.4f  r %.9f%s\n", rec.point.srr_target,
                  rec.point.ratio, rec.point.r, rec.reachable ? "" : "  (five nines unreachable)");
    out << line;
    for (const auto& w : session.curve().warnings) out << "warning: " << w << "\n";
    out << report::metrics_table_text(session.windows(rec.point.srr_target)->metrics);
    return kOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    const auto dtype = NumericDatatype::from_name(o.dtype);
    const auto grid = parse_grid(o.grid);
    const auto popts = profile_options(o);

    const auto x = io::read_raw({o.in, dtype, io::ByteOrder::Little, std::nullopt});
    const auto curve = profiler::rate_correlation_sweep(x, grid, popts);
    if (!o.json_out.empty()) {
        report::Json j;
        j["curve"] = report::curve_json(curve);
        j["warnings"] = curve.warnings;
        write_text(o.json_out, report::dump(j, 2) + "\n");
    }
    out << "srr_target      ratio                r  achieved_srr_db\n";
    char line[128];
    for (const auto& p : curve.points) {
        std::snprintf(line, sizeof line, "%10.3f %10.4f %16.12f %16.4f\n", p.srr_target, p.ratio, p.r,
                      p.achieved_srr_db);
        out << line;
    }
    for (const auto& w : curve.warnings) out << "warning: " << w << "\n";
    return kOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
    nlohmann::json j;
    {
        std::ifstream f(o.spec);
        if (!f) throw UnreadableFile("cannot open " + o.spec);
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::exception& e) {
            throw InvalidSpec(std::string("invalid spec JSON: ") + e.what());
        }
    }
    io::SynthSpec spec;
    if (j.is_object() && !j.contains("datasets")) {
        spec = io::synth_spec_from_json(j);
    } else {
        if (o.name.empty()) throw InvalidConfig("spec file holds several datasets; select one with --name");
        const auto& list = j.is_object() ? j.at("datasets") : j;
        bool found = false;
        for (const auto& item : list) {
            auto s = io::synth_spec_from_json(item);
            if (s.name == o.name) {
                spec = s;
                found = true;
                break;
            }
        }
        if (!found) throw InvalidConfig("no dataset named '" + o.name + "' in " + o.spec);
    }
    const auto x = io::synth(spec);
    io::write_raw(x, o.out);
    out << "wrote " << x.size() << " " << x.dtype.name() << " samples to " << o.out << "\n";
    return kOk;
}

service::Service* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
    service::ServiceConfig cfg;
    cfg.host = o.host;
    cfg.port = o.port;
    cfg.max_sessions = o.max_sessions;
    cfg.sweep_workers = o.workers;
    cfg.corpus_dir = o.corpus_dir;
    if (!o.ui_dir.empty()) cfg.ui_dir = o.ui_dir;
    cfg.profile.block_size = o.block_size;

    service::Service svc(cfg);
    const int port = svc.bind();
    if (port < 0) {
        err << "error: cannot bind " << o.host << ":" << o.port << "\n";
        return kDataError;
    }
    out << "listening on http://" << o.host << ":" << port << std::endl;
    g_service = &svc;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    svc.listen_after_bind();
    g_service = nullptr;
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Block floating point compression and profiling", "apax"};
    app.require_subcommand(1);
    Options o;

    auto* encode = app.add_subcommand("encode", "Compress a raw array into an .apx container");
    encode->add_option("--dtype", o.dtype, "i8, i16, i32, f32 or f64")->required();
    encode->add_option("--mode", o.mode, "lossless, rate or quality")->capture_default_str();
    encode->add_option("--target", o.target, "bits/sample (rate) or SRR dB (quality)");
    encode->add_option("--block-size", o.block_size)->capture_default_str();
    encode->add_option("in", o.in)->required();
    encode->add_option("out", o.out)->required();

    auto* decode = app.add_subcommand("decode", "Expand an .apx container to a raw array");
    decode->add_option("in", o.in)->required();
    decode->add_option("out", o.out)->required();

    auto* profile = app.add_subcommand("profile", "Sweep, recommend an operating point and report");
    auto* sweep = app.add_subcommand("sweep", "Print the rate-correlation curve");
    for (auto* sc : {profile, sweep}) {
        sc->add_option("--dtype", o.dtype)->required();
        sc->add_option("in", o.in)->required();
        sc->add_option("--json", o.json_out, "write the JSON report here");
        sc->add_option("--grid", o.grid, "SRR targets: lo:hi:step or a,b,c (default 20:120:5)");
        sc->add_option("--block-size", o.block_size)->capture_default_str();
        sc->add_option("--workers", o.workers, "0 = all cores")->capture_default_str();
    }

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from a JSON spec");
    synth->add_option("spec", o.spec)->required();
    synth->add_option("out", o.out)->required();
    synth->add_option("--name", o.name, "dataset to pick from a corpus file");

    auto* serve = app.add_subcommand("serve", "Run the profiler HTTP service");
    serve->add_option("--port", o.port)->capture_default_str();
    serve->add_option("--host", o.host)->capture_default_str();
    serve->add_option("--corpus-dir", o.corpus_dir, "base directory for raw dataset paths");
    serve->add_option("--ui-dir", o.ui_dir, "static UI bundle to serve at /");
    serve->add_option("--max-sessions", o.max_sessions)->capture_default_str();
    serve->add_option("--workers", o.workers, "sweep threads, 0 = all cores")->capture_default_str();
    serve->add_option("--block-size", o.block_size)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*encode) return cmd_encode(o, out);
        if (*decode) return cmd_decode(o, out);
        if (*profile) return cmd_profile(o, out);
        if (*sweep) return cmd_sweep(o, out);
        if (*synth) return cmd_synth(o, out);
        if (*serve) return cmd_serve(o, out, err);
    } catch (const InvalidConfig& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace apax::cli
