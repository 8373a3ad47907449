#include "apax/report.hpp"

#include <cmath>
#include <cstdio>

namespace apax::report {

Json number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

Json curve_point_json(const profiler::CurvePoint& p) {
    Json j;
    j["srr_target"] = number(p.srr_target);
    j["ratio"] = number(p.ratio);
    j["r"] = number(p.r);
    j["achieved_srr_db"] = number(p.achieved_srr_db);
    return j;
}

Json curve_json(const profiler::RateCorrelationCurve& curve) {
    Json arr = Json::array();
    for (const auto& p : curve.points) arr.push_back(curve_point_json(p));
    return arr;
}

Json recommended_json(const profiler::OperatingPoint& op) {
    Json j = curve_point_json(op.point);
    j["reachable"] = op.reachable;
    return j;
}

Json metrics_json(const profiler::MetricsTable& m) {
    Json j = Json::object();
    for (const auto& [key, value] : m.entries()) j[std::string(key)] = number(value);
    return j;
}

Json spectrum_stats_json(const spectrum::SpectrumStats& s) {
    Json j;
    j["segment_length"] = s.segment_length;
    j["segments"] = s.segments;
    j["peak_db"] = number(s.peak_db);
    j["peak_bin"] = s.peak_bin;
    j["floor_db"] = number(s.floor_db);
    j["mean_db"] = number(s.mean_db);
    j["dynamic_range_db"] = number(s.dynamic_range_db);
    j["flatness"] = number(spectrum::spectral_flatness(s));
    return j;
}

namespace {

Json bins(const spectrum::SpectrumStats& s) {
    Json arr = Json::array();
    for (const double v : s.bins_db) arr.push_back(number(v));
    return arr;
}

}  // namespace

Json windows_json(const profiler::Windows& w) {
    Json j;
    j["srr_target"] = number(w.srr_target);
    j["point"] = curve_point_json(w.point);
    j["metrics"] = metrics_json(w.metrics);

    Json spectra;
    spectra["x"] = bins(w.spectra.x);
    spectra["d"] = bins(w.spectra.d);
    spectra["stats"]["x"] = spectrum_stats_json(w.spectra.x);
    spectra["stats"]["y"] = spectrum_stats_json(w.spectra.y);
    spectra["stats"]["d"] = spectrum_stats_json(w.spectra.d);
    j["spectra"] = std::move(spectra);

    Json s2r;
    Json cdf = Json::array();
    for (const auto& c : w.s2r.cdf()) cdf.push_back({{"db", number(c.db)}, {"fraction_below", number(c.fraction_below)}});
    s2r["cdf"] = std::move(cdf);
    s2r["two_sigma_margin_db"] = number(w.s2r.two_sigma_margin_db);
    s2r["count"] = w.s2r.count();
    s2r["neg_inf"] = w.s2r.neg_inf;
    s2r["pos_inf"] = w.s2r.pos_inf;
    j["s2r"] = std::move(s2r);
    return j;
}

Json profile_report(const profiler::ProfileSession& session) {
    Json j;
    j["dataset"] = session.dataset();
    j["dtype"] = std::string(session.input().dtype.name());
    j["element_count"] = session.input().values.size();
    j["curve"] = curve_json(session.curve());
    j["warnings"] = session.curve().warnings;
    j["recommended"] = recommended_json(session.recommended());
    j["windows"] = windows_json(*session.windows(session.recommended().point.srr_target));
    return j;
}

std::string dump(const Json& j, int indent) { return j.dump(indent); }

std::string metrics_table_text(const profiler::MetricsTable& m) {
    std::string out;
    char line[96];
    for (const auto& [key, value] : m.entries()) {
        std::snprintf(line, sizeof line, "%-26s %16.9g\n", std::string(key).c_str(), value);
        out += line;
    }
    return out;
}

}  // namespace apax::report
