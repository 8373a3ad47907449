#pragma once

// JSON rendering of profiler results. Key order is fixed; +/-inf are written as
// the strings "inf" / "-inf" and NaN as null.

#include <string>

#include "json.hpp"

#include "apax/profiler.hpp"

namespace apax::report {

using Json = nlohmann::ordered_json;

Json number(double v);

Json curve_point_json(const profiler::CurvePoint& p);
Json curve_json(const profiler::RateCorrelationCurve& curve);
Json recommended_json(const profiler::OperatingPoint& op);
Json metrics_json(const profiler::MetricsTable& m);
Json spectrum_stats_json(const spectrum::SpectrumStats& s);
Json windows_json(const profiler::Windows& w);

/// Full report: dataset, dtype, element_count, curve, warnings, recommended, windows.
Json profile_report(const profiler::ProfileSession& session);

/// Compact, byte-stable serialization.
std::string dump(const Json& j, int indent = -1);

/// Plain-text Window-2 table, one metric per line.
std::string metrics_table_text(const profiler::MetricsTable& m);

}  // namespace apax::report
