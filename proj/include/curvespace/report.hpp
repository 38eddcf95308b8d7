#pragma once
// Serialization of harness and ladder results: a stable JSON document, a
// flat CSV of recorded series, and a log-scale SVG chart.
//
// JSON document layout (top level has exactly these five keys):
//   version       schema version, currently "1.0.0"
//   command       the invocation that produced the document
//   config        echo of every input knob, seed included
//   checks        [{name, verdict, detail, criteria:
//                   [{metric, op, threshold, value, pass}]}]
//   measurements  [{series, entries:[{level, value, err, cumulative}]}
//                  plus verdict/limit_or_slope/tail_ratio/cumulative when the
//                  series came from a ladder]
// Series without entries are dropped, so a run that recorded no numeric
// evidence emits "measurements": [].  Documents carry no timestamps or
// environment data: re-running with the same inputs is byte-identical.
//
// CSV columns are fixed: series,level,value,err,cumulative (one row per
// entry, doubles printed with round-trip precision).  The SVG draws one
// polyline per non-empty series, one vertex per entry, with the value axis
// on a log10 scale (values are clamped away from zero at 1e-18).

#include <string>
#include <vector>

#include "json.hpp"

#include "curvespace/harness.hpp"
#include "curvespace/quadrature.hpp"

namespace curvespace {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportVersion = "1.0.0";

// One named series destined for the measurements array, the CSV, and the
// SVG.  `has_summary` marks blocks built from a full LadderReport, which
// carry the ladder verdict alongside the raw entries.
struct SeriesBlock {
  std::string name;
  std::vector<LadderEntry> entries;
  bool has_summary = false;
  std::string verdict;
  double limit_or_slope = 0.0;
  double tail_ratio = 0.0;
  double cumulative = 0.0;
};

// Wraps a ladder as a named series block (summary fields included).
SeriesBlock series_block(const std::string& name, const LadderReport& ladder);

// Per-check evidence series of a suite run, in check order.
std::vector<SeriesBlock> measurement_blocks(const SuiteReport& report);

// Core document builder.
Json report_json(const std::string& command, Json config,
                 const std::vector<CheckRecord>& checks,
                 const std::vector<SeriesBlock>& measurements);

// Document for a harness run: config echoes the map, suite knobs and
// thresholds; measurements are the per-check evidence series.
Json report_json(const SuiteReport& report, const std::string& command);

// Document for a bare ladder: no checks, one measurement series.
Json report_json(const LadderReport& ladder, const std::string& series_name,
                 const std::string& command, Json config);

// True when every non-forced check verdict in the document can be recomputed
// from its own criteria: each criterion's `pass` equals `value op threshold`
// and a "pass"/"fail" verdict equals the conjunction.  Forced verdicts
// (inconclusive, not-checked, error) are skipped.
bool verdicts_reproducible(const Json& document);

// CSV with header series,level,value,err,cumulative.
std::string report_csv(const std::vector<SeriesBlock>& blocks);

// Standalone SVG chart: one polyline per non-empty series, log10 value axis.
std::string report_svg(const std::vector<SeriesBlock>& blocks, int width = 720,
                       int height = 440);

// Writes content to path, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace curvespace
