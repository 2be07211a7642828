#pragma once

#include "metrics.hpp"

#include <map>
#include <string>

namespace pmbm {

/// Combine per-class summaries into one: counts add, MOTA is recomputed
/// from the combined counts, MOTP is the match-count-weighted mean.
MotSummary combine_summaries(const std::map<std::string, MotSummary>& per_class);

/// Lossless JSON record with every summary field. MOTA is written as the
/// string "n/a" when gt_count is zero (degenerate denominator) and restored
/// to its conventional value of 1 on parse.
std::string summary_to_json(const MotSummary& summary);
MotSummary summary_from_json(const std::string& text);

/// Fixed-width human-readable table, one row per class plus an "overall"
/// row ("n/a" for MOTA without ground truth objects).
std::string render_report_table(const std::map<std::string, MotSummary>& per_class,
                                const MotSummary& overall);

/// Write the table at `path` and the JSON record at `path + ".json"`, both
/// atomically. The single-summary form reports one "overall" row; the
/// per-class form nests every class plus the combined summary.
void emit_report(const MotSummary& summary, const std::string& path);
void emit_report(const std::map<std::string, MotSummary>& per_class, const MotSummary& overall,
                 const std::string& path);

/// Parse the nested report JSON back into (per_class, overall).
std::pair<std::map<std::string, MotSummary>, MotSummary> report_from_json(
    const std::string& text);

}  // namespace pmbm
