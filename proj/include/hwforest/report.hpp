#pragma once

#include <map>
#include <string>

#include "hwforest/cascade.hpp"

namespace hwforest {

/// Renders the run report as a JSON document with a fixed key order:
/// accuracy, levels[] {wt, ta, entering, retired, oof_accuracy},
/// grains[] {window, total_locations, retained}, wall_time_seconds,
/// then validation_accuracy, test_exit_counts, and the resolved config.
/// Identical inputs yield identical bytes except for wall_time_seconds.
std::string render_report(const EvalReport& report,
                          const std::map<std::string, std::string>& resolved_config);

/// Writes through a temporary file and renames into place.
void write_report(const EvalReport& report,
                  const std::map<std::string, std::string>& resolved_config,
                  const std::string& path);

/// Atomic text write (temporary file + rename); a failed run never leaves
/// a partial file behind.
void write_text(const std::string& path, const std::string& payload);

} // namespace hwforest
