#include "hwforest/report.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace hwforest {

std::string render_report(const EvalReport& report,
                          const std::map<std::string, std::string>& resolved_config) {
    nlohmann::ordered_json doc;
    doc["accuracy"] = report.accuracy;
    doc["levels"] = nlohmann::ordered_json::array();
    for (const LevelReport& level : report.levels) {
        nlohmann::ordered_json row;
        row["wt"] = level.wt;
        row["ta"] = level.ta;
        row["entering"] = level.entering;
        row["retired"] = level.retired;
        row["oof_accuracy"] = level.oof_accuracy;
        doc["levels"].push_back(std::move(row));
    }
    doc["grains"] = nlohmann::ordered_json::array();
    for (const GrainReport& grain : report.grains) {
        nlohmann::ordered_json row;
        row["window"] = grain.window;
        row["total_locations"] = grain.total_locations;
        row["retained"] = grain.retained;
        doc["grains"].push_back(std::move(row));
    }
    doc["wall_time_seconds"] = report.wall_time_seconds;
    doc["validation_accuracy"] = report.validation_accuracy;
    doc["test_exit_counts"] = report.test_exit_counts;
    doc["config"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : resolved_config) doc["config"][key] = value;
    return doc.dump(2) + "\n";
}

void write_report(const EvalReport& report,
                  const std::map<std::string, std::string>& resolved_config,
                  const std::string& path) {
    write_text(path, render_report(report, resolved_config));
}

void write_text(const std::string& path, const std::string& payload) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(Errc::Io, "cannot write " + tmp);
        out << payload;
        if (!out) fail(Errc::Io, "short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        fail(Errc::Io, "cannot move " + tmp + " into place");
    }
}

} // namespace hwforest
