#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "synthqa/metrics.hpp"
#include "synthqa/plots.hpp"

namespace synthqa {

// QualityReport JSON document. Absent metrics are written as null; plot data is
// embedded under "plot_data" when given so figures can be re-rendered later.
nlohmann::json report_to_json(const QualityReport& report, const PlotData* plots = nullptr);
QualityReport report_from_json(const nlohmann::json& doc);
std::optional<PlotData> plot_data_from_json(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace synthqa
