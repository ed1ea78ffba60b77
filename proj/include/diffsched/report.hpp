#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace diffsched {

struct RunRecord {
    std::string run_id;
    std::string spec_text;
    std::uint64_t seed = 0;
    int dim = 0;
    std::string oracle_label;
    int nfe = 0;
    std::string metric_name;
    double metric_value = 0.0;
    /// Left empty in the CSV when absent (e.g. under --no-timing).
    std::optional<double> wall_time_ms;
};

inline constexpr const char* kRunRecordHeader =
    "run_id,spec_text,seed,dim,oracle_label,nfe,metric_name,metric_value,wall_time_ms";

/// RFC 4180 quoting when the field holds a comma, quote or newline.
std::string csv_field(const std::string& text);
std::string records_csv(const std::vector<RunRecord>& records);

struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartOptions {
    std::string title;
    std::string x_label = "NFE";
    std::string y_label;
    bool log_y = false;
    int width = 720;
    int height = 440;
};

/// Standalone SVG 1.1 line chart, one polyline per series.
std::string svg_line_chart(const std::vector<ChartSeries>& series, const ChartOptions& options);

}  // namespace diffsched
