#include "diffsched/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "diffsched/format.hpp"

namespace diffsched {

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string records_csv(const std::vector<RunRecord>& records) {
    std::string out = kRunRecordHeader;
    out += '\n';
    for (const auto& r : records) {
        out += csv_field(r.run_id);
        out += ',';
        out += csv_field(r.spec_text);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += std::to_string(r.dim);
        out += ',';
        out += csv_field(r.oracle_label);
        out += ',';
        out += std::to_string(r.nfe);
        out += ',';
        out += csv_field(r.metric_name);
        out += ',';
        out += format_double(r.metric_value);
        out += ',';
        if (r.wall_time_ms) out += format_double(*r.wall_time_ms);
        out += '\n';
    }
    return out;
}

namespace {

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string svg_line_chart(const std::vector<ChartSeries>& series, const ChartOptions& options) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("series x and y lengths differ");
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            double y = s.y[k];
            if (options.log_y) {
                if (!(y > 0)) continue;
                y = std::log10(y);
            }
            x_lo = std::min(x_lo, s.x[k]);
            x_hi = std::max(x_hi, s.x[k]);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    }
    if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    if (x_hi == x_lo) x_hi = x_lo + 1;
    if (y_hi == y_lo) y_hi = y_lo + 1;

    const double left = 70, right = 190, top = 40, bottom = 55;
    const double pw = options.width - left - right;
    const double ph = options.height - top - bottom;
    auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) {
        if (options.log_y) y = std::log10(y);
        return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph;
    };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(options.width) +
           "\" height=\"" + std::to_string(options.height) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!options.title.empty())
        out += "<text x=\"" + num(left + pw / 2) +
               "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
               xml_escape(options.title) + "</text>\n";
    out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int k = 0; k <= 5; ++k) {
        const double xv = x_lo + (x_hi - x_lo) * k / 5.0;
        out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(top + ph + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(xv) +
               "</text>\n";
        const double yl = y_lo + (y_hi - y_lo) * k / 5.0;
        const double yv = options.log_y ? std::pow(10.0, yl) : yl;
        out += "<line x1=\"" + num(left) + "\" x2=\"" + num(left + pw) + "\" y1=\"" + num(py(yv)) + "\" y2=\"" +
               num(py(yv)) + "\" stroke=\"#dddddd\"/>\n";
        out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(yv) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(yv) + "</text>\n";
    }
    out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(options.height - 12.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + xml_escape(options.x_label) +
           "</text>\n";
    if (!options.y_label.empty())
        out += "<text x=\"16\" y=\"" + num(top + ph / 2) + "\" transform=\"rotate(-90 16 " + num(top + ph / 2) +
               ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
               xml_escape(options.y_label + (options.log_y ? " (log)" : "")) + "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* colour = kPalette[s % std::size(kPalette)];
        std::string points;
        for (std::size_t k = 0; k < series[s].x.size(); ++k) {
            if (options.log_y && !(series[s].y[k] > 0)) continue;
            if (!points.empty()) points += ' ';
            points += num(px(series[s].x[k])) + "," + num(py(series[s].y[k]));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"><title>" + xml_escape(series[s].label) + "</title></polyline>\n";
        const double ly = top + 12 + 16.0 * static_cast<double>(s);
        out += "<line x1=\"" + num(left + pw + 12) + "\" x2=\"" + num(left + pw + 32) + "\" y1=\"" + num(ly) +
               "\" y2=\"" + num(ly) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + num(left + pw + 38) + "\" y=\"" + num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + xml_escape(series[s].label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace diffsched
