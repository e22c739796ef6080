#include "polyq/io.hpp"

#include <charconv>
#include <cmath>

#include "polyq/errors.hpp"

namespace polyq {

OutFormat parse_format(const std::string& text) {
    if (text == "csv") return OutFormat::csv;
    if (text == "json") return OutFormat::json;
    fail(Errc::config, "unknown output format '" + text + "' (expected csv or json)");
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

const char* version_string() { return "polyq-0.1.0"; }

std::string csv_escape(const std::string& field) {
    bool needs_quote = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quote) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string json_scalar_to_csv(const nlohmann::ordered_json& v) {
    if (v.is_string()) return csv_escape(v.get<std::string>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_null()) return "";
    return v.dump();  // integers
}

RecordWriter::RecordWriter(std::ostream& os, OutFormat fmt) : os_(os), fmt_(fmt) {}

void RecordWriter::write(const nlohmann::ordered_json& record) {
    require(record.is_object(), Errc::precondition, "record writer: records must be objects");
    if (fmt_ == OutFormat::json) {
        os_ << record.dump() << "\n";
        ++rows_;
        return;
    }
    if (columns_.empty()) {
        for (auto it = record.begin(); it != record.end(); ++it) columns_.push_back(it.key());
        for (std::size_t k = 0; k < columns_.size(); ++k)
            os_ << (k ? "," : "") << csv_escape(columns_[k]);
        os_ << "\r\n";
    }
    require(record.size() == columns_.size(), Errc::precondition, "record writer: column set changed");
    for (std::size_t k = 0; k < columns_.size(); ++k) {
        auto it = record.find(columns_[k]);
        require(it != record.end(), Errc::precondition,
                "record writer: record missing column '" + columns_[k] + "'");
        os_ << (k ? "," : "") << json_scalar_to_csv(*it);
    }
    os_ << "\r\n";
    ++rows_;
}

void emit_gnuplot(std::ostream& os, const std::string& data_path, const std::string& x_col,
                  const std::string& y_col, const std::string& err_col, const std::string& title) {
    os << "set datafile separator ','\n";
    os << "set key autotitle columnhead\n";
    os << "set xlabel '" << x_col << "'\n";
    os << "set ylabel '" << y_col << "'\n";
    os << "set title '" << title << "'\n";
    os << "set grid\n";
    if (err_col.empty()) {
        os << "plot '" << data_path << "' using '" << x_col << "':'" << y_col
           << "' with linespoints\n";
    } else {
        os << "plot '" << data_path << "' using '" << x_col << "':'" << y_col << "':'" << err_col
           << "' with yerrorlines\n";
    }
    os << "pause -1 'press enter'\n";
}

}  // namespace polyq
