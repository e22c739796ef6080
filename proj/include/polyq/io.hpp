#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace polyq {

enum class OutFormat { csv, json };
OutFormat parse_format(const std::string& text);  // "csv" | "json"

// shortest round-trip decimal, '.' separator, locale-independent
std::string format_double(double x);

const char* version_string();

// Streams flat records either as RFC-4180 CSV (header from the first record,
// later records must carry the same keys in the same order) or as one JSON
// object per line.
class RecordWriter {
public:
    RecordWriter(std::ostream& os, OutFormat fmt);
    void write(const nlohmann::ordered_json& record);
    std::int64_t rows() const { return rows_; }

private:
    std::ostream& os_;
    OutFormat fmt_;
    std::vector<std::string> columns_;
    std::int64_t rows_ = 0;
};

std::string csv_escape(const std::string& field);
std::string json_scalar_to_csv(const nlohmann::ordered_json& v);

// companion gnuplot script: x/y columns by CSV name, optional error column
void emit_gnuplot(std::ostream& os, const std::string& data_path, const std::string& x_col,
                  const std::string& y_col, const std::string& err_col, const std::string& title);

}  // namespace polyq
