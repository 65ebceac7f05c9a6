#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace dpg {

using ReportValue = std::variant<std::int64_t, double, bool, std::string>;

/// Column-ordered records shared by the CSV and JSON-lines writers.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<ReportValue>> rows;

    explicit Table(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}
    void add(std::vector<ReportValue> row);
};

/// Shortest text for a double that round-trips at 17 significant digits; "nan", "inf", "-inf".
std::string format_number(double x);
double parse_number(const std::string& s);

/// Header row then one line per record, "\n" endings. Strings with separators are quoted.
void write_csv(std::ostream& os, const Table& t);
/// One JSON object per record; non-finite numbers become null.
void write_jsonl(std::ostream& os, const Table& t);

/// Writes to the path, or stdout for "-". Throws if the file cannot be written.
void write_csv_file(const std::string& path, const Table& t);
void write_jsonl_file(const std::string& path, const Table& t);

enum class ReportFormat { Csv, Jsonl };
void write_report(const Table& t, const std::string& path, ReportFormat fmt);

}  // namespace dpg
