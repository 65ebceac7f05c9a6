#include "dpg/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "dpg/common.hpp"

namespace dpg {

void Table::add(std::vector<ReportValue> row) {
    require(row.size() == columns.size(), "record has " + std::to_string(row.size()) + " fields, expected " +
                                              std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_number(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    size_t pos = 0;
    const double x = std::stod(s, &pos);
    require(pos == s.size(), "not a number: '" + s + "'");
    return x;
}

namespace {

std::string csv_field(const ReportValue& v) {
    struct V {
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_number(d); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            return q + "\"";
        }
    };
    return std::visit(V{}, v);
}

template <class F>
void with_stream(const std::string& path, F&& body) {
    if (path == "-" || path.empty()) {
        body(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write '" + path + "'");
    body(out);
    require(out.good(), "write failed for '" + path + "'");
}

}  // namespace

void write_csv(std::ostream& os, const Table& t) {
    for (size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << csv_field(t.columns[j]);
    os << '\n';
    for (const auto& row : t.rows) {
        for (size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << csv_field(row[j]);
        os << '\n';
    }
}

void write_jsonl(std::ostream& os, const Table& t) {
    for (const auto& row : t.rows) {
        nlohmann::ordered_json o = nlohmann::ordered_json::object();
        for (size_t j = 0; j < row.size(); ++j) {
            const auto& key = t.columns[j];
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, double>) {
                        if (std::isfinite(x))
                            o[key] = x;
                        else
                            o[key] = nullptr;
                    } else {
                        o[key] = x;
                    }
                },
                row[j]);
        }
        os << o.dump() << '\n';
    }
}

void write_csv_file(const std::string& path, const Table& t) {
    with_stream(path, [&](std::ostream& os) { write_csv(os, t); });
}

void write_jsonl_file(const std::string& path, const Table& t) {
    with_stream(path, [&](std::ostream& os) { write_jsonl(os, t); });
}

void write_report(const Table& t, const std::string& path, ReportFormat fmt) {
    if (fmt == ReportFormat::Csv)
        write_csv_file(path, t);
    else
        write_jsonl_file(path, t);
}

}  // namespace dpg
