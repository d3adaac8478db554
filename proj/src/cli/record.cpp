// SPDX-License-Identifier: MIT
#include "cli/record.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mfstop/errors.hpp"

namespace mfstop::cli {

namespace {

void write_string(std::ostream& os, const std::string& s) {
    os << Json(s).dump();
}

void write_value(std::ostream& os, const Json& j, int indent, int depth) {
    const bool pretty = indent > 0;
    auto newline = [&](int d) {
        if (pretty) os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << '{';
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) os << ',';
                first = false;
                newline(depth + 1);
                write_string(os, k);
                os << (pretty ? ": " : ":");
                write_value(os, v, indent, depth + 1);
            }
            newline(depth);
            os << '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) {
                return e.is_object() || e.is_array();
            });
            os << '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) os << (flat && pretty ? ", " : ",");
                first = false;
                if (!flat) newline(depth + 1);
                write_value(os, v, flat ? 0 : indent, depth + 1);
            }
            if (!flat) newline(depth);
            os << ']';
            return;
        }
        case Json::value_t::number_float:
            os << format_double(j.get<double>());
            return;
        default:
            os << j.dump();
    }
}

std::string cell(const Json& j) {
    if (j.is_number_float()) return format_double(j.get<double>());
    if (j.is_string()) return j.get<std::string>();
    return compact_json(j);
}

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, Json>>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else {
        out.emplace_back(prefix, j);
    }
}

}  // namespace

Json num(double x) {
    if (std::isfinite(x)) return Json(x);
    if (std::isnan(x)) return Json("nan");
    return Json(x > 0 ? "inf" : "-inf");
}

Json num_array(const std::vector<double>& xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(num(x));
    return a;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_json(std::ostream& os, const Json& j, int indent) {
    write_value(os, j, indent, 0);
}

std::string compact_json(const Json& j) {
    std::ostringstream os;
    write_value(os, j, 0, 0);
    return os.str();
}

Format parse_format(const std::string& name) {
    if (name == "json") return Format::json;
    if (name == "csv") return Format::csv;
    if (name == "tsv") return Format::tsv;
    throw ValidationError("output.format", "expected json, csv or tsv, got '" + name + "'");
}

void emit(std::ostream& os, const Report& r, Format format) {
    if (format == Format::json) {
        Json doc = Json::object();
        doc["command"] = r.command;
        if (r.seed) doc["seed"] = *r.seed;
        doc["config"] = r.config;
        doc["result"] = r.result;
        if (!r.table.empty()) {
            Json rows = Json::array();
            for (const auto& row : r.table.rows) rows.push_back(Json(row));
            doc["table"] = {{"columns", r.table.columns}, {"rows", rows}};
        }
        if (!r.notes.empty()) doc["notes"] = r.notes;
        write_json(os, doc);
        os << '\n';
        return;
    }
    const char sep = format == Format::csv ? ',' : '\t';
    os << "# command: " << r.command << '\n';
    if (r.seed) os << "# seed: " << *r.seed << '\n';
    os << "# config: " << compact_json(r.config) << '\n';
    for (const auto& n : r.notes) os << "# note: " << n << '\n';
    if (r.table.empty()) {
        std::vector<std::pair<std::string, Json>> kv;
        flatten(r.result, "", kv);
        os << "key" << sep << "value" << '\n';
        for (const auto& [k, v] : kv) os << k << sep << cell(v) << '\n';
        return;
    }
    std::vector<std::pair<std::string, Json>> kv;
    flatten(r.result, "", kv);
    for (const auto& [k, v] : kv) os << "# " << k << ": " << cell(v) << '\n';
    for (std::size_t i = 0; i < r.table.columns.size(); ++i)
        os << (i ? std::string(1, sep) : "") << r.table.columns[i];
    os << '\n';
    for (const auto& row : r.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? std::string(1, sep) : "") << cell(row[i]);
        os << '\n';
    }
}

}  // namespace mfstop::cli
