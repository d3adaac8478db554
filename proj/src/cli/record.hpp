// SPDX-License-Identifier: MIT
// Structured output: JSON records and delimiter-separated tables, both
// preceded by the resolved configuration.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace mfstop::cli {

using Json = nlohmann::ordered_json;

/// Finite values pass through; non-finite values become "inf", "-inf" or "nan".
Json num(double x);
Json num_array(const std::vector<double>& xs);

/// %.17g, with the same spelling of non-finite values as num().
std::string format_double(double x);

/// Serialises with 17 significant digits for every floating-point value.
void write_json(std::ostream& os, const Json& j, int indent = 2);
std::string compact_json(const Json& j);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;
    bool empty() const { return columns.empty(); }
};

enum class Format { json, csv, tsv };

Format parse_format(const std::string& name);

struct Report {
    std::string command;
    Json config;
    std::optional<std::uint64_t> seed;
    Json result = Json::object();
    Table table;
    std::vector<std::string> notes;
};

void emit(std::ostream& os, const Report& report, Format format);

}  // namespace mfstop::cli
