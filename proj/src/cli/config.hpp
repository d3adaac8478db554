// SPDX-License-Identifier: MIT
// Run configuration: a JSON document with sections market, profit, sim, fpt,
// inverse and output, plus dotted command-line overrides.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cli/record.hpp"
#include "mfstop/inverse_design.hpp"
#include "mfstop/market.hpp"
#include "mfstop/nce2.hpp"
#include "mfstop/population.hpp"

namespace mfstop::cli {

/// Sections that may appear at the top level and in dotted overrides.
bool is_config_section(const std::string& name);

/// Throws ValidationError naming "config" on unreadable or malformed files.
Json load_config_file(const std::string& path);

/// Sets a dotted path such as "market.K". The value is read as JSON when it
/// parses and as a plain string otherwise.
void apply_override(Json& doc, const std::string& dotted, const std::string& value);

/// Rejects unknown sections and keys, naming the offending dotted key.
void check_keys(const Json& doc);

/// Every market field listed in `required` must be present.
MarketParams read_market(const Json& doc, const std::vector<std::string>& required);

ProfitFunction read_profit(const Json& doc);

SimConfig read_sim(const Json& doc);

/// n_values for the gap sweep.
std::vector<std::size_t> read_n_values(const Json& doc);

/// sim.deviation_grid as given; empty when absent or "default".
bool wants_default_grid(const Json& doc);

MixedObjectiveSpec read_mixed(const Json& doc);
TargetDensity read_target(const Json& doc);

double get_number(const Json& doc, const std::string& dotted);
double get_number_or(const Json& doc, const std::string& dotted, double fallback);
std::string get_string_or(const Json& doc, const std::string& dotted, const std::string& fallback);
std::uint64_t get_uint_or(const Json& doc, const std::string& dotted, std::uint64_t fallback);
bool has(const Json& doc, const std::string& dotted);
std::vector<double> get_number_array(const Json& doc, const std::string& dotted);

/// Positive decimals, one per line; '#' starts a comment. A leading column
/// header "tau" is skipped.
std::vector<double> read_sample_file(const std::string& path);

/// Prefixes relative paths with $MFSTOP_OUTPUT_DIR when it is set.
std::string resolve_output_path(const std::string& path);

/// Copy of the config without execution-only settings (workers, output).
Json provenance_config(const Json& doc);

}  // namespace mfstop::cli
