#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gridbid/core.hpp"
#include "gridbid/distribution.hpp"
#include "gridbid/market.hpp"

// JSON configuration schema. All prices are $/MWh, energy MWh, power MW,
// time hours. See README for a full description of every section.

namespace gridbid {

using Json = nlohmann::json;

void to_json(Json& j, const StorageSpec& s);
void from_json(const Json& j, StorageSpec& s);

void to_json(Json& j, const PriceBounds& b);
void from_json(const Json& j, PriceBounds& b);

void to_json(Json& j, const PriceDistribution& d);
void from_json(const Json& j, PriceDistribution& d);

void to_json(Json& j, const GeneratorSpec& g);
void from_json(const Json& j, GeneratorSpec& g);

void to_json(Json& j, const StorageFleet& f);
void from_json(const Json& j, StorageFleet& f);

void to_json(Json& j, const Scenario& s);
void from_json(const Json& j, Scenario& s);

// Parse a config file; wraps parse failures in ConfigError.
Json load_config(const std::filesystem::path& path);

// FNV-1a hash of the raw config bytes, as fixed-width hex. Written into every
// output table as a provenance column.
std::string config_hash(const std::string& bytes);

// Forecast construction from a config: either an explicit "forecasts" array,
// or a "forecast" template applied to "mu_path" (or a flat mean + horizon).
std::vector<PriceDistribution> forecasts_from_config(const Json& cfg);

inline constexpr const char* kVersion = "gridbid 0.1.0";

}  // namespace gridbid
