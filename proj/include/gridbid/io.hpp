#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gridbid/market.hpp"
#include "gridbid/sweep.hpp"
#include "gridbid/value.hpp"
#include "gridbid/withhold.hpp"

namespace gridbid {

// Shortest round-trip decimal representation; identical across runs and
// platforms, which keeps CSV outputs byte-reproducible.
std::string dtos(double x);

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;

    std::string csv_suffix_header() const;  // ",config_hash,seed,version"
    std::string csv_suffix_row() const;
};

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::string& header, const Provenance& prov);
    ~CsvWriter();

    void row(std::initializer_list<std::string> cells);

  private:
    std::string buffer_;
    std::filesystem::path path_;
    std::string prov_suffix_;
};

void write_value_series_csv(const std::filesystem::path& path, const ValueSeries& series,
                            const Provenance& prov);

// period is 1-based; pass 0 for standalone curves.
void write_bid_curves_csv(const std::filesystem::path& path,
                          std::span<const std::pair<int, BidCurve>> curves, const Provenance& prov);

void write_bounds_csv(const std::filesystem::path& path, std::span<const BoundBreakdown> bounds,
                      const Provenance& prov);

void write_day_csv(const std::filesystem::path& path, const DayResult& day, const Provenance& prov);

void write_day_totals_json(const std::filesystem::path& path, const DayResult& day,
                           const Provenance& prov);

void write_sigma_sweep_csv(const std::filesystem::path& path, std::span<const SigmaSweepRow> rows,
                           const Provenance& prov);

void write_bounded_sweep_csv(const std::filesystem::path& path,
                             std::span<const BoundedSweepRow> rows, const Provenance& prov);

// Long-format (heatmap-ready) sweep table: one row per cell.
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep,
                     const Provenance& prov);

void write_audit_csv(const std::filesystem::path& path, std::span<const WithholdingReport> reports,
                     const Provenance& prov);

void write_audit_json(const std::filesystem::path& path, std::span<const WithholdingReport> reports,
                      const Provenance& prov);

}  // namespace gridbid
