#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gridbid/market.hpp"
#include "gridbid/withhold.hpp"

namespace gridbid {

// Worker count for sweep loops; overridable only through the GRIDBID_WORKERS
// environment variable.
int worker_count();

// Runs fn(0..n-1) across the worker pool. Tasks must write to disjoint slots;
// results are then independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct SigmaSweepRow {
    double sigma = 0.0;
    double bid = 0.0;  // discharge offer at zero SoC, $/MWh
};

// Fig.-2 style experiment: fixed mean, Gaussian forecasts, rising deviation.
std::vector<SigmaSweepRow> sigma_sweep(double mu, std::span<const double> sigmas,
                                       const StorageSpec& spec, int horizon,
                                       const ValueEngineOptions& engine = {});

struct BoundedSweepRow {
    double sigma = 0.0;
    double bid = 0.0;
    double bound = 0.0;  // closed-form withholding bound at the same horizon
};

// Fig.-3 style experiment: truncated-uniform forecasts inside price bounds.
// The bound column uses the post-truncation means, which drift from the
// nominal path as sigma grows.
std::vector<BoundedSweepRow> bounded_sweep(std::span<const double> mu_path, PriceBounds bounds,
                                           std::span<const double> sigmas, const StorageSpec& spec,
                                           const ValueEngineOptions& engine = {});

struct SweepResult {
    std::vector<double> demand_sigmas;    // x-axis, MW
    std::vector<double> forecast_sigmas;  // y-axis, $/MWh
    // matrices indexed [forecast row][demand column]
    std::vector<std::vector<double>> cost;
    std::vector<std::vector<double>> profit;
    int draws = 0;
    std::uint64_t seed = 0;

    // per-column extrema for the alignment checks
    std::vector<int> cost_argmin_rows() const;
    std::vector<int> profit_argmax_rows() const;
};

// Crossed uncertainty sweep over seeded Monte-Carlo days. Demand draws are
// keyed by (seed, demand column, draw) so rows of one column share demand
// paths and row comparisons are free of base-cost noise.
SweepResult welfare_sweep(const Scenario& scenario, std::span<const double> demand_sigmas,
                          std::span<const double> forecast_sigmas, int draws, std::uint64_t seed,
                          const DayOptions& opts = {});

struct SlopeCheck {
    double slope = 0.0;
    double r_squared = 0.0;
    int clearings = 0;
};

// OLS fit of the clearing price on realized net demand over n seeded,
// otherwise noiseless clearings.
SlopeCheck slope_check(const Scenario& scenario, int n, std::uint64_t seed,
                       bool uniform_draws = false);

// Spearman rank correlation between two integer sequences.
double rank_correlation(std::span<const int> a, std::span<const int> b);

}  // namespace gridbid
