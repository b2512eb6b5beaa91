#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridbid/bids.hpp"
#include "gridbid/core.hpp"
#include "gridbid/distribution.hpp"
#include "gridbid/value.hpp"

namespace gridbid {

struct GeneratorSpec {
    std::string name;
    double gmin = 0.0;          // MW
    double gmax = 0.0;          // MW
    double ramp = 0.0;          // MW per period
    int min_up = 1;             // periods
    int min_down = 1;           // periods
    double no_load_cost = 0.0;  // $ per committed period
    double startup_cost = 0.0;  // $
    double cost_a = 0.0;        // G(g) = a g^2 + b g, $ per hour
    double cost_b = 0.0;

    double marginal_at(double g) const { return cost_b + 2.0 * cost_a * g; }
    double energy_cost(double g) const { return (cost_a * g + cost_b) * g; }
    void validate() const;
};

struct StorageFleet {
    StorageSpec unit;
    int count = 0;
    bool in_day_ahead = false;
};

// One day of system data: the uncertainty model rides on either the net
// demand directly (demand_sigma, the ideal case) or on realized wind capacity
// proportional to its forecast (wind_dev_fraction, the practical case).
struct Scenario {
    std::string name;
    int horizon = 24;
    std::vector<double> load;           // MW per period
    std::vector<double> wind_forecast;  // MW per period (day-ahead)
    std::vector<GeneratorSpec> fleet;
    StorageFleet storage;
    double demand_sigma = 0.0;          // MW
    double wind_dev_fraction = 0.0;     // realized W = forecast * (1 + frac * z), clamped at 0
    double reserve_fraction = 0.2;      // synchronous reserve as share of scheduled wind
    PriceBounds price_bounds{0.0, 1000.0};

    void validate() const;
};

struct CommitmentSchedule {
    int horizon = 0;
    std::size_t units = 0;
    // indexed [unit][period]
    std::vector<std::vector<std::uint8_t>> on, started, stopped;
    std::vector<std::vector<double>> dispatch;  // day-ahead MW
    std::vector<std::vector<double>> reserve;   // MW held
    std::vector<double> da_price;               // lambda^DA, marginal cost at net load
    std::vector<double> da_net_load;            // MW after scheduled wind
    std::vector<double> da_wind;                // scheduled wind MW
    std::vector<double> da_reserve_req;         // MW of synchronous reserve required
    double commitment_cost = 0.0;        // energy + no-load + start-up over the day
    double dispatch_lower_bound = 0.0;   // all-units relaxed dispatch cost (heuristic gap reference)

    // Empty string when start/stop logic, min up/down and reserve link hold.
    std::string logic_violation(std::span<const GeneratorSpec> fleet) const;
};

// Aggregate marginal-cost supply for one period: committed units with output
// windows (Gmin/Gmax clipped by ramp) and quadratic costs.
class SupplyCurve {
  public:
    struct Block {
        std::size_t unit = 0;
        double lo = 0.0, hi = 0.0;  // feasible output window
        double a = 0.0, b = 0.0;    // marginal cost b + 2 a g
    };

    void add_block(Block blk);
    bool empty() const { return blocks_.empty(); }
    std::size_t block_count() const { return blocks_.size(); }
    const Block& block(std::size_t i) const { return blocks_[i]; }

    double min_quantity() const;
    double max_quantity() const;
    // Willing output at a price; ties on flat (a = 0) blocks resolved to the
    // requested side.
    double quantity_at(double price, bool include_ties = true) const;
    // Merit-order marginal cost at a total output (lowest price supplying it).
    double marginal_at(double quantity) const;
    // Generation cost of the merit-order allocation at a total output.
    double energy_cost(double quantity) const;
    // Merit-order per-unit outputs, pro-rata across price ties.
    std::vector<double> dispatch(double quantity, std::size_t unit_count) const;

    double min_marginal() const;
    double max_marginal() const;

  private:
    std::vector<Block> blocks_;
};

SupplyCurve aggregate_supply(const CommitmentSchedule& committed,
                             std::span<const GeneratorSpec> fleet, int t,
                             std::span<const double> prev_output = {});

struct ClearingResult {
    int period = 0;
    double price = 0.0;          // $/MWh
    double net_demand = 0.0;     // MW cleared against
    double gen_mw = 0.0;
    double wind_curtailed_mw = 0.0;
    double discharge_mw = 0.0;   // fleet total
    double charge_mw = 0.0;
    double gen_cost = 0.0;       // $ over the period
    double system_cost = 0.0;    // gen cost + physical storage discharge cost
    double storage_profit = 0.0; // lambda (p - b) - c p over the period
    double soc_after = 0.0;      // per unit, MWh
    int flag = 0;                // 0 cleared, +1 scarcity at cap, -1 floored surplus
    std::vector<double> gen_outputs;
    double balance_residual = 0.0;  // g + p - b - net demand
};

// Single-period clearing: price by bisection of the monotone excess-supply
// function over [floor, cap], dispatch read off the curves at the price.
// Residual at the marginal price goes to tied charge-bid reduction first,
// then flexible generation, then tied discharge offers, pro-rata within each
// stage, which keeps one storage fleet from charging and discharging at once.
ClearingResult clear_rtm(const SupplyCurve& supply, std::span<const BidCurve> offers,
                         std::span<const BidCurve> bids, double net_demand, PriceBounds bounds,
                         double hours = 1.0);

// Day-ahead unit commitment: priority-list heuristic (rank by average cost at
// Gmax, commit until capacity plus reserve is covered, repair min up/down,
// then sequential economic dispatch). Not a certified optimum; the schedule
// records a relaxed-dispatch lower bound so the gap is visible per run.
CommitmentSchedule commit_dam(const Scenario& scenario);

struct DayOptions {
    int bid_segments = kDefaultBidSegments;
    ValueEngineOptions engine{};
    double initial_soc = 0.0;
    std::optional<double> end_slope;  // default: price-floor end value
};

struct DayResult {
    CommitmentSchedule commitment;
    std::vector<ClearingResult> periods;
    double system_cost = 0.0;     // sum of gen cost + c p
    double storage_profit = 0.0;  // sum of lambda (p - b) - c p
    double realized_mean_price = 0.0;
};

// Prepared day simulation: the commitment and the value series are built once
// and shared by any number of seeded draws (both are immutable afterwards, so
// draws may run concurrently).
class DayRunner {
  public:
    DayRunner(Scenario scenario, std::vector<PriceDistribution> forecasts, StorageSpec spec,
              DayOptions opts = {});

    const CommitmentSchedule& commitment() const { return commitment_; }
    const ValueSeries& values() const { return series_; }
    const Scenario& scenario() const { return scenario_; }

    // demand_sigma >= 0 overrides the scenario's value for this draw.
    DayResult run(std::uint64_t seed, double demand_sigma = -1.0) const;

  private:
    Scenario scenario_;
    std::vector<PriceDistribution> forecasts_;
    StorageSpec spec_;
    DayOptions opts_;
    CommitmentSchedule commitment_;
    ValueSeries series_;
};

// Full pipeline: commit day-ahead, then per period build bid curves from the
// period value function at the current SoC, draw the realized net demand,
// clear, and advance the SoC.
DayResult simulate_day(const Scenario& scenario, std::span<const PriceDistribution> forecasts,
                       const StorageSpec& spec, std::uint64_t seed, const DayOptions& opts = {});

}  // namespace gridbid
