#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Shared domain types for the storage bidding and market simulation toolkit.
// Units throughout: power in MW, energy in MWh, prices in $/MWh, time in hours.

namespace gridbid {

// Thrown on malformed configuration or violated type invariants. CLI exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a model instance has no feasible solution. CLI exit code 2.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a numerical routine exceeds its tolerance budget. CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Physical battery parameters.
struct StorageSpec {
    double power_mw = 0.0;        // P, charge and discharge power limit
    double energy_mwh = 0.0;      // E, usable capacity
    double efficiency = 1.0;      // eta, single-trip, in (0, 1]
    double marginal_cost = 0.0;   // c, $/MWh discharged
    double step_hours = 1.0;      // tau, market period length

    // E_c: SoC gained by one full-power charging interval.
    double charge_increment() const { return step_hours * power_mw * efficiency; }
    // SoC removed by one full-power discharging interval.
    double drain_increment() const { return step_hours * power_mw / efficiency; }

    void validate() const;
};

// Administrative market price floor and cap.
struct PriceBounds {
    double floor = 0.0;
    double cap = 0.0;

    bool contains(double price) const { return price >= floor && price <= cap; }
    void validate() const;
};

// Piecewise-linear concave value-to-go over state of charge, domain [0, E].
// Stored as breakpoints with values; segment slopes are the marginal values.
class ValueFunction {
  public:
    ValueFunction() = default;
    ValueFunction(std::vector<double> soc_breakpoints, std::vector<double> values);

    // Linear value e -> slope * e on [0, energy].
    static ValueFunction linear(double slope, double energy_mwh);
    // Build from per-segment slopes on the given breakpoints, anchored at value(0) = value_at_zero.
    static ValueFunction from_slopes(std::vector<double> soc_breakpoints,
                                     std::span<const double> slopes, double value_at_zero = 0.0);

    double energy() const { return soc_.back(); }
    std::size_t points() const { return soc_.size(); }
    std::span<const double> soc() const { return soc_; }
    std::span<const double> values() const { return val_; }

    double slope(std::size_t segment) const;
    std::size_t segments() const { return soc_.size() - 1; }

    // Linear interpolation; e must lie in [0, E].
    double operator()(double e) const;

    // Marginal value v(e): the maximum subgradient. Interior of a segment gives the
    // segment slope, a breakpoint gives the left-hand slope, e = 0 the first slope.
    double marginal(double e) const;

    // Largest positive jump between consecutive slopes (0 for an exactly concave curve).
    double concavity_violation() const;
    bool is_concave(double tol = 1e-9) const { return concavity_violation() <= tol; }

  private:
    std::vector<double> soc_;
    std::vector<double> val_;
};

enum class BidSide { Discharge, Charge };

struct BidSegment {
    double quantity_mw = 0.0;  // width of this segment
    double price = 0.0;        // $/MWh for every MW in the segment
};

// Monotone price-quantity staircase submitted to the market.
// Discharge prices are non-decreasing across segments, charge prices non-increasing.
struct BidCurve {
    BidSide side = BidSide::Discharge;
    double anchor_soc = 0.0;  // e_{t-1} the curve was built from
    std::vector<BidSegment> segments;

    double total_quantity() const;
    // Quantity offered at the given price under full acceptance of in-the-money
    // segments (ties excluded; see market clearing for pro-rata treatment).
    double quantity_at(double price) const;
    // Largest monotonicity violation across adjacent segments (0 when well-formed).
    double monotonicity_violation() const;

    void validate() const;
};

std::string to_string(BidSide side);

}  // namespace gridbid
