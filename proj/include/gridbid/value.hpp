#pragma once

#include <span>
#include <vector>

#include "gridbid/core.hpp"
#include "gridbid/distribution.hpp"

namespace gridbid {

struct ValueEngineOptions {
    // Uniform SoC grid resolution of propagated value functions.
    int grid_points = 1001;
};

// Per-period value-to-go functions: functions[t] = V_t for t = 0..T, where
// functions[T] is the end value and V_t = E over the period-(t+1) forecast of
// the per-realization optimum against V_{t+1}. Period-t bids read functions[t].
struct ValueSeries {
    std::vector<ValueFunction> functions;

    int horizon() const { return static_cast<int>(functions.size()) - 1; }
    const ValueFunction& at(int t) const { return functions.at(static_cast<std::size_t>(t)); }
};

// Analytic marginal value at zero SoC for one realized price: the four-case
// closed form (charge-floor, charge ramp, idle plateau, discharge ramp).
// Requires v_next_0 >= v_next_ec >= 0.
double q_zero_soc(double lambda, double v_next_ec, double v_next_0, const StorageSpec& spec);

// One backward step of the arbitrage SDP:
//   V_t(e) = E_lambda[ max over feasible (p, b) of lambda (p - b) - c p + V_{t+1}(e') ]
// with the storage power/energy limits and the negative-price discharge
// indicator. The result is evaluated on a uniform SoC grid; within the
// piecewise-linear model class the per-grid-point values are exact.
ValueFunction bellman_step(const ValueFunction& vf_next, const PriceDistribution& dist,
                           const StorageSpec& spec, const ValueEngineOptions& opts = {});

// Backward induction over the full horizon. forecasts[t-1] is the period-t
// price model; element t of the result was produced from element t+1.
ValueSeries backward_induction(const ValueFunction& end_value,
                               std::span<const PriceDistribution> forecasts,
                               const StorageSpec& spec, const ValueEngineOptions& opts = {});

// Default end value: linear with slope max(0, floor - c) * eta when price
// bounds exist (sell everything at the floor), zero otherwise.
ValueFunction default_end_value(const StorageSpec& spec, const PriceBounds* bounds = nullptr);

}  // namespace gridbid
