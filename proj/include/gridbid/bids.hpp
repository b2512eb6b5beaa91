#pragma once

#include <span>
#include <vector>

#include "gridbid/core.hpp"
#include "gridbid/value.hpp"

namespace gridbid {

// Number of price-quantity segments per curve. 10 matches common ISO offer
// curve limits.
inline constexpr int kDefaultBidSegments = 10;

// Discharge offer staircase for one period:
//   o(p) = [c + (tau/eta) v(e_prev - tau p / eta)]^+
// sampled at the right endpoint of each of the k equal quantity segments over
// p in [0, min(P, e_prev eta / tau)]. Empty curve (zero quantity) at e_prev = 0.
BidCurve discharge_bids(const ValueFunction& vf_t, double e_prev, const StorageSpec& spec,
                        int k = kDefaultBidSegments);

// Charge bid staircase:
//   d(b) = tau eta v(e_prev + b tau eta)
// over b in [0, min(P, (E - e_prev) / (eta tau))]. Empty curve at e_prev = E.
BidCurve charge_bids(const ValueFunction& vf_t, double e_prev, const StorageSpec& spec,
                     int k = kDefaultBidSegments);

// Non-withholding baseline (deterministic forecasts, linear end value): one
// constant-price reference curve per period and side. The curve carries the
// anchor-SoC marginal price across the full power range; it is a monitoring
// reference, not a dispatchable offer, so SoC feasibility is not applied.
struct BaselineBids {
    std::vector<BidCurve> discharge;  // element t-1 is the period-t curve
    std::vector<BidCurve> charge;
};

BaselineBids baseline_bids(std::span<const double> mu_path, const StorageSpec& spec,
                           double end_slope, double anchor_soc = 0.0,
                           int k = kDefaultBidSegments, const ValueEngineOptions& opts = {});

// Distribution-taking variant; rejects any period with nonzero deviation.
BaselineBids baseline_bids(std::span<const PriceDistribution> forecasts, const StorageSpec& spec,
                           double end_slope, double anchor_soc = 0.0,
                           int k = kDefaultBidSegments, const ValueEngineOptions& opts = {});

}  // namespace gridbid
