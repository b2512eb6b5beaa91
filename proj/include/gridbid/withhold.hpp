#pragma once

#include <span>
#include <vector>

#include "gridbid/bids.hpp"
#include "gridbid/core.hpp"
#include "gridbid/distribution.hpp"
#include "gridbid/value.hpp"

namespace gridbid {

// Evaluation of the closed-form withholding bound for bounded prices:
//   bound = c + (cap - c) sum_{i=t+1}^{T} alpha_i prod_{k=t+1}^{i-1} beta_k
//             + prod_{k=t+1}^{T} beta_k * v_T0 / eta
// with alpha_i = (mu_i - floor) / (cap - floor), beta_i = 1 - alpha_i and
// empty products equal to 1.
struct BoundBreakdown {
    int period = 0;   // t: the bound applies to the period-t discharge offer
    int horizon = 0;  // T
    std::vector<double> alpha;        // alpha_i for i = t+1..T
    std::vector<double> beta;         // matching beta_i
    std::vector<double> beta_prefix;  // prod_{k=t+1}^{i-1} beta_k, aligned with alpha
    double tail_product = 1.0;        // prod_{k=t+1}^{T} beta_k
    double bound = 0.0;               // $/MWh
};

// mu_path[i-1] is the period-i price expectation; every entry used must lie
// inside the bounds. v_t0 is the marginal end value at zero SoC (>= 0).
BoundBreakdown theorem2_bound(int t, int horizon, std::span<const double> mu_path,
                              PriceBounds bounds, const StorageSpec& spec, double v_t0);

// Time-invariant bound under a cap on all price expectations, with an
// interval discount ratio rho in (0, 1]:
//   bound = c + alpha / (1 - rho beta) (1 - beta^{T-1}) (cap - c) + beta^T v_T / eta.
// The mu_cap = floor corner (beta = 1) degenerates to c + v_T / eta.
double corollary4_bound(int horizon, double mu_cap, PriceBounds bounds, const StorageSpec& spec,
                        double rho, double v_t);

// Minimum Gaussian deviation beyond which the zero-SoC marginal value is
// guaranteed to rise with sigma: 0 when (v_next_ec - 2c)(mu - c) >= 0, else
// sqrt(-(v_next_ec - 2c)(mu - c)).
double sigma_floor(double v_next_ec, double c, double mu_next);

struct SpikeOptions {
    // Bid prices are rounded up to this tick when placing the spike; <= 0
    // disables rounding.
    double price_tick = 5.0;
};

// Two-point spike distribution with mean mu whose high realization pushes the
// zero-SoC marginal value to at least theta (the unbounded-withholding
// construction). alpha is the spike probability; pi solves the target
// inequality and gamma restores the mean. Throws InfeasibleError when the
// implied gamma exceeds eta * v_next_ec (alpha too small for theta, mu).
PriceDistribution construct_spike_distribution(double theta, double mu, double alpha,
                                               const StorageSpec& spec, double v_next_ec,
                                               const SpikeOptions& opts = {});

struct SpikeScheduleOptions {
    double alpha = 0.5;       // per-period spike probability
    double end_slope = 0.0;   // linear end value slope
    double price_tick = 5.0;
    int grid_points = 501;
    int verify_segments = 64;
    int max_rounds = 60;
};

// Mean-preserving distributions for periods kappa+1..T that drive the whole
// period-kappa discharge curve at starting SoC e_init to at least theta.
// Requires enough remaining periods to drain e_init at full power.
std::vector<PriceDistribution> extend_spike_schedule(double theta, int kappa, double e_init,
                                                     std::span<const double> mu_path,
                                                     const StorageSpec& spec,
                                                     const SpikeScheduleOptions& opts = {});

struct WithholdingSegment {
    double quantity_to = 0.0;  // cumulative MW at the segment's right edge
    double submitted = 0.0;    // $/MWh
    double baseline = 0.0;
    double bound = 0.0;
    bool above_baseline = false;
    bool above_bound = false;
    double baseline_margin = 0.0;  // submitted - baseline
    double bound_margin = 0.0;     // bound - submitted
};

struct WithholdingReport {
    int period = 0;
    BidSide side = BidSide::Discharge;
    double anchor_soc = 0.0;
    std::vector<WithholdingSegment> segments;
    bool withholding = false;      // any segment priced above the baseline
    bool bound_violating = false;  // any segment priced above the bound
};

WithholdingReport audit_bids(const BidCurve& curve, const BidCurve& baseline,
                             const BoundBreakdown& bound, int period = 0);

}  // namespace gridbid
