#include "gridbid/withhold.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace gridbid {

namespace {

double round_up_to_tick(double x, double tick) {
    if (tick <= 0.0) return x;
    return std::ceil(x / tick) * tick;
}

}  // namespace

BoundBreakdown theorem2_bound(int t, int horizon, std::span<const double> mu_path,
                              PriceBounds bounds, const StorageSpec& spec, double v_t0) {
    spec.validate();
    bounds.validate();
    if (horizon < 1 || static_cast<int>(mu_path.size()) < horizon)
        throw ConfigError("theorem2_bound needs mu_path covering periods 1..T");
    if (t < 0 || t > horizon)
        throw ConfigError(fmt::format("period t = {} outside [0, {}]", t, horizon));
    if (v_t0 < 0.0) throw ConfigError("end marginal value must be non-negative");

    BoundBreakdown out;
    out.period = t;
    out.horizon = horizon;
    const double span = bounds.cap - bounds.floor;
    double running = 1.0;  // prod beta up to i-1
    double sum = 0.0;
    for (int i = t + 1; i <= horizon; ++i) {
        const double mu = mu_path[static_cast<std::size_t>(i) - 1];
        if (mu < bounds.floor - 1e-9 || mu > bounds.cap + 1e-9)
            throw ConfigError(fmt::format(
                "period-{} expectation {} outside price bounds [{}, {}]", i, mu, bounds.floor, bounds.cap));
        const double alpha = (mu - bounds.floor) / span;
        const double beta = 1.0 - alpha;
        out.alpha.push_back(alpha);
        out.beta.push_back(beta);
        out.beta_prefix.push_back(running);
        sum += alpha * running;
        running *= beta;
    }
    out.tail_product = running;
    out.bound = spec.marginal_cost + (bounds.cap - spec.marginal_cost) * sum +
                running * v_t0 / spec.efficiency;
    return out;
}

double corollary4_bound(int horizon, double mu_cap, PriceBounds bounds, const StorageSpec& spec,
                        double rho, double v_t) {
    spec.validate();
    bounds.validate();
    if (horizon < 1) throw ConfigError("corollary4_bound needs T >= 1");
    if (mu_cap < bounds.floor - 1e-9 || mu_cap > bounds.cap + 1e-9)
        throw ConfigError(fmt::format("expectation cap {} outside price bounds", mu_cap));
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("discount ratio must lie in (0, 1]");
    if (v_t < 0.0) throw ConfigError("end marginal value must be non-negative");

    const double alpha = (mu_cap - bounds.floor) / (bounds.cap - bounds.floor);
    const double beta = 1.0 - alpha;
    const double beta_pow_t = std::pow(beta, horizon);
    double middle = 0.0;
    if (alpha > 0.0)  // beta = 1 makes the geometric term vanish
        middle = alpha / (1.0 - rho * beta) * (1.0 - std::pow(beta, horizon - 1)) *
                 (bounds.cap - spec.marginal_cost);
    return spec.marginal_cost + middle + beta_pow_t * v_t / spec.efficiency;
}

double sigma_floor(double v_next_ec, double c, double mu_next) {
    if (v_next_ec < 0.0) throw ConfigError("sigma_floor needs v_next_ec >= 0");
    const double product = (v_next_ec - 2.0 * c) * (mu_next - c);
    return product >= 0.0 ? 0.0 : std::sqrt(-product);
}

PriceDistribution construct_spike_distribution(double theta, double mu, double alpha,
                                               const StorageSpec& spec, double v_next_ec,
                                               const SpikeOptions& opts) {
    spec.validate();
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError(fmt::format("spike probability must lie in (0, 1), got {}", alpha));
    if (theta < 0.0) throw ConfigError("target value must be non-negative");
    if (v_next_ec < 0.0) throw ConfigError("v_next_ec must be non-negative");

    const double beta = 1.0 - alpha;
    const double eta = spec.efficiency;
    const double tau = spec.step_hours;
    const double pi_min = (theta - beta * v_next_ec) * tau / (alpha * eta) + spec.marginal_cost;
    const double pi = round_up_to_tick(std::max(pi_min, mu), opts.price_tick);
    const double gamma = (mu - alpha * pi) / beta;
    const double gamma_cap = v_next_ec * eta * tau;
    if (gamma > gamma_cap + 1e-9)
        throw InfeasibleError(fmt::format(
            "spike construction infeasible: gamma = {} violates gamma <= eta v_next(E_c) = {} "
            "(alpha = {} too small for theta = {}, mu = {})",
            gamma, gamma_cap, alpha, theta, mu));
    return PriceDistribution::two_point(pi, gamma, alpha);
}

std::vector<PriceDistribution> extend_spike_schedule(double theta, int kappa, double e_init,
                                                     std::span<const double> mu_path,
                                                     const StorageSpec& spec,
                                                     const SpikeScheduleOptions& opts) {
    spec.validate();
    const int horizon = static_cast<int>(mu_path.size());
    if (kappa < 1 || kappa > horizon)
        throw ConfigError(fmt::format("period kappa = {} outside 1..{}", kappa, horizon));
    if (e_init < 0.0 || e_init > spec.energy_mwh)
        throw ConfigError("starting SoC outside [0, E]");
    if (theta < 0.0) throw ConfigError("target bid must be non-negative");
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0))
        throw ConfigError("per-period spike probability must lie in (0, 1)");

    const double drain = spec.drain_increment();
    const int remaining = horizon - kappa;
    const int n_drain = std::max(1, static_cast<int>(std::ceil(e_init / drain - 1e-9)));
    if (remaining < n_drain)
        throw InfeasibleError(fmt::format(
            "horizon too short to drain {} MWh: need T - kappa >= {} full-power periods "
            "(e eta / (tau P) = {:.6g}), have {}",
            e_init, n_drain, e_init / drain, remaining));

    const double tau = spec.step_hours;
    const double eta = spec.efficiency;
    // Marginal value at e_init that lifts the whole discharge curve to theta.
    const double target0 = std::max(0.0, (theta - spec.marginal_cost) * eta / tau);
    const ValueEngineOptions engine{opts.grid_points};
    const ValueFunction end_value = ValueFunction::linear(opts.end_slope, spec.energy_mwh);

    double boost = 1.0;
    std::vector<PriceDistribution> schedule(static_cast<std::size_t>(remaining),
                                            PriceDistribution::point_mass(0.0));
    for (int round = 0; round < opts.max_rounds; ++round) {
        // Per-step marginal targets along the full-power drain ladder.
        std::vector<double> targets(static_cast<std::size_t>(n_drain));
        targets[0] = target0 * boost + (boost - 1.0);
        for (std::size_t j = 1; j < targets.size(); ++j)
            targets[j] = targets[j - 1] / opts.alpha;

        // Build distributions backward so each spike can see the value
        // function it must out-bid to force a full discharge.
        ValueFunction vf = end_value;
        for (int idx = horizon; idx > kappa; --idx) {
            const int j = idx - kappa;  // ladder step served by this period
            const double mu = mu_path[static_cast<std::size_t>(idx) - 1];
            PriceDistribution dist = PriceDistribution::point_mass(mu);
            if (j <= n_drain) {
                const double e_j = std::max(0.0, e_init - static_cast<double>(j - 1) * drain);
                const double e_next = std::max(0.0, e_j - drain);
                const double need_target =
                    targets[static_cast<std::size_t>(j) - 1] * tau / (opts.alpha * eta) +
                    spec.marginal_cost;
                const double need_drain = spec.marginal_cost + tau / eta * vf.marginal(e_next) + 1.0;
                const double pi =
                    round_up_to_tick(std::max({need_target, need_drain, mu}), opts.price_tick);
                const double gamma = (mu - opts.alpha * pi) / (1.0 - opts.alpha);
                dist = PriceDistribution::two_point(pi, gamma, opts.alpha);
            }
            schedule[static_cast<std::size_t>(idx - kappa) - 1] = dist;
            vf = bellman_step(vf, dist, spec, engine);
        }

        // vf is now V_kappa; verify the whole discharge curve clears theta.
        const BidCurve curve = discharge_bids(vf, e_init, spec, opts.verify_segments);
        double worst = theta;
        for (const auto& seg : curve.segments) worst = std::min(worst, seg.price);
        if (e_init == 0.0)  // empty curve: check the marginal offer instead
            worst = std::max(0.0, spec.marginal_cost + tau / eta * vf.marginal(0.0));
        if (worst >= theta - 1e-6) return schedule;
        boost *= 2.0;
    }
    throw NumericError("spike schedule failed to reach the target bid within the round budget");
}

WithholdingReport audit_bids(const BidCurve& curve, const BidCurve& baseline,
                             const BoundBreakdown& bound, int period) {
    if (curve.side != baseline.side)
        throw ConfigError(fmt::format("audit mismatch: {} curve against {} baseline",
                                      to_string(curve.side), to_string(baseline.side)));
    WithholdingReport report;
    report.period = period;
    report.side = curve.side;
    report.anchor_soc = curve.anchor_soc;

    double cum = 0.0;
    for (const auto& seg : curve.segments) {
        cum += seg.quantity_mw;
        // baseline price at the same cumulative quantity (last price beyond its range)
        double base_price = 0.0;
        double base_cum = 0.0;
        for (const auto& b : baseline.segments) {
            base_price = b.price;
            base_cum += b.quantity_mw;
            if (base_cum >= cum - 1e-12) break;
        }
        WithholdingSegment row;
        row.quantity_to = cum;
        row.submitted = seg.price;
        row.baseline = base_price;
        row.bound = bound.bound;
        row.baseline_margin = seg.price - base_price;
        row.bound_margin = bound.bound - seg.price;
        row.above_baseline = seg.price > base_price + 1e-9;
        row.above_bound = seg.price > bound.bound + 1e-9;
        report.withholding = report.withholding || row.above_baseline;
        report.bound_violating = report.bound_violating || row.above_bound;
        report.segments.push_back(row);
    }
    return report;
}

}  // namespace gridbid
