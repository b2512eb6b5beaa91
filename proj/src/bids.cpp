#include "gridbid/bids.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace gridbid {

namespace {

void check_anchor(double e_prev, const StorageSpec& spec) {
    if (e_prev < 0.0 || e_prev > spec.energy_mwh + 1e-9)
        throw ConfigError(fmt::format("anchor SoC {} outside [0, {}]", e_prev, spec.energy_mwh));
}

BidCurve constant_curve(BidSide side, double price, double quantity, double anchor, int k) {
    BidCurve curve;
    curve.side = side;
    curve.anchor_soc = anchor;
    curve.segments.resize(static_cast<std::size_t>(k), {quantity / k, price});
    return curve;
}

}  // namespace

BidCurve discharge_bids(const ValueFunction& vf_t, double e_prev, const StorageSpec& spec, int k) {
    spec.validate();
    check_anchor(e_prev, spec);
    if (k < 1) throw ConfigError("bid curves need at least one segment");

    BidCurve curve;
    curve.side = BidSide::Discharge;
    curve.anchor_soc = e_prev;
    const double tau = spec.step_hours;
    const double eta = spec.efficiency;
    const double p_max = std::min(spec.power_mw, e_prev * eta / tau);
    if (p_max <= 0.0) return curve;  // nothing to sell at zero SoC

    curve.segments.reserve(static_cast<std::size_t>(k));
    const double width = p_max / static_cast<double>(k);
    for (int i = 1; i <= k; ++i) {
        const double p = (i == k) ? p_max : width * static_cast<double>(i);
        const double soc = std::max(0.0, e_prev - tau * p / eta);
        const double price = std::max(0.0, spec.marginal_cost + tau / eta * vf_t.marginal(soc));
        curve.segments.push_back({width, price});
    }
    return curve;
}

BidCurve charge_bids(const ValueFunction& vf_t, double e_prev, const StorageSpec& spec, int k) {
    spec.validate();
    check_anchor(e_prev, spec);
    if (k < 1) throw ConfigError("bid curves need at least one segment");

    BidCurve curve;
    curve.side = BidSide::Charge;
    curve.anchor_soc = e_prev;
    const double tau = spec.step_hours;
    const double eta = spec.efficiency;
    const double b_max = std::min(spec.power_mw, (spec.energy_mwh - e_prev) / (eta * tau));
    if (b_max <= 0.0) return curve;  // full: no headroom to buy

    curve.segments.reserve(static_cast<std::size_t>(k));
    const double width = b_max / static_cast<double>(k);
    for (int i = 1; i <= k; ++i) {
        const double b = (i == k) ? b_max : width * static_cast<double>(i);
        const double soc = std::min(spec.energy_mwh, e_prev + b * tau * eta);
        const double price = tau * eta * vf_t.marginal(soc);
        curve.segments.push_back({width, price});
    }
    return curve;
}

BaselineBids baseline_bids(std::span<const double> mu_path, const StorageSpec& spec,
                           double end_slope, double anchor_soc, int k,
                           const ValueEngineOptions& opts) {
    spec.validate();
    check_anchor(anchor_soc, spec);
    if (end_slope < 0.0) throw ConfigError("baseline end slope must be non-negative");

    std::vector<PriceDistribution> forecasts;
    forecasts.reserve(mu_path.size());
    for (double mu : mu_path) forecasts.push_back(PriceDistribution::point_mass(mu));
    ValueSeries series = backward_induction(ValueFunction::linear(end_slope, spec.energy_mwh),
                                            forecasts, spec, opts);

    BaselineBids out;
    const int horizon = series.horizon();
    for (int t = 1; t <= horizon; ++t) {
        const double v = series.at(t).marginal(anchor_soc);
        const double o = std::max(0.0, spec.marginal_cost + spec.step_hours / spec.efficiency * v);
        const double d = spec.step_hours * spec.efficiency * v;
        out.discharge.push_back(constant_curve(BidSide::Discharge, o, spec.power_mw, anchor_soc, k));
        out.charge.push_back(constant_curve(BidSide::Charge, d, spec.power_mw, anchor_soc, k));
    }
    return out;
}

BaselineBids baseline_bids(std::span<const PriceDistribution> forecasts, const StorageSpec& spec,
                           double end_slope, double anchor_soc, int k,
                           const ValueEngineOptions& opts) {
    std::vector<double> mu_path;
    mu_path.reserve(forecasts.size());
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        if (forecasts[i].stddev() != 0.0)
            throw ConfigError(fmt::format(
                "baseline is defined for deterministic forecasts only; period {} has sigma {}",
                i + 1, forecasts[i].stddev()));
        mu_path.push_back(forecasts[i].mean());
    }
    return baseline_bids(mu_path, spec, end_slope, anchor_soc, k, opts);
}

}  // namespace gridbid
