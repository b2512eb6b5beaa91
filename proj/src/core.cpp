#include "gridbid/core.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace gridbid {

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void StorageSpec::validate() const {
    if (!finite(power_mw) || power_mw <= 0.0)
        throw ConfigError(fmt::format("storage power limit must be positive, got {}", power_mw));
    if (!finite(energy_mwh) || energy_mwh <= 0.0)
        throw ConfigError(fmt::format("storage energy capacity must be positive, got {}", energy_mwh));
    if (!finite(efficiency) || efficiency <= 0.0 || efficiency > 1.0)
        throw ConfigError(fmt::format("storage efficiency must lie in (0, 1], got {}", efficiency));
    if (!finite(step_hours) || step_hours <= 0.0)
        throw ConfigError(fmt::format("step length must be positive, got {}", step_hours));
    if (!finite(marginal_cost) || marginal_cost < 0.0)
        throw ConfigError(fmt::format("marginal discharge cost must be non-negative, got {}", marginal_cost));
}

void PriceBounds::validate() const {
    if (!finite(floor) || !finite(cap) || floor >= cap)
        throw ConfigError(fmt::format("price bounds require floor < cap, got [{}, {}]", floor, cap));
}

ValueFunction::ValueFunction(std::vector<double> soc_breakpoints, std::vector<double> values)
    : soc_(std::move(soc_breakpoints)), val_(std::move(values)) {
    if (soc_.size() < 2 || soc_.size() != val_.size())
        throw ConfigError("value function needs >= 2 breakpoints with matching values");
    if (soc_.front() != 0.0)
        throw ConfigError("value function domain must start at SoC 0");
    for (std::size_t i = 0; i + 1 < soc_.size(); ++i) {
        if (!(soc_[i] < soc_[i + 1]))
            throw ConfigError("value function breakpoints must be strictly ascending");
    }
    for (double v : val_) {
        if (!finite(v)) throw ConfigError("value function values must be finite");
    }
}

ValueFunction ValueFunction::linear(double slope, double energy_mwh) {
    return ValueFunction({0.0, energy_mwh}, {0.0, slope * energy_mwh});
}

ValueFunction ValueFunction::from_slopes(std::vector<double> soc_breakpoints,
                                         std::span<const double> slopes, double value_at_zero) {
    if (soc_breakpoints.size() != slopes.size() + 1)
        throw ConfigError("from_slopes needs one slope per segment");
    std::vector<double> values(soc_breakpoints.size());
    values[0] = value_at_zero;
    for (std::size_t i = 0; i < slopes.size(); ++i)
        values[i + 1] = values[i] + slopes[i] * (soc_breakpoints[i + 1] - soc_breakpoints[i]);
    return ValueFunction(std::move(soc_breakpoints), std::move(values));
}

double ValueFunction::slope(std::size_t segment) const {
    return (val_[segment + 1] - val_[segment]) / (soc_[segment + 1] - soc_[segment]);
}

double ValueFunction::operator()(double e) const {
    if (e < soc_.front() - 1e-9 || e > soc_.back() + 1e-9)
        throw ConfigError(fmt::format("SoC {} outside value function domain [0, {}]", e, soc_.back()));
    e = std::clamp(e, soc_.front(), soc_.back());
    auto it = std::upper_bound(soc_.begin(), soc_.end(), e);
    std::size_t seg = (it == soc_.end()) ? soc_.size() - 2 : static_cast<std::size_t>(it - soc_.begin()) - 1;
    double t = (e - soc_[seg]) / (soc_[seg + 1] - soc_[seg]);
    return val_[seg] + t * (val_[seg + 1] - val_[seg]);
}

double ValueFunction::marginal(double e) const {
    if (e < soc_.front() - 1e-9 || e > soc_.back() + 1e-9)
        throw ConfigError(fmt::format("SoC {} outside value function domain [0, {}]", e, soc_.back()));
    e = std::clamp(e, soc_.front(), soc_.back());
    auto it = std::lower_bound(soc_.begin(), soc_.end(), e);
    if (it != soc_.end() && *it == e) {
        std::size_t idx = static_cast<std::size_t>(it - soc_.begin());
        if (idx == 0) return slope(0);           // first segment slope at e = 0
        return slope(idx - 1);                   // left-hand (maximum) subgradient at a kink
    }
    std::size_t seg = static_cast<std::size_t>(it - soc_.begin()) - 1;
    return slope(seg);
}

double ValueFunction::concavity_violation() const {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < segments(); ++i)
        worst = std::max(worst, slope(i + 1) - slope(i));
    return worst;
}

double BidCurve::total_quantity() const {
    double q = 0.0;
    for (const auto& s : segments) q += s.quantity_mw;
    return q;
}

double BidCurve::quantity_at(double price) const {
    double q = 0.0;
    for (const auto& s : segments) {
        const bool in = (side == BidSide::Discharge) ? s.price < price : s.price > price;
        if (in) q += s.quantity_mw;
    }
    return q;
}

double BidCurve::monotonicity_violation() const {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
        double step = segments[i + 1].price - segments[i].price;
        if (side == BidSide::Discharge)
            worst = std::max(worst, -step);  // prices must not decrease
        else
            worst = std::max(worst, step);   // prices must not increase
    }
    return worst;
}

void BidCurve::validate() const {
    for (const auto& s : segments) {
        if (!finite(s.quantity_mw) || s.quantity_mw < 0.0 || !finite(s.price))
            throw ConfigError("bid segment with negative quantity or non-finite price");
        if (side == BidSide::Discharge && s.price < 0.0)
            throw ConfigError("discharge offers must be non-negative");
    }
    if (monotonicity_violation() > 1e-9)
        throw ConfigError(fmt::format("{} curve breaks price monotonicity", to_string(side)));
}

std::string to_string(BidSide side) {
    return side == BidSide::Discharge ? "discharge" : "charge";
}

}  // namespace gridbid
