#include "gridbid/market.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <limits>
#include <numeric>

#include "gridbid/rng.hpp"

namespace gridbid {

namespace {

double price_eps(double price) { return 1e-9 * std::max(1.0, std::abs(price)); }

}  // namespace

void GeneratorSpec::validate() const {
    if (!(gmin >= 0.0) || !(gmax >= gmin))
        throw ConfigError(fmt::format("generator '{}' needs 0 <= Gmin <= Gmax", name));
    if (gmax <= 0.0) throw ConfigError(fmt::format("generator '{}' has no capacity", name));
    if (cost_a < 0.0) throw ConfigError(fmt::format("generator '{}' cost must be convex (a >= 0)", name));
    if (ramp < 0.0 || no_load_cost < 0.0 || startup_cost < 0.0)
        throw ConfigError(fmt::format("generator '{}' has negative ramp or cost parameters", name));
    if (min_up < 1 || min_down < 1)
        throw ConfigError(fmt::format("generator '{}' needs min up/down >= 1 period", name));
}

void Scenario::validate() const {
    if (horizon < 1) throw ConfigError("scenario horizon must be >= 1");
    if (static_cast<int>(load.size()) != horizon)
        throw ConfigError(fmt::format("load path has {} entries for a {}-period day", load.size(), horizon));
    if (!wind_forecast.empty() && static_cast<int>(wind_forecast.size()) != horizon)
        throw ConfigError("wind forecast must be empty or cover the horizon");
    for (double l : load)
        if (!(l >= 0.0)) throw ConfigError("loads must be non-negative");
    for (double w : wind_forecast)
        if (!(w >= 0.0)) throw ConfigError("wind forecasts must be non-negative");
    if (fleet.empty()) throw ConfigError("scenario needs at least one generator");
    for (const auto& g : fleet) g.validate();
    if (storage.count < 0) throw ConfigError("storage fleet size must be >= 0");
    if (storage.count > 0) storage.unit.validate();
    if (demand_sigma < 0.0 || wind_dev_fraction < 0.0)
        throw ConfigError("uncertainty deviations must be non-negative");
    if (reserve_fraction < 0.0) throw ConfigError("reserve fraction must be non-negative");
    price_bounds.validate();
}

void SupplyCurve::add_block(Block blk) {
    if (blk.hi < blk.lo) throw ConfigError("supply block with hi < lo");
    blocks_.push_back(blk);
}

double SupplyCurve::min_quantity() const {
    double q = 0.0;
    for (const auto& b : blocks_) q += b.lo;
    return q;
}

double SupplyCurve::max_quantity() const {
    double q = 0.0;
    for (const auto& b : blocks_) q += b.hi;
    return q;
}

double SupplyCurve::quantity_at(double price, bool include_ties) const {
    double q = 0.0;
    for (const auto& blk : blocks_) {
        if (blk.a > 0.0) {
            q += std::clamp((price - blk.b) / (2.0 * blk.a), blk.lo, blk.hi);
        } else {
            const double eps = price_eps(blk.b);
            if (price > blk.b + eps)
                q += blk.hi;
            else if (price < blk.b - eps)
                q += blk.lo;
            else
                q += include_ties ? blk.hi : blk.lo;
        }
    }
    return q;
}

double SupplyCurve::min_marginal() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& blk : blocks_) m = std::min(m, blk.b + 2.0 * blk.a * blk.lo);
    return m;
}

double SupplyCurve::max_marginal() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& blk : blocks_) m = std::max(m, blk.b + 2.0 * blk.a * blk.hi);
    return m;
}

double SupplyCurve::marginal_at(double quantity) const {
    if (blocks_.empty()) throw InfeasibleError("no committed generation in supply curve");
    if (quantity <= min_quantity() + 1e-12) return min_marginal();
    if (quantity >= max_quantity() - 1e-12) return max_marginal();
    double lo = min_marginal(), hi = max_marginal();
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (quantity_at(mid, true) >= quantity)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

std::vector<double> SupplyCurve::dispatch(double quantity, std::size_t unit_count) const {
    std::vector<double> out(unit_count, 0.0);
    if (blocks_.empty()) return out;
    const double price = marginal_at(quantity);
    const double base = quantity_at(price, false);
    const double flex = quantity_at(price, true) - base;
    const double share = flex > 0.0 ? std::clamp((quantity - base) / flex, 0.0, 1.0) : 0.0;
    for (const auto& blk : blocks_) {
        double g;
        if (blk.a > 0.0) {
            g = std::clamp((price - blk.b) / (2.0 * blk.a), blk.lo, blk.hi);
        } else {
            const double eps = price_eps(blk.b);
            if (price > blk.b + eps)
                g = blk.hi;
            else if (price < blk.b - eps)
                g = blk.lo;
            else
                g = blk.lo + share * (blk.hi - blk.lo);
        }
        out[blk.unit] += g;
    }
    return out;
}

double SupplyCurve::energy_cost(double quantity) const {
    double cost = 0.0;
    const double price = marginal_at(quantity);
    const double base = quantity_at(price, false);
    const double flex = quantity_at(price, true) - base;
    const double share = flex > 0.0 ? std::clamp((quantity - base) / flex, 0.0, 1.0) : 0.0;
    for (const auto& blk : blocks_) {
        double g;
        if (blk.a > 0.0) {
            g = std::clamp((price - blk.b) / (2.0 * blk.a), blk.lo, blk.hi);
        } else {
            const double eps = price_eps(blk.b);
            g = price > blk.b + eps ? blk.hi : (price < blk.b - eps ? blk.lo : blk.lo + share * (blk.hi - blk.lo));
        }
        cost += (blk.a * g + blk.b) * g;
    }
    return cost;
}

SupplyCurve aggregate_supply(const CommitmentSchedule& committed,
                             std::span<const GeneratorSpec> fleet, int t,
                             std::span<const double> prev_output) {
    if (t < 0 || t >= committed.horizon) throw ConfigError("period outside commitment horizon");
    SupplyCurve curve;
    for (std::size_t i = 0; i < committed.units; ++i) {
        if (!committed.on[i][static_cast<std::size_t>(t)]) continue;
        const GeneratorSpec& gen = fleet[i];
        double lo = gen.gmin, hi = gen.gmax;
        if (committed.started[i][static_cast<std::size_t>(t)]) {
            hi = std::min(hi, gen.gmin + gen.ramp);
        } else {
            const double prev = !prev_output.empty()
                                    ? prev_output[i]
                                    : (t > 0 ? committed.dispatch[i][static_cast<std::size_t>(t) - 1]
                                             : gen.gmin);
            lo = std::max(lo, prev - gen.ramp);
            hi = std::min(hi, prev + gen.ramp);
            if (lo > hi) lo = hi = std::clamp(prev, gen.gmin, gen.gmax);
        }
        curve.add_block({i, lo, hi, gen.cost_a, gen.cost_b});
    }
    return curve;
}

namespace {

struct StorageLevels {
    double p_below = 0.0, p_at = 0.0;   // discharge MW below / at the price
    double b_above = 0.0, b_at = 0.0;   // charge MW above / at the price
};

StorageLevels storage_levels(std::span<const BidCurve> offers, std::span<const BidCurve> bids,
                             double price) {
    StorageLevels s;
    for (const auto& curve : offers) {
        for (const auto& seg : curve.segments) {
            const double eps = price_eps(seg.price);
            if (seg.price < price - eps)
                s.p_below += seg.quantity_mw;
            else if (seg.price <= price + eps)
                s.p_at += seg.quantity_mw;
        }
    }
    for (const auto& curve : bids) {
        for (const auto& seg : curve.segments) {
            const double eps = price_eps(seg.price);
            if (seg.price > price + eps)
                s.b_above += seg.quantity_mw;
            else if (seg.price >= price - eps)
                s.b_at += seg.quantity_mw;
        }
    }
    return s;
}

double excess_supply_max(const SupplyCurve& supply, std::span<const BidCurve> offers,
                         std::span<const BidCurve> bids, double net_demand, double price) {
    StorageLevels s = storage_levels(offers, bids, price);
    return supply.quantity_at(price, true) + s.p_below + s.p_at - s.b_above - net_demand;
}

}  // namespace

ClearingResult clear_rtm(const SupplyCurve& supply, std::span<const BidCurve> offers,
                         std::span<const BidCurve> bids, double net_demand, PriceBounds bounds,
                         double hours) {
    bounds.validate();
    if (!std::isfinite(net_demand)) throw ConfigError("net demand must be finite");
    for (const auto& c : offers)
        if (c.side != BidSide::Discharge) throw ConfigError("offer curve on the wrong side");
    for (const auto& c : bids)
        if (c.side != BidSide::Charge) throw ConfigError("bid curve on the wrong side");
    bool any_offer = std::any_of(offers.begin(), offers.end(),
                                 [](const BidCurve& c) { return c.total_quantity() > 0.0; });
    if (supply.empty() && !any_offer && net_demand > 1e-9)
        throw InfeasibleError("positive net demand with no committed generation and no storage offers");

    ClearingResult result;
    result.net_demand = net_demand;

    double price;
    if (excess_supply_max(supply, offers, bids, net_demand, bounds.cap) < -1e-9) {
        price = bounds.cap;   // scarcity: pin to the cap
        result.flag = 1;
    } else {
        double lo = bounds.floor, hi = bounds.cap;
        if (excess_supply_max(supply, offers, bids, net_demand, lo) >= 0.0) {
            price = bounds.floor;  // may be a floored surplus; allocation decides
        } else {
            for (int i = 0; i < 200; ++i) {
                double mid = 0.5 * (lo + hi);
                if (excess_supply_max(supply, offers, bids, net_demand, mid) >= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            price = hi;
        }
        // Snap to an exact candidate price when bisection landed next to one.
        double best = price, best_gap = 1e-6 * std::max(1.0, std::abs(price));
        auto consider = [&](double cand) {
            double gap = std::abs(cand - price);
            if (gap < best_gap &&
                excess_supply_max(supply, offers, bids, net_demand, cand) >= 0.0 && cand >= bounds.floor) {
                best = cand;
                best_gap = gap;
            }
        };
        for (const auto& c : offers)
            for (const auto& seg : c.segments) consider(seg.price);
        for (const auto& c : bids)
            for (const auto& seg : c.segments) consider(seg.price);
        for (std::size_t i = 0; i < supply.block_count(); ++i) {
            consider(supply.block(i).b + 2.0 * supply.block(i).a * supply.block(i).lo);
            consider(supply.block(i).b + 2.0 * supply.block(i).a * supply.block(i).hi);
        }
        price = best;
    }
    result.price = price;

    // Allocation at the clearing price. base = least net injection: minimum
    // generation, inframarginal discharge, all at-or-above charge accepted.
    StorageLevels s = storage_levels(offers, bids, price);
    const double g_min = supply.empty() ? 0.0 : supply.quantity_at(price, false);
    const double g_max = supply.empty() ? 0.0 : supply.quantity_at(price, true);
    double residual = net_demand - (g_min + s.p_below - s.b_above - s.b_at);

    double charge = s.b_above + s.b_at;
    double discharge = s.p_below;
    double gen = g_min;
    if (result.flag != 1 && residual >= 0.0) {
        const double cut_charge = std::min(residual, s.b_at);
        charge -= cut_charge;
        residual -= cut_charge;
        const double add_gen = std::min(residual, g_max - g_min);
        gen += add_gen;
        residual -= add_gen;
        const double add_dis = std::min(residual, s.p_at);
        discharge += add_dis;
        residual -= add_dis;
    } else if (result.flag == 1) {
        gen = g_max;
        discharge = s.p_below + s.p_at;
        charge = s.b_above;
        residual = net_demand - (gen + discharge - charge);
    }
    if (result.flag == 0 && price <= bounds.floor + price_eps(bounds.floor) && residual < -1e-9)
        result.flag = -1;  // floored surplus: minimum supply still exceeds demand

    // Degenerate dual at minimum generation: report the fleet's entry marginal
    // cost instead of the floor, unless a storage segment sits in between.
    if (result.flag == 0 && !supply.empty() && gen <= supply.min_quantity() + 1e-9 &&
        price < supply.min_marginal()) {
        const double lifted = std::min(supply.min_marginal(), bounds.cap);
        bool blocked = false;
        auto scan = [&](std::span<const BidCurve> curves) {
            for (const auto& c : curves)
                for (const auto& seg : c.segments)
                    if (seg.price > price + price_eps(price) && seg.price <= lifted) blocked = true;
        };
        scan(offers);
        scan(bids);
        if (!blocked) {
            price = lifted;
            result.price = price;
        }
    }

    result.gen_mw = gen;
    result.discharge_mw = discharge;
    result.charge_mw = charge;
    result.balance_residual = gen + discharge - charge - net_demand;

    // Per-unit generator outputs mirror the aggregate allocation.
    if (!supply.empty()) {
        const double flex = g_max - g_min;
        const double share = flex > 0.0 ? std::clamp((gen - g_min) / flex, 0.0, 1.0) : 0.0;
        std::size_t units = 0;
        for (std::size_t i = 0; i < supply.block_count(); ++i)
            units = std::max(units, supply.block(i).unit + 1);
        result.gen_outputs.assign(units, 0.0);
        double cost = 0.0;
        for (std::size_t i = 0; i < supply.block_count(); ++i) {
            const auto& blk = supply.block(i);
            double g;
            if (blk.a > 0.0) {
                g = std::clamp((price - blk.b) / (2.0 * blk.a), blk.lo, blk.hi);
                if (result.flag == 1) g = blk.hi;
            } else {
                const double eps = price_eps(blk.b);
                if (result.flag == 1)
                    g = blk.hi;
                else if (price > blk.b + eps)
                    g = blk.hi;
                else if (price < blk.b - eps)
                    g = blk.lo;
                else
                    g = blk.lo + share * (blk.hi - blk.lo);
            }
            result.gen_outputs[blk.unit] += g;
            cost += (blk.a * g + blk.b) * g;
        }
        result.gen_cost = cost * hours;
    }
    return result;
}

std::string CommitmentSchedule::logic_violation(std::span<const GeneratorSpec> fleet) const {
    for (std::size_t i = 0; i < units; ++i) {
        const auto& gen = fleet[i];
        int prev_on = 0;
        for (int t = 0; t < horizon; ++t) {
            const std::size_t ts = static_cast<std::size_t>(t);
            const int u = on[i][ts], y = started[i][ts], z = stopped[i][ts];
            if (y - z != u - prev_on)
                return fmt::format("unit {} period {}: start/stop does not match status change", i, t + 1);
            if (y + z > 1) return fmt::format("unit {} period {}: start and stop together", i, t + 1);
            if (reserve[i][ts] < -1e-9 ||
                reserve[i][ts] > std::min(gen.gmax * u - dispatch[i][ts], gen.ramp) + 1e-6)
                return fmt::format("unit {} period {}: reserve outside headroom", i, t + 1);
            if (u && (dispatch[i][ts] < gen.gmin - 1e-6 || dispatch[i][ts] > gen.gmax + 1e-6))
                return fmt::format("unit {} period {}: dispatch outside [Gmin, Gmax]", i, t + 1);
            if (!u && dispatch[i][ts] != 0.0)
                return fmt::format("unit {} period {}: output while offline", i, t + 1);
            prev_on = u;
        }
        // minimum up time: every completed on-run must be long enough
        int run = 0;
        for (int t = 0; t <= horizon; ++t) {
            const bool on_t = t < horizon && on[i][static_cast<std::size_t>(t)];
            if (on_t) {
                ++run;
            } else {
                if (run > 0 && run < gen.min_up && t < horizon)
                    return fmt::format("unit {} violates min up time ({} < {})", i, run, gen.min_up);
                run = 0;
            }
        }
        // minimum down time: off-gaps between on-runs must be long enough
        int gap = 0;
        bool seen_on = false;
        for (int t = 0; t < horizon; ++t) {
            if (on[i][static_cast<std::size_t>(t)]) {
                if (seen_on && gap > 0 && gap < gen.min_down)
                    return fmt::format("unit {} violates min down time ({} < {})", i, gap, gen.min_down);
                seen_on = true;
                gap = 0;
            } else if (seen_on) {
                ++gap;
            }
        }
    }
    for (int t = 0; t < horizon; ++t) {
        double total = 0.0;
        for (std::size_t i = 0; i < units; ++i) total += reserve[i][static_cast<std::size_t>(t)];
        if (total < da_reserve_req[static_cast<std::size_t>(t)] - 1e-6)
            return fmt::format("period {}: reserve requirement unmet", t + 1);
    }
    return {};
}

CommitmentSchedule commit_dam(const Scenario& sc) {
    sc.validate();
    const int horizon = sc.horizon;
    const std::size_t n = sc.fleet.size();

    CommitmentSchedule cs;
    cs.horizon = horizon;
    cs.units = n;
    auto zeros_u8 = std::vector<std::uint8_t>(static_cast<std::size_t>(horizon), 0);
    auto zeros = std::vector<double>(static_cast<std::size_t>(horizon), 0.0);
    cs.on.assign(n, zeros_u8);
    cs.started.assign(n, zeros_u8);
    cs.stopped.assign(n, zeros_u8);
    cs.dispatch.assign(n, zeros);
    cs.reserve.assign(n, zeros);
    cs.da_price = zeros;
    cs.da_net_load = zeros;
    cs.da_wind = zeros;
    cs.da_reserve_req = zeros;

    // Scheduled wind and net load; wind is free energy capped by the load.
    std::vector<double> wind(static_cast<std::size_t>(horizon), 0.0);
    std::vector<double> net(static_cast<std::size_t>(horizon), 0.0);
    std::vector<double> resv(static_cast<std::size_t>(horizon), 0.0);
    for (int t = 0; t < horizon; ++t) {
        const std::size_t ts = static_cast<std::size_t>(t);
        const double w = sc.wind_forecast.empty() ? 0.0 : sc.wind_forecast[ts];
        wind[ts] = std::min(w, sc.load[ts]);
        net[ts] = sc.load[ts] - wind[ts];
        resv[ts] = sc.reserve_fraction * wind[ts];
    }

    // Priority list: average cost at full output, including no-load.
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        const auto& ga = sc.fleet[a];
        const auto& gb = sc.fleet[b];
        return (ga.energy_cost(ga.gmax) + ga.no_load_cost) / ga.gmax <
               (gb.energy_cost(gb.gmax) + gb.no_load_cost) / gb.gmax;
    });

    auto capacity_at = [&](int t) {
        double cap = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (cs.on[i][static_cast<std::size_t>(t)]) cap += sc.fleet[i].gmax;
        return cap;
    };
    auto commit_next = [&](int t) -> bool {
        for (std::size_t idx : rank) {
            if (!cs.on[idx][static_cast<std::size_t>(t)]) {
                cs.on[idx][static_cast<std::size_t>(t)] = 1;
                return true;
            }
        }
        return false;
    };

    std::vector<int> shortfall;
    for (int t = 0; t < horizon; ++t) {
        while (capacity_at(t) < net[static_cast<std::size_t>(t)] + resv[static_cast<std::size_t>(t)] - 1e-9) {
            if (!commit_next(t)) {
                shortfall.push_back(t + 1);
                break;
            }
        }
    }
    if (!shortfall.empty())
        throw InfeasibleError(fmt::format("fleet cannot cover peak net load plus reserve in periods [{}]",
                                          fmt::join(shortfall, ", ")));

    // Min up/down repair: only ever adds commitment, so coverage is kept.
    auto repair = [&]() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& gen = sc.fleet[i];
                // fill off-gaps shorter than min down (leading gap exempt)
                int t = 0;
                bool seen_on = false;
                while (t < horizon) {
                    if (cs.on[i][static_cast<std::size_t>(t)]) {
                        seen_on = true;
                        ++t;
                        continue;
                    }
                    int start = t;
                    while (t < horizon && !cs.on[i][static_cast<std::size_t>(t)]) ++t;
                    const bool interior = seen_on && t < horizon;
                    if (interior && t - start < gen.min_down) {
                        for (int k = start; k < t; ++k) cs.on[i][static_cast<std::size_t>(k)] = 1;
                        changed = true;
                    }
                }
                // extend on-runs shorter than min up
                t = 0;
                while (t < horizon) {
                    if (!cs.on[i][static_cast<std::size_t>(t)]) {
                        ++t;
                        continue;
                    }
                    int start = t;
                    while (t < horizon && cs.on[i][static_cast<std::size_t>(t)]) ++t;
                    int run = t - start;
                    if (run < gen.min_up && t < horizon) {
                        int need = std::min(horizon, start + gen.min_up);
                        for (int k = t; k < need; ++k) cs.on[i][static_cast<std::size_t>(k)] = 1;
                        changed = true;
                    } else if (run < gen.min_up) {  // run touches the horizon end: extend backward
                        int need = std::max(0, t - gen.min_up);
                        for (int k = need; k < start; ++k) cs.on[i][static_cast<std::size_t>(k)] = 1;
                        changed = true;
                    }
                }
            }
        }
    };
    repair();

    // Sequential economic dispatch with ramp windows and the reserve link;
    // restart after any extra commitment.
    auto run_dispatch = [&]() -> bool {  // true when the schedule settled
        std::vector<double> prev(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) prev[i] = sc.fleet[i].gmin;
        for (std::size_t i = 0; i < n; ++i) {
            int prev_on = 0;
            for (int t = 0; t < horizon; ++t) {
                const std::size_t ts = static_cast<std::size_t>(t);
                cs.started[i][ts] = static_cast<std::uint8_t>(cs.on[i][ts] && !prev_on);
                cs.stopped[i][ts] = static_cast<std::uint8_t>(!cs.on[i][ts] && prev_on);
                prev_on = cs.on[i][ts];
            }
        }
        for (int t = 0; t < horizon; ++t) {
            const std::size_t ts = static_cast<std::size_t>(t);
            SupplyCurve curve;
            for (std::size_t i = 0; i < n; ++i) {
                if (!cs.on[i][ts]) continue;
                const auto& gen = sc.fleet[i];
                double lo = gen.gmin, hi = gen.gmax;
                if (cs.started[i][ts]) {
                    hi = std::min(hi, gen.gmin + gen.ramp);
                } else {
                    lo = std::max(lo, prev[i] - gen.ramp);
                    hi = std::min(hi, prev[i] + gen.ramp);
                    if (lo > hi) lo = hi = std::clamp(prev[i], gen.gmin, gen.gmax);
                }
                curve.add_block({i, lo, hi, gen.cost_a, gen.cost_b});
            }
            if (curve.empty() || curve.max_quantity() < net[ts] - 1e-9) {
                if (!commit_next(t))
                    throw InfeasibleError(fmt::format(
                        "ramp-limited fleet cannot serve period {} net load {}", t + 1, net[ts]));
                repair();
                return false;
            }
            if (curve.min_quantity() > net[ts] + 1e-9) {
                // over-committed valley: curtail scheduled wind to absorb it
                double cut = curve.min_quantity() - net[ts];
                if (cut > wind[ts] + 1e-9)
                    throw InfeasibleError(fmt::format(
                        "minimum generation exceeds load in period {} even with wind fully curtailed", t + 1));
                wind[ts] -= cut;
                net[ts] += cut;
                resv[ts] = sc.reserve_fraction * wind[ts];
            }
            auto outputs = curve.dispatch(net[ts], n);
            // reserve: headroom limited by capacity and ramp
            double have = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (cs.on[i][ts])
                    have += std::min(sc.fleet[i].gmax - outputs[i], sc.fleet[i].ramp);
            if (have < resv[ts] - 1e-9) {
                if (!commit_next(t))
                    throw InfeasibleError(fmt::format("reserve requirement unmet in period {}", t + 1));
                repair();
                return false;
            }
            double need = resv[ts];
            for (std::size_t ri : rank) {
                if (!cs.on[ri][ts] || need <= 0.0) {
                    cs.reserve[ri][ts] = 0.0;
                    continue;
                }
                double r = std::min({sc.fleet[ri].gmax - outputs[ri], sc.fleet[ri].ramp, need});
                cs.reserve[ri][ts] = std::max(0.0, r);
                need -= cs.reserve[ri][ts];
            }
            for (std::size_t i = 0; i < n; ++i) {
                cs.dispatch[i][ts] = cs.on[i][ts] ? outputs[i] : 0.0;
                if (cs.on[i][ts]) prev[i] = outputs[i];
            }
            cs.da_price[ts] = curve.marginal_at(net[ts]);
            cs.da_net_load[ts] = net[ts];
            cs.da_wind[ts] = wind[ts];
            cs.da_reserve_req[ts] = resv[ts];
        }
        return true;
    };
    const int max_rounds = static_cast<int>(n) * horizon + 4;
    for (int round = 0;; ++round) {
        if (round >= max_rounds) throw NumericError("day-ahead commitment failed to stabilize");
        if (run_dispatch()) break;
    }

    // Day-ahead storage participation: one deterministic arbitrage pass
    // against the first-pass prices, then reprice with the shifted net load.
    if (sc.storage.in_day_ahead && sc.storage.count > 0) {
        const StorageSpec& unit = sc.storage.unit;
        std::vector<PriceDistribution> das;
        das.reserve(static_cast<std::size_t>(horizon));
        for (double p : cs.da_price) das.push_back(PriceDistribution::point_mass(p));
        ValueSeries series = backward_induction(ValueFunction::linear(0.0, unit.energy_mwh), das, unit,
                                                ValueEngineOptions{257});
        const double count = static_cast<double>(sc.storage.count);
        double soc = 0.0;
        for (int t = 0; t < horizon; ++t) {
            const std::size_t ts = static_cast<std::size_t>(t);
            const auto& vf = series.at(t + 1);
            const double lambda = cs.da_price[ts];
            const double p = discharge_bids(vf, soc, unit, 1).quantity_at(lambda);
            const double b = charge_bids(vf, soc, unit, 1).quantity_at(lambda);
            net[ts] += (b - p) * count;
            soc = std::clamp(soc + (-p / unit.efficiency + b * unit.efficiency) * unit.step_hours,
                             0.0, unit.energy_mwh);
        }
        for (int round = 0;; ++round) {
            if (round >= max_rounds) throw NumericError("day-ahead repricing failed to stabilize");
            if (run_dispatch()) break;
        }
    }

    // Costs: heuristic total and the relaxed-dispatch lower bound.
    double total = 0.0;
    for (int t = 0; t < horizon; ++t) {
        const std::size_t ts = static_cast<std::size_t>(t);
        for (std::size_t i = 0; i < n; ++i) {
            if (cs.on[i][ts])
                total += sc.fleet[i].energy_cost(cs.dispatch[i][ts]) + sc.fleet[i].no_load_cost;
            if (cs.started[i][ts]) total += sc.fleet[i].startup_cost;
        }
    }
    cs.commitment_cost = total;
    double lb = 0.0;
    for (int t = 0; t < horizon; ++t) {
        SupplyCurve relaxed;
        for (std::size_t i = 0; i < n; ++i)
            relaxed.add_block({i, 0.0, sc.fleet[i].gmax, sc.fleet[i].cost_a, sc.fleet[i].cost_b});
        lb += relaxed.energy_cost(std::min(net[static_cast<std::size_t>(t)], relaxed.max_quantity()));
    }
    cs.dispatch_lower_bound = lb;
    return cs;
}

DayRunner::DayRunner(Scenario scenario, std::vector<PriceDistribution> forecasts, StorageSpec spec,
                     DayOptions opts)
    : scenario_(std::move(scenario)),
      forecasts_(std::move(forecasts)),
      spec_(spec),
      opts_(opts) {
    scenario_.validate();
    if (static_cast<int>(forecasts_.size()) != scenario_.horizon)
        throw ConfigError("forecasts must cover every period of the scenario");
    commitment_ = commit_dam(scenario_);
    if (scenario_.storage.count > 0) {
        spec_.validate();
        ValueFunction end_value = opts_.end_slope
                                      ? ValueFunction::linear(*opts_.end_slope, spec_.energy_mwh)
                                      : default_end_value(spec_, &scenario_.price_bounds);
        try {
            series_ = backward_induction(end_value, forecasts_, spec_, opts_.engine);
        } catch (const std::exception& err) {
            throw NumericError(fmt::format("value recursion failed: {}", err.what()));
        }
    }
}

DayResult DayRunner::run(std::uint64_t seed, double demand_sigma) const {
    const Scenario& sc = scenario_;
    const CommitmentSchedule& cs = commitment_;
    const double sigma_d = demand_sigma >= 0.0 ? demand_sigma : sc.demand_sigma;
    const bool has_storage = sc.storage.count > 0;

    DayResult day;
    day.commitment = cs;

    Rng rng(seed);
    double soc = opts_.initial_soc;
    const double n_units = static_cast<double>(sc.storage.count);
    std::vector<double> prev(cs.units, 0.0);
    for (std::size_t i = 0; i < cs.units; ++i) prev[i] = cs.dispatch[i][0];

    double price_sum = 0.0;
    for (int t = 0; t < sc.horizon; ++t) {
        const std::size_t ts = static_cast<std::size_t>(t);
        const double z = rng.normal();
        double available_wind, net_demand;
        if (sc.wind_dev_fraction > 0.0) {
            const double forecast = sc.wind_forecast.empty() ? 0.0 : sc.wind_forecast[ts];
            available_wind = std::max(0.0, forecast * (1.0 + sc.wind_dev_fraction * z));
            net_demand = sc.load[ts] - available_wind;
        } else {
            available_wind = cs.da_wind[ts];
            net_demand = std::max(0.0, cs.da_net_load[ts] + sigma_d * z);
        }

        SupplyCurve supply = aggregate_supply(cs, sc.fleet, t, prev);

        std::vector<BidCurve> offers, bids;
        if (has_storage) {
            const auto& vf = series_.at(t + 1);
            BidCurve offer = discharge_bids(vf, soc, spec_, opts_.bid_segments);
            BidCurve bid = charge_bids(vf, soc, spec_, opts_.bid_segments);
            for (auto& s : offer.segments) s.quantity_mw *= n_units;
            for (auto& s : bid.segments) s.quantity_mw *= n_units;
            offers.push_back(std::move(offer));
            bids.push_back(std::move(bid));
        }

        ClearingResult r;
        try {
            r = clear_rtm(supply, offers, bids, net_demand, sc.price_bounds, spec_.step_hours);
            if (r.flag == -1 && r.balance_residual > 1e-9) {
                // floored surplus: curtail wind and clear once more
                const double cut = std::min(r.balance_residual, available_wind);
                r = clear_rtm(supply, offers, bids, net_demand + cut, sc.price_bounds, spec_.step_hours);
                r.wind_curtailed_mw = cut;
            }
        } catch (const std::exception& err) {
            throw InfeasibleError(fmt::format("period {}: {}", t + 1, err.what()));
        }
        r.period = t + 1;

        const double tau = spec_.step_hours;
        const double p_unit = has_storage ? r.discharge_mw / n_units : 0.0;
        const double b_unit = has_storage ? r.charge_mw / n_units : 0.0;
        if (has_storage) {
            soc += (-p_unit / spec_.efficiency + b_unit * spec_.efficiency) * tau;
            soc = std::clamp(soc, 0.0, spec_.energy_mwh);
        }
        r.soc_after = soc;
        r.storage_profit = (r.price * (r.discharge_mw - r.charge_mw) -
                            spec_.marginal_cost * r.discharge_mw) * tau;
        r.system_cost = r.gen_cost + spec_.marginal_cost * r.discharge_mw * tau;

        day.system_cost += r.system_cost;
        day.storage_profit += r.storage_profit;
        price_sum += r.price;
        for (std::size_t i = 0; i < cs.units && i < r.gen_outputs.size(); ++i)
            if (cs.on[i][ts]) prev[i] = r.gen_outputs[i];
        day.periods.push_back(std::move(r));
    }
    day.realized_mean_price = price_sum / sc.horizon;
    return day;
}

DayResult simulate_day(const Scenario& scenario, std::span<const PriceDistribution> forecasts,
                       const StorageSpec& spec, std::uint64_t seed, const DayOptions& opts) {
    DayRunner runner(scenario, {forecasts.begin(), forecasts.end()}, spec, opts);
    return runner.run(seed);
}

}  // namespace gridbid
