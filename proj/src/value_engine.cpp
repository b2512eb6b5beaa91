#include "gridbid/value.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

// Bellman-step internals.
//
// For a fixed starting SoC e, every candidate post-action SoC e' defines the
// profit as a *line* in the realized price lambda:
//   discharge to e' < e:  p = (e - e') eta / tau,   value = (lambda - c) p + V(e')
//   charge to e' > e:     b = (e' - e) / (tau eta), value = -lambda b + V(e')
//   idle:                                           value = V(e)
// The per-realization optimum Q(e | lambda) is the upper envelope of those
// lines, and candidates can be restricted to the kinks of V plus the power
// window edges without loss (the objective is piecewise linear in e').
// Slopes are strictly decreasing in e', so the envelope is built with a
// single monotone stack pass, and E[Q] comes from integrating each envelope
// piece against the price model in closed form. Discharge lines are excluded
// for lambda < 0 (the negative-price discharge indicator), so negative mass
// is integrated against a second, charge/idle-only envelope.

namespace gridbid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Line {
    double slope = 0.0;   // MW dispatched (positive discharge, negative charge)
    double icept = 0.0;   // $ at lambda = 0
    double at(double lambda) const { return slope * lambda + icept; }
};

// Upper envelope of lines, stored left to right in lambda. from[k] is the
// lambda at which line k becomes active; from[0] = -inf.
struct Envelope {
    std::vector<Line> lines;
    std::vector<double> from;

    void clear() {
        lines.clear();
        from.clear();
    }

    // Lines must be pushed in strictly increasing slope order.
    void push(const Line& l) {
        while (!lines.empty()) {
            const Line& top = lines.back();
            if (l.slope == top.slope) {
                if (l.icept <= top.icept) return;
                lines.pop_back();
                from.pop_back();
                continue;
            }
            double x = (top.icept - l.icept) / (l.slope - top.slope);
            if (x <= from.back()) {
                lines.pop_back();
                from.pop_back();
                continue;
            }
            lines.push_back(l);
            from.push_back(x);
            return;
        }
        lines.push_back(l);
        from.push_back(-kInf);
    }

    double eval(double lambda) const {
        auto it = std::upper_bound(from.begin(), from.end(), lambda);
        std::size_t k = static_cast<std::size_t>(it - from.begin()) - 1;
        return lines[k].at(lambda);
    }

    // Expectation of the envelope restricted to (lo, hi] under dist.
    double integrate(const PriceDistribution& dist, double lo, double hi) const {
        double total = 0.0;
        for (std::size_t k = 0; k < lines.size(); ++k) {
            double l = std::max(from[k], lo);
            double u = std::min(k + 1 < lines.size() ? from[k + 1] : kInf, hi);
            if (u <= l) continue;
            SegmentMoments m = dist.segment_moments(l, u);
            total += lines[k].slope * m.first + lines[k].icept * m.mass;
        }
        return total;
    }
};

class BellmanStep {
  public:
    BellmanStep(const ValueFunction& vf_next, const PriceDistribution& dist,
                const StorageSpec& spec)
        : vf_(vf_next), dist_(dist), spec_(spec) {
        if (std::abs(vf_next.energy() - spec.energy_mwh) > 1e-9 * std::max(1.0, spec.energy_mwh))
            throw ConfigError(fmt::format("value function domain [0, {}] does not match capacity {}",
                                          vf_next.energy(), spec.energy_mwh));
        discrete_ = dist.is_discrete();
        if (discrete_) atoms_ = dist.atoms();
    }

    double value_at(double e) {
        build_envelopes(e);
        if (discrete_) {
            double v = 0.0;
            for (const Atom& a : atoms_)
                v += a.weight * (a.value < 0.0 ? no_discharge_.eval(a.value) : all_.eval(a.value));
            return v;
        }
        return no_discharge_.integrate(dist_, -kInf, 0.0) + all_.integrate(dist_, 0.0, kInf);
    }

  private:
    void push_candidate(double e, double ep) {
        if (ep == last_candidate_) return;
        last_candidate_ = ep;
        Line l;
        if (ep < e) {  // discharge
            l.slope = (e - ep) * spec_.efficiency / spec_.step_hours;
            l.icept = -spec_.marginal_cost * l.slope + vf_(ep);
        } else if (ep > e) {  // charge
            l.slope = -(ep - e) / (spec_.step_hours * spec_.efficiency);
            l.icept = vf_(ep);
        } else {  // idle
            l.slope = 0.0;
            l.icept = vf_(ep);
        }
        pending_.push_back(l);
    }

    void build_envelopes(double e) {
        const double lo = std::max(0.0, e - spec_.drain_increment());
        const double hi = std::min(vf_.energy(), e + spec_.charge_increment());
        pending_.clear();
        last_candidate_ = -kInf;

        auto soc = vf_.soc();
        push_candidate(e, lo);
        auto first = std::upper_bound(soc.begin(), soc.end(), lo);
        for (auto it = first; it != soc.end() && *it < hi; ++it) {
            if (*it > e && last_candidate_ < e) push_candidate(e, e);
            push_candidate(e, *it);
        }
        if (last_candidate_ < e) push_candidate(e, e);
        push_candidate(e, hi);

        // Candidates ascend in e', so slopes descend; feed them in reverse.
        all_.clear();
        no_discharge_.clear();
        for (std::size_t i = pending_.size(); i-- > 0;) {
            all_.push(pending_[i]);
            if (pending_[i].slope <= 0.0) no_discharge_.push(pending_[i]);
        }
    }

    const ValueFunction& vf_;
    const PriceDistribution& dist_;
    const StorageSpec& spec_;
    bool discrete_ = false;
    std::vector<Atom> atoms_;
    std::vector<Line> pending_;
    double last_candidate_ = -kInf;
    Envelope all_;
    Envelope no_discharge_;
};

}  // namespace

double q_zero_soc(double lambda, double v_next_ec, double v_next_0, const StorageSpec& spec) {
    spec.validate();
    if (!(v_next_ec >= 0.0) || !(v_next_0 >= v_next_ec))
        throw ConfigError(fmt::format(
            "q_zero_soc needs v_next_0 >= v_next_ec >= 0, got ({}, {})", v_next_0, v_next_ec));
    const double eta = spec.efficiency;
    const double tau = spec.step_hours;
    const double c = spec.marginal_cost;
    if (lambda <= v_next_ec * tau * eta) return v_next_ec;
    if (lambda <= v_next_0 * tau * eta) return lambda / (tau * eta);
    const double top = std::max(0.0, v_next_0 * tau / eta + c);
    if (lambda <= top) return v_next_0;
    return (lambda - c) * eta / tau;
}

ValueFunction bellman_step(const ValueFunction& vf_next, const PriceDistribution& dist,
                           const StorageSpec& spec, const ValueEngineOptions& opts) {
    spec.validate();
    if (opts.grid_points < 2) throw ConfigError("SoC grid needs at least 2 points");

    BellmanStep step(vf_next, dist, spec);
    const std::size_t n = static_cast<std::size_t>(opts.grid_points);
    std::vector<double> grid(n), values(n);
    const double h = spec.energy_mwh / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = (i + 1 == n) ? spec.energy_mwh : static_cast<double>(i) * h;
        values[i] = step.value_at(grid[i]);
        if (!std::isfinite(values[i]))
            throw NumericError(fmt::format(
                "expectation integral diverged at SoC {} for {} forecast (mean {}, sigma {})",
                grid[i], to_string(dist.kind()), dist.declared_mean(), dist.declared_sigma()));
    }
    return ValueFunction(std::move(grid), std::move(values));
}

ValueSeries backward_induction(const ValueFunction& end_value,
                               std::span<const PriceDistribution> forecasts,
                               const StorageSpec& spec, const ValueEngineOptions& opts) {
    if (forecasts.empty()) throw ConfigError("backward induction needs a horizon of T >= 1 periods");
    if (!end_value.is_concave(1e-9))
        throw ConfigError(fmt::format("end value function is not concave (violation {})",
                                      end_value.concavity_violation()));
    const int horizon = static_cast<int>(forecasts.size());
    ValueSeries series;
    series.functions.resize(static_cast<std::size_t>(horizon) + 1);
    series.functions[static_cast<std::size_t>(horizon)] = end_value;
    for (int t = horizon - 1; t >= 0; --t) {
        try {
            series.functions[static_cast<std::size_t>(t)] =
                bellman_step(series.functions[static_cast<std::size_t>(t) + 1],
                             forecasts[static_cast<std::size_t>(t)], spec, opts);
        } catch (const std::exception& err) {
            throw NumericError(fmt::format("backward induction failed at period {}: {}", t + 1, err.what()));
        }
    }
    return series;
}

ValueFunction default_end_value(const StorageSpec& spec, const PriceBounds* bounds) {
    double slope = 0.0;
    if (bounds != nullptr)
        slope = std::max(0.0, bounds->floor - spec.marginal_cost) * spec.efficiency;
    return ValueFunction::linear(slope, spec.energy_mwh);
}

}  // namespace gridbid
