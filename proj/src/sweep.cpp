#include "gridbid/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <memory>
#include <mutex>
#include <thread>

#include "gridbid/rng.hpp"

namespace gridbid {

int worker_count() {
    if (const char* env = std::getenv("GRIDBID_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

double zero_soc_offer(const ValueSeries& series, const StorageSpec& spec) {
    const double v = series.at(1).marginal(0.0);
    return std::max(0.0, spec.marginal_cost + spec.step_hours / spec.efficiency * v);
}

}  // namespace

std::vector<SigmaSweepRow> sigma_sweep(double mu, std::span<const double> sigmas,
                                       const StorageSpec& spec, int horizon,
                                       const ValueEngineOptions& engine) {
    spec.validate();
    if (horizon < 1) throw ConfigError("sigma sweep needs a horizon of at least one period");
    std::vector<SigmaSweepRow> rows(sigmas.size());
    parallel_for(sigmas.size(), [&](std::size_t i) {
        std::vector<PriceDistribution> forecasts(
            static_cast<std::size_t>(horizon),
            sigmas[i] == 0.0 ? PriceDistribution::point_mass(mu)
                             : PriceDistribution::gaussian(mu, sigmas[i]));
        ValueSeries series = backward_induction(ValueFunction::linear(0.0, spec.energy_mwh),
                                                forecasts, spec, engine);
        rows[i] = {sigmas[i], zero_soc_offer(series, spec)};
    });
    return rows;
}

std::vector<BoundedSweepRow> bounded_sweep(std::span<const double> mu_path, PriceBounds bounds,
                                           std::span<const double> sigmas, const StorageSpec& spec,
                                           const ValueEngineOptions& engine) {
    spec.validate();
    bounds.validate();
    if (mu_path.empty()) throw ConfigError("bounded sweep needs a mean path");
    const int horizon = static_cast<int>(mu_path.size());
    std::vector<BoundedSweepRow> rows(sigmas.size());
    parallel_for(sigmas.size(), [&](std::size_t i) {
        std::vector<PriceDistribution> forecasts;
        std::vector<double> means;
        forecasts.reserve(mu_path.size());
        means.reserve(mu_path.size());
        for (double mu : mu_path) {
            PriceDistribution d =
                sigmas[i] == 0.0
                    ? PriceDistribution::point_mass(mu).truncate_normalize(bounds)
                    : PriceDistribution::bounded_uniform(mu, sigmas[i]).truncate_normalize(bounds);
            means.push_back(d.mean());
            forecasts.push_back(std::move(d));
        }
        const ValueFunction end_value = default_end_value(spec, &bounds);
        ValueSeries series = backward_induction(end_value, forecasts, spec, engine);
        const double v_t0 = end_value.marginal(0.0);
        rows[i] = {sigmas[i], zero_soc_offer(series, spec),
                   theorem2_bound(1, horizon, means, bounds, spec, v_t0).bound};
    });
    return rows;
}

std::vector<int> SweepResult::cost_argmin_rows() const {
    std::vector<int> rows;
    for (std::size_t j = 0; j < demand_sigmas.size(); ++j) {
        int best = 0;
        for (std::size_t i = 1; i < forecast_sigmas.size(); ++i)
            if (cost[i][j] < cost[static_cast<std::size_t>(best)][j]) best = static_cast<int>(i);
        rows.push_back(best);
    }
    return rows;
}

std::vector<int> SweepResult::profit_argmax_rows() const {
    std::vector<int> rows;
    for (std::size_t j = 0; j < demand_sigmas.size(); ++j) {
        int best = 0;
        for (std::size_t i = 1; i < forecast_sigmas.size(); ++i)
            if (profit[i][j] > profit[static_cast<std::size_t>(best)][j]) best = static_cast<int>(i);
        rows.push_back(best);
    }
    return rows;
}

SweepResult welfare_sweep(const Scenario& scenario, std::span<const double> demand_sigmas,
                          std::span<const double> forecast_sigmas, int draws, std::uint64_t seed,
                          const DayOptions& opts) {
    scenario.validate();
    if (draws < 1) throw ConfigError("welfare sweep needs at least one draw per cell");
    if (demand_sigmas.empty() || forecast_sigmas.empty())
        throw ConfigError("welfare sweep needs non-empty axes");

    SweepResult result;
    result.demand_sigmas.assign(demand_sigmas.begin(), demand_sigmas.end());
    result.forecast_sigmas.assign(forecast_sigmas.begin(), forecast_sigmas.end());
    result.draws = draws;
    result.seed = seed;
    const std::size_t rows = forecast_sigmas.size();
    const std::size_t cols = demand_sigmas.size();
    result.cost.assign(rows, std::vector<double>(cols, 0.0));
    result.profit.assign(rows, std::vector<double>(cols, 0.0));

    // One runner per forecast row; the commitment and value series inside are
    // independent of the demand axis.
    std::vector<std::unique_ptr<DayRunner>> runners(rows);
    parallel_for(rows, [&](std::size_t i) {
        std::vector<PriceDistribution> forecasts;
        forecasts.reserve(static_cast<std::size_t>(scenario.horizon));
        CommitmentSchedule cs = commit_dam(scenario);
        for (double mu : cs.da_price) {
            forecasts.push_back(forecast_sigmas[i] == 0.0
                                    ? PriceDistribution::point_mass(mu)
                                    : PriceDistribution::gaussian(mu, forecast_sigmas[i]));
        }
        runners[i] = std::make_unique<DayRunner>(scenario, std::move(forecasts),
                                                 scenario.storage.unit, opts);
    });

    // Demand draws are keyed by (seed, column, draw): common random numbers
    // across forecast rows within a column.
    const std::size_t tasks = rows * cols;
    parallel_for(tasks, [&](std::size_t task) {
        const std::size_t i = task / cols;
        const std::size_t j = task % cols;
        double cost_sum = 0.0, profit_sum = 0.0;
        for (int d = 0; d < draws; ++d) {
            const std::uint64_t day_seed = derive_seed(seed, j, static_cast<std::uint64_t>(d));
            DayResult day = runners[i]->run(day_seed, demand_sigmas[j]);
            cost_sum += day.system_cost;
            profit_sum += day.storage_profit;
        }
        result.cost[i][j] = cost_sum / draws;
        result.profit[i][j] = profit_sum / draws;
    });
    return result;
}

SlopeCheck slope_check(const Scenario& scenario, int n, std::uint64_t seed, bool uniform_draws) {
    scenario.validate();
    if (n < 3) throw ConfigError("slope check needs at least 3 clearings");
    if (scenario.demand_sigma <= 0.0)
        throw ConfigError("slope check needs a positive demand deviation (constant demand is degenerate)");

    CommitmentSchedule cs = commit_dam(scenario);
    SupplyCurve supply;
    for (std::size_t i = 0; i < cs.units; ++i) {
        if (!cs.on[i][0]) continue;
        const auto& gen = scenario.fleet[i];
        supply.add_block({i, gen.gmin, gen.gmax, gen.cost_a, gen.cost_b});
    }

    // Storage, when present, bids off a deterministic day-ahead-price value
    // series anchored at half capacity (stateless per clearing).
    std::vector<BidCurve> offers, bids;
    if (scenario.storage.count > 0) {
        const StorageSpec& unit = scenario.storage.unit;
        std::vector<PriceDistribution> das;
        for (double p : cs.da_price) das.push_back(PriceDistribution::point_mass(p));
        ValueSeries series =
            backward_induction(default_end_value(unit, &scenario.price_bounds), das, unit,
                               ValueEngineOptions{257});
        BidCurve offer = discharge_bids(series.at(1), unit.energy_mwh / 2.0, unit);
        BidCurve bid = charge_bids(series.at(1), unit.energy_mwh / 2.0, unit);
        for (auto& s : offer.segments) s.quantity_mw *= scenario.storage.count;
        for (auto& s : bid.segments) s.quantity_mw *= scenario.storage.count;
        offers.push_back(std::move(offer));
        bids.push_back(std::move(bid));
    }

    Rng rng(seed);
    const double base = cs.da_net_load[0];
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int k = 0; k < n; ++k) {
        const double dev = uniform_draws ? rng.uniform(-std::sqrt(3.0), std::sqrt(3.0)) : rng.normal();
        const double nd = std::max(0.0, base + scenario.demand_sigma * dev);
        ClearingResult r = clear_rtm(supply, offers, bids, nd, scenario.price_bounds);
        sx += nd;
        sy += r.price;
        sxx += nd * nd;
        syy += r.price * r.price;
        sxy += nd * r.price;
    }
    const double num = static_cast<double>(n);
    const double var_x = sxx - sx * sx / num;
    const double var_y = syy - sy * sy / num;
    const double cov = sxy - sx * sy / num;
    if (var_x <= 0.0) throw ConfigError("net demand draws are degenerate");
    SlopeCheck out;
    out.slope = cov / var_x;
    out.r_squared = var_y > 0.0 ? (cov * cov) / (var_x * var_y) : 1.0;
    out.clearings = n;
    return out;
}

double rank_correlation(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw ConfigError("rank correlation needs two equally sized sequences");
    auto ranks = [](std::span<const int> xs) {
        // average ranks for ties
        std::vector<double> r(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double less = 0.0, equal = 0.0;
            for (std::size_t j = 0; j < xs.size(); ++j) {
                if (xs[j] < xs[i]) ++less;
                if (xs[j] == xs[i]) ++equal;
            }
            r[i] = less + 0.5 * (equal + 1.0);
        }
        return r;
    };
    auto ra = ranks(a), rb = ranks(b);
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(ra.size());
    mb /= static_cast<double>(rb.size());
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) throw NumericError("rank correlation undefined for constant ranks");
    return cov / std::sqrt(va * vb);
}

}  // namespace gridbid
