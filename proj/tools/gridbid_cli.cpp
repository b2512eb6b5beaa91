// Command-line front end: every subcommand reads a JSON config and writes
// CSV/JSON tables (with config-hash/seed/version provenance columns) into an
// output directory. Exit codes: 0 success, 1 config error, 2 infeasibility,
// 3 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "gridbid/config.hpp"
#include "gridbid/io.hpp"
#include "gridbid/sweep.hpp"

using namespace gridbid;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool emit_plot_data = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "JSON config file")->required();
    cmd->add_option("-o,--out", args.out_dir, "output directory");
    cmd->add_option("-s,--seed", args.seed, "master seed");
    cmd->add_flag("--emit-plot-data", args.emit_plot_data, "write heatmap-ready long-format CSV");
}

struct Loaded {
    Json cfg;
    Provenance prov;
    fs::path out;
};

Loaded load(const CommonArgs& args) {
    std::ifstream raw(args.config_path, std::ios::binary);
    if (!raw) throw ConfigError(fmt::format("cannot open config file '{}'", args.config_path));
    std::stringstream ss;
    ss << raw.rdbuf();
    Loaded l;
    l.cfg = load_config(args.config_path);
    l.prov = Provenance{config_hash(ss.str()), args.seed, kVersion};
    l.out = fs::path(args.out_dir);
    fs::create_directories(l.out);
    return l;
}

StorageSpec storage_from(const Json& cfg) {
    if (!cfg.contains("storage")) throw ConfigError("config needs a 'storage' section");
    return cfg.at("storage").get<StorageSpec>();
}

ValueEngineOptions engine_from(const Json& cfg) {
    ValueEngineOptions opts;
    opts.grid_points = cfg.value("grid_points", opts.grid_points);
    return opts;
}

ValueFunction end_value_from(const Json& cfg, const StorageSpec& spec) {
    if (cfg.contains("end_slope"))
        return ValueFunction::linear(cfg.at("end_slope").get<double>(), spec.energy_mwh);
    if (cfg.contains("bounds")) {
        PriceBounds b = cfg.at("bounds").get<PriceBounds>();
        return default_end_value(spec, &b);
    }
    return default_end_value(spec);
}

void write_xy_plot(const fs::path& path, const std::string& xname, const std::string& yname,
                   std::span<const double> xs, std::span<const double> ys, const Provenance& prov) {
    CsvWriter csv(path, xname + "," + yname, prov);
    for (std::size_t i = 0; i < xs.size(); ++i) csv.row({dtos(xs[i]), dtos(ys[i])});
}

int run_value_fn(const CommonArgs& args) {
    Loaded l = load(args);
    StorageSpec spec = storage_from(l.cfg);
    auto forecasts = forecasts_from_config(l.cfg);
    ValueSeries series =
        backward_induction(end_value_from(l.cfg, spec), forecasts, spec, engine_from(l.cfg));
    write_value_series_csv(l.out / "value_fn.csv", series, l.prov);
    return 0;
}

int run_bids(const CommonArgs& args) {
    Loaded l = load(args);
    StorageSpec spec = storage_from(l.cfg);
    auto forecasts = forecasts_from_config(l.cfg);
    ValueSeries series =
        backward_induction(end_value_from(l.cfg, spec), forecasts, spec, engine_from(l.cfg));
    const double anchor = l.cfg.value("anchor_soc", 0.0);
    const int k = l.cfg.value("bid_segments", kDefaultBidSegments);
    std::vector<std::pair<int, BidCurve>> curves;
    for (int t = 1; t <= series.horizon(); ++t) {
        curves.emplace_back(t, discharge_bids(series.at(t), anchor, spec, k));
        curves.emplace_back(t, charge_bids(series.at(t), anchor, spec, k));
    }
    write_bid_curves_csv(l.out / "bids.csv", curves, l.prov);
    return 0;
}

int run_bounds(const CommonArgs& args) {
    Loaded l = load(args);
    StorageSpec spec = storage_from(l.cfg);
    PriceBounds bounds = l.cfg.at("bounds").get<PriceBounds>();
    std::vector<double> mu_path = l.cfg.at("mu_path").get<std::vector<double>>();
    const double v_t0 = l.cfg.value("end_slope", default_end_value(spec, &bounds).marginal(0.0));
    const int horizon = static_cast<int>(mu_path.size());
    std::vector<BoundBreakdown> rows;
    for (int t = 0; t < horizon; ++t)
        rows.push_back(theorem2_bound(t, horizon, mu_path, bounds, spec, v_t0));
    write_bounds_csv(l.out / "bounds.csv", rows, l.prov);
    if (l.cfg.contains("corollary4")) {
        const Json& c4 = l.cfg.at("corollary4");
        const double bound =
            corollary4_bound(c4.value("horizon", horizon), c4.at("mu_cap").get<double>(), bounds,
                             spec, c4.value("rho", 1.0), c4.value("end_value", v_t0));
        nlohmann::json j{{"corollary4_bound", bound},
                         {"config_hash", l.prov.config_hash},
                         {"seed", l.prov.seed},
                         {"version", l.prov.version}};
        std::ofstream out(l.out / "corollary4.json", std::ios::binary);
        out << j.dump(2) << "\n";
    }
    return 0;
}

int run_clear(const CommonArgs& args) {
    Loaded l = load(args);
    Scenario sc = l.cfg.at("scenario").get<Scenario>();
    auto cs = commit_dam(sc);
    const Json& clear_cfg = l.cfg.at("clear");
    const int period = clear_cfg.value("period", 1);
    const double net_demand = clear_cfg.at("net_demand").get<double>();
    SupplyCurve supply = aggregate_supply(cs, sc.fleet, period - 1);
    std::vector<BidCurve> offers, bids;
    if (sc.storage.count > 0 && l.cfg.contains("forecast")) {
        StorageSpec unit = sc.storage.unit;
        Json day_cfg = l.cfg;
        day_cfg["mu_path"] = cs.da_price;
        auto forecasts = forecasts_from_config(day_cfg);
        ValueSeries series = backward_induction(default_end_value(unit, &sc.price_bounds),
                                                forecasts, unit, engine_from(l.cfg));
        const double anchor = l.cfg.value("anchor_soc", 0.0);
        const int k = l.cfg.value("bid_segments", kDefaultBidSegments);
        BidCurve offer = discharge_bids(series.at(period), anchor, unit, k);
        BidCurve bid = charge_bids(series.at(period), anchor, unit, k);
        for (auto& s : offer.segments) s.quantity_mw *= sc.storage.count;
        for (auto& s : bid.segments) s.quantity_mw *= sc.storage.count;
        offers.push_back(std::move(offer));
        bids.push_back(std::move(bid));
    }
    ClearingResult r = clear_rtm(supply, offers, bids, net_demand, sc.price_bounds,
                                 sc.storage.count > 0 ? sc.storage.unit.step_hours : 1.0);
    r.period = period;
    DayResult day;
    day.commitment = cs;
    day.periods.push_back(r);
    day.system_cost = r.gen_cost;
    write_day_csv(l.out / "clearing.csv", day, l.prov);
    return r.flag == 0 ? 0 : 2;
}

std::vector<PriceDistribution> day_forecasts(const Json& cfg, const CommitmentSchedule& cs) {
    if (cfg.contains("forecasts")) return cfg.at("forecasts").get<std::vector<PriceDistribution>>();
    Json day_cfg = cfg;
    if (!day_cfg.contains("mu_path")) day_cfg["mu_path"] = cs.da_price;  // anchor to lambda^DA
    return forecasts_from_config(day_cfg);
}

int run_simulate(const CommonArgs& args) {
    Loaded l = load(args);
    Scenario sc = l.cfg.at("scenario").get<Scenario>();
    DayOptions opts;
    opts.engine = engine_from(l.cfg);
    opts.bid_segments = l.cfg.value("bid_segments", kDefaultBidSegments);
    opts.initial_soc = l.cfg.value("initial_soc", 0.0);
    if (l.cfg.contains("end_slope")) opts.end_slope = l.cfg.at("end_slope").get<double>();
    CommitmentSchedule cs = commit_dam(sc);
    DayRunner runner(sc, day_forecasts(l.cfg, cs), sc.storage.unit, opts);
    DayResult day = runner.run(args.seed);
    write_day_csv(l.out / "day.csv", day, l.prov);
    write_day_totals_json(l.out / "totals.json", day, l.prov);
    return 0;
}

int run_sweep(const CommonArgs& args) {
    Loaded l = load(args);
    const Json& sw = l.cfg.at("sweep");
    const std::string kind = sw.value("kind", "welfare");
    if (kind == "sigma") {
        StorageSpec spec = storage_from(l.cfg);
        auto rows = sigma_sweep(sw.at("mu").get<double>(), sw.at("sigmas").get<std::vector<double>>(),
                                spec, sw.value("horizon", 24), engine_from(l.cfg));
        write_sigma_sweep_csv(l.out / "sigma_sweep.csv", rows, l.prov);
        if (args.emit_plot_data) {
            std::vector<double> xs, ys;
            for (auto& r : rows) {
                xs.push_back(r.sigma);
                ys.push_back(r.bid);
            }
            write_xy_plot(l.out / "plot_sigma_bid.csv", "sigma", "bid", xs, ys, l.prov);
        }
    } else if (kind == "bounded") {
        StorageSpec spec = storage_from(l.cfg);
        PriceBounds bounds = l.cfg.at("bounds").get<PriceBounds>();
        auto rows = bounded_sweep(l.cfg.at("mu_path").get<std::vector<double>>(), bounds,
                                  sw.at("sigmas").get<std::vector<double>>(), spec, engine_from(l.cfg));
        write_bounded_sweep_csv(l.out / "bounded_sweep.csv", rows, l.prov);
    } else if (kind == "welfare") {
        Scenario sc = l.cfg.at("scenario").get<Scenario>();
        DayOptions opts;
        opts.engine = engine_from(l.cfg);
        if (l.cfg.contains("end_slope")) opts.end_slope = l.cfg.at("end_slope").get<double>();
        SweepResult res = welfare_sweep(sc, sw.at("demand_sigmas").get<std::vector<double>>(),
                                        sw.at("forecast_sigmas").get<std::vector<double>>(),
                                        sw.value("draws", 1), args.seed, opts);
        write_sweep_csv(l.out / "sweep.csv", res, l.prov);
        if (args.emit_plot_data) {
            // identical long format under figure-specific names
            write_sweep_csv(l.out / "plot_cost_profit_heatmap.csv", res, l.prov);
        }
    } else {
        throw ConfigError(fmt::format("unknown sweep kind '{}'", kind));
    }
    return 0;
}

int run_audit(const CommonArgs& args) {
    Loaded l = load(args);
    StorageSpec spec = storage_from(l.cfg);
    PriceBounds bounds = l.cfg.at("bounds").get<PriceBounds>();
    auto forecasts = forecasts_from_config(l.cfg);
    const int horizon = static_cast<int>(forecasts.size());
    std::vector<double> means;
    for (const auto& f : forecasts) means.push_back(f.mean());

    ValueFunction end_value = end_value_from(l.cfg, spec);
    ValueSeries series = backward_induction(end_value, forecasts, spec, engine_from(l.cfg));
    const double anchor = l.cfg.value("anchor_soc", 0.0);
    const int k = l.cfg.value("bid_segments", kDefaultBidSegments);
    BaselineBids base = baseline_bids(std::span<const double>(means), spec,
                                      end_value.marginal(0.0), anchor, k, engine_from(l.cfg));

    std::vector<WithholdingReport> reports;
    std::vector<std::pair<int, BidCurve>> curves;
    for (int t = 1; t <= horizon; ++t) {
        BidCurve curve = discharge_bids(series.at(t), anchor, spec, k);
        BoundBreakdown bound = theorem2_bound(t, horizon, means, bounds, spec, end_value.marginal(0.0));
        reports.push_back(
            audit_bids(curve, base.discharge[static_cast<std::size_t>(t) - 1], bound, t));
        curves.emplace_back(t, std::move(curve));
    }
    write_bid_curves_csv(l.out / "audited_bids.csv", curves, l.prov);
    write_audit_csv(l.out / "audit.csv", reports, l.prov);
    write_audit_json(l.out / "audit.json", reports, l.prov);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"storage bidding and market simulation toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    int (*handler)(const CommonArgs&) = nullptr;
    auto wire = [&](const char* name, const char* desc, int (*fn)(const CommonArgs&)) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        add_common(cmd, args);
        cmd->callback([&handler, fn]() { handler = fn; });
    };
    wire("value-fn", "backward-induction value functions to CSV", run_value_fn);
    wire("bids", "discharge/charge bid staircases to CSV", run_bids);
    wire("bounds", "closed-form withholding bounds to CSV", run_bounds);
    wire("clear", "single-period real-time clearing", run_clear);
    wire("simulate", "two-stage day simulation", run_simulate);
    wire("sweep", "sigma / bounded / welfare sweeps", run_sweep);
    wire("audit", "compare bids against baseline and bounds", run_audit);

    CLI11_PARSE(app, argc, argv);
    try {
        return handler ? handler(args) : 1;
    } catch (const InfeasibleError& err) {
        fmt::print(stderr, "infeasible: {}\n", err.what());
        return 2;
    } catch (const NumericError& err) {
        fmt::print(stderr, "numerical failure: {}\n", err.what());
        return 3;
    } catch (const ConfigError& err) {
        fmt::print(stderr, "config error: {}\n", err.what());
        return 1;
    } catch (const std::exception& err) {
        fmt::print(stderr, "error: {}\n", err.what());
        return 1;
    }
}
