#include "gridbid/config.hpp"

#include <fmt/format.h>
#include <fstream>

namespace gridbid {

void to_json(Json& j, const StorageSpec& s) {
    j = Json{{"power_mw", s.power_mw},
             {"energy_mwh", s.energy_mwh},
             {"efficiency", s.efficiency},
             {"marginal_cost", s.marginal_cost},
             {"step_hours", s.step_hours}};
}

void from_json(const Json& j, StorageSpec& s) {
    j.at("power_mw").get_to(s.power_mw);
    j.at("energy_mwh").get_to(s.energy_mwh);
    j.at("efficiency").get_to(s.efficiency);
    j.at("marginal_cost").get_to(s.marginal_cost);
    s.step_hours = j.value("step_hours", 1.0);
    s.validate();
}

void to_json(Json& j, const PriceBounds& b) { j = Json{{"floor", b.floor}, {"cap", b.cap}}; }

void from_json(const Json& j, PriceBounds& b) {
    j.at("floor").get_to(b.floor);
    j.at("cap").get_to(b.cap);
    b.validate();
}

void to_json(Json& j, const PriceDistribution& d) {
    j = Json{{"kind", to_string(d.kind())}};
    switch (d.kind()) {
        case DistKind::PointMass:
            j["mean"] = d.declared_mean();
            break;
        case DistKind::Gaussian:
        case DistKind::BoundedUniform:
            j["mean"] = d.declared_mean();
            j["sigma"] = d.declared_sigma();
            break;
        case DistKind::TwoPoint:
            j["pi"] = d.two_point_pi();
            j["gamma"] = d.two_point_gamma();
            j["alpha"] = d.two_point_alpha();
            break;
        case DistKind::Empirical:
            j["samples"] = std::vector<double>(d.samples().begin(), d.samples().end());
            break;
    }
    if (d.bounds()) j["bounds"] = *d.bounds();
}

void from_json(const Json& j, PriceDistribution& d) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "point_mass") {
        d = PriceDistribution::point_mass(j.at("mean").get<double>());
    } else if (kind == "gaussian") {
        d = PriceDistribution::gaussian(j.at("mean").get<double>(), j.at("sigma").get<double>());
    } else if (kind == "bounded_uniform") {
        d = PriceDistribution::bounded_uniform(j.at("mean").get<double>(), j.at("sigma").get<double>());
    } else if (kind == "two_point") {
        d = PriceDistribution::two_point(j.at("pi").get<double>(), j.at("gamma").get<double>(),
                                         j.at("alpha").get<double>());
    } else if (kind == "empirical") {
        d = PriceDistribution::empirical(j.at("samples").get<std::vector<double>>());
    } else {
        throw ConfigError(fmt::format("unknown distribution kind '{}'", kind));
    }
    if (j.contains("bounds")) d = d.truncate_normalize(j.at("bounds").get<PriceBounds>());
}

void to_json(Json& j, const GeneratorSpec& g) {
    j = Json{{"name", g.name},       {"gmin", g.gmin},
             {"gmax", g.gmax},       {"ramp", g.ramp},
             {"min_up", g.min_up},   {"min_down", g.min_down},
             {"no_load_cost", g.no_load_cost},
             {"startup_cost", g.startup_cost},
             {"cost_a", g.cost_a},   {"cost_b", g.cost_b}};
}

void from_json(const Json& j, GeneratorSpec& g) {
    g.name = j.value("name", std::string{});
    j.at("gmax").get_to(g.gmax);
    g.gmin = j.value("gmin", 0.0);
    g.ramp = j.value("ramp", g.gmax);
    g.min_up = j.value("min_up", 1);
    g.min_down = j.value("min_down", 1);
    g.no_load_cost = j.value("no_load_cost", 0.0);
    g.startup_cost = j.value("startup_cost", 0.0);
    g.cost_a = j.value("cost_a", 0.0);
    j.at("cost_b").get_to(g.cost_b);
    g.validate();
}

void to_json(Json& j, const StorageFleet& f) {
    j = Json{{"unit", f.unit}, {"count", f.count}, {"in_day_ahead", f.in_day_ahead}};
}

void from_json(const Json& j, StorageFleet& f) {
    f.count = j.value("count", 0);
    f.in_day_ahead = j.value("in_day_ahead", false);
    if (f.count > 0) j.at("unit").get_to(f.unit);
}

void to_json(Json& j, const Scenario& s) {
    j = Json{{"name", s.name},
             {"horizon", s.horizon},
             {"load", s.load},
             {"wind_forecast", s.wind_forecast},
             {"generators", s.fleet},
             {"storage", s.storage},
             {"demand_sigma", s.demand_sigma},
             {"wind_dev_fraction", s.wind_dev_fraction},
             {"reserve_fraction", s.reserve_fraction},
             {"price_bounds", s.price_bounds}};
}

void from_json(const Json& j, Scenario& s) {
    s.name = j.value("name", std::string{});
    j.at("horizon").get_to(s.horizon);
    j.at("load").get_to(s.load);
    s.wind_forecast = j.value("wind_forecast", std::vector<double>{});
    j.at("generators").get_to(s.fleet);
    if (j.contains("storage")) j.at("storage").get_to(s.storage);
    s.demand_sigma = j.value("demand_sigma", 0.0);
    s.wind_dev_fraction = j.value("wind_dev_fraction", 0.0);
    s.reserve_fraction = j.value("reserve_fraction", 0.2);
    if (j.contains("price_bounds")) j.at("price_bounds").get_to(s.price_bounds);
    s.validate();
}

Json load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& err) {
        throw ConfigError(fmt::format("config '{}' is not valid JSON: {}", path.string(), err.what()));
    }
}

std::string config_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return fmt::format("{:016x}", h);
}

std::vector<PriceDistribution> forecasts_from_config(const Json& cfg) {
    if (cfg.contains("forecasts"))
        return cfg.at("forecasts").get<std::vector<PriceDistribution>>();
    if (!cfg.contains("forecast"))
        throw ConfigError("config needs either 'forecasts' or a 'forecast' template");

    Json tpl = cfg.at("forecast");
    std::vector<double> mu_path;
    if (cfg.contains("mu_path")) {
        cfg.at("mu_path").get_to(mu_path);
    } else {
        const int horizon = cfg.value("horizon", 0);
        if (horizon < 1 || !tpl.contains("mean"))
            throw ConfigError("forecast template needs 'mu_path' or 'horizon' plus 'mean'");
        mu_path.assign(static_cast<std::size_t>(horizon), tpl.at("mean").get<double>());
    }
    std::vector<PriceDistribution> out;
    out.reserve(mu_path.size());
    for (double mu : mu_path) {
        tpl["mean"] = mu;
        out.push_back(tpl.get<PriceDistribution>());
    }
    return out;
}

}  // namespace gridbid
