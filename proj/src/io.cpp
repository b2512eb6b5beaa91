#include "gridbid/io.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>

#include <json.hpp>

namespace gridbid {

std::string dtos(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw NumericError("failed to format a double");
    return std::string(buf, ptr);
}

std::string Provenance::csv_suffix_header() const { return ",config_hash,seed,version"; }

std::string Provenance::csv_suffix_row() const {
    return fmt::format(",{},{},{}", config_hash, seed, version);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& header,
                     const Provenance& prov)
    : path_(path), prov_suffix_(prov.csv_suffix_row()) {
    buffer_ = header + prov.csv_suffix_header() + "\n";
}

CsvWriter::~CsvWriter() {
    std::ofstream out(path_, std::ios::binary);
    out << buffer_;
}

void CsvWriter::row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
        if (!first) buffer_ += ',';
        buffer_ += c;
        first = false;
    }
    buffer_ += prov_suffix_;
    buffer_ += '\n';
}

void write_value_series_csv(const std::filesystem::path& path, const ValueSeries& series,
                            const Provenance& prov) {
    CsvWriter csv(path, "period,soc_mwh,value,marginal_value", prov);
    for (int t = 0; t <= series.horizon(); ++t) {
        const ValueFunction& vf = series.at(t);
        for (std::size_t i = 0; i < vf.points(); ++i) {
            csv.row({std::to_string(t), dtos(vf.soc()[i]), dtos(vf.values()[i]),
                     dtos(vf.marginal(vf.soc()[i]))});
        }
    }
}

void write_bid_curves_csv(const std::filesystem::path& path,
                          std::span<const std::pair<int, BidCurve>> curves, const Provenance& prov) {
    CsvWriter csv(path, "period,side,segment,quantity_mw,price", prov);
    for (const auto& [period, curve] : curves) {
        int k = 1;
        for (const auto& seg : curve.segments) {
            csv.row({std::to_string(period), to_string(curve.side), std::to_string(k++),
                     dtos(seg.quantity_mw), dtos(seg.price)});
        }
    }
}

void write_bounds_csv(const std::filesystem::path& path, std::span<const BoundBreakdown> bounds,
                      const Provenance& prov) {
    CsvWriter csv(path, "period,horizon,step,alpha,beta,beta_prefix,bound", prov);
    for (const auto& b : bounds) {
        for (std::size_t i = 0; i < b.alpha.size(); ++i) {
            csv.row({std::to_string(b.period), std::to_string(b.horizon),
                     std::to_string(b.period + static_cast<int>(i) + 1), dtos(b.alpha[i]),
                     dtos(b.beta[i]), dtos(b.beta_prefix[i]), dtos(b.bound)});
        }
        if (b.alpha.empty())
            csv.row({std::to_string(b.period), std::to_string(b.horizon), std::to_string(b.period),
                     "", "", "", dtos(b.bound)});
    }
}

void write_day_csv(const std::filesystem::path& path, const DayResult& day, const Provenance& prov) {
    CsvWriter csv(path,
                  "period,price,net_demand_mw,gen_mw,discharge_mw,charge_mw,soc_mwh,"
                  "gen_cost,system_cost,storage_profit,wind_curtailed_mw,flag,balance_residual",
                  prov);
    for (const auto& r : day.periods) {
        csv.row({std::to_string(r.period), dtos(r.price), dtos(r.net_demand), dtos(r.gen_mw),
                 dtos(r.discharge_mw), dtos(r.charge_mw), dtos(r.soc_after), dtos(r.gen_cost),
                 dtos(r.system_cost), dtos(r.storage_profit), dtos(r.wind_curtailed_mw),
                 std::to_string(r.flag), dtos(r.balance_residual)});
    }
}

void write_day_totals_json(const std::filesystem::path& path, const DayResult& day,
                           const Provenance& prov) {
    nlohmann::json j{{"system_cost", day.system_cost},
                     {"storage_profit", day.storage_profit},
                     {"realized_mean_price", day.realized_mean_price},
                     {"commitment_cost", day.commitment.commitment_cost},
                     {"dispatch_lower_bound", day.commitment.dispatch_lower_bound},
                     {"da_price", day.commitment.da_price},
                     {"config_hash", prov.config_hash},
                     {"seed", prov.seed},
                     {"version", prov.version}};
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << "\n";
}

void write_sigma_sweep_csv(const std::filesystem::path& path, std::span<const SigmaSweepRow> rows,
                           const Provenance& prov) {
    CsvWriter csv(path, "sigma,discharge_bid_at_zero_soc", prov);
    for (const auto& r : rows) csv.row({dtos(r.sigma), dtos(r.bid)});
}

void write_bounded_sweep_csv(const std::filesystem::path& path,
                             std::span<const BoundedSweepRow> rows, const Provenance& prov) {
    CsvWriter csv(path, "sigma,discharge_bid_at_zero_soc,theorem2_bound", prov);
    for (const auto& r : rows) csv.row({dtos(r.sigma), dtos(r.bid), dtos(r.bound)});
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep,
                     const Provenance& prov) {
    CsvWriter csv(path, "demand_sigma_mw,forecast_sigma,mean_system_cost,mean_storage_profit,draws",
                  prov);
    for (std::size_t i = 0; i < sweep.forecast_sigmas.size(); ++i) {
        for (std::size_t j = 0; j < sweep.demand_sigmas.size(); ++j) {
            csv.row({dtos(sweep.demand_sigmas[j]), dtos(sweep.forecast_sigmas[i]),
                     dtos(sweep.cost[i][j]), dtos(sweep.profit[i][j]), std::to_string(sweep.draws)});
        }
    }
}

void write_audit_csv(const std::filesystem::path& path, std::span<const WithholdingReport> reports,
                     const Provenance& prov) {
    CsvWriter csv(path,
                  "period,side,anchor_soc,quantity_to,submitted,baseline,bound,"
                  "above_baseline,above_bound,baseline_margin,bound_margin",
                  prov);
    for (const auto& rep : reports) {
        for (const auto& seg : rep.segments) {
            csv.row({std::to_string(rep.period), to_string(rep.side), dtos(rep.anchor_soc),
                     dtos(seg.quantity_to), dtos(seg.submitted), dtos(seg.baseline), dtos(seg.bound),
                     seg.above_baseline ? "1" : "0", seg.above_bound ? "1" : "0",
                     dtos(seg.baseline_margin), dtos(seg.bound_margin)});
        }
    }
}

void write_audit_json(const std::filesystem::path& path, std::span<const WithholdingReport> reports,
                      const Provenance& prov) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& rep : reports) {
        nlohmann::json segs = nlohmann::json::array();
        for (const auto& seg : rep.segments) {
            segs.push_back({{"quantity_to", seg.quantity_to},
                            {"submitted", seg.submitted},
                            {"baseline", seg.baseline},
                            {"bound", seg.bound},
                            {"above_baseline", seg.above_baseline},
                            {"above_bound", seg.above_bound},
                            {"baseline_margin", seg.baseline_margin},
                            {"bound_margin", seg.bound_margin}});
        }
        out.push_back({{"period", rep.period},
                       {"side", to_string(rep.side)},
                       {"anchor_soc", rep.anchor_soc},
                       {"withholding", rep.withholding},
                       {"bound_violating", rep.bound_violating},
                       {"segments", segs}});
    }
    nlohmann::json j{{"reports", out},
                     {"config_hash", prov.config_hash},
                     {"seed", prov.seed},
                     {"version", prov.version}};
    std::ofstream f(path, std::ios::binary);
    f << j.dump(2) << "\n";
}

}  // namespace gridbid
