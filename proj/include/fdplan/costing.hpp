#pragma once

// Capital, fuel and unit-cost accounting for the replacement pathways.
//
// Internal values are never rounded; rounding happens only in the text table.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "fleet.hpp"
#include "planner.hpp"

namespace fdplan {

struct UnitCost {
    double usd = 0.0;
    CostBasis basis = CostBasis::per_kw;
};

// Fuel intensity presets for firm-dispatchable plants, GJ of fuel per MWh.
struct FuelIntensityPreset {
    std::string name;
    double gj_per_mwh;
};

// Back-calculated from 750 million USD for 9 TWh at 20 USD/GJ. Implies about
// 86% conversion efficiency, far above any real OCGT.
inline FuelIntensityPreset calibrated_intensity() { return {"calibrated", 4.167}; }
// Typical open-cycle gas turbine heat rate.
inline FuelIntensityPreset thermal_intensity() { return {"thermal", 9.5}; }

struct CostAssumptions {
    std::map<std::string, UnitCost, std::less<>> unit_costs;
    double fx_zar_per_usd = 19.0;
    int horizon_years = 25;
    double discount_rate = 0.0;
    double annual_system_energy_twh = 222.0;

    // Coal fuel is priced per MWh generated: 2.2 billion USD over 176.6 TWh.
    double coal_fuel_usd_per_mwh = 12.46;
    // Alternate ton-based parameterization; used only when tons_per_mwh > 0.
    double coal_price_usd_per_ton = 100.0;
    double coal_tons_per_mwh = 0.0;
    double coal_generation_twh = 176.6;

    double gas_price_usd_per_gj = 20.0;
    FuelIntensityPreset firm_intensity = calibrated_intensity();
    double firm_generation_twh = 9.0;         // expected end-state firm output
    double current_dispatchable_twh = 3.6;    // existing peakers today
    // Fuel spend of today's dispatchable fleet netted off under the
    // incremental savings convention; calibrated so coal 2.2 B against firm
    // 0.75 B gives 75% savings.
    double current_dispatchable_fuel_busd = 0.20;

    // Reserved; no source figures, so zero.
    double fixed_om_usd_per_kw_yr = 0.0;
    double variable_om_usd_per_mwh = 0.0;

    static CostAssumptions defaults(const TechnologyCatalog& cat = default_catalog()) {
        CostAssumptions a;
        for (const auto& [id, t] : cat)
            if (t.unit_capital_cost) a.unit_costs.emplace(id, UnitCost{*t.unit_capital_cost, t.cost_basis});
        return a;
    }

    void validate() const {
        for (const auto& [id, c] : unit_costs)
            if (!(c.usd > 0.0)) throw InvalidInput("unit cost for '" + id + "' must be positive");
        if (!(fx_zar_per_usd > 0.0)) throw InvalidInput("exchange rate must be positive");
        if (horizon_years < 1) throw InvalidInput("cost horizon must be at least one year");
        if (discount_rate < 0.0) throw InvalidInput("discount rate must be non-negative");
        for (double v : {coal_fuel_usd_per_mwh, coal_price_usd_per_ton, gas_price_usd_per_gj, firm_intensity.gj_per_mwh})
            if (!(v > 0.0)) throw InvalidInput("fuel prices and intensities must be positive");
        if (!(annual_system_energy_twh > 0.0)) throw InvalidInput("annual system energy must be positive");
    }

    const UnitCost& cost_of(std::string_view tech) const {
        const auto it = unit_costs.find(tech);
        if (it == unit_costs.end()) throw InvalidInput("no unit cost for technology '" + std::string(tech) + "'");
        return it->second;
    }
};

// Billion USD. GW x USD/kW and GWh x USD/kWh both land in billions.
inline double capex(double capacity, CapacityUnit unit, const UnitCost& cost) {
    if (capacity < 0.0) throw InvalidInput("capacity must be non-negative");
    const bool power_cost = cost.basis == CostBasis::per_kw;
    if (power_cost != (unit == CapacityUnit::gw))
        throw InvalidInput(power_cost ? "power cost (USD/kW) applied to energy capacity (GWh)"
                                      : "energy cost (USD/kWh) applied to power capacity (GW)");
    return capacity * cost.usd / 1000.0;
}

// Straight-line share per year at zero discount rate, capital recovery factor otherwise.
inline double annualize(double total_busd, int years, double discount_rate = 0.0) {
    if (years < 1) throw InvalidInput("annualization needs at least one year");
    if (discount_rate == 0.0) return total_busd / years;
    const double r = discount_rate;
    return total_busd * r / (1.0 - std::pow(1.0 + r, -years));
}

struct PortfolioItem {
    std::string tech;
    double capacity = 0.0;
    CapacityUnit unit = CapacityUnit::gw;
};

struct Portfolio {
    std::string name;
    std::vector<PortfolioItem> items;
};

inline Portfolio coal_replacement(double gw = 25.0) { return {"Coal", {{"coal", gw, CapacityUnit::gw}}}; }
inline Portfolio nuclear_replacement(double gw = 25.0) { return {"Nuclear", {{"nuclear", gw, CapacityUnit::gw}}}; }

inline Portfolio renewable_end_state(const ProgramTargets& t = {}) {
    return {"Renewable",
            {{"wind", t.wind_gw, CapacityUnit::gw},
             {"solar", t.solar_gw, CapacityUnit::gw},
             {"bess", t.storage_gwh, CapacityUnit::gwh},
             {"ocgt", t.firm_target_gw, CapacityUnit::gw}}};
}

// Sums schedule entries per technology, keeping first-seen order.
inline Portfolio portfolio_from_schedule(const BuildSchedule& s, std::string name = "Schedule") {
    Portfolio p{std::move(name), {}};
    for (const auto& e : s.entries) {
        auto it = std::find_if(p.items.begin(), p.items.end(), [&](const PortfolioItem& i) { return i.tech == e.tech; });
        if (it == p.items.end()) p.items.push_back({e.tech, e.capacity, e.unit});
        else it->capacity += e.capacity;
    }
    return p;
}

struct CapexLine {
    std::string tech;
    double unit_cost_usd = 0.0;
    CostBasis basis = CostBasis::per_kw;
    double capacity = 0.0;
    CapacityUnit unit = CapacityUnit::gw;
    double total_busd = 0.0;
    double annual_busd = 0.0;
};

struct UnitCostResult {
    double usd_per_mwh = 0.0;
    double zar_per_kwh = 0.0;
};

struct CapexReport {
    std::string name;
    std::vector<CapexLine> lines;
    double total_busd = 0.0;
    double annual_busd = 0.0;
    UnitCostResult unit_cost;
};

inline UnitCostResult system_unit_cost(double annual_capex_busd, double annual_energy_twh, double fx_zar_per_usd) {
    if (!(annual_energy_twh > 0.0)) throw InvalidInput("unit cost needs positive annual energy");
    const double usd_per_mwh = annual_capex_busd * 1000.0 / annual_energy_twh;
    return {usd_per_mwh, usd_per_mwh * fx_zar_per_usd / 1000.0};
}

inline double zar_from_usd(double usd, double fx) { return usd * fx; }
inline double usd_from_zar(double zar, double fx) { return zar / fx; }

inline CapexReport portfolio_capex(const Portfolio& p, const CostAssumptions& a) {
    a.validate();
    CapexReport r;
    r.name = p.name;
    for (const auto& item : p.items) {
        if (item.capacity == 0.0) continue;
        const auto& cost = a.cost_of(item.tech);
        CapexLine line{item.tech, cost.usd, cost.basis, item.capacity, item.unit, capex(item.capacity, item.unit, cost), 0.0};
        line.annual_busd = annualize(line.total_busd, a.horizon_years, a.discount_rate);
        r.total_busd += line.total_busd;
        r.annual_busd += line.annual_busd;
        r.lines.push_back(std::move(line));
    }
    r.unit_cost = system_unit_cost(r.annual_busd, a.annual_system_energy_twh, a.fx_zar_per_usd);
    return r;
}

// Billion USD per year.
inline double coal_fuel_cost(double generation_twh, double usd_per_mwh) {
    if (generation_twh < 0.0 || usd_per_mwh < 0.0) throw InvalidInput("fuel cost inputs must be non-negative");
    return generation_twh * usd_per_mwh / 1000.0;
}

inline double coal_fuel_cost_from_tons(double generation_twh, double usd_per_ton, double tons_per_mwh) {
    return coal_fuel_cost(generation_twh, usd_per_ton * tons_per_mwh);
}

inline double firm_fuel_cost(double generation_twh, double gas_usd_per_gj, double gj_per_mwh) {
    if (generation_twh < 0.0 || gas_usd_per_gj < 0.0 || gj_per_mwh < 0.0)
        throw InvalidInput("fuel cost inputs must be non-negative");
    return generation_twh * gj_per_mwh * gas_usd_per_gj / 1000.0;
}

struct Savings {
    double absolute_busd = 0.0;
    double percent = 0.0;
};

inline Savings fuel_savings(double before_busd, double after_busd) {
    if (!(before_busd > 0.0)) throw InvalidInput("fuel savings need a positive baseline spend");
    const double abs = before_busd - after_busd;
    return {abs, 100.0 * abs / before_busd};
}

struct FuelReport {
    std::string intensity_preset;
    double coal_fuel_busd = 0.0;
    double firm_fuel_busd = 0.0;              // end-state firm output
    double current_dispatchable_fuel_busd = 0.0;
    double incremental_firm_fuel_busd = 0.0;  // firm minus today's dispatchable spend
    Savings incremental;                      // convention (a)
    Savings literal;                          // convention (b)
};

inline double coal_fuel_for(const CostAssumptions& a) {
    return a.coal_tons_per_mwh > 0.0
               ? coal_fuel_cost_from_tons(a.coal_generation_twh, a.coal_price_usd_per_ton, a.coal_tons_per_mwh)
               : coal_fuel_cost(a.coal_generation_twh, a.coal_fuel_usd_per_mwh);
}

inline FuelReport fuel_report(const CostAssumptions& a) {
    a.validate();
    FuelReport f;
    f.intensity_preset = a.firm_intensity.name;
    f.coal_fuel_busd = coal_fuel_for(a);
    f.firm_fuel_busd = firm_fuel_cost(a.firm_generation_twh, a.gas_price_usd_per_gj, a.firm_intensity.gj_per_mwh);
    f.current_dispatchable_fuel_busd = a.current_dispatchable_fuel_busd;
    f.incremental_firm_fuel_busd = f.firm_fuel_busd - a.current_dispatchable_fuel_busd;
    f.incremental = fuel_savings(f.coal_fuel_busd, f.incremental_firm_fuel_busd);
    f.literal = fuel_savings(f.coal_fuel_busd, f.firm_fuel_busd);
    return f;
}

struct PathwayComparison {
    CapexReport coal;
    CapexReport nuclear;
    CapexReport renewable;
    FuelReport fuel;
    double capex_delta_busd = 0.0;         // coal minus renewable
    double unit_cost_advantage_pct = 0.0;  // capex only, renewable vs coal
    double coal_with_fuel_usd_per_mwh = 0.0;
    double renewable_with_fuel_usd_per_mwh = 0.0; // literal firm fuel
    double advantage_with_fuel_pct = 0.0;
    double firm_program_annual_busd = 0.0; // average firm build rate x unit cost
    double firm_program_share_pct = 0.0;   // of renewable annual capex
};

inline PathwayComparison compare_pathways(const Portfolio& coal, const Portfolio& nuclear, const Portfolio& renewable,
                                          const CostAssumptions& a, double firm_build_rate_gw_per_yr = 0.75,
                                          std::string_view firm_tech = "ocgt") {
    PathwayComparison c;
    c.coal = portfolio_capex(coal, a);
    c.nuclear = portfolio_capex(nuclear, a);
    c.renewable = portfolio_capex(renewable, a);
    c.fuel = fuel_report(a);
    c.capex_delta_busd = c.coal.total_busd - c.renewable.total_busd;
    const double coal_unit = c.coal.unit_cost.usd_per_mwh;
    if (coal_unit > 0.0) c.unit_cost_advantage_pct = 100.0 * (coal_unit - c.renewable.unit_cost.usd_per_mwh) / coal_unit;
    c.coal_with_fuel_usd_per_mwh =
        system_unit_cost(c.coal.annual_busd + c.fuel.coal_fuel_busd, a.annual_system_energy_twh, a.fx_zar_per_usd).usd_per_mwh;
    c.renewable_with_fuel_usd_per_mwh =
        system_unit_cost(c.renewable.annual_busd + c.fuel.firm_fuel_busd, a.annual_system_energy_twh, a.fx_zar_per_usd)
            .usd_per_mwh;
    if (c.coal_with_fuel_usd_per_mwh > 0.0)
        c.advantage_with_fuel_pct =
            100.0 * (c.coal_with_fuel_usd_per_mwh - c.renewable_with_fuel_usd_per_mwh) / c.coal_with_fuel_usd_per_mwh;
    c.firm_program_annual_busd = capex(firm_build_rate_gw_per_yr, CapacityUnit::gw, a.cost_of(firm_tech));
    if (c.renewable.annual_busd > 0.0) c.firm_program_share_pct = 100.0 * c.firm_program_annual_busd / c.renewable.annual_busd;
    return c;
}

// ---------------------------------------------------------------------------
// Presentation

namespace detail {

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::string pad(std::string s, std::size_t width, bool left = false) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

inline std::string display_name(std::string_view tech) {
    if (tech == "coal") return "Coal";
    if (tech == "nuclear") return "Nuclear";
    if (tech == "wind") return "Wind";
    if (tech == "solar") return "Solar PV";
    if (tech == "bess") return "BESS";
    if (tech == "ocgt") return "OCGT";
    return std::string(tech);
}

} // namespace detail

// Aligned text table laid out like the replacement-cost comparison: unit
// cost, capacity, total and annual capex per technology, unit costs per
// pathway.
inline void write_cost_table(std::ostream& out, const PathwayComparison& c, double fx) {
    using detail::fixed;
    using detail::pad;
    const std::size_t w0 = 18, w = 12;
    auto row = [&](const std::vector<std::string>& cells) {
        out << pad(cells[0], w0, true);
        for (std::size_t i = 1; i < cells.size(); ++i) out << pad(cells[i], w);
        out << '\n';
    };
    row({"Technology", "USD/kW", "Capacity", "Total B$", "Annual B$", "USD/MWh", "ZAR/kWh"});
    auto block = [&](const CapexReport& r, bool per_line_unit_cost) {
        for (const auto& l : r.lines) {
            const bool storage = l.basis == CostBasis::per_kwh;
            const bool show = per_line_unit_cost;
            row({detail::display_name(l.tech), fixed(l.unit_cost_usd, 0) + (storage ? " (1)" : ""),
                 fixed(l.capacity, 0) + (l.unit == CapacityUnit::gwh ? " (2)" : ""), fixed(l.total_busd, 0),
                 fixed(l.annual_busd, 1), show ? fixed(r.unit_cost.usd_per_mwh, 0) : "",
                 show ? fixed(r.unit_cost.zar_per_kwh, 2) : ""});
        }
    };
    out << "Base Load System\n";
    block(c.coal, true);
    block(c.nuclear, true);
    out << "Renewable Based System\n";
    block(c.renewable, false);
    row({"Total Renewable", "", "", fixed(c.renewable.total_busd, 0), fixed(c.renewable.annual_busd, 1),
         fixed(c.renewable.unit_cost.usd_per_mwh, 0), fixed(c.renewable.unit_cost.zar_per_kwh, 2)});
    out << "(1) USD per kWh of storage  (2) GWh of storage  (" << fixed(fx, 0) << " ZAR/USD)\n";
}

inline nlohmann::json to_json(const CapexReport& r) {
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& l : r.lines)
        lines.push_back({{"technology", l.tech},
                         {"unit_cost_usd", l.unit_cost_usd},
                         {"cost_basis", l.basis == CostBasis::per_kw ? "USD/kW" : "USD/kWh"},
                         {"capacity", l.capacity},
                         {"unit", to_string(l.unit)},
                         {"total_busd", l.total_busd},
                         {"annual_busd", l.annual_busd}});
    return {{"name", r.name},
            {"lines", std::move(lines)},
            {"total_busd", r.total_busd},
            {"annual_busd", r.annual_busd},
            {"usd_per_mwh", r.unit_cost.usd_per_mwh},
            {"zar_per_kwh", r.unit_cost.zar_per_kwh}};
}

inline nlohmann::json to_json(const FuelReport& f) {
    return {{"intensity_preset", f.intensity_preset},
            {"coal_fuel_busd", f.coal_fuel_busd},
            {"firm_fuel_busd", f.firm_fuel_busd},
            {"current_dispatchable_fuel_busd", f.current_dispatchable_fuel_busd},
            {"incremental_firm_fuel_busd", f.incremental_firm_fuel_busd},
            {"savings_incremental", {{"absolute_busd", f.incremental.absolute_busd}, {"percent", f.incremental.percent}}},
            {"savings_literal", {{"absolute_busd", f.literal.absolute_busd}, {"percent", f.literal.percent}}}};
}

inline nlohmann::json to_json(const PathwayComparison& c) {
    return {{"coal", to_json(c.coal)},
            {"nuclear", to_json(c.nuclear)},
            {"renewable", to_json(c.renewable)},
            {"fuel", to_json(c.fuel)},
            {"capex_delta_busd", c.capex_delta_busd},
            {"unit_cost_advantage_pct", c.unit_cost_advantage_pct},
            {"coal_with_fuel_usd_per_mwh", c.coal_with_fuel_usd_per_mwh},
            {"renewable_with_fuel_usd_per_mwh", c.renewable_with_fuel_usd_per_mwh},
            {"advantage_with_fuel_pct", c.advantage_with_fuel_pct},
            {"firm_program_annual_busd", c.firm_program_annual_busd},
            {"firm_program_share_pct", c.firm_program_share_pct}};
}

} // namespace fdplan
