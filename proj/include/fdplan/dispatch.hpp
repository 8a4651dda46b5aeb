#pragma once

// Chronological hourly merit-order dispatch with battery storage and
// firm-dispatchable generation.
//
// Each hour the classes are loaded in a fixed order: wind and solar up to
// their available output, baseload up to capacity x availability, storage
// discharge, firm-dispatchable, and whatever remains is unserved. Renewable
// output above demand charges storage (never baseload or firm output) and
// the rest is curtailed.
//
// Round-trip efficiency is split evenly between the two legs, so with
// eta = sqrt(round_trip_efficiency):
//     soc[h] = soc[h-1] + charge[h] * eta - discharge[h] / eta
// where charge is power drawn from the grid and discharge is power delivered.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "profiles.hpp"
#include "units.hpp"

namespace fdplan {

struct GenerationMix {
    double baseload_gw = 0.0;
    double baseload_availability = 1.0;
    double wind_gw = 0.0;
    double solar_gw = 0.0;
    double storage_power_gw = 0.0;
    double storage_energy_gwh = 0.0;
    double round_trip_efficiency = 0.85;
    double firm_gw = 0.0;

    void validate() const {
        for (double v : {baseload_gw, wind_gw, solar_gw, storage_power_gw, storage_energy_gwh, firm_gw})
            if (!(v >= 0.0)) throw InvalidInput("generation mix capacities must be non-negative");
        if (!(baseload_availability >= 0.0 && baseload_availability <= 1.0))
            throw InvalidInput("baseload availability must be in [0, 1]");
        if (!(round_trip_efficiency > 0.0 && round_trip_efficiency <= 1.0))
            throw InvalidInput("round-trip efficiency must be in (0, 1]");
    }

    double leg_efficiency() const { return std::sqrt(round_trip_efficiency); }
};

inline constexpr double kDefaultInitialSoc = 0.5;

struct DispatchSummary {
    double demand_twh = 0.0;
    double wind_twh = 0.0; // delivered, net of curtailment
    double solar_twh = 0.0;
    double baseload_twh = 0.0;
    double storage_charge_twh = 0.0;
    double storage_discharge_twh = 0.0;
    double firm_twh = 0.0;
    double curtailed_twh = 0.0;
    double unserved_twh = 0.0;
    double firm_utilization_pct = 0.0;
    std::size_t shed_hours = 0;
    std::size_t max_consecutive_shed_hours = 0;
};

struct DispatchResult {
    std::vector<double> demand_mw;
    std::vector<double> wind_mw;  // available output before curtailment
    std::vector<double> solar_mw; // available output before curtailment
    std::vector<double> curtailed_mw;
    std::vector<double> baseload_mw;
    std::vector<double> charge_mw;
    std::vector<double> discharge_mw;
    std::vector<double> soc_mwh; // end of hour
    std::vector<double> firm_mw;
    std::vector<double> unserved_mw;
    double initial_soc_mwh = 0.0;
    double storage_energy_mwh = 0.0;
    double leg_efficiency = 1.0;
    double firm_capacity_gw = 0.0;
    DispatchSummary summary;

    std::size_t hours() const { return demand_mw.size(); }
};

struct UnservedStats {
    double energy_twh = 0.0;
    std::size_t hours = 0;
    std::size_t max_consecutive = 0;
    friend bool operator==(const UnservedStats&, const UnservedStats&) = default;
};

inline UnservedStats unserved_stats(std::span<const double> unserved_mw) {
    UnservedStats s;
    std::size_t run = 0;
    double mwh = 0.0;
    for (double v : unserved_mw) {
        if (v > 0.0) {
            mwh += v;
            ++s.hours;
            s.max_consecutive = std::max(s.max_consecutive, ++run);
        } else {
            run = 0;
        }
    }
    s.energy_twh = twh_from_mwh(mwh);
    return s;
}

inline UnservedStats unserved_stats(const DispatchResult& r) { return unserved_stats(r.unserved_mw); }

// Capacity factor of the firm class, percent.
inline double firm_utilization(double firm_energy_twh, double firm_capacity_gw, double hours = kHoursPerYearD) {
    if (!(firm_capacity_gw > 0.0)) throw InvalidInput("firm utilization needs positive firm capacity");
    return 100.0 * (firm_energy_twh * 1000.0) / (firm_capacity_gw * hours);
}

inline double firm_utilization(const DispatchResult& r, double firm_capacity_gw) {
    return firm_utilization(r.summary.firm_twh, firm_capacity_gw, static_cast<double>(r.hours()));
}

namespace detail {

inline double sum_twh(const std::vector<double>& mw) { return twh_from_mwh(std::accumulate(mw.begin(), mw.end(), 0.0)); }

inline DispatchSummary summarize(const DispatchResult& r) {
    DispatchSummary s;
    double wind = 0.0, solar = 0.0;
    for (std::size_t h = 0; h < r.hours(); ++h) {
        const double avail = r.wind_mw[h] + r.solar_mw[h];
        const double kept = avail > 0.0 ? 1.0 - r.curtailed_mw[h] / avail : 0.0;
        wind += r.wind_mw[h] * kept;
        solar += r.solar_mw[h] * kept;
    }
    s.demand_twh = sum_twh(r.demand_mw);
    s.wind_twh = twh_from_mwh(wind);
    s.solar_twh = twh_from_mwh(solar);
    s.baseload_twh = sum_twh(r.baseload_mw);
    s.storage_charge_twh = sum_twh(r.charge_mw);
    s.storage_discharge_twh = sum_twh(r.discharge_mw);
    s.firm_twh = sum_twh(r.firm_mw);
    s.curtailed_twh = sum_twh(r.curtailed_mw);
    if (r.firm_capacity_gw > 0.0)
        s.firm_utilization_pct = firm_utilization(s.firm_twh, r.firm_capacity_gw, static_cast<double>(r.hours()));
    const auto u = unserved_stats(r.unserved_mw);
    s.unserved_twh = u.energy_twh;
    s.shed_hours = u.hours;
    s.max_consecutive_shed_hours = u.max_consecutive;
    return s;
}

} // namespace detail

// Dispatch over any number of hours. Capacity factors are fractions.
inline DispatchResult simulate(std::span<const double> demand_mw, const GenerationMix& mix,
                               std::span<const double> wind_cf, std::span<const double> solar_cf,
                               double initial_soc = kDefaultInitialSoc) {
    mix.validate();
    if (wind_cf.size() != demand_mw.size() || solar_cf.size() != demand_mw.size())
        throw InvalidInput("demand and capacity-factor traces must have the same length");
    if (!(initial_soc >= 0.0 && initial_soc <= 1.0)) throw InvalidInput("initial SOC must be in [0, 1]");

    const std::size_t n = demand_mw.size();
    const double baseload_avail = mw_from_gw(mix.baseload_gw) * mix.baseload_availability;
    const double storage_power = mw_from_gw(mix.storage_power_gw);
    const double storage_energy = mw_from_gw(mix.storage_energy_gwh); // MWh
    const double firm_cap = mw_from_gw(mix.firm_gw);
    const double eta = mix.leg_efficiency();

    DispatchResult r;
    for (auto* v : {&r.demand_mw, &r.wind_mw, &r.solar_mw, &r.curtailed_mw, &r.baseload_mw, &r.charge_mw,
                    &r.discharge_mw, &r.soc_mwh, &r.firm_mw, &r.unserved_mw})
        v->assign(n, 0.0);
    r.storage_energy_mwh = storage_energy;
    r.initial_soc_mwh = storage_energy * initial_soc;
    r.leg_efficiency = eta;
    r.firm_capacity_gw = mix.firm_gw;

    double soc = r.initial_soc_mwh;
    for (std::size_t h = 0; h < n; ++h) {
        const double d = demand_mw[h];
        if (!(d >= 0.0)) throw InvalidInput("demand must be non-negative");
        const double wind = mw_from_gw(mix.wind_gw) * wind_cf[h];
        const double solar = mw_from_gw(mix.solar_gw) * solar_cf[h];
        double remaining = d;

        const double renewable = wind + solar;
        const double renewable_used = std::min(renewable, remaining);
        remaining -= renewable_used;
        const double surplus = renewable - renewable_used;

        const double base = std::min(baseload_avail, remaining);
        remaining -= base;

        double charge = 0.0;
        if (surplus > 0.0 && eta > 0.0) {
            charge = std::min({surplus, storage_power, std::max(0.0, storage_energy - soc) / eta});
            soc = std::min(storage_energy, soc + charge * eta);
        }

        const double discharge = std::min({remaining, storage_power, soc * eta});
        remaining -= discharge;
        soc = std::max(0.0, soc - discharge / eta);

        const double firm = std::min(firm_cap, remaining);
        remaining -= firm;

        r.demand_mw[h] = d;
        r.wind_mw[h] = wind;
        r.solar_mw[h] = solar;
        r.curtailed_mw[h] = surplus - charge;
        r.baseload_mw[h] = base;
        r.charge_mw[h] = charge;
        r.discharge_mw[h] = discharge;
        r.soc_mwh[h] = soc;
        r.firm_mw[h] = firm;
        r.unserved_mw[h] = remaining;
    }
    r.summary = detail::summarize(r);
    return r;
}

inline DispatchResult simulate_year(const std::span<const double> demand_mw, const GenerationMix& mix,
                                    const CapacityFactorTrace& wind, const CapacityFactorTrace& solar,
                                    double initial_soc = kDefaultInitialSoc) {
    if (demand_mw.size() != kHoursPerYear || wind.size() != kHoursPerYear || solar.size() != kHoursPerYear)
        throw InvalidInput("annual dispatch needs 8760-hour traces");
    return simulate(demand_mw, mix, wind.values(), solar.values(), initial_soc);
}

inline constexpr std::string_view kDispatchCsvHeader =
    "hour,demand_mw,wind_mw,solar_mw,curtailed_mw,baseload_mw,storage_charge_mw,storage_discharge_mw,soc_mwh,firm_mw,"
    "unserved_mw";

inline void write_dispatch_csv(std::ostream& out, const DispatchResult& r) {
    out << kDispatchCsvHeader << '\n';
    for (std::size_t h = 0; h < r.hours(); ++h) {
        out << h;
        for (double v : {r.demand_mw[h], r.wind_mw[h], r.solar_mw[h], r.curtailed_mw[h], r.baseload_mw[h],
                         r.charge_mw[h], r.discharge_mw[h], r.soc_mwh[h], r.firm_mw[h], r.unserved_mw[h]})
            out << ',' << csv::format_double(v);
        out << '\n';
    }
}

inline nlohmann::json to_json(const DispatchSummary& s) {
    return {
        {"demand_twh", s.demand_twh},
        {"wind_twh", s.wind_twh},
        {"solar_twh", s.solar_twh},
        {"baseload_twh", s.baseload_twh},
        {"storage_charge_twh", s.storage_charge_twh},
        {"storage_discharge_twh", s.storage_discharge_twh},
        {"firm_twh", s.firm_twh},
        {"curtailed_twh", s.curtailed_twh},
        {"unserved_twh", s.unserved_twh},
        {"firm_utilization_pct", s.firm_utilization_pct},
        {"shed_hours", s.shed_hours},
        {"max_consecutive_shed_hours", s.max_consecutive_shed_hours},
    };
}

} // namespace fdplan
