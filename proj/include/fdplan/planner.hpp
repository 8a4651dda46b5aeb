#pragma once

// Replacement sizing, firm-capacity floor accounting, multi-year build
// programs, site reuse and replanning.
//
// Program years run from start_year + 1 to start_year + horizon. An entry of
// a technology with lead time L may commission no earlier than
// start_year + L.

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "demand.hpp"
#include "error.hpp"
#include "fleet.hpp"

namespace fdplan {

// Capacity of new plants at `new_eaf` producing the energy of the retired
// capacity at `legacy_cf`.
inline double replacement_capacity(double decommissioned_gw, double legacy_cf, double new_eaf) {
    if (!(new_eaf > 0.0)) throw InvalidInput("replacement EAF must be positive");
    return decommissioned_gw * legacy_cf / new_eaf;
}

// Which plants count towards the firm floor and whether they are derated by
// availability. Thermal means baseload-class technologies other than hydro.
struct FirmAccounting {
    std::string name = "derated_thermal";
    bool derate_thermal = true;
    bool include_hydro = true;
    bool include_pumped_storage = true;
    bool include_existing_firm = true;

    // Thermal derated by EAF; hydro, pumped storage and peakers at nameplate.
    static FirmAccounting derated_thermal() { return {}; }

    // As above but pumped storage is left out: it is energy-limited and
    // cannot carry a multi-day renewable lull.
    static FirmAccounting derated_thermal_excluding_storage() {
        FirmAccounting a;
        a.name = "derated_thermal_excluding_storage";
        a.include_pumped_storage = false;
        return a;
    }

    static FirmAccounting nameplate() {
        FirmAccounting a;
        a.name = "nameplate";
        a.derate_thermal = false;
        return a;
    }

    static FirmAccounting by_name(std::string_view n) {
        if (n == "derated_thermal") return derated_thermal();
        if (n == "derated_thermal_excluding_storage") return derated_thermal_excluding_storage();
        if (n == "nameplate") return nameplate();
        throw ConfigError("unknown firm accounting convention '" + std::string(n) + "'");
    }

    static std::vector<FirmAccounting> all() {
        return {derated_thermal(), derated_thermal_excluding_storage(), nameplate()};
    }
};

inline double effective_firm_capacity(const Fleet& fleet, int year, const FirmAccounting& acc = {}) {
    double mw = 0.0;
    for (const auto& p : fleet.plants()) {
        if (!p.operating(year)) continue;
        const auto& tech = fleet.technology(p.tech);
        if (p.tech == "hydro") {
            if (acc.include_hydro) mw += p.nameplate_mw;
        } else if (p.tech == "pumped_storage") {
            if (acc.include_pumped_storage) mw += p.nameplate_mw;
        } else if (tech.dispatch_class == DispatchClass::baseload) {
            mw += acc.derate_thermal ? p.nameplate_mw * fleet.availability(p, year) : p.nameplate_mw;
        } else if (tech.dispatch_class == DispatchClass::firm_dispatchable) {
            if (acc.include_existing_firm) mw += p.nameplate_mw;
        }
    }
    return gw_from_mw(mw);
}

inline double firm_floor_gap(const Fleet& fleet, int year, double floor_gw, const FirmAccounting& acc = {}) {
    if (floor_gw < 0.0) throw InvalidInput("firm floor must be non-negative");
    return std::max(0.0, floor_gw - effective_firm_capacity(fleet, year, acc));
}

// ---------------------------------------------------------------------------
// Schedules

enum class CapacityUnit { gw, gwh };

inline std::string_view to_string(CapacityUnit u) { return u == CapacityUnit::gw ? "GW" : "GWh"; }

struct BuildEntry {
    int year = 0;
    std::string tech;
    double capacity = 0.0;
    CapacityUnit unit = CapacityUnit::gw;
    std::string site_id;

    friend bool operator==(const BuildEntry&, const BuildEntry&) = default;
};

struct BuildSchedule {
    int start_year = 0;
    int horizon_years = 0;
    std::vector<BuildEntry> entries;

    double total(std::string_view tech) const {
        double s = 0.0;
        for (const auto& e : entries)
            if (e.tech == tech) s += e.capacity;
        return s;
    }

    double added_in(int year, std::string_view tech) const {
        double s = 0.0;
        for (const auto& e : entries)
            if (e.year == year && e.tech == tech) s += e.capacity;
        return s;
    }

    // Cumulative additions of `tech` commissioned in or before `year`.
    double cumulative(int year, std::string_view tech) const {
        double s = 0.0;
        for (const auto& e : entries)
            if (e.year <= year && e.tech == tech) s += e.capacity;
        return s;
    }

    std::vector<BuildEntry> of_tech(std::string_view tech) const {
        std::vector<BuildEntry> out;
        for (const auto& e : entries)
            if (e.tech == tech) out.push_back(e);
        return out;
    }

    friend bool operator==(const BuildSchedule&, const BuildSchedule&) = default;
};

using LeadTimes = std::map<std::string, int, std::less<>>;

// Construction years for renewables and storage; the peaker figure adds three
// years of procurement (investment model, siting, bidding) to three years of
// construction.
inline LeadTimes default_lead_times() { return {{"wind", 1}, {"solar", 1}, {"bess", 1}, {"ocgt", 6}}; }

inline int lead_time_of(const LeadTimes& leads, std::string_view tech) {
    const auto it = leads.find(tech);
    return it == leads.end() ? 0 : it->second;
}

// True when no entry commissions before start + lead time or outside the horizon.
inline bool respects_lead_times(const BuildSchedule& s, const LeadTimes& leads) {
    for (const auto& e : s.entries) {
        if (e.year < s.start_year + lead_time_of(leads, e.tech)) return false;
        if (e.year < s.start_year + 1 || e.year > s.start_year + s.horizon_years) return false;
    }
    return true;
}

struct ProgramTargets {
    int horizon_years = 25;
    double firm_target_gw = 15.0;
    double wind_gw = 49.0;
    double solar_gw = 14.0;
    double storage_gwh = 24.0;
    double firm_floor_gw = 35.0;
    double reference_demand_twh = 222.0; // demand at which the floor applies unscaled

    void validate() const {
        if (horizon_years < 1) throw InvalidInput("planning horizon must be at least one year");
        for (double v : {firm_target_gw, wind_gw, solar_gw, storage_gwh, firm_floor_gw})
            if (!(v >= 0.0)) throw InvalidInput("program targets must be non-negative");
        if (!(reference_demand_twh > 0.0)) throw InvalidInput("reference demand must be positive");
    }
};

struct BuildOptions {
    double max_annual_rate_gw = 2.5;
    std::string firm_tech = "ocgt";
};

// Equal annual increments reaching the end state, from the first year each
// technology's lead time allows (year 1 when no lead time is given).
inline BuildSchedule renewable_buildout(const ProgramTargets& t, int start_year = 0, const LeadTimes& leads = {}) {
    if (t.horizon_years < 1) throw InvalidInput("renewable buildout needs a horizon of at least one year");
    BuildSchedule s{start_year, t.horizon_years, {}};
    const std::tuple<const char*, double, CapacityUnit> parts[] = {
        {"wind", t.wind_gw, CapacityUnit::gw}, {"solar", t.solar_gw, CapacityUnit::gw}, {"bess", t.storage_gwh, CapacityUnit::gwh}};
    for (int k = 1; k <= t.horizon_years; ++k)
        for (const auto& [tech, total, unit] : parts) {
            const int first = std::max(1, lead_time_of(leads, tech));
            if (total > 0.0 && k >= first)
                s.entries.push_back({start_year + k, tech, total / (t.horizon_years - first + 1), unit, {}});
        }
    return s;
}

// Firm additions: the initial gap is recovered as early as lead time allows
// at the maximum annual rate, the rest of the target is spread evenly over
// the remaining program years. Renewables follow renewable_buildout.
inline BuildSchedule build_program(const ProgramTargets& t, double initial_gap_gw, const LeadTimes& leads,
                                   int start_year = 0, const BuildOptions& opt = {}) {
    t.validate();
    if (initial_gap_gw < 0.0) throw InvalidInput("initial gap must be non-negative");
    if (initial_gap_gw > t.firm_target_gw + 1e-12)
        throw InfeasibleError("initial gap of " + csv::format_double(initial_gap_gw) +
                              " GW exceeds the firm target of " + csv::format_double(t.firm_target_gw) + " GW");

    for (const auto& [tech, lead] : leads)
        if (lead >= t.horizon_years)
            throw InfeasibleError("lead time of " + std::to_string(lead) + " years for '" + tech +
                                  "' leaves no commissioning year in a " + std::to_string(t.horizon_years) +
                                  "-year horizon");

    BuildSchedule s = renewable_buildout(t, start_year, leads);
    std::vector<BuildEntry> firm;
    if (t.firm_target_gw > 0.0) {
        const int first = std::max(1, lead_time_of(leads, opt.firm_tech));
        const double rate = opt.max_annual_rate_gw;
        if (!(rate > 0.0)) throw InfeasibleError("maximum annual commissioning rate must be positive");

        int k = first;
        double gap_left = initial_gap_gw;
        while (gap_left > 1e-12) {
            if (k > t.horizon_years)
                throw InfeasibleError("initial gap cannot be recovered within the horizon at " +
                                      csv::format_double(rate) + " GW/yr");
            const double add = std::min(rate, gap_left);
            firm.push_back({start_year + k, opt.firm_tech, add, CapacityUnit::gw, {}});
            gap_left -= add;
            ++k;
        }
        const double rest = t.firm_target_gw - initial_gap_gw;
        if (rest > 1e-12) {
            const int years = t.horizon_years - k + 1;
            if (years <= 0)
                throw InfeasibleError("no program years remain after catch-up for the remaining " +
                                      csv::format_double(rest) + " GW");
            const double per_year = rest / years;
            if (per_year > rate + 1e-12)
                throw InfeasibleError("uniform remainder of " + csv::format_double(per_year) +
                                      " GW/yr exceeds the maximum annual rate");
            for (; k <= t.horizon_years; ++k) firm.push_back({start_year + k, opt.firm_tech, per_year, CapacityUnit::gw, {}});
        }
    }
    s.entries.insert(s.entries.end(), firm.begin(), firm.end());
    std::stable_sort(s.entries.begin(), s.entries.end(),
                     [](const BuildEntry& a, const BuildEntry& b) { return a.year < b.year; });
    return s;
}

// Mean annual addition of `tech` over the years in which it commissions.
inline double average_annual_addition(const BuildSchedule& s, std::string_view tech) {
    std::map<int, double> per_year;
    for (const auto& e : s.entries)
        if (e.tech == tech && e.capacity > 0.0) per_year[e.year] += e.capacity;
    if (per_year.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [y, c] : per_year) total += c;
    return total / static_cast<double>(per_year.size());
}

// ---------------------------------------------------------------------------
// Site reuse

struct RetiredSite {
    std::string site_id;
    double nameplate_gw = 0.0;
    int retirement_year = 0;
};

struct PlacedPlant {
    int year = 0;
    double capacity_gw = 0.0;
    std::string site_id; // empty when unassigned
};

struct SiteAssignment {
    std::map<std::string, double> assigned_gw; // per site
    std::vector<PlacedPlant> plants;
    double requested_gw = 0.0;
    double assigned_total_gw = 0.0;
    double unassigned_total_gw = 0.0;

    std::vector<PlacedPlant> unassigned() const {
        std::vector<PlacedPlant> out;
        for (const auto& p : plants)
            if (p.site_id.empty()) out.push_back(p);
        return out;
    }
};

inline std::vector<RetiredSite> retired_sites(const Fleet& fleet, int from_year, int to_year,
                                              const PlantFilter& filter = PlantFilter::technology("coal")) {
    std::vector<RetiredSite> out;
    for (const auto& p : fleet.plants())
        if (fleet.matches(p, filter) && p.decommission_year > from_year && p.decommission_year <= to_year)
            out.push_back({p.site_id, gw_from_mw(p.nameplate_mw), p.decommission_year});
    return out;
}

// Places new firm plants on retired sites without exceeding the retired
// nameplate. Entries larger than max_plant_gw are split into equal plants no
// larger than that; plants themselves are never split across sites. A plant
// goes to the eligible site (retired on or before its commissioning year)
// with the most headroom, ties broken by site id.
inline SiteAssignment assign_sites(const std::vector<RetiredSite>& sites, std::span<const BuildEntry> new_firm,
                                   double max_plant_gw = 1.5) {
    if (!(max_plant_gw > 0.0)) throw InvalidInput("maximum plant size must be positive");
    struct Headroom {
        std::string id;
        double gw;
        int year;
    };
    std::vector<Headroom> room;
    for (const auto& s : sites) {
        auto it = std::find_if(room.begin(), room.end(), [&](const Headroom& h) { return h.id == s.site_id; });
        if (it == room.end())
            room.push_back({s.site_id, s.nameplate_gw, s.retirement_year});
        else {
            it->gw += s.nameplate_gw;
            it->year = std::max(it->year, s.retirement_year);
        }
    }

    std::vector<BuildEntry> ordered(new_firm.begin(), new_firm.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](const BuildEntry& a, const BuildEntry& b) { return a.year < b.year; });

    SiteAssignment out;
    constexpr double eps = 1e-9;
    for (const auto& e : ordered) {
        if (!(e.capacity > 0.0)) continue;
        out.requested_gw += e.capacity;
        const auto count = static_cast<int>(std::ceil(e.capacity / max_plant_gw - eps));
        const double size = e.capacity / count;
        for (int i = 0; i < count; ++i) {
            Headroom* best = nullptr;
            for (auto& h : room) {
                if (h.year > e.year || h.gw + eps < size) continue;
                if (!best || h.gw > best->gw || (h.gw == best->gw && h.id < best->id)) best = &h;
            }
            if (best) {
                best->gw = std::max(0.0, best->gw - size);
                out.assigned_gw[best->id] += size;
                out.assigned_total_gw += size;
                out.plants.push_back({e.year, size, best->id});
            } else {
                out.unassigned_total_gw += size;
                out.plants.push_back({e.year, size, {}});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Replanning

struct Observations {
    Fleet fleet;                   // decommission changes and observed EAF models
    AnnualDemandTrajectory demand; // observed and revised annual demand; empty = reference
};

struct ReplanOptions {
    int current_year = 0; // entries in or before this year are fixed
    FirmAccounting accounting = FirmAccounting::derated_thermal();
    LeadTimes lead_times = default_lead_times();
    BuildOptions build;
};

struct YearGap {
    int year = 0;
    double gap_gw = 0.0;
};

struct ReplanResult {
    BuildSchedule schedule;
    std::vector<YearGap> residual_gaps; // future years where the floor is still not met
};

// Floor scaled with demand relative to the reference level.
inline double scaled_floor(const ProgramTargets& t, const AnnualDemandTrajectory& demand, int year) {
    if (demand.empty()) return t.firm_floor_gw;
    return t.firm_floor_gw * demand.at_or_nearest(year) / t.reference_demand_twh;
}

// New firm capacity that must be in service by `year` for the floor to hold,
// as a running maximum from the first program year.
inline std::vector<double> required_new_firm(const ProgramTargets& t, const Observations& obs, int start_year,
                                             const FirmAccounting& acc) {
    std::vector<double> need(static_cast<std::size_t>(t.horizon_years) + 1, 0.0);
    double running = 0.0;
    for (int k = 1; k <= t.horizon_years; ++k) {
        const int y = start_year + k;
        running = std::max(running, firm_floor_gap(obs.fleet, y, scaled_floor(t, obs.demand, y), acc));
        need[static_cast<std::size_t>(k)] = running;
    }
    return need;
}

// Keeps every entry at or before current_year and every non-firm entry, then
// re-derives future firm additions so that cumulative firm capacity reaches
// the larger of the existing plan and the floor requirement, subject to lead
// time and the maximum annual rate. Where the rate or lead time makes the
// floor unreachable the schedule builds as fast as allowed and the residual
// gap is reported.
inline ReplanResult replan(const BuildSchedule& current, const Observations& obs, const ProgramTargets& t,
                           const ReplanOptions& opt) {
    t.validate();
    const int start = current.start_year;
    const int horizon = t.horizon_years;
    const std::string& firm = opt.build.firm_tech;
    const double rate = opt.build.max_annual_rate_gw;
    const int first_allowed = start + std::max(1, lead_time_of(opt.lead_times, firm));
    const auto need = required_new_firm(t, obs, start, opt.accounting);
    const std::size_t n = static_cast<std::size_t>(horizon) + 1;

    auto year_of = [&](std::size_t k) { return start + static_cast<int>(k); };
    auto rate_at = [&](std::size_t k) {
        const int y = year_of(k);
        return (y > opt.current_year && y >= first_allowed) ? rate : 0.0;
    };

    std::vector<double> plan(n, 0.0), target(n, 0.0), lower(n, 0.0), built(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) plan[k] = current.cumulative(year_of(k), firm);
    for (std::size_t k = 1; k < n; ++k)
        target[k] = year_of(k) <= opt.current_year ? plan[k] : std::max(plan[k], need[k]);

    // Smallest cumulative level at year k from which later targets remain reachable.
    lower[n - 1] = target[n - 1];
    for (std::size_t k = n - 1; k-- > 1;) lower[k] = std::max(target[k], lower[k + 1] - rate_at(k + 1));

    for (std::size_t k = 1; k < n; ++k) {
        if (year_of(k) <= opt.current_year) {
            built[k] = plan[k];
            continue;
        }
        const double reach = std::min(lower[k], built[k - 1] + rate_at(k));
        built[k] = std::max(built[k - 1], reach);
        if (std::fabs(built[k] - plan[k]) <= 1e-9 * std::max(1.0, std::fabs(plan[k]))) built[k] = plan[k];
    }

    ReplanResult out;
    out.schedule.start_year = start;
    out.schedule.horizon_years = current.horizon_years ? current.horizon_years : horizon;
    for (const auto& e : current.entries)
        if (e.tech != firm || e.year <= opt.current_year) out.schedule.entries.push_back(e);

    for (std::size_t k = 1; k < n; ++k) {
        const int y = year_of(k);
        if (y <= opt.current_year) continue;
        const bool unchanged = built[k] == plan[k] && built[k - 1] == plan[k - 1];
        if (unchanged) {
            for (const auto& e : current.entries)
                if (e.tech == firm && e.year == y) out.schedule.entries.push_back(e);
        } else if (const double add = built[k] - built[k - 1]; add > 1e-12) {
            out.schedule.entries.push_back({y, firm, add, CapacityUnit::gw, {}});
        }
        if (const double gap = need[k] - built[k]; gap > 1e-9) out.residual_gaps.push_back({y, gap});
    }
    std::stable_sort(out.schedule.entries.begin(), out.schedule.entries.end(),
                     [](const BuildEntry& a, const BuildEntry& b) { return a.year < b.year; });
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline void write_schedule_csv(std::ostream& out, const BuildSchedule& s) {
    out << "year,technology,capacity,unit,site_id\n";
    for (const auto& e : s.entries)
        out << e.year << ',' << e.tech << ',' << csv::format_double(e.capacity) << ',' << to_string(e.unit) << ','
            << e.site_id << '\n';
}

inline BuildSchedule read_schedule_csv(std::istream& in, int start_year, int horizon_years) {
    const auto lines = csv::read_lines(in);
    if (lines.empty() || csv::split(lines.front().text) !=
                             std::vector<std::string>{"year", "technology", "capacity", "unit", "site_id"})
        throw ParseError("schedule CSV header must be 'year,technology,capacity,unit,site_id'");
    BuildSchedule s{start_year, horizon_years, {}};
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = csv::split(lines[i].text);
        long long year = 0;
        BuildEntry e;
        if (cells.size() != 5 || !csv::parse_int(cells[0], year) || !csv::parse_double(cells[2], e.capacity))
            throw ParseError("malformed schedule row", lines[i].number);
        if (cells[3] == "GW") e.unit = CapacityUnit::gw;
        else if (cells[3] == "GWh") e.unit = CapacityUnit::gwh;
        else throw ParseError("unit must be GW or GWh", lines[i].number);
        if (!(e.capacity > 0.0)) throw ParseError("capacity must be positive", lines[i].number);
        e.year = static_cast<int>(year);
        e.tech = cells[1];
        e.site_id = cells[4];
        s.entries.push_back(std::move(e));
    }
    return s;
}

inline nlohmann::json to_json(const BuildSchedule& s) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : s.entries)
        entries.push_back({{"year", e.year},
                           {"technology", e.tech},
                           {"capacity", e.capacity},
                           {"unit", to_string(e.unit)},
                           {"site_id", e.site_id}});
    return {{"start_year", s.start_year}, {"horizon_years", s.horizon_years}, {"entries", std::move(entries)}};
}

} // namespace fdplan
