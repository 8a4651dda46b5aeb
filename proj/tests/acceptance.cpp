// Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "fdplan/fdplan.hpp"
#include "support.hpp"

using namespace fdplan;
using testing_support::data_path;
using testing_support::Gen;

namespace {

int failures = 0;

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void near(double got, double want, double tol, const std::string& what) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s=%.6g (want %.6g +/- %.3g)", what.c_str(), got, want, tol);
        expect(std::fabs(got - want) <= tol, buf);
    }
};

void report(int id, const std::string& title, const std::function<Check()>& body) {
    Check c;
    try {
        c = body();
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail = std::string("exception: ") + e.what();
    }
    if (!c.ok) ++failures;
    std::printf("%s  %2d  %s%s%s\n", c.ok ? "PASS" : "FAIL", id, title.c_str(), c.detail.empty() ? "" : "  -- ",
                c.detail.c_str());
    std::fflush(stdout);
}

double line_total(const CapexReport& r, std::string_view tech) {
    for (const auto& l : r.lines)
        if (l.tech == tech) return l.total_busd;
    throw std::runtime_error("no line for " + std::string(tech));
}

Check cost_table() {
    Check c;
    const auto a = CostAssumptions::defaults();
    const auto p = compare_pathways(coal_replacement(), nuclear_replacement(), renewable_end_state(), a);
    c.near(p.coal.total_busd, 171, 1, "coal");
    c.near(p.nuclear.total_busd, 185, 1, "nuclear");
    c.near(line_total(p.renewable, "wind"), 102, 1, "wind");
    c.near(line_total(p.renewable, "solar"), 20, 1, "solar");
    c.near(line_total(p.renewable, "bess"), 10, 1, "bess");
    c.near(line_total(p.renewable, "ocgt"), 13, 1, "ocgt");
    c.near(p.renewable.total_busd, 145, 1, "renewable");
    c.near(p.coal.annual_busd, 6.8, 0.1, "coal annual");
    c.near(p.nuclear.annual_busd, 7.4, 0.1, "nuclear annual");
    c.near(p.renewable.annual_busd, 5.8, 0.1, "renewable annual");
    c.near(p.coal.unit_cost.usd_per_mwh, 31, 1, "coal USD/MWh");
    c.near(p.nuclear.unit_cost.usd_per_mwh, 33, 1, "nuclear USD/MWh");
    c.near(p.renewable.unit_cost.usd_per_mwh, 26, 1, "renewable USD/MWh");
    c.near(p.coal.unit_cost.zar_per_kwh, 0.58, 0.01, "coal ZAR/kWh");
    c.near(p.nuclear.unit_cost.zar_per_kwh, 0.63, 0.01, "nuclear ZAR/kWh");
    c.near(p.renewable.unit_cost.zar_per_kwh, 0.50, 0.01, "renewable ZAR/kWh");
    std::ostringstream table;
    write_cost_table(table, p, a.fx_zar_per_usd);
    c.expect(table.str().find("Total Renewable") != std::string::npos, "table lacks total row");
    return c;
}

Check capacity_factors() {
    Check c;
    const struct {
        const char* name;
        double twh, gw, cf;
    } rows[] = {{"coal", 176.6, 39.8, 50.7}, {"nuclear", 10.1, 1.9, 60.7}, {"hydro+pumped", 14.0, 3.3, 48.4},
                {"wind", 9.7, 3.4, 32.6},    {"solar", 6.5, 2.8, 26.5},    {"dispatchable", 3.6, 3.4, 12.1}};
    for (const auto& r : rows) c.near(capacity_factor(r.twh, r.gw), r.cf, 0.1, r.name);
    return c;
}

Check sizing() {
    Check c;
    const double gw = replacement_capacity(35, 0.507, 0.70);
    c.near(gw, 25.35, 1e-9, "replacement");
    c.near(gw, 25.0, 0.5, "vs printed");
    return c;
}

Check firm_program() {
    Check c;
    const auto s = build_program(ProgramTargets{}, 0.0, default_lead_times(), 2023);
    const double rate = average_annual_addition(s, "ocgt");
    c.near(rate, 0.75, 1e-9, "GW/yr");
    const double musd = 1000.0 * capex(rate, CapacityUnit::gw, CostAssumptions::defaults().cost_of("ocgt"));
    c.near(musd, 650, 10, "M USD/yr");
    c.expect(respects_lead_times(s, default_lead_times()), "lead time violated");
    return c;
}

Check milestones() {
    Check c;
    const auto f = load_fleet_csv(data_path("eskom_fleet.csv"));
    const auto r = cumulative_retired(f, 2023, 25, PlantFilter::technology("coal"));
    c.near(r[15], 28, 1, "+15y GW");
    c.near(r[25], 35, 1, "+25y GW");
    return c;
}

Check fuel() {
    Check c;
    const auto f = fuel_report(CostAssumptions::defaults());
    c.near(f.coal_fuel_busd, 2.2, 0.05, "coal B");
    c.near(f.firm_fuel_busd, 0.75, 0.01, "firm B");
    c.near(f.incremental.absolute_busd, 1.65, 0.01, "(a) B");
    c.near(f.incremental.percent, 75, 0.5, "(a) %");
    c.near(f.literal.absolute_busd, 1.45, 0.01, "(b) B");
    c.near(f.literal.percent, 66, 0.5, "(b) %");
    return c;
}

Check envelope_gap() {
    Check c;
    const auto actual = load_trajectory_csv(data_path("historical_generation.csv"));
    const auto forecast = load_trajectory_csv(data_path("irp2010_forecast.csv"));
    const double gap = forecast.at(2022) - actual.at(2022);
    c.expect(gap == 165.0, "gap " + csv::format_double(gap));
    return c;
}

Check dispatch_suite() {
    Check c;
    auto cfg = load_config(data_path("baseline.json"));
    const auto& m = cfg.dispatch.mix;
    c.expect(m.baseload_gw == 12.9 && m.baseload_availability == 0.70 && m.wind_gw == 49 && m.solar_gw == 14 &&
                 m.storage_energy_gwh == 24 && m.storage_power_gw == 6 && m.firm_gw == 15,
             "baseline mix differs from the end state");
    c.expect(cfg.demand.base_energy_twh == 222 && cfg.demand.peak_gw == 35, "baseline demand differs");
    const ScenarioTraces none;
    const std::uint64_t seed = *cfg.seed;
    const double eta = m.leg_efficiency();
    const double emax = m.storage_energy_gwh * 1000.0;

    double worst_residual = 0.0, max_util = 0.0, sum_util = 0.0;
    int antecedent_years = 0;
    for (int i = 0; i < 20; ++i) {
        const auto r = dispatch_scenario_year(cfg, seed, i, none);
        double prev = r.initial_soc_mwh;
        for (std::size_t h = 0; h < r.hours(); ++h) {
            const double supply = r.wind_mw[h] + r.solar_mw[h] - r.curtailed_mw[h] + r.baseload_mw[h] +
                                  r.discharge_mw[h] + r.firm_mw[h] + r.unserved_mw[h] - r.charge_mw[h];
            worst_residual = std::max(worst_residual, std::fabs(supply - r.demand_mw[h]) / r.demand_mw[h]);
            if (r.soc_mwh[h] < 0.0 || r.soc_mwh[h] > emax) c.expect(false, "SOC out of bounds");
            const double expect = prev + r.charge_mw[h] * eta - r.discharge_mw[h] / eta;
            if (std::fabs(r.soc_mwh[h] - expect) > 1e-9 * emax) c.expect(false, "SOC recurrence broken");
            prev = r.soc_mwh[h];
        }
        const double util = r.summary.firm_utilization_pct;
        max_util = std::max(max_util, util);
        sum_util += util;
        c.expect(util < 10.0, "year " + std::to_string(i) + " utilization " + csv::format_double(util));

        // (iv) with storage starting full.
        auto full = cfg;
        full.dispatch.initial_soc = 1.0;
        const auto rf = dispatch_scenario_year(full, seed, i, none);
        const double peak = *std::max_element(rf.demand_mw.begin(), rf.demand_mw.end()) / 1000.0;
        if (m.baseload_gw * m.baseload_availability + m.firm_gw + m.storage_power_gw >= peak) {
            ++antecedent_years;
            c.expect(rf.summary.unserved_twh == 0.0, "year " + std::to_string(i) + " shed despite adequacy");
        }
    }
    c.expect(worst_residual < 1e-9, "balance residual " + csv::format_double(worst_residual));

    // (v) greedy oracle, 24-hour instances without storage, exact.
    Gen g(8);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> demand(24), wind(24), solar(24);
        for (std::size_t h = 0; h < 24; ++h) {
            demand[h] = g.dyadic(160) * 250.0;
            wind[h] = g.dyadic(4);
            solar[h] = g.coin() ? g.dyadic(4) : 0.0;
        }
        GenerationMix gm;
        gm.wind_gw = g.dyadic(40);
        gm.solar_gw = g.dyadic(40);
        gm.baseload_gw = g.dyadic(80);
        gm.baseload_availability = g.dyadic(4);
        gm.firm_gw = g.dyadic(40);
        const auto r = simulate(demand, gm, wind, solar);
        for (std::size_t h = 0; h < 24; ++h) {
            double left = demand[h];
            const double ren = gm.wind_gw * 1000.0 * wind[h] + gm.solar_gw * 1000.0 * solar[h];
            const double used = std::min(ren, left);
            left -= used;
            const double base = std::min(gm.baseload_gw * 1000.0 * gm.baseload_availability, left);
            left -= base;
            const double firm = std::min(gm.firm_gw * 1000.0, left);
            left -= firm;
            if (r.curtailed_mw[h] != ren - used || r.baseload_mw[h] != base || r.firm_mw[h] != firm ||
                r.unserved_mw[h] != left)
                ++mismatches;
        }
    }
    c.expect(mismatches == 0, std::to_string(mismatches) + " oracle mismatches");

    char buf[200];
    std::snprintf(buf, sizeof buf, "firm utilization mean %.2f%% max %.2f%%; adequacy antecedent held in %d/20 years",
                  sum_util / 20.0, max_util, antecedent_years);
    if (c.ok) c.detail = buf;
    else c.detail += std::string("; ") + buf;
    return c;
}

Check planner_properties() {
    Check c;
    Gen g(9);
    const int cases = 1000;
    int idem = 0, site = 0, lead = 0;
    for (int t = 0; t < cases; ++t) {
        // Replan idempotence and lead time on random small instances.
        ProgramTargets tg;
        tg.horizon_years = g.integer(2, 12);
        tg.firm_target_gw = g.real(0.0, 12.0);
        tg.wind_gw = tg.solar_gw = tg.storage_gwh = 0.0;
        tg.firm_floor_gw = g.real(0.0, 15.0);
        tg.reference_demand_twh = 100.0;
        ReplanOptions opt;
        opt.current_year = 2020 + g.integer(0, tg.horizon_years);
        opt.lead_times = {{"ocgt", g.integer(0, 4)}};
        opt.build.max_annual_rate_gw = g.real(0.3, 3.0);
        opt.accounting = FirmAccounting::all()[static_cast<std::size_t>(g.integer(0, 2))];
        std::vector<Plant> plants;
        for (int i = 0, n = g.integer(0, 5); i < n; ++i) {
            const char* techs[] = {"coal", "ocgt", "hydro", "pumped_storage", "nuclear"};
            const int from = g.integer(1990, 2022);
            plants.push_back({"p" + std::to_string(i), techs[g.integer(0, 4)], g.integer(1, 20) * 250.0, from,
                              from + g.integer(5, 50), "s" + std::to_string(i)});
        }
        Observations obs{Fleet(plants, default_catalog(), calibrated_eaf_models()), {}};
        if (g.coin(0.7)) {
            std::vector<double> d;
            for (int k = 0; k <= tg.horizon_years; ++k) d.push_back(g.real(60.0, 140.0));
            obs.demand = AnnualDemandTrajectory(2020, d);
        }
        BuildSchedule current{2020, tg.horizon_years, {}};
        for (int i = 0, n = g.integer(0, 6); i < n; ++i)
            current.entries.push_back({2020 + g.integer(1, tg.horizon_years), "ocgt", g.real(0.1, 4.0), CapacityUnit::gw, {}});
        std::stable_sort(current.entries.begin(), current.entries.end(),
                         [](const BuildEntry& a, const BuildEntry& b) { return a.year < b.year; });

        const auto once = replan(current, obs, tg, opt);
        const auto twice = replan(once.schedule, obs, tg, opt);
        if (twice.schedule == once.schedule) ++idem;

        bool lead_ok = true;
        const int first = 2020 + std::max(1, opt.lead_times.at("ocgt"));
        for (const auto& e : once.schedule.entries)
            if (e.year > opt.current_year && e.year < first) lead_ok = false;
        try {
            const auto prog = build_program(tg, 0.0, opt.lead_times, 2020, opt.build);
            lead_ok = lead_ok && respects_lead_times(prog, opt.lead_times);
        } catch (const InfeasibleError&) {
        }
        if (lead_ok) ++lead;

        // Site headroom and conservation.
        std::vector<RetiredSite> sites;
        for (int i = 0, n = g.integer(0, 6); i < n; ++i)
            sites.push_back({"s" + std::to_string(g.integer(0, 4)), g.real(0.1, 3.0), g.integer(2020, 2035)});
        std::vector<BuildEntry> entries;
        double requested = 0.0;
        for (int i = 0, n = g.integer(0, 8); i < n; ++i) {
            entries.push_back({g.integer(2020, 2040), "ocgt", g.real(0.05, 4.0), CapacityUnit::gw, {}});
            requested += entries.back().capacity;
        }
        const auto a = assign_sites(sites, entries, g.real(0.2, 2.0));
        std::map<std::string, double> headroom;
        for (const auto& s : sites) headroom[s.site_id] += s.nameplate_gw;
        bool ok = std::fabs(a.assigned_total_gw + a.unassigned_total_gw - requested) <= 1e-9;
        for (const auto& [id, gw] : a.assigned_gw) ok = ok && gw <= headroom[id] + 1e-9;
        if (ok) ++site;
    }
    c.expect(idem == cases, "idempotent " + std::to_string(idem) + "/" + std::to_string(cases));
    c.expect(site == cases, "site invariants " + std::to_string(site) + "/" + std::to_string(cases));
    c.expect(lead == cases, "lead time " + std::to_string(lead) + "/" + std::to_string(cases));
    if (c.ok) c.detail = std::to_string(cases) + " cases each";
    return c;
}

Check determinism() {
    Check c;
    const auto cfg = load_config(data_path("baseline.json"));
    const auto base = std::filesystem::temp_directory_path() / "fdplan_acceptance";
    std::filesystem::remove_all(base);
    const auto p1 = write_report(run_scenario(cfg), base / "run1");
    const auto p2 = write_report(run_scenario(cfg), base / "run2");
    const auto a = read_text_file(p1), b = read_text_file(p2);
    c.expect(!a.empty() && a == b, "reports differ");
    return c;
}

} // namespace

int main() {
    report(1, "Replacement cost table", cost_table);
    report(2, "Capacity-factor back-calculation", capacity_factors);
    report(3, "Replacement sizing", sizing);
    report(4, "Firm program arithmetic", firm_program);
    report(5, "Decommissioning milestones", milestones);
    report(6, "Fuel economics", fuel);
    report(7, "Demand envelope", envelope_gap);
    report(8, "Dispatch property suite", dispatch_suite);
    report(9, "Planner properties", planner_properties);
    report(10, "Determinism", determinism);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
