// fdplan command-line front end.
//
// Exit status: 0 success, 1 usage error, 2 validation failure, 3 runtime error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fdplan/fdplan.hpp"

namespace fs = std::filesystem;
using namespace fdplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string format = "json";
};

// Validation failures carry their findings.
struct InvalidConfig {
    std::string text;
};

ScenarioConfig load_or_fail(const std::string& path) {
    const auto findings = validate(path);
    if (!findings.empty()) throw InvalidConfig{"invalid config " + path + ":\n" + describe(findings)};
    return load_config(path);
}

// --out, then the config's output_dir, then FDPLAN_OUT_DIR, then ./fdplan_out.
fs::path output_dir(const Options& o, const ScenarioConfig* c) {
    if (!o.out.empty()) return o.out;
    if (c && c->output_dir) return c->resolve(*c->output_dir);
    if (const char* env = std::getenv("FDPLAN_OUT_DIR"); env && *env) return env;
    return "fdplan_out";
}

std::uint64_t effective_seed(const Options& o, const ScenarioConfig& c) { return o.seed ? *o.seed : c.seed.value_or(0); }

void print_dispatch_table(std::ostream& out, const std::vector<YearDispatch>& years) {
    char line[256];
    std::snprintf(line, sizeof line, "%4s %9s %9s %9s %9s %9s %9s %8s %6s\n", "year", "demand", "wind", "solar", "base",
                  "firm", "unserved", "firm_cf%", "shed_h");
    out << line;
    for (const auto& y : years) {
        const auto& s = y.summary;
        std::snprintf(line, sizeof line, "%4d %9.2f %9.2f %9.2f %9.2f %9.2f %9.3f %8.2f %6zu\n", y.index, s.demand_twh,
                      s.wind_twh, s.solar_twh, s.baseload_twh, s.firm_twh, s.unserved_twh, s.firm_utilization_pct,
                      s.shed_hours);
        out << line;
    }
}

void write_dispatch_summary_csv(std::ostream& out, const std::vector<YearDispatch>& years) {
    out << "year_index,demand_twh,wind_twh,solar_twh,baseload_twh,storage_charge_twh,storage_discharge_twh,firm_twh,"
           "curtailed_twh,unserved_twh,firm_utilization_pct,shed_hours,max_consecutive_shed_hours\n";
    for (const auto& y : years) {
        const auto& s = y.summary;
        out << y.index;
        for (double v : {s.demand_twh, s.wind_twh, s.solar_twh, s.baseload_twh, s.storage_charge_twh,
                         s.storage_discharge_twh, s.firm_twh, s.curtailed_twh, s.unserved_twh, s.firm_utilization_pct})
            out << ',' << csv::format_double(v);
        out << ',' << s.shed_hours << ',' << s.max_consecutive_shed_hours << '\n';
    }
}

void print_schedule_table(std::ostream& out, const BuildSchedule& s) {
    char line[128];
    std::snprintf(line, sizeof line, "%6s %-8s %10s %5s %s\n", "year", "tech", "capacity", "unit", "site");
    out << line;
    for (const auto& e : s.entries) {
        std::snprintf(line, sizeof line, "%6d %-8s %10.4f %5s %s\n", e.year, e.tech.c_str(), e.capacity,
                      std::string(to_string(e.unit)).c_str(), e.site_id.c_str());
        out << line;
    }
}

void write_costs_csv(std::ostream& out, const PathwayComparison& c) {
    out << "pathway,technology,unit_cost_usd,cost_basis,capacity,unit,total_busd,annual_busd\n";
    for (const auto* r : {&c.coal, &c.nuclear, &c.renewable})
        for (const auto& l : r->lines)
            out << r->name << ',' << l.tech << ',' << csv::format_double(l.unit_cost_usd) << ','
                << (l.basis == CostBasis::per_kw ? "USD/kW" : "USD/kWh") << ',' << csv::format_double(l.capacity) << ','
                << to_string(l.unit) << ',' << csv::format_double(l.total_busd) << ','
                << csv::format_double(l.annual_busd) << '\n';
}

void print_fuel(std::ostream& out, const FuelReport& f) {
    char line[256];
    std::snprintf(line, sizeof line,
                  "Fuel: coal %.3f B/yr, firm %.3f B/yr (%s intensity)\n"
                  "Savings (net of current dispatchable spend): %.3f B/yr, %.1f%%\n"
                  "Savings (gross firm fuel): %.3f B/yr, %.1f%%\n",
                  f.coal_fuel_busd, f.firm_fuel_busd, f.intensity_preset.c_str(), f.incremental.absolute_busd,
                  f.incremental.percent, f.literal.absolute_busd, f.literal.percent);
    out << line;
}

int cmd_validate(const Options& o) {
    const auto findings = validate(o.config);
    if (o.format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& f : findings) j.push_back({{"code", f.code}, {"message", f.message}});
        std::cout << nlohmann::json{{"config", o.config}, {"valid", findings.empty()}, {"findings", j}}.dump(2) << '\n';
    } else if (findings.empty()) {
        std::cout << o.config << ": valid\n";
    } else {
        std::cout << o.config << ":\n" << describe(findings);
    }
    return findings.empty() ? kExitOk : kExitInvalid;
}

int cmd_simulate(const Options& o) {
    const auto c = load_or_fail(o.config);
    const auto seed = effective_seed(o, c);
    const auto years = run_dispatch(c, seed);
    if (o.format == "table") print_dispatch_table(std::cout, years);
    else if (o.format == "csv") write_dispatch_summary_csv(std::cout, years);
    else std::cout << dispatch_json(years).dump(2) << '\n';
    if (!o.out.empty() && c.dispatch.years > 0) {
        const auto dir = prepare_output_dir(o.out);
        std::ostringstream summary, hourly;
        write_dispatch_summary_csv(summary, years);
        write_text(dir / "dispatch_summary.csv", summary.str());
        write_dispatch_csv(hourly, dispatch_scenario_year(c, seed, 0, load_scenario_traces(c)));
        write_text(dir / "dispatch_hourly_year0.csv", hourly.str());
    }
    return kExitOk;
}

int cmd_plan(const Options& o) {
    const auto c = load_or_fail(o.config);
    const auto fleet = scenario_fleet(c);
    const auto plan = plan_scenario(c, fleet, demand_outlook(c));
    if (o.format == "table") {
        print_schedule_table(std::cout, plan.schedule);
        std::cout << "initial firm gap " << csv::format_double(plan.fleet.initial_gap_gw) << " GW; sites assigned "
                  << csv::format_double(plan.sites.assigned_total_gw) << " GW, unassigned "
                  << csv::format_double(plan.sites.unassigned_total_gw) << " GW\n";
    } else if (o.format == "csv") {
        write_schedule_csv(std::cout, plan.schedule);
    } else {
        nlohmann::json gaps = nlohmann::json::array();
        for (const auto& g : plan.residual_gaps) gaps.push_back({{"year", g.year}, {"gap_gw", g.gap_gw}});
        std::cout << nlohmann::json{{"initial_gap_gw", plan.fleet.initial_gap_gw},
                                    {"schedule", to_json(plan.schedule)},
                                    {"site_assignment", to_json(plan.sites)},
                                    {"residual_floor_gaps", gaps}}
                         .dump(2)
                  << '\n';
    }
    if (!o.out.empty()) {
        const auto dir = prepare_output_dir(o.out);
        std::ostringstream s;
        write_schedule_csv(s, plan.schedule);
        write_text(dir / "schedule.csv", s.str());
    }
    return kExitOk;
}

// Works without a config, using the default assumptions and targets.
int cmd_costs(const Options& o) {
    ScenarioConfig c;
    if (!o.config.empty()) c = load_or_fail(o.config);
    BuildSchedule schedule = build_program(c.planner.targets, 0.0, c.planner.lead_times, c.planner.start_year, c.planner.build);
    if (!o.config.empty() && c.planner.initial_gap_from_fleet) {
        const auto fleet = scenario_fleet(c);
        schedule = plan_scenario(c, fleet, demand_outlook(c)).schedule;
    }
    const auto cmp = scenario_costs(c, schedule);
    if (o.format == "table") {
        write_cost_table(std::cout, cmp, c.costs.assumptions.fx_zar_per_usd);
        print_fuel(std::cout, cmp.fuel);
        char line[200];
        std::snprintf(line, sizeof line, "Firm program: %.3f GW/yr, %.1f M USD/yr\n",
                      average_annual_addition(schedule, c.planner.build.firm_tech), cmp.firm_program_annual_busd * 1000.0);
        std::cout << line;
    } else if (o.format == "csv") {
        write_costs_csv(std::cout, cmp);
    } else {
        std::cout << to_json(cmp).dump(2) << '\n';
    }
    return kExitOk;
}

int cmd_run(const Options& o, bool plots) {
    const auto c = load_or_fail(o.config);
    const auto report = run_scenario(c, o.seed);
    const auto dir = output_dir(o, &c);
    const auto path = write_report(report, dir);
    if (plots) {
        for (const auto& p : emit_plot_data(report, dir)) std::cerr << "wrote " << p.string() << '\n';
    }
    if (o.format == "table") {
        print_dispatch_table(std::cout, report.dispatch);
        write_cost_table(std::cout, report.costs, c.costs.assumptions.fx_zar_per_usd);
        for (const auto& w : report.warnings) std::cout << "warning [" << w.code << "] " << w.message << '\n';
    } else if (o.format == "csv") {
        write_dispatch_summary_csv(std::cout, report.dispatch);
    } else {
        std::cout << report_text(report);
    }
    std::cerr << "wrote " << path.string() << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Firm-dispatchable capacity planning toolkit"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* cfg = sub->add_option("--config", o.config, "Scenario config (JSON)");
        if (config_required) cfg->required();
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", seed, "Override the config seed");
        sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));
    };

    auto* validate_cmd = app.add_subcommand("validate", "Check a config and the files it references");
    add_common(validate_cmd, true);
    auto* simulate_cmd = app.add_subcommand("simulate", "Hourly dispatch of the configured mix");
    add_common(simulate_cmd, true);
    auto* plan_cmd = app.add_subcommand("plan", "Firm build schedule and site assignment");
    add_common(plan_cmd, true);
    auto* costs_cmd = app.add_subcommand("costs", "Replacement cost comparison");
    add_common(costs_cmd, false);
    auto* run_cmd = app.add_subcommand("run", "Full pipeline; writes report.json");
    add_common(run_cmd, true);
    auto* plots_cmd = app.add_subcommand("emit-plots", "Full pipeline plus plot-ready CSV series");
    add_common(plots_cmd, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    for (auto* sub : app.get_subcommands())
        if (sub->count("--seed")) o.seed = seed;

    try {
        if (validate_cmd->parsed()) return cmd_validate(o);
        if (simulate_cmd->parsed()) return cmd_simulate(o);
        if (plan_cmd->parsed()) return cmd_plan(o);
        if (costs_cmd->parsed()) return cmd_costs(o);
        if (run_cmd->parsed()) return cmd_run(o, false);
        if (plots_cmd->parsed()) return cmd_run(o, true);
    } catch (const InvalidConfig& e) {
        std::cerr << e.text;
        return kExitInvalid;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
