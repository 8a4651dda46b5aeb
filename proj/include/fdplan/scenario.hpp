#pragma once

// Scenario configuration, validation and the end-to-end pipeline:
// fleet -> demand -> profiles -> dispatch -> planner -> costing.
//
// Configuration is a JSON document. Every physical quantity carries its unit
// in the key name. Relative paths resolve against the config file's directory.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "costing.hpp"
#include "demand.hpp"
#include "dispatch.hpp"
#include "error.hpp"
#include "fleet.hpp"
#include "planner.hpp"
#include "profiles.hpp"

namespace fdplan {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

struct Finding {
    std::string code;
    std::string message;
    friend bool operator==(const Finding&, const Finding&) = default;
};

struct FleetSection {
    std::string path;
    std::string eaf_model = "calibrated"; // or "constant"
    double eaf_constant = 0.70;
    int eaf_base_year = 2022;
    std::string retiring_technology = "coal";
};

struct DemandSection {
    double base_energy_twh = 222.0;
    double annual_growth_rate = -0.005;
    double peak_gw = 35.0;
    std::optional<std::string> trace_path;
    std::optional<std::string> historical_path;
    std::optional<std::string> forecast_path;
    int envelope_year = 2022;
};

struct ProfilesSection {
    std::optional<std::string> wind_trace_path;
    std::optional<std::string> solar_trace_path;
    double wind_mean_cf = kDefaultWindCf;
    double solar_mean_cf = kDefaultSolarCf;
    WindParams wind;
};

struct DispatchSection {
    int years = 20;
    double initial_soc = kDefaultInitialSoc;
    GenerationMix mix{12.9, 0.70, 49.0, 14.0, 6.0, 24.0, 0.85, 15.0};
};

struct PlannerSection {
    int start_year = 2023;
    ProgramTargets targets;
    bool initial_gap_from_fleet = true;
    double initial_gap_gw = 0.0;
    std::string accounting = "derated_thermal";
    BuildOptions build;
    LeadTimes lead_times = default_lead_times();
    double max_plant_gw = 1.5;
};

struct CostSection {
    CostAssumptions assumptions = CostAssumptions::defaults();
    double replacement_gw = 25.0;
};

struct ScenarioConfig {
    int schema_version = kConfigSchemaVersion;
    std::string name = "scenario";
    std::optional<std::uint64_t> seed;
    FleetSection fleet;
    DemandSection demand;
    ProfilesSection profiles;
    DispatchSection dispatch;
    PlannerSection planner;
    CostSection costs;
    std::optional<std::string> output_dir;
    std::filesystem::path base_dir; // directory of the config file

    std::filesystem::path resolve(const std::string& p) const {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    }

    bool needs_seed() const {
        return dispatch.years > 0 &&
               (!demand.trace_path || !profiles.wind_trace_path || !profiles.solar_trace_path);
    }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

// Reads known keys from one JSON object, recording type problems and keys
// it does not recognise.
class SectionReader {
public:
    SectionReader(const nlohmann::json& obj, std::string where, std::vector<Finding>& findings)
        : obj_(obj), where_(std::move(where)), findings_(findings) {}

    template <class T>
    bool get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return false;
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!it->is_number()) throw std::invalid_argument("number");
            } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
                if (!it->is_number_integer()) throw std::invalid_argument("integer");
                if constexpr (std::is_same_v<T, std::uint64_t>)
                    if (it->is_number_integer() && !it->is_number_unsigned()) throw std::invalid_argument("integer >= 0");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!it->is_boolean()) throw std::invalid_argument("boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!it->is_string()) throw std::invalid_argument("string");
            }
            out = it->template get<T>();
            return true;
        } catch (const std::invalid_argument& e) {
            findings_.push_back({"type", path(key) + " must be a " + e.what()});
        } catch (const nlohmann::json::exception&) {
            findings_.push_back({"type", path(key) + " has the wrong type"});
        }
        return false;
    }

    template <class T>
    bool get(const char* key, std::optional<T>& out) {
        T v{};
        if (!get(key, v)) return false;
        out = std::move(v);
        return true;
    }

    bool require(const char* key) {
        if (obj_.contains(key)) return true;
        findings_.push_back({"missing_key", path(key) + " is required"});
        return false;
    }

    // Nested object, or nullptr after recording a finding.
    const nlohmann::json* object(const char* key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it == obj_.end()) return nullptr;
        if (!it->is_object()) {
            findings_.push_back({"type", path(key) + " must be an object"});
            return nullptr;
        }
        return &*it;
    }

    void finish() {
        for (const auto& [k, v] : obj_.items())
            if (!seen_.contains(k)) findings_.push_back({"unknown_key", "unrecognised key " + path(k.c_str())});
    }

    std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

private:
    const nlohmann::json& obj_;
    std::string where_;
    std::vector<Finding>& findings_;
    std::set<std::string> seen_;
};

template <class F>
void check(std::vector<Finding>& findings, const std::string& code, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        findings.push_back({code, e.what()});
    }
}

inline std::size_t line_of_byte(const std::string& text, std::size_t byte) {
    const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
    return 1 + static_cast<std::size_t>(std::count(text.begin(), end, '\n'));
}

} // namespace detail

// Parses JSON text; syntax errors raise ParseError with the line number.
inline nlohmann::json parse_json_text(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what(), detail::line_of_byte(text, e.byte));
    }
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Structural parse. Schema problems go to `findings`; the returned config
// holds defaults wherever a value was missing or rejected.
inline ScenarioConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                   std::vector<Finding>& findings) {
    ScenarioConfig c;
    c.base_dir = base_dir;
    if (!j.is_object()) {
        findings.push_back({"type", "config must be a JSON object"});
        return c;
    }
    detail::SectionReader top(j, "", findings);
    if (top.require("schema_version") && top.get("schema_version", c.schema_version) &&
        c.schema_version != kConfigSchemaVersion)
        findings.push_back({"schema_version", "unsupported schema_version " + std::to_string(c.schema_version) +
                                                  " (expected " + std::to_string(kConfigSchemaVersion) + ")"});
    top.get("name", c.name);
    top.get("seed", c.seed);
    top.get("output_dir", c.output_dir);

    if (top.require("fleet"))
        if (const auto* f = top.object("fleet")) {
            detail::SectionReader r(*f, "fleet", findings);
            if (r.require("path")) r.get("path", c.fleet.path);
            r.get("eaf_model", c.fleet.eaf_model);
            r.get("eaf_constant", c.fleet.eaf_constant);
            r.get("eaf_base_year", c.fleet.eaf_base_year);
            r.get("retiring_technology", c.fleet.retiring_technology);
            r.finish();
        }

    if (const auto* d = top.object("demand")) {
        detail::SectionReader r(*d, "demand", findings);
        r.get("base_energy_twh", c.demand.base_energy_twh);
        r.get("annual_growth_rate", c.demand.annual_growth_rate);
        r.get("peak_gw", c.demand.peak_gw);
        r.get("trace_path", c.demand.trace_path);
        r.get("historical_path", c.demand.historical_path);
        r.get("forecast_path", c.demand.forecast_path);
        r.get("envelope_year", c.demand.envelope_year);
        r.finish();
    }

    if (const auto* p = top.object("profiles")) {
        detail::SectionReader r(*p, "profiles", findings);
        r.get("wind_trace_path", c.profiles.wind_trace_path);
        r.get("solar_trace_path", c.profiles.solar_trace_path);
        r.get("wind_mean_cf", c.profiles.wind_mean_cf);
        r.get("solar_mean_cf", c.profiles.solar_mean_cf);
        r.get("wind_persistence", c.profiles.wind.persistence);
        r.get("wind_volatility", c.profiles.wind.volatility);
        r.finish();
    }

    if (const auto* d = top.object("dispatch")) {
        detail::SectionReader r(*d, "dispatch", findings);
        r.get("years", c.dispatch.years);
        r.get("initial_soc", c.dispatch.initial_soc);
        if (const auto* m = r.object("mix")) {
            detail::SectionReader mr(*m, "dispatch.mix", findings);
            auto& mix = c.dispatch.mix;
            mr.get("baseload_gw", mix.baseload_gw);
            mr.get("baseload_availability", mix.baseload_availability);
            mr.get("wind_gw", mix.wind_gw);
            mr.get("solar_gw", mix.solar_gw);
            mr.get("storage_power_gw", mix.storage_power_gw);
            mr.get("storage_energy_gwh", mix.storage_energy_gwh);
            mr.get("round_trip_efficiency", mix.round_trip_efficiency);
            mr.get("firm_gw", mix.firm_gw);
            mr.finish();
        }
        r.finish();
    }

    if (const auto* p = top.object("planner")) {
        detail::SectionReader r(*p, "planner", findings);
        auto& pl = c.planner;
        r.get("start_year", pl.start_year);
        r.get("horizon_years", pl.targets.horizon_years);
        r.get("firm_target_gw", pl.targets.firm_target_gw);
        r.get("wind_gw", pl.targets.wind_gw);
        r.get("solar_gw", pl.targets.solar_gw);
        r.get("storage_gwh", pl.targets.storage_gwh);
        r.get("firm_floor_gw", pl.targets.firm_floor_gw);
        r.get("reference_demand_twh", pl.targets.reference_demand_twh);
        r.get("initial_gap_from_fleet", pl.initial_gap_from_fleet);
        r.get("initial_gap_gw", pl.initial_gap_gw);
        r.get("accounting", pl.accounting);
        r.get("max_annual_rate_gw", pl.build.max_annual_rate_gw);
        r.get("firm_technology", pl.build.firm_tech);
        r.get("max_plant_gw", pl.max_plant_gw);
        if (const auto* l = r.object("lead_times_years")) {
            for (const auto& [tech, v] : l->items()) {
                if (!v.is_number_integer() || v.get<int>() < 0)
                    findings.push_back({"type", "planner.lead_times_years." + tech + " must be a non-negative integer"});
                else
                    pl.lead_times[tech] = v.get<int>();
            }
        }
        r.finish();
    }

    if (const auto* k = top.object("costs")) {
        detail::SectionReader r(*k, "costs", findings);
        auto& a = c.costs.assumptions;
        r.get("fx_zar_per_usd", a.fx_zar_per_usd);
        r.get("horizon_years", a.horizon_years);
        r.get("discount_rate", a.discount_rate);
        r.get("annual_system_energy_twh", a.annual_system_energy_twh);
        r.get("coal_fuel_usd_per_mwh", a.coal_fuel_usd_per_mwh);
        r.get("coal_price_usd_per_ton", a.coal_price_usd_per_ton);
        r.get("coal_tons_per_mwh", a.coal_tons_per_mwh);
        r.get("coal_generation_twh", a.coal_generation_twh);
        r.get("gas_price_usd_per_gj", a.gas_price_usd_per_gj);
        std::string preset;
        if (r.get("firm_intensity", preset)) {
            if (preset == "calibrated") a.firm_intensity = calibrated_intensity();
            else if (preset == "thermal") a.firm_intensity = thermal_intensity();
            else findings.push_back({"value_range", "costs.firm_intensity must be 'calibrated' or 'thermal'"});
        }
        double custom = 0.0;
        if (r.get("firm_intensity_gj_per_mwh", custom)) a.firm_intensity = {"custom", custom};
        r.get("firm_generation_twh", a.firm_generation_twh);
        r.get("current_dispatchable_twh", a.current_dispatchable_twh);
        r.get("current_dispatchable_fuel_busd", a.current_dispatchable_fuel_busd);
        r.get("replacement_gw", c.costs.replacement_gw);
        if (const auto* u = r.object("unit_costs")) {
            // keys like "coal_usd_per_kw" or "bess_usd_per_kwh"
            for (const auto& [key, v] : u->items()) {
                std::string tech;
                CostBasis basis{};
                if (key.size() > 11 && key.ends_with("_usd_per_kw")) {
                    tech = key.substr(0, key.size() - 11);
                    basis = CostBasis::per_kw;
                } else if (key.size() > 12 && key.ends_with("_usd_per_kwh")) {
                    tech = key.substr(0, key.size() - 12);
                    basis = CostBasis::per_kwh;
                } else {
                    findings.push_back({"unknown_key", "costs.unit_costs." + key + " needs a _usd_per_kw or _usd_per_kwh suffix"});
                    continue;
                }
                if (!v.is_number()) {
                    findings.push_back({"type", "costs.unit_costs." + key + " must be a number"});
                    continue;
                }
                a.unit_costs[tech] = {v.get<double>(), basis};
            }
        }
        r.finish();
    }
    top.finish();
    return c;
}

// Semantic checks: referenced files, unit sanity and module preconditions.
inline std::vector<Finding> check_config(const ScenarioConfig& c) {
    std::vector<Finding> out;
    auto file = [&](const std::optional<std::string>& p, const char* what) {
        if (p && !std::filesystem::is_regular_file(c.resolve(*p)))
            out.push_back({"missing_file", std::string(what) + " not found: " + c.resolve(*p).string()});
    };
    if (!c.fleet.path.empty()) file(c.fleet.path, "fleet dataset");
    file(c.demand.trace_path, "demand trace");
    file(c.demand.historical_path, "historical demand");
    file(c.demand.forecast_path, "demand forecast");
    file(c.profiles.wind_trace_path, "wind trace");
    file(c.profiles.solar_trace_path, "solar trace");

    const double avg_gw = c.demand.base_energy_twh / kTwhPerGwYear;
    if (!(c.demand.base_energy_twh > 0.0))
        out.push_back({"value_range", "demand.base_energy_twh must be positive"});
    else if (c.demand.peak_gw < avg_gw)
        out.push_back({"peak_below_average", "demand.peak_gw " + csv::format_double(c.demand.peak_gw) +
                                                 " is below the average demand of " + csv::format_double(avg_gw) +
                                                 " GW implied by " + csv::format_double(c.demand.base_energy_twh) + " TWh"});
    if (c.demand.annual_growth_rate <= -1.0) out.push_back({"value_range", "demand.annual_growth_rate must exceed -1"});

    if (c.needs_seed() && !c.seed) out.push_back({"missing_seed", "synthetic traces are requested but no seed is set"});

    if (c.fleet.eaf_model != "calibrated" && c.fleet.eaf_model != "constant")
        out.push_back({"value_range", "fleet.eaf_model must be 'calibrated' or 'constant'"});
    if (!(c.fleet.eaf_constant >= 0.0 && c.fleet.eaf_constant <= 1.0))
        out.push_back({"value_range", "fleet.eaf_constant must be in [0, 1]"});

    if (c.dispatch.years < 0) out.push_back({"value_range", "dispatch.years must be non-negative"});
    if (!(c.dispatch.initial_soc >= 0.0 && c.dispatch.initial_soc <= 1.0))
        out.push_back({"value_range", "dispatch.initial_soc must be in [0, 1]"});
    detail::check(out, "value_range", [&] { c.dispatch.mix.validate(); });
    if (!c.profiles.wind_trace_path && !(c.profiles.wind_mean_cf > 0.0 && c.profiles.wind_mean_cf < 0.7))
        out.push_back({"value_range", "profiles.wind_mean_cf must be in (0, 0.7)"});
    if (!c.profiles.solar_trace_path && !(c.profiles.solar_mean_cf > 0.0 && c.profiles.solar_mean_cf < 0.5))
        out.push_back({"value_range", "profiles.solar_mean_cf must be in (0, 0.5)"});
    if (!(c.profiles.wind.persistence >= 0.0 && c.profiles.wind.persistence < 1.0) || !(c.profiles.wind.volatility > 0.0))
        out.push_back({"value_range", "wind persistence must be in [0, 1) and volatility positive"});

    detail::check(out, "value_range", [&] { c.planner.targets.validate(); });
    detail::check(out, "value_range", [&] { (void)FirmAccounting::by_name(c.planner.accounting); });
    if (!(c.planner.build.max_annual_rate_gw > 0.0))
        out.push_back({"value_range", "planner.max_annual_rate_gw must be positive"});
    if (!(c.planner.max_plant_gw > 0.0)) out.push_back({"value_range", "planner.max_plant_gw must be positive"});
    if (c.planner.initial_gap_gw < 0.0) out.push_back({"value_range", "planner.initial_gap_gw must be non-negative"});
    for (const auto& [tech, lead] : c.planner.lead_times)
        if (lead >= c.planner.targets.horizon_years)
            out.push_back({"infeasible_lead_time", "lead time for '" + tech + "' leaves no commissioning year"});

    detail::check(out, "value_range", [&] { c.costs.assumptions.validate(); });
    for (const char* tech : {"coal", "nuclear", "wind", "solar", "bess"})
        if (!c.costs.assumptions.unit_costs.contains(tech))
            out.push_back({"missing_cost", std::string("no unit cost for '") + tech + "'"});
    if (!c.costs.assumptions.unit_costs.contains(c.planner.build.firm_tech))
        out.push_back({"missing_cost", "no unit cost for firm technology '" + c.planner.build.firm_tech + "'"});
    if (!(c.costs.replacement_gw >= 0.0)) out.push_back({"value_range", "costs.replacement_gw must be non-negative"});
    return out;
}

// Full validation of a config file. Throws ParseError only when the file is
// unreadable or not JSON; everything else is reported as findings.
inline std::vector<Finding> validate(const std::filesystem::path& config_path) {
    const auto text = read_text_file(config_path);
    const auto j = parse_json_text(text);
    std::vector<Finding> findings;
    const auto c = parse_config(j, config_path.parent_path(), findings);
    auto semantic = check_config(c);
    findings.insert(findings.end(), semantic.begin(), semantic.end());
    return findings;
}

inline std::string describe(const std::vector<Finding>& findings) {
    std::string s;
    for (const auto& f : findings) s += "  [" + f.code + "] " + f.message + "\n";
    return s;
}

// Parses and validates; throws ConfigError listing the findings.
inline ScenarioConfig load_config(const std::filesystem::path& config_path) {
    const auto text = read_text_file(config_path);
    const auto j = parse_json_text(text);
    std::vector<Finding> findings;
    auto c = parse_config(j, config_path.parent_path(), findings);
    auto semantic = check_config(c);
    findings.insert(findings.end(), semantic.begin(), semantic.end());
    if (!findings.empty()) throw ConfigError("invalid config " + config_path.string() + ":\n" + describe(findings));
    return c;
}

// ---------------------------------------------------------------------------
// Pipeline

// Independent per-purpose streams derived from the scenario seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream * 0x100000001ULL + index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct Warning {
    std::string code;
    std::string message;
};

struct YearDispatch {
    int index = 0;
    DispatchSummary summary;
    std::vector<double> firm_sorted_mw; // descending, for the duration curve
};

struct FleetOutlook {
    std::vector<double> cumulative_retired_gw; // offsets 0..horizon
    std::vector<std::pair<std::string, double>> firm_gap_by_accounting;
    double initial_gap_gw = 0.0;
};

struct DemandOutlook {
    AnnualDemandTrajectory projection;
    std::optional<AnnualDemandTrajectory> historical;
    std::optional<AnnualDemandTrajectory> forecast;
    std::optional<double> forecast_gap_twh; // forecast minus actual in envelope_year
};

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    FleetOutlook fleet;
    DemandOutlook demand;
    std::vector<YearDispatch> dispatch;
    BuildSchedule schedule;
    SiteAssignment sites;
    std::vector<YearGap> residual_gaps;
    PathwayComparison costs;
    std::vector<Warning> warnings;
    // Inputs kept for plot data.
    Fleet fleet_data;
    int start_year = 0;
    int horizon_years = 0;
    std::string retiring_technology;
    double firm_capacity_gw = 0.0;
};

inline Fleet scenario_fleet(const ScenarioConfig& c) {
    EafModels eaf = calibrated_eaf_models(c.fleet.eaf_base_year);
    if (c.fleet.eaf_model == "constant")
        for (auto& [tech, model] : eaf) model = EafModel::constant(c.fleet.eaf_constant);
    return load_fleet_csv(c.resolve(c.fleet.path).string(), default_catalog(), std::move(eaf));
}

struct ScenarioTraces {
    std::optional<HourlyDemandTrace> demand;
    std::optional<CapacityFactorTrace> wind;
    std::optional<CapacityFactorTrace> solar;
};

inline ScenarioTraces load_scenario_traces(const ScenarioConfig& c) {
    ScenarioTraces t;
    if (c.demand.trace_path) t.demand = load_demand_trace_csv(c.resolve(*c.demand.trace_path).string());
    if (c.profiles.wind_trace_path) t.wind = ingest_trace(c.resolve(*c.profiles.wind_trace_path).string());
    if (c.profiles.solar_trace_path) t.solar = ingest_trace(c.resolve(*c.profiles.solar_trace_path).string());
    return t;
}

// Hourly dispatch of simulated year i. File traces are reused every year;
// synthetic ones draw from per-year seed streams.
inline DispatchResult dispatch_scenario_year(const ScenarioConfig& c, std::uint64_t seed, int i, const ScenarioTraces& t) {
    const auto idx = static_cast<std::uint64_t>(i);
    const HourlyDemandTrace demand =
        t.demand ? *t.demand : synthesize_hourly(c.demand.base_energy_twh, c.demand.peak_gw, {}, derive_seed(seed, 1, idx));
    const CapacityFactorTrace wind =
        t.wind ? *t.wind : synth_wind(c.profiles.wind_mean_cf, derive_seed(seed, 2, idx), c.profiles.wind);
    const CapacityFactorTrace solar = t.solar ? *t.solar : synth_solar(c.profiles.solar_mean_cf, derive_seed(seed, 3, idx));
    return simulate_year(demand.mw(), c.dispatch.mix, wind, solar, c.dispatch.initial_soc);
}

inline YearDispatch summarize_scenario_year(const ScenarioConfig& c, std::uint64_t seed, int i, const ScenarioTraces& t) {
    auto r = dispatch_scenario_year(c, seed, i, t);
    YearDispatch y{i, r.summary, std::move(r.firm_mw)};
    std::sort(y.firm_sorted_mw.begin(), y.firm_sorted_mw.end(), std::greater<>());
    return y;
}

// Dispatch years run concurrently; each year depends only on its own index.
inline std::vector<YearDispatch> run_dispatch(const ScenarioConfig& c, std::uint64_t seed) {
    const auto traces = load_scenario_traces(c);
    std::vector<std::future<YearDispatch>> jobs;
    for (int i = 0; i < c.dispatch.years; ++i)
        jobs.push_back(std::async(std::launch::async, summarize_scenario_year, std::cref(c), seed, i, std::cref(traces)));
    std::vector<YearDispatch> out;
    out.reserve(jobs.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

inline DemandOutlook demand_outlook(const ScenarioConfig& c) {
    DemandOutlook d;
    d.projection = extrapolate(c.demand.base_energy_twh, c.demand.annual_growth_rate, c.planner.targets.horizon_years,
                               c.planner.start_year);
    if (c.demand.historical_path) d.historical = load_trajectory_csv(c.resolve(*c.demand.historical_path).string());
    if (c.demand.forecast_path) d.forecast = load_trajectory_csv(c.resolve(*c.demand.forecast_path).string());
    if (d.historical && d.forecast && d.historical->covers(c.demand.envelope_year) &&
        d.forecast->covers(c.demand.envelope_year))
        d.forecast_gap_twh = d.forecast->at(c.demand.envelope_year) - d.historical->at(c.demand.envelope_year);
    return d;
}

inline PathwayComparison scenario_costs(const ScenarioConfig& c, const BuildSchedule& schedule) {
    const auto& t = c.planner.targets;
    const double firm_rate = average_annual_addition(schedule, c.planner.build.firm_tech);
    Portfolio renewable = renewable_end_state(t);
    for (auto& item : renewable.items)
        if (item.tech == "ocgt") item.tech = c.planner.build.firm_tech;
    return compare_pathways(coal_replacement(c.costs.replacement_gw), nuclear_replacement(c.costs.replacement_gw),
                            renewable, c.costs.assumptions, firm_rate, c.planner.build.firm_tech);
}

struct ScheduleOutcome {
    BuildSchedule schedule;
    SiteAssignment sites;
    std::vector<YearGap> residual_gaps;
    FleetOutlook fleet;
};

inline ScheduleOutcome plan_scenario(const ScenarioConfig& c, const Fleet& fleet, const DemandOutlook& demand) {
    const auto& p = c.planner;
    ScheduleOutcome o;
    const auto acc = FirmAccounting::by_name(p.accounting);
    o.fleet.cumulative_retired_gw = cumulative_retired(fleet, p.start_year, p.targets.horizon_years,
                                                       PlantFilter::technology(c.fleet.retiring_technology));
    for (const auto& a : FirmAccounting::all())
        o.fleet.firm_gap_by_accounting.emplace_back(a.name, firm_floor_gap(fleet, p.start_year + 1, p.targets.firm_floor_gw, a));
    o.fleet.initial_gap_gw =
        p.initial_gap_from_fleet ? firm_floor_gap(fleet, p.start_year + 1, p.targets.firm_floor_gw, acc) : p.initial_gap_gw;

    o.schedule = build_program(p.targets, o.fleet.initial_gap_gw, p.lead_times, p.start_year, p.build);

    const auto sites = retired_sites(fleet, p.start_year, p.start_year + p.targets.horizon_years,
                                     PlantFilter::technology(c.fleet.retiring_technology));
    o.sites = assign_sites(sites, o.schedule.of_tech(p.build.firm_tech), p.max_plant_gw);

    ReplanOptions ro;
    ro.current_year = p.start_year;
    ro.accounting = acc;
    ro.lead_times = p.lead_times;
    ro.build = p.build;
    o.residual_gaps = replan(o.schedule, {fleet, demand.projection}, p.targets, ro).residual_gaps;
    return o;
}

inline std::vector<Warning> scenario_warnings(const RunReport& r) {
    std::vector<Warning> w;
    for (const auto& y : r.dispatch) {
        if (y.summary.unserved_twh > 0.0)
            w.push_back({"load_shedding", "year " + std::to_string(y.index) + ": " + csv::format_double(y.summary.unserved_twh) +
                                              " TWh unserved over " + std::to_string(y.summary.shed_hours) + " hours"});
        if (r.firm_capacity_gw > 0.0 && y.summary.firm_utilization_pct >= 10.0)
            w.push_back({"firm_utilization_high", "year " + std::to_string(y.index) + ": firm utilization " +
                                                      csv::format_double(y.summary.firm_utilization_pct) + "%"});
    }
    if (r.sites.unassigned_total_gw > 1e-9)
        w.push_back({"unassigned_site_capacity",
                     csv::format_double(r.sites.unassigned_total_gw) + " GW of new firm capacity has no retired site"});
    if (!r.residual_gaps.empty()) {
        double worst = 0.0;
        for (const auto& g : r.residual_gaps) worst = std::max(worst, g.gap_gw);
        w.push_back({"residual_floor_gap", std::to_string(r.residual_gaps.size()) +
                                               " program years below the firm floor, largest gap " +
                                               csv::format_double(worst) + " GW (first " +
                                               std::to_string(r.residual_gaps.front().year) + ")"});
    }
    return w;
}

// Runs the pipeline. Module errors are rethrown with the scenario name.
inline RunReport run_scenario(const ScenarioConfig& c, std::optional<std::uint64_t> seed_override = std::nullopt) {
    RunReport r;
    r.scenario = c.name;
    r.seed = seed_override ? *seed_override : c.seed.value_or(0);
    try {
        if (c.needs_seed() && !seed_override && !c.seed) throw ConfigError("synthetic traces need a seed");
        r.fleet_data = scenario_fleet(c);
        r.start_year = c.planner.start_year;
        r.horizon_years = c.planner.targets.horizon_years;
        r.retiring_technology = c.fleet.retiring_technology;
        r.firm_capacity_gw = c.dispatch.mix.firm_gw;
        r.demand = demand_outlook(c);
        r.dispatch = run_dispatch(c, r.seed);
        auto plan = plan_scenario(c, r.fleet_data, r.demand);
        r.fleet = std::move(plan.fleet);
        r.schedule = std::move(plan.schedule);
        r.sites = std::move(plan.sites);
        r.residual_gaps = std::move(plan.residual_gaps);
        r.costs = scenario_costs(c, r.schedule);
    } catch (const InfeasibleError& e) {
        throw InfeasibleError("scenario '" + c.name + "': " + e.what());
    } catch (const ParseError& e) {
        throw ParseError("scenario '" + c.name + "': " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError("scenario '" + c.name + "': " + e.what());
    } catch (const Error& e) {
        throw Error("scenario '" + c.name + "': " + e.what());
    }
    r.warnings = scenario_warnings(r);
    return r;
}

inline nlohmann::json to_json(const SiteAssignment& s) {
    nlohmann::json sites = nlohmann::json::object();
    for (const auto& [id, gw] : s.assigned_gw) sites[id] = gw;
    nlohmann::json plants = nlohmann::json::array();
    for (const auto& p : s.plants) plants.push_back({{"year", p.year}, {"capacity_gw", p.capacity_gw}, {"site_id", p.site_id}});
    return {{"requested_gw", s.requested_gw},
            {"assigned_total_gw", s.assigned_total_gw},
            {"unassigned_total_gw", s.unassigned_total_gw},
            {"assigned_gw", std::move(sites)},
            {"plants", std::move(plants)}};
}

inline nlohmann::json dispatch_json(const std::vector<YearDispatch>& years) {
    nlohmann::json list = nlohmann::json::array();
    double max_util = 0.0, sum_util = 0.0, unserved = 0.0;
    for (const auto& y : years) {
        auto s = to_json(y.summary);
        s["year_index"] = y.index;
        list.push_back(std::move(s));
        max_util = std::max(max_util, y.summary.firm_utilization_pct);
        sum_util += y.summary.firm_utilization_pct;
        unserved += y.summary.unserved_twh;
    }
    return {{"years", std::move(list)},
            {"aggregate",
             {{"years", years.size()},
              {"mean_firm_utilization_pct", years.empty() ? 0.0 : sum_util / static_cast<double>(years.size())},
              {"max_firm_utilization_pct", max_util},
              {"total_unserved_twh", unserved}}}};
}

inline nlohmann::json to_json(const RunReport& r) {
    nlohmann::json gaps = nlohmann::json::array();
    for (const auto& g : r.residual_gaps) gaps.push_back({{"year", g.year}, {"gap_gw", g.gap_gw}});
    nlohmann::json by_acc = nlohmann::json::object();
    for (const auto& [name, gap] : r.fleet.firm_gap_by_accounting) by_acc[name] = gap;
    nlohmann::json warnings = nlohmann::json::array();
    for (const auto& w : r.warnings) warnings.push_back({{"code", w.code}, {"message", w.message}});
    nlohmann::json demand = {{"projection_start_year", r.demand.projection.base_year()},
                             {"projection_twh", r.demand.projection.values()}};
    if (r.demand.forecast_gap_twh) demand["forecast_gap_twh"] = *r.demand.forecast_gap_twh;
    return {{"schema_version", kReportSchemaVersion},
            {"scenario", r.scenario},
            {"seed", r.seed},
            {"fleet",
             {{"start_year", r.start_year},
              {"cumulative_retired_gw", r.fleet.cumulative_retired_gw},
              {"firm_gap_gw_by_accounting", std::move(by_acc)},
              {"initial_gap_gw", r.fleet.initial_gap_gw}}},
            {"demand", std::move(demand)},
            {"dispatch", dispatch_json(r.dispatch)},
            {"schedule", to_json(r.schedule)},
            {"site_assignment", to_json(r.sites)},
            {"residual_floor_gaps", std::move(gaps)},
            {"costs", to_json(r.costs)},
            {"warnings", std::move(warnings)}};
}

inline std::string report_text(const RunReport& r) { return to_json(r).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Output

inline std::filesystem::path prepare_output_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline std::filesystem::path write_report(const RunReport& r, const std::filesystem::path& dir) {
    prepare_output_dir(dir);
    const auto path = dir / "report.json";
    write_text(path, report_text(r));
    return path;
}

// Plot-ready CSV series. Returns the written file paths.
inline std::vector<std::filesystem::path> emit_plot_data(const RunReport& r, const std::filesystem::path& dir) {
    prepare_output_dir(dir);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const char* name, const std::string& body) {
        write_text(dir / name, body);
        written.push_back(dir / name);
    };

    {
        std::ostringstream s;
        s << "years_from_start,year,cumulative_retired_gw\n";
        for (std::size_t k = 0; k < r.fleet.cumulative_retired_gw.size(); ++k)
            s << k << ',' << r.start_year + static_cast<int>(k) << ','
              << csv::format_double(r.fleet.cumulative_retired_gw[k]) << '\n';
        emit("retirement_curve.csv", s.str());
    }
    {
        // History from the oldest retiring plant's era through the horizon.
        std::ostringstream s;
        s << "year,eaf\n";
        const auto filter = PlantFilter::technology(r.retiring_technology);
        for (int y = r.start_year - 25; y <= r.start_year + r.horizon_years; ++y) {
            double eaf = 0.0;
            try {
                eaf = fleet_eaf(r.fleet_data, y, filter);
            } catch (const InvalidInput&) {
                continue;
            }
            s << y << ',' << csv::format_double(eaf) << '\n';
        }
        emit("fleet_eaf.csv", s.str());
    }
    {
        std::ostringstream s;
        s << "year,actual_twh,forecast_twh,projection_twh,low_twh,high_twh\n";
        int first = r.demand.projection.base_year(), last = r.demand.projection.last_year();
        for (const auto* t : {&r.demand.historical, &r.demand.forecast})
            if (*t) {
                first = std::min(first, (*t)->base_year());
                last = std::max(last, (*t)->last_year());
            }
        auto cell = [](const std::optional<AnnualDemandTrajectory>& t, int y) -> std::optional<double> {
            if (t && t->covers(y)) return t->at(y);
            return std::nullopt;
        };
        for (int y = first; y <= last; ++y) {
            const std::optional<AnnualDemandTrajectory> proj = r.demand.projection;
            std::vector<std::optional<double>> v{cell(r.demand.historical, y), cell(r.demand.forecast, y), cell(proj, y)};
            std::optional<double> lo, hi;
            for (const auto& x : v)
                if (x) {
                    lo = lo ? std::min(*lo, *x) : *x;
                    hi = hi ? std::max(*hi, *x) : *x;
                }
            s << y;
            for (const auto& x : v) s << ',' << (x ? csv::format_double(*x) : "");
            s << ',' << (lo ? csv::format_double(*lo) : "") << ',' << (hi ? csv::format_double(*hi) : "") << '\n';
        }
        emit("demand_envelope.csv", s.str());
    }
    {
        // Mean across simulated years of the k-th highest firm hour.
        std::ostringstream s;
        s << "rank,fraction_of_hours,firm_gw,firm_fraction_of_capacity\n";
        if (!r.dispatch.empty()) {
            const std::size_t n = r.dispatch.front().firm_sorted_mw.size();
            for (std::size_t k = 0; k < n; ++k) {
                double mw = 0.0;
                for (const auto& y : r.dispatch) mw += y.firm_sorted_mw[k];
                mw /= static_cast<double>(r.dispatch.size());
                const double frac = r.firm_capacity_gw > 0.0 ? gw_from_mw(mw) / r.firm_capacity_gw : 0.0;
                s << k + 1 << ',' << csv::format_double(static_cast<double>(k + 1) / static_cast<double>(n)) << ','
                  << csv::format_double(gw_from_mw(mw)) << ',' << csv::format_double(frac) << '\n';
            }
        }
        emit("firm_duration_curve.csv", s.str());
    }
    return written;
}

} // namespace fdplan
