#include <gtest/gtest.h>

#include <fstream>

#include "fdplan/scenario.hpp"
#include "support.hpp"

using namespace fdplan;
using testing_support::data_path;
using testing_support::scratch_dir;

namespace {

nlohmann::json baseline_json() { return nlohmann::json::parse(read_text_file(data_path("baseline.json"))); }

// Writes a config beside absolute data paths so it can live in a scratch dir.
std::filesystem::path write_config(const std::string& tag, nlohmann::json j) {
    const auto dir = scratch_dir(tag);
    j["fleet"]["path"] = data_path("eskom_fleet.csv");
    j["demand"]["historical_path"] = data_path("historical_generation.csv");
    j["demand"]["forecast_path"] = data_path("irp2010_forecast.csv");
    const auto path = dir / "config.json";
    std::ofstream(path) << j.dump(2);
    return path;
}

bool has_code(const std::vector<Finding>& f, const std::string& code) {
    return std::any_of(f.begin(), f.end(), [&](const Finding& x) { return x.code == code; });
}

ScenarioConfig quick_baseline() {
    auto c = load_config(data_path("baseline.json"));
    c.dispatch.years = 2;
    return c;
}

} // namespace

TEST(Config, BaselineValidatesClean) {
    const auto f = validate(data_path("baseline.json"));
    EXPECT_TRUE(f.empty()) << describe(f);
    const auto c = load_config(data_path("baseline.json"));
    EXPECT_EQ(c.name, "baseline");
    EXPECT_EQ(c.seed, 20230101u);
    EXPECT_EQ(c.planner.targets.firm_target_gw, 15.0);
    EXPECT_EQ(c.costs.assumptions.cost_of("bess").basis, CostBasis::per_kwh);
}

TEST(Config, PeakBelowAverage) {
    auto j = baseline_json();
    j["demand"]["peak_gw"] = 20;
    const auto f = validate(write_config("cfg_peak", j));
    EXPECT_TRUE(has_code(f, "peak_below_average")) << describe(f);
    EXPECT_THROW(load_config(write_config("cfg_peak", j)), ConfigError);
}

TEST(Config, MissingTraceFile) {
    auto j = baseline_json();
    j["profiles"]["wind_trace_path"] = "nowhere_wind.csv";
    EXPECT_TRUE(has_code(validate(write_config("cfg_trace", j)), "missing_file"));
}

TEST(Config, MissingSeedOnlyWhenSynthesizing) {
    auto j = baseline_json();
    j.erase("seed");
    EXPECT_TRUE(has_code(validate(write_config("cfg_seed", j)), "missing_seed"));
}

TEST(Config, UnknownKeyAndTypeErrors) {
    auto j = baseline_json();
    j["dispatch"]["yeers"] = 3;
    j["demand"]["peak_gw"] = "thirty five";
    const auto f = validate(write_config("cfg_keys", j));
    EXPECT_TRUE(has_code(f, "unknown_key"));
    EXPECT_TRUE(has_code(f, "type"));
    EXPECT_NE(describe(f).find("dispatch.yeers"), std::string::npos);
}

TEST(Config, SchemaVersionAndLeadTime) {
    auto j = baseline_json();
    j["schema_version"] = 99;
    j["planner"]["lead_times_years"]["ocgt"] = 30;
    const auto f = validate(write_config("cfg_schema", j));
    EXPECT_TRUE(has_code(f, "schema_version"));
    EXPECT_TRUE(has_code(f, "infeasible_lead_time"));
}

TEST(Config, SyntaxErrorCarriesLine) {
    const auto dir = scratch_dir("cfg_syntax");
    std::ofstream(dir / "bad.json") << "{\n  \"name\": \"x\",\n  \"seed\": 1,,\n}\n";
    try {
        validate(dir / "bad.json");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(validate(dir / "absent.json"), ParseError);
}

TEST(Config, RelativePathsResolveAgainstConfigDir) {
    const auto c = load_config(data_path("baseline.json"));
    EXPECT_TRUE(std::filesystem::is_regular_file(c.resolve(c.fleet.path)));
}

TEST(Seeds, StreamsAreDistinct) {
    EXPECT_NE(derive_seed(1, 1, 0), derive_seed(1, 2, 0));
    EXPECT_NE(derive_seed(1, 1, 0), derive_seed(1, 1, 1));
    EXPECT_NE(derive_seed(1, 1, 0), derive_seed(2, 1, 0));
    EXPECT_EQ(derive_seed(7, 3, 5), derive_seed(7, 3, 5));
}

TEST(Run, DeterministicReport) {
    const auto c = quick_baseline();
    const auto a = report_text(run_scenario(c));
    const auto b = report_text(run_scenario(c));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, report_text(run_scenario(c, 1234)));
}

TEST(Run, BaselineNumbers) {
    const auto r = run_scenario(quick_baseline());
    ASSERT_EQ(r.dispatch.size(), 2u);
    for (const auto& y : r.dispatch) {
        EXPECT_LT(y.summary.firm_utilization_pct, 10.0);
        EXPECT_NEAR(y.summary.demand_twh, 222.0, 0.3);
    }
    EXPECT_NEAR(r.fleet.cumulative_retired_gw.at(15), 28.0, 1.0);
    EXPECT_NEAR(average_annual_addition(r.schedule, "ocgt"), 0.75, 1e-12);
    EXPECT_NEAR(r.costs.coal.total_busd, 171.9, 1e-9);
    EXPECT_NEAR(r.costs.renewable.total_busd, 145.679, 1e-9);
    EXPECT_NEAR(r.costs.firm_program_annual_busd, 0.65025, 1e-12);
    ASSERT_TRUE(r.demand.forecast_gap_twh.has_value());
    EXPECT_EQ(*r.demand.forecast_gap_twh, 165.0);
    const auto j = to_json(r);
    EXPECT_EQ(j.at("schema_version"), kReportSchemaVersion);
}

TEST(Run, EmptyMixShedsEverything) {
    auto c = quick_baseline();
    c.dispatch.years = 1;
    c.dispatch.mix = GenerationMix{0.0, 0.7, 0.0, 0.0, 0.0, 0.0, 0.85, 0.0};
    const auto r = run_scenario(c);
    EXPECT_NEAR(r.dispatch[0].summary.unserved_twh, r.dispatch[0].summary.demand_twh, 1e-9);
    EXPECT_EQ(r.dispatch[0].summary.shed_hours, 8760u);
    EXPECT_TRUE(std::any_of(r.warnings.begin(), r.warnings.end(), [](const Warning& w) { return w.code == "load_shedding"; }));
}

TEST(Run, MissingFleetFileNamesScenario) {
    auto c = quick_baseline();
    c.fleet.path = "missing_fleet.csv";
    try {
        run_scenario(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("baseline"), std::string::npos);
    }
}

TEST(Output, PlotSeries) {
    const auto r = run_scenario(quick_baseline());
    const auto dir = scratch_dir("plots");
    const auto files = emit_plot_data(r, dir);
    EXPECT_EQ(files.size(), 4u);

    std::ifstream retire(dir / "retirement_curve.csv");
    std::string line;
    std::getline(retire, line);
    EXPECT_EQ(line, "years_from_start,year,cumulative_retired_gw");
    bool found = false;
    while (std::getline(retire, line))
        if (line.rfind("15,", 0) == 0) {
            const double gw = std::stod(line.substr(line.rfind(',') + 1));
            EXPECT_NEAR(gw, 28.0, 1.0);
            found = true;
        }
    EXPECT_TRUE(found);

    std::ifstream env(dir / "demand_envelope.csv");
    std::getline(env, line);
    while (std::getline(env, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() == 6 && !cells[4].empty()) { EXPECT_LE(std::stod(cells[4]), std::stod(cells[5])); }
    }
}

TEST(Output, ConstantEafIsFlat) {
    auto c = quick_baseline();
    c.dispatch.years = 0;
    c.fleet.eaf_model = "constant";
    c.fleet.eaf_constant = 0.6;
    const auto r = run_scenario(c);
    const auto dir = scratch_dir("plots_flat");
    emit_plot_data(r, dir);
    std::ifstream in(dir / "fleet_eaf.csv");
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        EXPECT_NEAR(std::stod(line.substr(line.find(',') + 1)), 0.6, 1e-12);
        ++rows;
    }
    EXPECT_GT(rows, 10);
}

TEST(Output, ReportWrittenToDir) {
    const auto dir = scratch_dir("report_out") / "nested";
    const auto path = write_report(run_scenario(quick_baseline()), dir);
    EXPECT_TRUE(std::filesystem::is_regular_file(path));
    EXPECT_EQ(path.filename(), "report.json");
}
