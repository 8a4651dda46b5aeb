#include <gtest/gtest.h>

#include <fstream>
#include <limits>
#include <sstream>

#include "fdplan/profiles.hpp"
#include "support.hpp"

using namespace fdplan;
using testing_support::Gen;
using testing_support::scratch_dir;

TEST(SynthSolar, ReferenceMean) {
    const auto t = synth_solar(0.265, 1);
    EXPECT_EQ(t.technology(), RenewableTech::solar);
    EXPECT_NEAR(t.mean(), 0.265, 0.005);
}

TEST(SynthSolar, NightIsExactlyZero) {
    for (double target : {0.1, 0.265, 0.4}) {
        const auto t = synth_solar(target, 3);
        for (int d = 0; d < 365; ++d)
            for (int h : {0, 1, 2, 3, 22, 23}) EXPECT_EQ(t[static_cast<std::size_t>(d * 24 + h)], 0.0);
    }
}

TEST(SynthSolar, DeterministicAndBounded) {
    EXPECT_EQ(synth_solar(0.25, 9), synth_solar(0.25, 9));
    const auto bright = synth_solar(0.45, 2);
    for (double v : bright.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(SynthSolar, OutOfRangeTargets) {
    EXPECT_THROW(synth_solar(0.0, 1), InvalidInput);
    EXPECT_THROW(synth_solar(0.5, 1), InvalidInput);
    // Even with every daylight hour at 1 the mean stays below the daylight fraction.
    SolarParams short_days;
    short_days.mean_day_length_h = 6.0;
    short_days.day_length_swing_h = 0.0;
    EXPECT_THROW(synth_solar(0.3, 1, short_days), InvalidInput);
}

TEST(SynthWind, ReferenceMean) {
    const auto t = synth_wind(0.326, 1);
    EXPECT_EQ(t.technology(), RenewableTech::wind);
    EXPECT_NEAR(t.mean(), 0.326, 0.005);
    for (double v : t.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(SynthWind, SeedsDifferButMeansHold) {
    const auto a = synth_wind(0.326, 1), b = synth_wind(0.326, 2);
    EXPECT_NE(a, b);
    EXPECT_NEAR(a.mean(), 0.326, 0.005);
    EXPECT_NEAR(b.mean(), 0.326, 0.005);
}

TEST(SynthWind, MeanToleranceAcrossSeedsAndTargets) {
    Gen g(31);
    for (int trial = 0; trial < 30; ++trial) {
        const double target = g.real(0.1, 0.6);
        EXPECT_NEAR(synth_wind(target, static_cast<std::uint64_t>(trial)).mean(), target, 0.005);
    }
}

TEST(SynthWind, Autocorrelated) {
    // Lag-1 autocorrelation of an AR(1) driven series is far above white noise.
    const auto t = synth_wind(0.35, 4);
    const double m = t.mean();
    double num = 0.0, den = 0.0;
    for (std::size_t h = 0; h + 1 < t.size(); ++h) {
        num += (t[h] - m) * (t[h + 1] - m);
        den += (t[h] - m) * (t[h] - m);
    }
    EXPECT_GT(num / den, 0.8);
}

TEST(SynthWind, BadParameters) {
    EXPECT_THROW(synth_wind(0.0, 1), InvalidInput);
    EXPECT_THROW(synth_wind(0.7, 1), InvalidInput);
    WindParams p;
    p.persistence = 1.0;
    EXPECT_THROW(synth_wind(0.3, 1, p), InvalidInput);
}

TEST(CapacityFactorTrace, Validation) {
    EXPECT_THROW(CapacityFactorTrace(RenewableTech::wind, std::vector<double>(8759, 0.3)), InvalidInput);
    std::vector<double> v(8760, 0.3);
    v[10] = 1.2;
    EXPECT_THROW(CapacityFactorTrace(RenewableTech::wind, v), InvalidInput);
}

namespace {

void write_rows(const std::filesystem::path& p, std::size_t n, const std::string& value, std::size_t odd_row = SIZE_MAX,
                const std::string& odd = "") {
    std::ofstream out(p);
    for (std::size_t i = 0; i < n; ++i) out << (i == odd_row ? odd : value) << '\n';
}

} // namespace

TEST(IngestTrace, ConstantFileAndTechnologyFromName) {
    const auto dir = scratch_dir("ingest");
    write_rows(dir / "site_wind.csv", 8760, "0.3");
    const auto t = ingest_trace((dir / "site_wind.csv").string());
    EXPECT_EQ(t.technology(), RenewableTech::wind);
    for (double v : t.values()) EXPECT_EQ(v, 0.3);
}

TEST(IngestTrace, DistinctErrors) {
    const auto dir = scratch_dir("ingest_errors");
    write_rows(dir / "short_solar.csv", 8759, "0.3");
    write_rows(dir / "range_solar.csv", 8760, "0.3", 100, "1.2");
    write_rows(dir / "text_solar.csv", 8760, "0.3", 100, "x");
    write_rows(dir / "unlabelled.csv", 8760, "0.3");
    EXPECT_THROW(ingest_trace((dir / "short_solar.csv").string()), TraceLengthError);
    try {
        ingest_trace((dir / "range_solar.csv").string());
        FAIL();
    } catch (const TraceRangeError& e) {
        EXPECT_EQ(e.line(), 101u);
    }
    EXPECT_THROW(ingest_trace((dir / "text_solar.csv").string()), TraceValueError);
    EXPECT_THROW(ingest_trace((dir / "unlabelled.csv").string()), ParseError);
    EXPECT_THROW(ingest_trace((dir / "missing_wind.csv").string()), ParseError);
}

TEST(IngestTrace, MetadataRoundTrip) {
    const auto t = synth_solar(0.26, 5);
    std::stringstream s;
    write_cf_trace_csv(s, t);
    const auto back = read_cf_trace_csv(s);
    EXPECT_EQ(back, t);
}

TEST(Droughts, NoneWhenRenewablesCover) {
    std::vector<double> supply(100, 10.0), demand(100, 5.0);
    EXPECT_TRUE(detect_droughts(supply, demand, 0.0).empty());
}

TEST(Droughts, Single240HourLull) {
    std::vector<double> supply(8760, 30000.0), demand(8760, 25000.0);
    for (std::size_t h = 1000; h < 1240; ++h) supply[h] = 2000.0;
    const auto d = detect_droughts(supply, demand, 15000.0);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].start_hour, 1000u);
    EXPECT_EQ(d[0].end_hour, 1239u);
    EXPECT_EQ(d[0].hours(), 240u);
    EXPECT_DOUBLE_EQ(d[0].mean_deficit_gw, 23.0);
}

TEST(Droughts, InfiniteThreshold) {
    std::vector<double> supply(50, 0.0), demand(50, 100.0);
    EXPECT_TRUE(detect_droughts(supply, demand, std::numeric_limits<double>::infinity()).empty());
}

TEST(Droughts, RunAtEnd) {
    std::vector<double> supply{5, 5, 0, 0}, demand{1, 1, 3, 3};
    const auto d = detect_droughts(supply, demand, 0.0);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].start_hour, 2u);
    EXPECT_EQ(d[0].end_hour, 3u);
}

TEST(Droughts, LengthMismatch) {
    std::vector<double> a(3), b(4);
    EXPECT_THROW(detect_droughts(a, b, 0.0), InvalidInput);
}

TEST(Droughts, PropertyOracleDisjointMaximalScaleInvariant) {
    Gen g(32);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = static_cast<std::size_t>(g.integer(1, 200));
        std::vector<double> supply(n), demand(n);
        for (std::size_t h = 0; h < n; ++h) {
            supply[h] = g.dyadic(40);
            demand[h] = g.dyadic(40);
        }
        const double thr = g.dyadic(20) - 2.0;
        const auto d = detect_droughts(supply, demand, thr);

        // Hour-by-hour oracle.
        std::size_t deficit_hours = 0;
        std::vector<bool> deficit(n);
        for (std::size_t h = 0; h < n; ++h) deficit_hours += (deficit[h] = demand[h] - supply[h] > thr);
        std::size_t covered = 0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const auto& p = d[i];
            covered += p.hours();
            EXPECT_LE(p.start_hour, p.end_hour);
            EXPECT_GT(p.mean_deficit_gw * 1000.0, thr);
            for (std::size_t h = p.start_hour; h <= p.end_hour; ++h) EXPECT_TRUE(deficit[h]);
            if (p.start_hour > 0) { EXPECT_FALSE(deficit[p.start_hour - 1]); }
            if (p.end_hour + 1 < n) { EXPECT_FALSE(deficit[p.end_hour + 1]); }
            if (i > 0) { EXPECT_GT(p.start_hour, d[i - 1].end_hour + 1); }
        }
        EXPECT_EQ(covered, deficit_hours);

        const double k = 4.0; // power of two keeps the comparison exact
        std::vector<double> s2(supply), d2(demand);
        for (auto& v : s2) v *= k;
        for (auto& v : d2) v *= k;
        const auto scaled = detect_droughts(s2, d2, thr * k);
        ASSERT_EQ(scaled.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            EXPECT_EQ(scaled[i].start_hour, d[i].start_hour);
            EXPECT_EQ(scaled[i].end_hour, d[i].end_hour);
        }
    }
}

TEST(Droughts, SyntheticWindHasMultiDayLulls) {
    // Single-site volatility produces lulls lasting days.
    WindParams site;
    site.persistence = 0.985;
    site.volatility = 0.22;
    const auto wind = synth_wind(0.33, 8, site);
    std::vector<double> supply(8760), demand(8760, 25000.0);
    for (std::size_t h = 0; h < 8760; ++h) supply[h] = 49000.0 * wind[h];
    const auto d = detect_droughts(supply, demand, 15000.0);
    std::size_t longest = 0;
    for (const auto& p : d) longest = std::max(longest, p.hours());
    EXPECT_GE(longest, 24u);
}
