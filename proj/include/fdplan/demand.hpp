#pragma once

// Annual demand trajectories and synthetic 8760-hour load shapes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "units.hpp"

namespace fdplan {

class AnnualDemandTrajectory {
public:
    AnnualDemandTrajectory() = default;
    AnnualDemandTrajectory(int base_year, std::vector<double> twh) : base_year_(base_year), values_(std::move(twh)) {
        for (double v : values_)
            if (!(v > 0.0)) throw InvalidInput("annual demand values must be positive");
    }

    int base_year() const { return base_year_; }
    int last_year() const { return base_year_ + static_cast<int>(values_.size()) - 1; }
    bool empty() const { return values_.empty(); }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    bool covers(int year) const { return !empty() && year >= base_year_ && year <= last_year(); }

    double at(int year) const {
        if (!covers(year)) throw InvalidInput("trajectory has no value for " + std::to_string(year));
        return values_[static_cast<std::size_t>(year - base_year_)];
    }

    // Last known value carried forward past the end; first value before the start.
    double at_or_nearest(int year) const {
        if (empty()) throw InvalidInput("empty trajectory");
        return at(std::clamp(year, base_year_, last_year()));
    }

    double final_value() const { return values_.back(); }

    friend bool operator==(const AnnualDemandTrajectory&, const AnnualDemandTrajectory&) = default;

private:
    int base_year_ = 0;
    std::vector<double> values_;
};

// value(k) = base * (1 + rate)^k for k = 0..years.
inline AnnualDemandTrajectory extrapolate(double base_twh, double rate, int years, int base_year = 0) {
    if (years < 0) throw InvalidInput("extrapolation length must be non-negative");
    if (rate <= -1.0) throw InvalidInput("growth rate must exceed -100%");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(years) + 1);
    for (int k = 0; k <= years; ++k) v.push_back(base_twh * std::pow(1.0 + rate, k));
    return {base_year, std::move(v)};
}

struct DemandBand {
    int year;
    double low_twh;
    double high_twh;
    double width() const { return high_twh - low_twh; }
};

inline std::vector<DemandBand> envelope(const AnnualDemandTrajectory& a, const AnnualDemandTrajectory& b) {
    if (a.base_year() != b.base_year() || a.size() != b.size())
        throw InvalidInput("envelope trajectories must cover identical years");
    std::vector<DemandBand> band;
    band.reserve(a.size());
    for (int y = a.base_year(); y <= a.last_year(); ++y)
        band.push_back({y, std::min(a.at(y), b.at(y)), std::max(a.at(y), b.at(y))});
    return band;
}

// Two-column CSV with header "year,twh"; years must be contiguous.
inline AnnualDemandTrajectory read_trajectory_csv(std::istream& in) {
    const auto lines = csv::read_lines(in);
    if (lines.empty()) throw ParseError("trajectory CSV is empty");
    if (csv::split(lines.front().text) != std::vector<std::string>{"year", "twh"})
        throw ParseError("trajectory CSV header must be 'year,twh'", lines.front().number);
    int base = 0;
    std::vector<double> values;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = csv::split(lines[i].text);
        long long year = 0;
        double twh = 0.0;
        if (cells.size() != 2 || !csv::parse_int(cells[0], year) || !csv::parse_double(cells[1], twh))
            throw ParseError("expected 'year,twh'", lines[i].number);
        if (values.empty())
            base = static_cast<int>(year);
        else if (year != base + static_cast<long long>(values.size()))
            throw ParseError("trajectory years must be contiguous", lines[i].number);
        if (!(twh > 0.0)) throw ParseError("annual demand must be positive", lines[i].number);
        values.push_back(twh);
    }
    if (values.empty()) throw ParseError("trajectory CSV has no data rows");
    return {base, std::move(values)};
}

inline AnnualDemandTrajectory load_trajectory_csv(const std::string& path) {
    auto in = csv::open_input(path);
    return read_trajectory_csv(in);
}

inline void write_trajectory_csv(std::ostream& out, const AnnualDemandTrajectory& t) {
    out << "year,twh\n";
    for (int y = t.base_year(); y <= t.last_year(); ++y) out << y << ',' << csv::format_double(t.at(y)) << '\n';
}

struct DemandScenario {
    std::string name;
    double base_energy_twh = 222.0;
    double annual_growth_rate = -0.005;
    double peak_gw = 35.0;

    void validate() const {
        if (!(base_energy_twh > 0.0)) throw InvalidInput("base energy must be positive");
        if (peak_gw < base_energy_twh / kTwhPerGwYear)
            throw InvalidInput("peak demand is below the average implied by annual energy");
    }
};

// Exactly 8760 non-negative hourly MW values.
class HourlyDemandTrace {
public:
    HourlyDemandTrace() : mw_(kHoursPerYear, 0.0) {}
    explicit HourlyDemandTrace(std::vector<double> mw) : mw_(std::move(mw)) {
        if (mw_.size() != kHoursPerYear) throw InvalidInput("demand trace must have 8760 hours");
        for (double v : mw_)
            if (!(v >= 0.0)) throw InvalidInput("demand trace values must be non-negative");
    }

    std::span<const double> mw() const { return mw_; }
    double operator[](std::size_t h) const { return mw_[h]; }
    std::size_t size() const { return mw_.size(); }
    double total_twh() const { return twh_from_mwh(std::accumulate(mw_.begin(), mw_.end(), 0.0)); }
    double peak_mw() const { return *std::max_element(mw_.begin(), mw_.end()); }

    friend bool operator==(const HourlyDemandTrace&, const HourlyDemandTrace&) = default;

private:
    std::vector<double> mw_;
};

// Shape of the synthetic load before it is rescaled to the energy and peak
// targets. Defaults describe a winter-peaking southern-hemisphere system with
// morning and evening peaks.
struct ShapeParams {
    double seasonal_amplitude = 0.08; // fraction of mean
    int winter_peak_day = 190;        // day of year, 0-based
    double morning_peak = 0.10;       // relative height of the 07:30 bump
    double evening_peak = 0.20;       // relative height of the 19:00 bump
    double night_trough = 0.18;       // relative depth of the 03:00 trough
    double weekend_factor = 0.93;
    double noise_sd = 0.015;          // multiplicative, iid per hour
    bool flat = false;                // constant shape (peak must equal average)
};

namespace detail {

// Gaussian bump on a 24-hour circle.
inline double circular_bump(double hour, double centre, double width) {
    double d = std::fabs(hour - centre);
    d = std::min(d, 24.0 - d);
    return std::exp(-0.5 * (d / width) * (d / width));
}

inline std::vector<double> raw_demand_shape(const ShapeParams& p, std::uint64_t seed) {
    std::vector<double> s(kHoursPerYear, 1.0);
    if (p.flat) return s;
    Rng rng(seed);
    for (std::size_t h = 0; h < kHoursPerYear; ++h) {
        const int day = static_cast<int>(h / 24);
        const double hour = static_cast<double>(h % 24) + 0.5;
        const double season =
            1.0 + p.seasonal_amplitude * std::cos(2.0 * std::numbers::pi * (day - p.winter_peak_day) / 365.0);
        const double diurnal = 1.0 + p.morning_peak * circular_bump(hour, 7.5, 1.5) +
                               p.evening_peak * circular_bump(hour, 19.0, 2.0) -
                               p.night_trough * circular_bump(hour, 3.0, 3.0);
        const double week = (day % 7 >= 5) ? p.weekend_factor : 1.0;
        const double noise = 1.0 + p.noise_sd * rng.normal();
        s[h] = std::max(0.0, season * diurnal * week * noise);
    }
    return s;
}

} // namespace detail

// Synthetic hourly load whose sum is `annual_twh` and whose maximum is
// `peak_gw`, obtained by an affine rescale of the raw shape.
inline HourlyDemandTrace synthesize_hourly(double annual_twh, double peak_gw, const ShapeParams& shape,
                                           std::uint64_t seed) {
    if (!(annual_twh > 0.0)) throw InvalidInput("annual energy must be positive");
    const double avg = average_mw(annual_twh);
    const double peak = mw_from_gw(peak_gw);
    if (peak < avg * (1.0 - 1e-12)) throw InvalidInput("peak demand is below the implied average demand");

    if (peak <= avg * (1.0 + 1e-12)) return HourlyDemandTrace(std::vector<double>(kHoursPerYear, avg));

    const auto raw = detail::raw_demand_shape(shape, seed);
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / kHoursPerYearD;
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    if (*hi - mean <= 0.0) throw InvalidInput("flat demand shape cannot reach a peak above the average");

    const double scale = (peak - avg) / (*hi - mean);
    const double offset = avg - scale * mean;
    if (offset + scale * *lo < 0.0)
        throw InvalidInput("peak-to-average ratio too high for the demand shape (negative load)");

    std::vector<double> mw(kHoursPerYear);
    for (std::size_t h = 0; h < kHoursPerYear; ++h) mw[h] = offset + scale * raw[h];
    return HourlyDemandTrace(std::move(mw));
}

// Single-column CSV of 8760 MW values, optional header "mw".
inline HourlyDemandTrace read_demand_trace_csv(std::istream& in) {
    auto lines = csv::read_lines(in);
    if (!lines.empty() && lines.front().text == "mw") lines.erase(lines.begin());
    if (lines.size() != kHoursPerYear)
        throw TraceLengthError("demand trace has " + std::to_string(lines.size()) + " rows, expected 8760");
    std::vector<double> mw;
    mw.reserve(kHoursPerYear);
    for (const auto& l : lines) {
        double v = 0.0;
        if (!csv::parse_double(l.text, v)) throw TraceValueError("non-numeric demand value", l.number);
        if (!(v >= 0.0)) throw TraceRangeError("negative demand value", l.number);
        mw.push_back(v);
    }
    return HourlyDemandTrace(std::move(mw));
}

inline HourlyDemandTrace load_demand_trace_csv(const std::string& path) {
    auto in = csv::open_input(path);
    return read_demand_trace_csv(in);
}

inline void write_demand_trace_csv(std::ostream& out, const HourlyDemandTrace& t) {
    out << "mw\n";
    for (double v : t.mw()) out << csv::format_double(v) << '\n';
}

} // namespace fdplan
