#pragma once

// Wind and solar capacity-factor traces and renewable drought detection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "units.hpp"

namespace fdplan {

enum class RenewableTech { wind, solar };

inline std::string_view to_string(RenewableTech t) { return t == RenewableTech::wind ? "wind" : "solar"; }

class CapacityFactorTrace {
public:
    CapacityFactorTrace(RenewableTech tech, std::vector<double> cf) : tech_(tech), cf_(std::move(cf)) {
        if (cf_.size() != kHoursPerYear) throw InvalidInput("capacity-factor trace must have 8760 hours");
        for (double v : cf_)
            if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("capacity factor outside [0, 1]");
    }

    RenewableTech technology() const { return tech_; }
    std::span<const double> values() const { return cf_; }
    double operator[](std::size_t h) const { return cf_[h]; }
    std::size_t size() const { return cf_.size(); }
    double mean() const { return std::accumulate(cf_.begin(), cf_.end(), 0.0) / kHoursPerYearD; }

    friend bool operator==(const CapacityFactorTrace&, const CapacityFactorTrace&) = default;

private:
    RenewableTech tech_;
    std::vector<double> cf_;
};

// Clear-sky envelope times a seeded per-day attenuation.
struct SolarParams {
    double mean_day_length_h = 12.0;
    double day_length_swing_h = 2.0;  // +/- around the mean over the year
    int longest_day = 355;            // 0-based day of year (southern summer solstice)
    double seasonal_amplitude = 0.10; // envelope height swing, summer high
    double cloud_depth = 0.6;         // worst-day attenuation
    double cloud_exponent = 3.0;      // >1 skews towards clear days
};

// First-order autoregressive hourly process clamped to [0, 1]. Persistence
// close to one gives multi-day lulls. Defaults describe a geographically
// spread fleet; a single site is closer to persistence 0.985, volatility 0.22.
struct WindParams {
    double persistence = 0.97; // hourly AR(1) coefficient
    double volatility = 0.12;  // stationary standard deviation
    double seasonal_amplitude = 0.04;
    int windiest_day = 200;
    double diurnal_amplitude = 0.03;
    double windiest_hour = 16.0;
};

namespace detail {

// Finds x in [lo, hi] with f(x) = target for non-decreasing continuous f.
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi, int iters = 200) {
    for (int i = 0; i < iters && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

} // namespace detail

inline constexpr double kDefaultWindCf = 0.38;
inline constexpr double kDefaultSolarCf = 0.26; // single-axis tracking

inline CapacityFactorTrace synth_solar(double target_mean_cf, std::uint64_t seed, const SolarParams& p = {}) {
    if (!(target_mean_cf > 0.0 && target_mean_cf < 0.5)) throw InvalidInput("solar target mean CF must be in (0, 0.5)");
    Rng rng(seed);
    std::vector<double> raw(kHoursPerYear, 0.0);
    for (int day = 0; day < 365; ++day) {
        const double phase = 2.0 * std::numbers::pi * (day - p.longest_day) / 365.0;
        const double length = p.mean_day_length_h + p.day_length_swing_h * std::cos(phase);
        const double sunrise = 12.0 - 0.5 * length;
        const double height = 1.0 + p.seasonal_amplitude * std::cos(phase);
        const double attenuation = 1.0 - p.cloud_depth * std::pow(rng.uniform(), p.cloud_exponent);
        for (int h = 0; h < 24; ++h) {
            const double t = h + 0.5;
            const double x = (t - sunrise) / length;
            if (x <= 0.0 || x >= 1.0) continue;
            raw[static_cast<std::size_t>(day * 24 + h)] = height * attenuation * std::sin(std::numbers::pi * x);
        }
    }

    auto clipped_mean = [&](double k) {
        double s = 0.0;
        for (double v : raw) s += std::min(1.0, k * v);
        return s / kHoursPerYearD;
    };
    const double reachable = static_cast<double>(std::count_if(raw.begin(), raw.end(), [](double v) { return v > 0.0; })) /
                             kHoursPerYearD;
    if (target_mean_cf >= reachable)
        throw InvalidInput("solar target mean CF is not reachable with the daylight model");

    double hi = 1.0;
    while (clipped_mean(hi) < target_mean_cf) hi *= 2.0;
    const double k = detail::bisect_increasing(clipped_mean, target_mean_cf, 0.0, hi);

    std::vector<double> cf(kHoursPerYear);
    for (std::size_t h = 0; h < kHoursPerYear; ++h) cf[h] = std::min(1.0, k * raw[h]);
    return {RenewableTech::solar, std::move(cf)};
}

inline CapacityFactorTrace synth_wind(double target_mean_cf, std::uint64_t seed, const WindParams& p = {}) {
    if (!(target_mean_cf > 0.0 && target_mean_cf < 0.7)) throw InvalidInput("wind target mean CF must be in (0, 0.7)");
    if (!(p.persistence >= 0.0 && p.persistence < 1.0) || !(p.volatility > 0.0))
        throw InvalidInput("wind persistence must be in [0, 1) and volatility positive");
    Rng rng(seed);
    const double innovation = p.volatility * std::sqrt(1.0 - p.persistence * p.persistence);
    std::vector<double> base(kHoursPerYear);
    double z = p.volatility * rng.normal();
    for (std::size_t h = 0; h < kHoursPerYear; ++h) {
        if (h > 0) z = p.persistence * z + innovation * rng.normal();
        const double day = static_cast<double>(h / 24);
        const double hour = static_cast<double>(h % 24) + 0.5;
        base[h] = z + p.seasonal_amplitude * std::cos(2.0 * std::numbers::pi * (day - p.windiest_day) / 365.0) +
                  p.diurnal_amplitude * std::cos(2.0 * std::numbers::pi * (hour - p.windiest_hour) / 24.0);
    }

    auto clamped_mean = [&](double level) {
        double s = 0.0;
        for (double v : base) s += std::clamp(level + v, 0.0, 1.0);
        return s / kHoursPerYearD;
    };
    const double level = detail::bisect_increasing(clamped_mean, target_mean_cf, -10.0, 10.0);

    std::vector<double> cf(kHoursPerYear);
    for (std::size_t h = 0; h < kHoursPerYear; ++h) cf[h] = std::clamp(level + base[h], 0.0, 1.0);
    return {RenewableTech::wind, std::move(cf)};
}

// Trace files are single-column CSV, one CF per row, optional "cf" header.
// The technology is taken from a "# technology=wind|solar" line, falling
// back to "wind" or "solar" appearing in the file name.
inline CapacityFactorTrace read_cf_trace_csv(std::istream& in, std::optional<RenewableTech> tech_hint = std::nullopt) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    std::optional<RenewableTech> tech;
    {
        std::istringstream scan(content);
        std::string line;
        while (std::getline(scan, line)) {
            const auto t = csv::trim(line);
            if (t.rfind("#", 0) != 0) continue;
            const auto eq = t.find("technology=");
            if (eq == std::string_view::npos) continue;
            const auto value = csv::trim(t.substr(eq + 11));
            if (value == "wind") tech = RenewableTech::wind;
            else if (value == "solar") tech = RenewableTech::solar;
            else throw ParseError("unknown technology '" + std::string(value) + "' in trace metadata");
        }
    }
    if (!tech) tech = tech_hint;
    if (!tech) throw ParseError("trace technology not recorded in metadata or file name");

    std::istringstream body(content);
    auto lines = csv::read_lines(body);
    if (!lines.empty() && lines.front().text == "cf") lines.erase(lines.begin());
    if (lines.size() != kHoursPerYear)
        throw TraceLengthError("trace has " + std::to_string(lines.size()) + " rows, expected 8760");
    std::vector<double> cf;
    cf.reserve(kHoursPerYear);
    for (const auto& l : lines) {
        double v = 0.0;
        if (!csv::parse_double(l.text, v)) throw TraceValueError("non-numeric capacity factor", l.number);
        if (!(v >= 0.0 && v <= 1.0)) throw TraceRangeError("capacity factor outside [0, 1]", l.number);
        cf.push_back(v);
    }
    return {*tech, std::move(cf)};
}

inline CapacityFactorTrace ingest_trace(const std::string& path) {
    std::optional<RenewableTech> hint;
    const auto name = std::filesystem::path(path).filename().string();
    if (name.find("wind") != std::string::npos) hint = RenewableTech::wind;
    else if (name.find("solar") != std::string::npos) hint = RenewableTech::solar;
    auto in = csv::open_input(path);
    return read_cf_trace_csv(in, hint);
}

inline void write_cf_trace_csv(std::ostream& out, const CapacityFactorTrace& t) {
    out << "# technology=" << to_string(t.technology()) << "\ncf\n";
    for (double v : t.values()) out << csv::format_double(v) << '\n';
}

struct DeficitPeriod {
    std::size_t start_hour = 0;
    std::size_t end_hour = 0; // inclusive
    double mean_deficit_gw = 0.0;

    std::size_t hours() const { return end_hour - start_hour + 1; }
    friend bool operator==(const DeficitPeriod&, const DeficitPeriod&) = default;
};

// Maximal runs of hours where demand minus renewable supply exceeds the
// threshold. mean_deficit is the average of (demand - supply) over the run.
inline std::vector<DeficitPeriod> detect_droughts(std::span<const double> renewable_mw, std::span<const double> demand_mw,
                                                  double firm_threshold_mw) {
    if (renewable_mw.size() != demand_mw.size()) throw InvalidInput("drought detection needs equal-length traces");
    std::vector<DeficitPeriod> out;
    std::optional<std::size_t> start;
    double sum = 0.0;
    auto close = [&](std::size_t end) {
        const double n = static_cast<double>(end - *start + 1);
        out.push_back({*start, end, gw_from_mw(sum / n)});
        start.reset();
        sum = 0.0;
    };
    for (std::size_t h = 0; h < demand_mw.size(); ++h) {
        const double deficit = demand_mw[h] - renewable_mw[h];
        if (deficit > firm_threshold_mw) {
            if (!start) start = h;
            sum += deficit;
        } else if (start) {
            close(h - 1);
        }
    }
    if (start) close(demand_mw.size() - 1);
    return out;
}

} // namespace fdplan
