#pragma once

// Generating fleet: technology catalog, plants, age-dependent availability
// and decommissioning arithmetic.

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "units.hpp"

namespace fdplan {

enum class DispatchClass { variable, baseload, storage, firm_dispatchable };

inline std::string_view to_string(DispatchClass c) {
    switch (c) {
    case DispatchClass::variable: return "variable";
    case DispatchClass::baseload: return "baseload";
    case DispatchClass::storage: return "storage";
    case DispatchClass::firm_dispatchable: return "firm_dispatchable";
    }
    return "unknown";
}

inline DispatchClass parse_dispatch_class(std::string_view s) {
    if (s == "variable") return DispatchClass::variable;
    if (s == "baseload") return DispatchClass::baseload;
    if (s == "storage") return DispatchClass::storage;
    if (s == "firm_dispatchable") return DispatchClass::firm_dispatchable;
    throw ConfigError("unknown dispatch class '" + std::string(s) + "'");
}

// Capital costs are quoted per kW of power, except storage which is per kWh
// of energy capacity.
enum class CostBasis { per_kw, per_kwh };

struct TechnologyClass {
    std::string id;
    DispatchClass dispatch_class = DispatchClass::baseload;
    std::optional<double> unit_capital_cost; // USD per kW or per kWh; empty = unpriced
    CostBasis cost_basis = CostBasis::per_kw;
    int construction_lead_time = 0; // years
    double unit_size_min_mw = 0.0;
    double unit_size_max_mw = 0.0;

    void validate() const {
        if (id.empty()) throw ConfigError("technology with empty id");
        if (unit_capital_cost && !(*unit_capital_cost > 0.0))
            throw ConfigError("technology '" + id + "': unit capital cost must be positive");
        if (construction_lead_time < 0) throw ConfigError("technology '" + id + "': negative lead time");
        if (unit_size_min_mw > unit_size_max_mw)
            throw ConfigError("technology '" + id + "': unit_size_min exceeds unit_size_max");
    }
};

using TechnologyCatalog = std::map<std::string, TechnologyClass, std::less<>>;

// Capital costs are the US EIA 2023 overnight figures used for the Eskom
// replacement comparison. Hydro and pumped storage are existing assets only
// and carry no price. Lead times are construction years: new coal and
// nuclear took 14 years from approval, modular renewables and peakers under
// two and three.
inline TechnologyCatalog default_catalog() {
    TechnologyCatalog cat;
    auto add = [&](TechnologyClass t) {
        t.validate();
        cat.emplace(t.id, std::move(t));
    };
    add({"coal", DispatchClass::baseload, 6876.0, CostBasis::per_kw, 14, 990.0, 4800.0});
    add({"nuclear", DispatchClass::baseload, 7406.0, CostBasis::per_kw, 14, 900.0, 1900.0});
    add({"hydro", DispatchClass::baseload, std::nullopt, CostBasis::per_kw, 0, 10.0, 400.0});
    add({"pumped_storage", DispatchClass::storage, std::nullopt, CostBasis::per_kw, 0, 200.0, 1400.0});
    add({"wind", DispatchClass::variable, 2098.0, CostBasis::per_kw, 1, 10.0, 300.0});
    add({"solar", DispatchClass::variable, 1448.0, CostBasis::per_kw, 1, 10.0, 300.0});
    add({"bess", DispatchClass::storage, 400.0, CostBasis::per_kwh, 1, 10.0, 500.0});
    add({"ocgt", DispatchClass::firm_dispatchable, 867.0, CostBasis::per_kw, 3, 100.0, 1500.0});
    return cat;
}

inline constexpr int kDefaultPlantLifeYears = 50;

struct Plant {
    std::string name;
    std::string tech;
    double nameplate_mw = 0.0;
    int commission_year = 0;
    int decommission_year = 0;
    std::string site_id;

    bool operating(int year) const { return commission_year <= year && year < decommission_year; }
    int age(int year) const { return year - commission_year; }
};

// Availability fraction as a function of either plant age or calendar year.
class EafModel {
public:
    enum class Kind { constant, linear_decline, piecewise };
    enum class Axis { age, year };

    static EafModel constant(double value) { return EafModel(Kind::constant, Axis::year, {{0.0, value}}); }

    // value at `from`, then changing by `slope_per_year` (<= 0); flat before `from`.
    static EafModel linear_decline(Axis axis, double from, double value, double slope_per_year) {
        if (slope_per_year > 0.0) throw ConfigError("linear EAF decline must have non-positive slope");
        return EafModel(Kind::linear_decline, axis, {{from, value}, {from + 1.0, value + slope_per_year}});
    }

    // Linear between anchors, flat before the first, extending the last
    // segment after the last anchor; always clamped to [0, 1].
    static EafModel piecewise(Axis axis, std::vector<std::pair<double, double>> anchors) {
        return EafModel(Kind::piecewise, axis, std::move(anchors));
    }

    Kind kind() const { return kind_; }
    Axis axis() const { return axis_; }
    const std::vector<std::pair<double, double>>& anchors() const { return anchors_; }

    double value_at(double x) const {
        if (anchors_.size() == 1) return clamp01(anchors_.front().second);
        if (x <= anchors_.front().first) return clamp01(anchors_.front().second);
        std::size_t hi = 1;
        while (hi + 1 < anchors_.size() && x > anchors_[hi].first) ++hi;
        const auto& [x0, y0] = anchors_[hi - 1];
        const auto& [x1, y1] = anchors_[hi];
        return clamp01(y0 + (y1 - y0) * (x - x0) / (x1 - x0));
    }

    double for_plant(const Plant& p, int year) const {
        return value_at(axis_ == Axis::age ? static_cast<double>(p.age(year)) : static_cast<double>(year));
    }

private:
    EafModel(Kind kind, Axis axis, std::vector<std::pair<double, double>> anchors)
        : kind_(kind), axis_(axis), anchors_(std::move(anchors)) {
        if (anchors_.empty()) throw ConfigError("EAF model needs at least one anchor");
        for (std::size_t i = 0; i < anchors_.size(); ++i) {
            const double v = anchors_[i].second;
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("EAF anchor value outside [0, 1]");
            if (i > 0) {
                if (!(anchors_[i].first > anchors_[i - 1].first))
                    throw ConfigError("EAF anchors must be strictly increasing in x");
                if (v > anchors_[i - 1].second) throw ConfigError("EAF anchors must be non-increasing");
            }
        }
    }

    static double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

    Kind kind_;
    Axis axis_;
    std::vector<std::pair<double, double>> anchors_;
};

using EafModels = std::map<std::string, EafModel, std::less<>>;

// Calibrated availability: coal fleet EAF falling from 0.80 two decades
// before the base year to 0.53 at it; Koeberg from 0.85 (2016) to 0.65
// (2023) and held there after refurbishment. Everything else at nameplate.
inline EafModels calibrated_eaf_models(int base_year = 2022) {
    EafModels m;
    m.emplace("coal", EafModel::piecewise(EafModel::Axis::year, {{base_year - 20.0, 0.80}, {base_year, 0.53}}));
    m.emplace("nuclear",
              EafModel::piecewise(EafModel::Axis::year, {{2016.0, 0.85}, {2023.0, 0.65}, {2024.0, 0.65}}));
    for (const char* t : {"hydro", "pumped_storage", "wind", "solar", "bess", "ocgt"})
        m.emplace(t, EafModel::constant(1.0));
    return m;
}

// Selects plants by technology id and/or dispatch class; empty matches all.
struct PlantFilter {
    std::optional<std::string> tech;
    std::optional<DispatchClass> dispatch_class;

    static PlantFilter technology(std::string t) { return {std::move(t), std::nullopt}; }
    static PlantFilter of_class(DispatchClass c) { return {std::nullopt, c}; }
};

class Fleet {
public:
    Fleet() : catalog_(default_catalog()), eaf_(calibrated_eaf_models()) {}

    Fleet(std::vector<Plant> plants, TechnologyCatalog catalog, EafModels eaf)
        : plants_(std::move(plants)), catalog_(std::move(catalog)), eaf_(std::move(eaf)) {
        validate();
    }

    const std::vector<Plant>& plants() const { return plants_; }
    const TechnologyCatalog& catalog() const { return catalog_; }
    const EafModels& eaf_models() const { return eaf_; }

    void set_eaf_model(const std::string& tech, EafModel model) { eaf_.insert_or_assign(tech, std::move(model)); }

    const TechnologyClass& technology(std::string_view id) const {
        const auto it = catalog_.find(id);
        if (it == catalog_.end()) throw ConfigError("unknown technology '" + std::string(id) + "'");
        return it->second;
    }

    bool matches(const Plant& p, const PlantFilter& f) const {
        if (f.tech && p.tech != *f.tech) return false;
        if (f.dispatch_class && technology(p.tech).dispatch_class != *f.dispatch_class) return false;
        return true;
    }

    // Availability of one plant in `year`; throws when no model covers its technology.
    double availability(const Plant& p, int year) const {
        const auto it = eaf_.find(p.tech);
        if (it == eaf_.end()) throw ConfigError("no EAF model for technology '" + p.tech + "'");
        return it->second.for_plant(p, year);
    }

    Fleet with_plants(std::vector<Plant> plants) const { return Fleet(std::move(plants), catalog_, eaf_); }

private:
    void validate() const {
        std::set<std::string, std::less<>> names, sites;
        for (const auto& p : plants_) {
            if (!names.insert(p.name).second) throw ConfigError("duplicate plant name '" + p.name + "'");
            if (!sites.insert(p.site_id).second) throw ConfigError("duplicate site id '" + p.site_id + "'");
            if (!(p.nameplate_mw > 0.0)) throw ConfigError("plant '" + p.name + "': nameplate must be positive");
            if (p.decommission_year <= p.commission_year)
                throw ConfigError("plant '" + p.name + "': decommission year must follow commission year");
            (void)technology(p.tech);
        }
    }

    std::vector<Plant> plants_;
    TechnologyCatalog catalog_;
    EafModels eaf_;
};

// ---------------------------------------------------------------------------
// Fleet CSV: name,technology,nameplate_mw,commission_year,decommission_year,site_id
// An empty decommission_year defaults to commission_year + 50.

inline constexpr std::string_view kFleetCsvHeader = "name,technology,nameplate_mw,commission_year,decommission_year,site_id";

inline std::vector<Plant> read_plants_csv(std::istream& in) {
    const auto lines = csv::read_lines(in);
    if (lines.empty()) throw ParseError("fleet CSV is empty; header row required");
    const auto header = csv::split(lines.front().text);
    const auto expected = csv::split(kFleetCsvHeader);
    if (header != expected)
        throw ParseError("fleet CSV header must be '" + std::string(kFleetCsvHeader) + "'", lines.front().number);

    std::vector<Plant> plants;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& line = lines[i];
        const auto cells = csv::split(line.text);
        if (cells.size() != expected.size())
            throw ParseError("expected " + std::to_string(expected.size()) + " columns", line.number);
        Plant p;
        p.name = cells[0];
        p.tech = cells[1];
        long long commission = 0, decommission = 0;
        if (!csv::parse_double(cells[2], p.nameplate_mw)) throw ParseError("bad nameplate_mw", line.number);
        if (!csv::parse_int(cells[3], commission)) throw ParseError("bad commission_year", line.number);
        if (cells[4].empty())
            decommission = commission + kDefaultPlantLifeYears;
        else if (!csv::parse_int(cells[4], decommission))
            throw ParseError("bad decommission_year", line.number);
        p.commission_year = static_cast<int>(commission);
        p.decommission_year = static_cast<int>(decommission);
        p.site_id = cells[5];
        if (p.name.empty() || p.site_id.empty()) throw ParseError("name and site_id are required", line.number);
        plants.push_back(std::move(p));
    }
    return plants;
}

inline Fleet load_fleet_csv(const std::string& path, TechnologyCatalog catalog = default_catalog(),
                            EafModels eaf = calibrated_eaf_models()) {
    auto in = csv::open_input(path);
    return Fleet(read_plants_csv(in), std::move(catalog), std::move(eaf));
}

// ---------------------------------------------------------------------------
// Operations

// Installed nameplate in GW of plants operating in `year`.
inline double fleet_capacity(const Fleet& fleet, int year, const PlantFilter& filter = {}) {
    double mw = 0.0;
    for (const auto& p : fleet.plants())
        if (p.operating(year) && fleet.matches(p, filter)) mw += p.nameplate_mw;
    return gw_from_mw(mw);
}

// GW retired since `start_year`, one value per year offset 0..horizon_years.
inline std::vector<double> cumulative_retired(const Fleet& fleet, int start_year, int horizon_years,
                                              const PlantFilter& filter = {}) {
    if (horizon_years < 1) throw InvalidInput("horizon_years must be at least 1");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon_years) + 1);
    for (int k = 0; k <= horizon_years; ++k) {
        double mw = 0.0;
        for (const auto& p : fleet.plants())
            if (p.operating(start_year) && !p.operating(start_year + k) && fleet.matches(p, filter))
                mw += p.nameplate_mw;
        out.push_back(gw_from_mw(mw));
    }
    return out;
}

// Capacity-weighted availability of the plants operating in `year`.
inline double fleet_eaf(const Fleet& fleet, int year, const PlantFilter& filter = {}) {
    double weighted = 0.0, total = 0.0;
    for (const auto& p : fleet.plants()) {
        if (!p.operating(year) || !fleet.matches(p, filter)) continue;
        weighted += p.nameplate_mw * fleet.availability(p, year);
        total += p.nameplate_mw;
    }
    if (total <= 0.0) throw InvalidInput("no operating plants selected for EAF in " + std::to_string(year));
    return weighted / total;
}

// Percent of the energy the capacity could produce running every hour.
inline double capacity_factor(double energy_twh, double capacity_gw, double hours = kHoursPerYearD) {
    if (!(capacity_gw > 0.0) || !(hours > 0.0)) throw InvalidInput("capacity factor needs positive capacity and hours");
    return 100.0 * (energy_twh * 1000.0) / (capacity_gw * hours);
}

struct AgeStats {
    double mean = 0.0;
    int min = 0;
    int max = 0;
    std::size_t count = 0;
};

inline AgeStats fleet_age_stats(const Fleet& fleet, int year, const std::set<std::string, std::less<>>& exclusions = {},
                                const PlantFilter& filter = {}) {
    AgeStats s;
    long long sum = 0;
    for (const auto& p : fleet.plants()) {
        if (!p.operating(year) || !fleet.matches(p, filter) || exclusions.contains(p.name)) continue;
        const int a = p.age(year);
        if (s.count == 0) s.min = s.max = a;
        s.min = std::min(s.min, a);
        s.max = std::max(s.max, a);
        sum += a;
        ++s.count;
    }
    if (s.count == 0) throw InvalidInput("age statistics requested for an empty selection");
    s.mean = static_cast<double>(sum) / static_cast<double>(s.count);
    return s;
}

} // namespace fdplan
