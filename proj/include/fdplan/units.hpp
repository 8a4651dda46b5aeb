#pragma once

#include <cstddef>

namespace fdplan {

inline constexpr std::size_t kHoursPerYear = 8760;
inline constexpr double kHoursPerYearD = 8760.0;

// TWh per year of energy produced by 1 GW running every hour of the year.
inline constexpr double kTwhPerGwYear = kHoursPerYearD / 1000.0;

inline constexpr double mw_from_gw(double gw) { return gw * 1000.0; }
inline constexpr double gw_from_mw(double mw) { return mw / 1000.0; }
inline constexpr double twh_from_mwh(double mwh) { return mwh * 1e-6; }
inline constexpr double mwh_from_twh(double twh) { return twh * 1e6; }

// Average power in MW implied by an annual energy in TWh.
inline constexpr double average_mw(double annual_twh) { return mwh_from_twh(annual_twh) / kHoursPerYearD; }

} // namespace fdplan
