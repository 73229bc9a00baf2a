#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "heatcast/timeseries.hpp"

namespace heatcast {

/// Knobs of the synthetic district generator. Demand is driven by an
/// effective outdoor temperature: wind makes the district feel colder,
/// solar irradiance makes it feel warmer, and a 24-hour social profile
/// modulates the load shape.
struct SynthConfig {
    std::uint64_t seed = 1;
    int years = 4;
    /// Calendar year of the first generated hour (January 1st, 00:00).
    int start_year = 2008;

    /// MW drawn at or above the reference temperature.
    double base_load = 60.0;
    /// MW of extra demand per degree of effective temperature below reference.
    double temp_coefficient = 14.0;
    /// Heating is off above this outdoor temperature (degC).
    double reference_temp = 17.0;
    /// degC the district feels colder per m/s of wind.
    double wind_chill_coefficient = 0.4;
    /// degC the district feels warmer per kW/m^2 of irradiance.
    double solar_gain_coefficient = 6.0;
    /// Standard deviation of the additive Gaussian demand noise, MW.
    double noise_std = 4.0;
    /// Demand never drops below this floor, MW.
    double demand_floor = 10.0;
    /// AR(1) coefficient of the hourly temperature noise, in [0, 1).
    double temp_persistence = 0.95;
    /// AR(1) coefficient of the hourly wind fluctuation, in [0, 1).
    /// Lower values give gustier wind that is harder to infer from history.
    double wind_persistence = 0.8;

    /// Hourly demand multipliers, index = hour of day.
    std::array<double, 24> social_profile = {
        0.90, 0.88, 0.87, 0.87, 0.89, 0.94, 1.03, 1.10, 1.12, 1.09, 1.05, 1.02,
        1.00, 0.99, 0.98, 0.99, 1.02, 1.06, 1.08, 1.07, 1.04, 1.00, 0.96, 0.92};
};

/// Generate `cfg.years` calendar years of hourly records as one gap-free
/// segment. Identical configs produce identical series.
TimeSeriesTable generate(const SynthConfig& cfg);

/// Write the table in the canonical CSV schema. Values are printed with
/// shortest round-trip precision, so loading the file reproduces the table
/// exactly.
void export_csv(const TimeSeriesTable& table, const std::filesystem::path& path);

} // namespace heatcast
