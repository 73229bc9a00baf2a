#include "heatcast/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

#include "heatcast/errors.hpp"
#include "heatcast/rng.hpp"

namespace heatcast {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDaysPerYear = 365.25;

// Climate shape, loosely Nordic: cold winters, mild summers, low sun.
constexpr double kLatitudeRad = 59.6 * std::numbers::pi / 180.0;
constexpr double kTempMean = 6.5;
constexpr double kTempSeasonalAmp = 12.0;
constexpr double kColdestDayOfYear = 20.0;
constexpr double kTempDiurnalAmp = 2.5;
constexpr double kWarmestHour = 14.0;
constexpr double kTempArStd = 0.94;
constexpr double kWindMean = 3.5;
constexpr double kWindArStd = 1.08;
constexpr double kClearSkyPeak = 850.0;
constexpr double kCloudMean = 0.65;
constexpr double kCloudAr = 0.85;
constexpr double kCloudArStd = 0.12;

double clear_sky_irradiance(double day_of_year, double hour_of_day) {
    const double declination =
        -23.44 * std::numbers::pi / 180.0 * std::cos(kTwoPi * (day_of_year + 10.0) / kDaysPerYear);
    const double hour_angle = kTwoPi * (hour_of_day - 12.0) / 24.0;
    const double sin_elevation = std::sin(kLatitudeRad) * std::sin(declination) +
                                 std::cos(kLatitudeRad) * std::cos(declination) *
                                     std::cos(hour_angle);
    return sin_elevation > 0.0 ? kClearSkyPeak * sin_elevation : 0.0;
}

void append_number(std::string& out, double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, end);
}

} // namespace

TimeSeriesTable generate(const SynthConfig& cfg) {
    if (cfg.years < 1) {
        throw ConfigError("years must be at least 1");
    }
    if (!(cfg.base_load > 0.0)) {
        throw ConfigError("base_load must be positive");
    }
    if (cfg.noise_std < 0.0) {
        throw ConfigError("noise_std must be non-negative");
    }
    for (const double m : cfg.social_profile) {
        if (!(m > 0.0)) {
            throw ConfigError("social_profile values must be positive");
        }
    }
    if (!(cfg.temp_persistence >= 0.0 && cfg.temp_persistence < 1.0)) {
        throw ConfigError("temp_persistence must be in [0, 1)");
    }
    if (!(cfg.wind_persistence >= 0.0 && cfg.wind_persistence < 1.0)) {
        throw ConfigError("wind_persistence must be in [0, 1)");
    }

    using namespace std::chrono;
    const sys_days start = year{cfg.start_year} / January / 1;
    const sys_days stop = year{cfg.start_year + cfg.years} / January / 1;
    const auto total_hours = static_cast<std::size_t>((stop - start) / hours(1));

    Rng rng(cfg.seed);
    double temp_ar = 0.0;
    double wind_ar = 0.0;
    double cloud_ar = 0.0;

    std::vector<HourlyRecord> records;
    records.reserve(total_hours);
    HourStamp hour = HourStamp{start};
    sys_days current_day = start;
    double day_of_year = 0.0; // generation starts on January 1st
    for (std::size_t h = 0; h < total_hours; ++h, hour += hours(1)) {
        const sys_days day = date_of(hour);
        if (day != current_day) {
            current_day = day;
            const sys_days jan1 = year_month_day{day}.year() / January / 1;
            day_of_year = static_cast<double>((day - jan1).count());
        }
        const int hod = hour_of_day(hour);

        // One Gaussian draw per process per hour, in fixed order, so changing
        // demand coefficients never changes the weather.
        temp_ar = cfg.temp_persistence * temp_ar + rng.gauss(0.0, kTempArStd);
        wind_ar = cfg.wind_persistence * wind_ar + rng.gauss(0.0, kWindArStd);
        cloud_ar = kCloudAr * cloud_ar + rng.gauss(0.0, kCloudArStd);
        const double demand_noise = rng.gauss(0.0, cfg.noise_std);

        const double temp = kTempMean -
                            kTempSeasonalAmp *
                                std::cos(kTwoPi * (day_of_year - kColdestDayOfYear) / kDaysPerYear) +
                            kTempDiurnalAmp * std::cos(kTwoPi * (hod - kWarmestHour) / 24.0) +
                            temp_ar;
        const double wind = std::max(0.0, kWindMean + wind_ar);
        const double cloud = std::clamp(kCloudMean + cloud_ar, 0.05, 1.0);
        const double solar = clear_sky_irradiance(day_of_year, static_cast<double>(hod)) * cloud;

        const double effective_temp = temp - cfg.wind_chill_coefficient * wind +
                                      cfg.solar_gain_coefficient * solar / 1000.0;
        const double heating = std::max(0.0, cfg.reference_temp - effective_temp);
        const double demand =
            std::max(cfg.demand_floor,
                     (cfg.base_load + cfg.temp_coefficient * heating) *
                             cfg.social_profile[static_cast<std::size_t>(hod)] +
                         demand_noise);

        records.push_back({hour, demand, temp, solar, wind});
    }

    TimeSeriesTable table;
    table.segments.push_back(std::move(records));
    return table;
}

void export_csv(const TimeSeriesTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write CSV file '" + path.string() + "'");
    }
    std::string line;
    out << kCsvHeader << '\n';
    for (const auto& segment : table.segments) {
        for (const HourlyRecord& r : segment) {
            line.clear();
            line += format_timestamp(r.hour);
            line += ',';
            append_number(line, r.demand_mw);
            line += ',';
            append_number(line, r.temp_c);
            line += ',';
            append_number(line, r.solar_wm2);
            line += ',';
            append_number(line, r.wind_ms);
            line += '\n';
            out << line;
        }
    }
    if (!out) {
        throw ValidationError("write to '" + path.string() + "' failed");
    }
}

} // namespace heatcast
