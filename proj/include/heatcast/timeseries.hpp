#pragma once

#include <chrono>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace heatcast {

/// Calendar hour at a fixed UTC-like offset; integral hour count under the hood.
using HourStamp = std::chrono::sys_time<std::chrono::hours>;
using Date = std::chrono::sys_days;

/// Parses "YYYY-MM-DDTHH:MM" (minutes must be 00). Throws ParseError.
HourStamp parse_timestamp(const std::string& text);
std::string format_timestamp(HourStamp t);

/// Parses "YYYY-MM-DD". Throws ParseError.
Date parse_date(const std::string& text);
std::string format_date(Date d);

Date date_of(HourStamp t);
int hour_of_day(HourStamp t);
bool is_weekend(Date d);

/// One hour of aligned demand and weather measurements.
struct HourlyRecord {
    HourStamp hour{};
    double demand_mw = 0.0;
    double temp_c = 0.0;
    double solar_wm2 = 0.0;
    double wind_ms = 0.0;
};

/// Hourly records grouped into contiguous runs. Within a segment, consecutive
/// timestamps differ by exactly one hour; segments are time-ordered and disjoint.
struct TimeSeriesTable {
    std::vector<std::vector<HourlyRecord>> segments;

    std::size_t record_count() const;
    bool empty() const { return segments.empty(); }
};

inline constexpr const char* kCsvHeader = "timestamp,demand_mw,temp_c,solar_wm2,wind_ms";

/// Groups strictly increasing records into segments, splitting wherever the
/// gap between neighbours exceeds one hour.
TimeSeriesTable segment_records(std::vector<HourlyRecord> records);

/// Reads the canonical CSV schema (header required). Rows must be hourly,
/// strictly increasing, with non-negative demand, solar and wind.
TimeSeriesTable load_csv(const std::filesystem::path& path);

/// One ISO date per line; blank lines ignored.
std::set<Date> load_holidays(const std::filesystem::path& path);

/// Keeps Monday-Friday records whose date is not in the holiday list.
/// Removal re-segments the table.
TimeSeriesTable filter_working_days(const TimeSeriesTable& table, const std::set<Date>& holidays = {});

} // namespace heatcast
