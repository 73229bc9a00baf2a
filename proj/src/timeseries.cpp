#include "heatcast/timeseries.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "heatcast/errors.hpp"

namespace heatcast {

namespace chr = std::chrono;

namespace {

int parse_int_field(const std::string& text, std::size_t pos, std::size_t len) {
    int value = 0;
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw ParseError("bad numeric field in '" + text + "'");
    }
    return value;
}

Date make_date(const std::string& text, int y, int m, int d) {
    const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                  chr::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        throw ParseError("invalid calendar date '" + text + "'");
    }
    return chr::sys_days{ymd};
}

double parse_double_field(const std::string& token) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || token.empty()) {
        throw ParseError("bad number '" + token + "'");
    }
    return value;
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

} // namespace

HourStamp parse_timestamp(const std::string& text) {
    // YYYY-MM-DDTHH:MM, exactly 16 characters
    if (text.size() != 16 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':') {
        throw ParseError("bad timestamp '" + text + "' (expected YYYY-MM-DDTHH:MM)");
    }
    const int y = parse_int_field(text, 0, 4);
    const int mo = parse_int_field(text, 5, 2);
    const int d = parse_int_field(text, 8, 2);
    const int h = parse_int_field(text, 11, 2);
    const int mi = parse_int_field(text, 14, 2);
    if (h < 0 || h > 23) {
        throw ParseError("hour out of range in '" + text + "'");
    }
    if (mi != 0) {
        throw ParseError("timestamp '" + text + "' is not aligned to an exact hour");
    }
    return make_date(text, y, mo, d) + chr::hours{h};
}

std::string format_timestamp(HourStamp t) {
    const Date day = date_of(t);
    const chr::year_month_day ymd{day};
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:00", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()), hour_of_day(t));
    return buf;
}

Date parse_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw ParseError("bad date '" + text + "' (expected YYYY-MM-DD)");
    }
    const int y = parse_int_field(text, 0, 4);
    const int mo = parse_int_field(text, 5, 2);
    const int d = parse_int_field(text, 8, 2);
    return make_date(text, y, mo, d);
}

std::string format_date(Date d) {
    const chr::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

Date date_of(HourStamp t) {
    return chr::floor<chr::days>(t);
}

int hour_of_day(HourStamp t) {
    return static_cast<int>((t - date_of(t)).count());
}

bool is_weekend(Date d) {
    const chr::weekday wd{d};
    return wd == chr::Saturday || wd == chr::Sunday;
}

std::size_t TimeSeriesTable::record_count() const {
    std::size_t n = 0;
    for (const auto& seg : segments) {
        n += seg.size();
    }
    return n;
}

TimeSeriesTable segment_records(std::vector<HourlyRecord> records) {
    TimeSeriesTable table;
    std::vector<HourlyRecord> current;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!current.empty()) {
            const auto step = records[i].hour - current.back().hour;
            if (step <= chr::hours{0}) {
                throw ValidationError(step == chr::hours{0}
                                          ? "duplicate hour " + format_timestamp(records[i].hour)
                                          : "timestamps not increasing at " +
                                                format_timestamp(records[i].hour));
            }
            if (step > chr::hours{1}) {
                table.segments.push_back(std::move(current));
                current.clear();
            }
        }
        current.push_back(records[i]);
    }
    if (!current.empty()) {
        table.segments.push_back(std::move(current));
    }
    return table;
}

TimeSeriesTable load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kCsvHeader) {
        throw ParseError("'" + path.string() + "': missing or wrong header, expected '" +
                             std::string(kCsvHeader) + "'",
                         1);
    }

    std::vector<HourlyRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_row(line);
        if (fields.size() != 5) {
            throw ParseError("expected 5 fields, got " + std::to_string(fields.size()), line_no);
        }
        HourlyRecord rec;
        try {
            rec.hour = parse_timestamp(fields[0]);
            rec.demand_mw = parse_double_field(fields[1]);
            rec.temp_c = parse_double_field(fields[2]);
            rec.solar_wm2 = parse_double_field(fields[3]);
            rec.wind_ms = parse_double_field(fields[4]);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
        if (rec.demand_mw < 0.0) {
            throw ValidationError("negative demand at line " + std::to_string(line_no));
        }
        if (rec.solar_wm2 < 0.0) {
            throw ValidationError("negative solar irradiance at line " + std::to_string(line_no));
        }
        if (rec.wind_ms < 0.0) {
            throw ValidationError("negative wind speed at line " + std::to_string(line_no));
        }
        records.push_back(rec);
    }
    return segment_records(std::move(records));
}

std::set<Date> load_holidays(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open holiday list '" + path.string() + "'");
    }
    std::set<Date> days;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) {
            continue;
        }
        try {
            days.insert(parse_date(line));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return days;
}

TimeSeriesTable filter_working_days(const TimeSeriesTable& table, const std::set<Date>& holidays) {
    std::vector<HourlyRecord> kept;
    for (const auto& seg : table.segments) {
        for (const auto& rec : seg) {
            const Date day = date_of(rec.hour);
            if (!is_weekend(day) && !holidays.contains(day)) {
                kept.push_back(rec);
            }
        }
    }
    return segment_records(std::move(kept));
}

} // namespace heatcast
