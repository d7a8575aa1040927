#include "adc/dates.hpp"

#include <cstdio>

#include "adc/errors.hpp"

namespace adc {

// Howard Hinnant's civil-date algorithms, exact over the proleptic Gregorian
// calendar.
int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t yr = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

int64_t parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    char extra = 0;
    if (std::sscanf(iso.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3 ||
        m < 1 || m > 12 || d < 1 || d > 31) {
        throw DataError("invalid date '" + iso + "', expected YYYY-MM-DD");
    }
    return days_from_civil(y, m, d);
}

std::string format_date(int64_t days) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

std::string month_label(int64_t days) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[12];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", y, m);
    return buf;
}

int day_of_year(int64_t days) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    return static_cast<int>(days - days_from_civil(y, 1, 1)) + 1;
}

int64_t day_start(int64_t days) { return days; }

int64_t month_start(int64_t days) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    return days_from_civil(y, m, 1);
}

int64_t season_start(int64_t days, int anchor_month) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    // Months are grouped in blocks of three starting at anchor_month.
    int rel = (m - anchor_month + 12) % 12;
    int block_start = rel - rel % 3;
    int sm = (anchor_month - 1 + block_start) % 12 + 1;
    int sy = y;
    if (sm > m) sy -= 1;
    return days_from_civil(sy, sm, 1);
}

int64_t year_start(int64_t days) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    return days_from_civil(y, 1, 1);
}

const char* period_name(Period p) {
    switch (p) {
        case Period::Day: return "day";
        case Period::Month: return "month";
        case Period::Season: return "season";
        case Period::Year: return "year";
        case Period::WholeRange: return "whole-range";
    }
    return "?";
}

Period period_from_string(const std::string& s) {
    if (s == "day") return Period::Day;
    if (s == "month") return Period::Month;
    if (s == "season") return Period::Season;
    if (s == "year") return Period::Year;
    if (s == "whole-range" || s == "whole_range" || s == "range" || s == "all")
        return Period::WholeRange;
    throw UsageError("unknown period '" + s + "'");
}

int64_t period_start(Period p, int64_t days, int64_t range_start) {
    switch (p) {
        case Period::Day: return days;
        case Period::Month: return month_start(days);
        case Period::Season: return season_start(days);
        case Period::Year: return year_start(days);
        case Period::WholeRange: return range_start;
    }
    return days;
}

}  // namespace adc
