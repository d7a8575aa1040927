#pragma once

#include <cstdint>
#include <string>

namespace adc {

// All timestamps in the engine are integer days since 1970-01-01 (UTC).

int64_t days_from_civil(int year, int month, int day);
void civil_from_days(int64_t days, int& year, int& month, int& day);

// Parses "YYYY-MM-DD". Throws DataError on malformed input.
int64_t parse_date(const std::string& iso);
std::string format_date(int64_t days);

// "YYYY-MM"
std::string month_label(int64_t days);

int day_of_year(int64_t days);  // 1-based

// Calendar bucketing. Season is meteorological (DJF/MAM/JJA/SON) with a
// configurable anchor month for the first season (default 12 = December;
// December belongs to the DJF block that runs into the following year).
int64_t day_start(int64_t days);
int64_t month_start(int64_t days);
int64_t season_start(int64_t days, int anchor_month = 12);
int64_t year_start(int64_t days);

enum class Period { Day, Month, Season, Year, WholeRange };

const char* period_name(Period p);
Period period_from_string(const std::string& s);

// Start day of the period bucket containing `days`. WholeRange needs the
// range start supplied by the caller.
int64_t period_start(Period p, int64_t days, int64_t range_start);

}  // namespace adc
