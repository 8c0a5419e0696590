/*
 * chatmem - calendar dates, wall-clock times, and the text formats they
 * appear in throughout chat logs, queries, and model emissions.
 *
 * Times are stored at minute resolution; anything finer is carried by the
 * ingestion layer only.
 */
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace chatmem {

struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;

    bool ok() const;
    int64_t to_days() const;  // days since 1970-01-01
    static Date from_days(int64_t days);
    Date plus_days(int64_t n) const;

    int iso_weekday() const;       // 1 = Monday .. 7 = Sunday
    std::string day_name() const;  // "Monday" .. "Sunday"
    int iso_week() const;          // ISO-8601 week number, 1..53

    std::string to_iso() const;   // "2023-01-27"
    std::string to_long() const;  // "January 27, 2023"
};

struct TimeOfDay {
    int minutes = 0;  // minutes past midnight, 0..1439

    auto operator<=>(const TimeOfDay&) const = default;

    int hour() const { return minutes / 60; }
    int minute() const { return minutes % 60; }
    std::string to_hhmm() const;  // "14:05"
};

struct DateTime {
    Date date;
    TimeOfDay time;

    auto operator<=>(const DateTime&) const = default;

    int64_t total_minutes() const { return date.to_days() * 1440 + time.minutes; }
    static DateTime from_total_minutes(int64_t m);
    DateTime plus_minutes(int64_t m) const { return from_total_minutes(total_minutes() + m); }
};

// Month helpers. month is 1..12 everywhere.
const char* month_name(int month);
std::optional<int> parse_month_name(std::string_view text);  // full names and 3-letter forms
Date first_of_month(int year, int month);
Date last_of_month(int year, int month);
// Shift by whole months, clamping the day to the target month's length
// (March 31 minus one month -> February 28).
Date add_months_clamped(const Date& d, int delta_months);

// Accepted date spellings: "2023-01-27", "January 27, 2023", "January 27th, 2023",
// "27 January 2023", "27 January, 2023", "January twenty-seventh, 2023".
std::optional<Date> parse_date(std::string_view text);

// Accepted time spellings: "14:05", "9:00", "1:56 pm", "1:56pm", "9 am".
std::optional<TimeOfDay> parse_time(std::string_view text);

// Session-start stamps as they appear in dialogue files:
// "1:56 pm on 8 May, 2023" (LoCoMo style) or "2023-05-08 13:56".
// A bare date is accepted with no time.
struct SessionStamp {
    Date date;
    std::optional<TimeOfDay> time;
};
std::optional<SessionStamp> parse_session_stamp(std::string_view text);

// Number words as they appear in question wordings and model emissions:
// "5", "5th", "five", "fifth", "twenty-third", "twenty three". Covers 0..100.
std::optional<int> parse_number_word(std::string_view text);
std::string cardinal_word(int n);  // 5 -> "five", supported for 0..100
std::string ordinal_word(int n);   // 23 -> "twenty-third", supported for 1..100
std::string ordinal_digits(int n); // 23 -> "23rd"

}  // namespace chatmem
