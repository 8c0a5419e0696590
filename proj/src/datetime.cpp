#include "chatmem/datetime.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <vector>

namespace chatmem {

namespace {

constexpr std::array<const char*, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

constexpr std::array<const char*, 7> kDayNames = {
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::chrono::year_month_day to_ymd(const Date& d) {
    return std::chrono::year_month_day{std::chrono::year{d.year},
                                       std::chrono::month{static_cast<unsigned>(d.month)},
                                       std::chrono::day{static_cast<unsigned>(d.day)}};
}

// Split into word tokens, treating punctuation as separators.
std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        } else if (c == '-' && !cur.empty()) {
            // keep hyphenated number words together ("twenty-third")
            cur.push_back(c);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace

bool Date::ok() const { return to_ymd(*this).ok(); }

int64_t Date::to_days() const {
    return std::chrono::sys_days{to_ymd(*this)}.time_since_epoch().count();
}

Date Date::from_days(int64_t days) {
    std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    return Date{int(ymd.year()), int(unsigned(ymd.month())), int(unsigned(ymd.day()))};
}

Date Date::plus_days(int64_t n) const { return from_days(to_days() + n); }

int Date::iso_weekday() const {
    return static_cast<int>(std::chrono::weekday{std::chrono::sys_days{to_ymd(*this)}}.iso_encoding());
}

std::string Date::day_name() const { return kDayNames[static_cast<size_t>(iso_weekday() - 1)]; }

int Date::iso_week() const {
    // The ISO week of a date is the week of its Thursday.
    Date thursday = plus_days(4 - iso_weekday());
    Date jan1{thursday.year, 1, 1};
    return static_cast<int>((thursday.to_days() - jan1.to_days()) / 7) + 1;
}

std::string Date::to_iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::string Date::to_long() const {
    std::ostringstream os;
    os << month_name(month) << ' ' << day << ", " << year;
    return os.str();
}

std::string TimeOfDay::to_hhmm() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%02d:%02d", hour(), minute());
    return buf;
}

DateTime DateTime::from_total_minutes(int64_t m) {
    int64_t days = m / 1440;
    int64_t rem = m % 1440;
    if (rem < 0) {
        days -= 1;
        rem += 1440;
    }
    return DateTime{Date::from_days(days), TimeOfDay{static_cast<int>(rem)}};
}

const char* month_name(int month) { return kMonthNames[static_cast<size_t>(month - 1)]; }

std::optional<int> parse_month_name(std::string_view text) {
    std::string t = lower(trim(text));
    if (t.size() < 3) return std::nullopt;
    for (int m = 1; m <= 12; ++m) {
        std::string full = lower(kMonthNames[static_cast<size_t>(m - 1)]);
        if (t == full || t == full.substr(0, 3)) return m;
    }
    return std::nullopt;
}

Date first_of_month(int year, int month) { return Date{year, month, 1}; }

Date last_of_month(int year, int month) {
    using namespace std::chrono;
    year_month_day_last last{std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(month)} / std::chrono::last};
    return Date{year, month, int(unsigned(last.day()))};
}

Date add_months_clamped(const Date& d, int delta_months) {
    int idx = d.year * 12 + (d.month - 1) + delta_months;
    int y = idx / 12;
    int m = idx % 12;
    if (m < 0) {
        y -= 1;
        m += 12;
    }
    Date end = last_of_month(y, m + 1);
    return Date{y, m + 1, std::min(d.day, end.day)};
}

std::optional<int> parse_number_word(std::string_view text) {
    std::string t = lower(trim(text));
    if (t.empty()) return std::nullopt;

    // Digits, optionally with an ordinal suffix: "23", "23rd".
    if (std::isdigit(static_cast<unsigned char>(t[0]))) {
        size_t i = 0;
        int v = 0;
        while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) {
            v = v * 10 + (t[i] - '0');
            ++i;
        }
        std::string suffix = t.substr(i);
        if (suffix.empty() || suffix == "st" || suffix == "nd" || suffix == "rd" || suffix == "th")
            return v;
        return std::nullopt;
    }

    struct Entry {
        const char* word;
        int value;
    };
    static const Entry kUnits[] = {
        {"zero", 0},     {"one", 1},        {"two", 2},       {"three", 3},    {"four", 4},
        {"five", 5},     {"six", 6},        {"seven", 7},     {"eight", 8},    {"nine", 9},
        {"ten", 10},     {"eleven", 11},    {"twelve", 12},   {"thirteen", 13},
        {"fourteen", 14},{"fifteen", 15},   {"sixteen", 16},  {"seventeen", 17},
        {"eighteen", 18},{"nineteen", 19},
        {"first", 1},    {"second", 2},     {"third", 3},     {"fourth", 4},   {"fifth", 5},
        {"sixth", 6},    {"seventh", 7},    {"eighth", 8},    {"ninth", 9},    {"tenth", 10},
        {"eleventh", 11},{"twelfth", 12},   {"thirteenth", 13},
        {"fourteenth", 14}, {"fifteenth", 15}, {"sixteenth", 16}, {"seventeenth", 17},
        {"eighteenth", 18}, {"nineteenth", 19},
    };
    static const Entry kTens[] = {
        {"twenty", 20},  {"thirty", 30},   {"forty", 40},   {"fifty", 50},
        {"sixty", 60},   {"seventy", 70},  {"eighty", 80},  {"ninety", 90},
        {"twentieth", 20}, {"thirtieth", 30}, {"fortieth", 40}, {"fiftieth", 50},
        {"sixtieth", 60},  {"seventieth", 70},{"eightieth", 80},{"ninetieth", 90},
    };

    auto find = [](const auto& table, const std::string& w) -> std::optional<int> {
        for (const auto& e : table)
            if (w == e.word) return e.value;
        return std::nullopt;
    };

    if (t == "hundred" || t == "one-hundred" || t == "one hundred" || t == "hundredth" ||
        t == "one hundredth" || t == "one-hundredth")
        return 100;
    if (auto v = find(kUnits, t)) return v;
    if (auto v = find(kTens, t)) return v;

    // "twenty-third" / "twenty three"
    size_t sep = t.find_first_of("- ");
    if (sep != std::string::npos) {
        auto tens = find(kTens, t.substr(0, sep));
        auto unit = find(kUnits, t.substr(sep + 1));
        if (tens && unit && *unit >= 1 && *unit <= 9) return *tens + *unit;
    }
    return std::nullopt;
}

std::string cardinal_word(int n) {
    static const char* kUnits[] = {"zero", "one", "two",   "three", "four", "five", "six",
                                   "seven", "eight", "nine", "ten",   "eleven", "twelve",
                                   "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
                                   "eighteen", "nineteen"};
    static const char* kTens[] = {"twenty", "thirty", "forty", "fifty",
                                  "sixty",  "seventy", "eighty", "ninety"};
    if (n < 20) return kUnits[n];
    if (n == 100) return "one hundred";
    std::string out = kTens[n / 10 - 2];
    if (n % 10) out += std::string("-") + kUnits[n % 10];
    return out;
}

std::string ordinal_word(int n) {
    static const char* kUnits[] = {"",          "first",    "second",     "third",     "fourth",
                                   "fifth",     "sixth",    "seventh",    "eighth",    "ninth",
                                   "tenth",     "eleventh", "twelfth",    "thirteenth",
                                   "fourteenth","fifteenth","sixteenth",  "seventeenth",
                                   "eighteenth","nineteenth"};
    static const char* kTensOrd[] = {"twentieth", "thirtieth", "fortieth", "fiftieth",
                                     "sixtieth",  "seventieth", "eightieth", "ninetieth"};
    if (n < 20) return kUnits[n];
    if (n == 100) return "one hundredth";
    if (n % 10 == 0) return kTensOrd[n / 10 - 2];
    return cardinal_word(n - n % 10) + "-" + ordinal_word(n % 10);
}

std::string ordinal_digits(int n) {
    int mod100 = n % 100;
    const char* suffix = "th";
    if (mod100 < 11 || mod100 > 13) {
        switch (n % 10) {
            case 1: suffix = "st"; break;
            case 2: suffix = "nd"; break;
            case 3: suffix = "rd"; break;
            default: break;
        }
    }
    return std::to_string(n) + suffix;
}

std::optional<Date> parse_date(std::string_view text) {
    std::string_view t = trim(text);
    if (t.empty()) return std::nullopt;

    // ISO "YYYY-MM-DD"
    {
        int y = 0, m = 0, d = 0;
        if (std::sscanf(std::string(t).c_str(), "%d-%d-%d", &y, &m, &d) == 3 && t.find('-') != std::string_view::npos) {
            Date date{y, m, d};
            if (date.ok()) return date;
        }
    }

    // Word forms: tokens are some permutation of {month-name, day-number, year}.
    auto tokens = word_tokens(t);
    if (tokens.size() < 2 || tokens.size() > 5) return std::nullopt;

    std::optional<int> month, day, year;
    for (const auto& tok : tokens) {
        std::string low = lower(tok);
        if (low == "of" || low == "the") continue;  // "the 27th of January, 2023"
        if (auto m = parse_month_name(tok)) {
            if (month) return std::nullopt;
            month = m;
            continue;
        }
        if (auto n = parse_number_word(tok)) {
            if (*n >= 1000) {
                if (year) return std::nullopt;
                year = n;
            } else {
                if (day) return std::nullopt;
                day = n;
            }
            continue;
        }
        return std::nullopt;
    }
    if (!month || !day || !year) return std::nullopt;
    Date date{*year, *month, *day};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::optional<TimeOfDay> parse_time(std::string_view text) {
    std::string t = lower(trim(text));
    if (t.empty()) return std::nullopt;

    bool pm = false, am = false;
    auto strip_tail = [&](const std::string& tail, bool& flag) {
        if (t.size() >= tail.size() && t.compare(t.size() - tail.size(), tail.size(), tail) == 0) {
            flag = true;
            t.resize(t.size() - tail.size());
            while (!t.empty() && (t.back() == ' ' || t.back() == '.')) t.pop_back();
        }
    };
    strip_tail("pm", pm);
    strip_tail("p.m.", pm);
    if (!pm) {
        strip_tail("am", am);
        strip_tail("a.m.", am);
    }

    int h = 0, m = 0;
    if (std::sscanf(t.c_str(), "%d:%d", &h, &m) != 2) {
        if (std::sscanf(t.c_str(), "%d", &h) != 1) return std::nullopt;
        m = 0;
        if (!am && !pm && t.find(':') == std::string::npos && h > 23) return std::nullopt;
    }
    if (m < 0 || m > 59) return std::nullopt;
    if (pm || am) {
        if (h < 1 || h > 12) return std::nullopt;
        if (pm && h != 12) h += 12;
        if (am && h == 12) h = 0;
    } else if (h < 0 || h > 23) {
        return std::nullopt;
    }
    return TimeOfDay{h * 60 + m};
}

std::optional<SessionStamp> parse_session_stamp(std::string_view text) {
    std::string_view t = trim(text);
    if (t.empty()) return std::nullopt;

    // "h:mm am/pm on D Month, YYYY"
    std::string low = lower(t);
    size_t on = low.find(" on ");
    if (on != std::string_view::npos) {
        auto time = parse_time(t.substr(0, on));
        auto date = parse_date(t.substr(on + 4));
        if (time && date) return SessionStamp{*date, time};
        return std::nullopt;
    }

    // "YYYY-MM-DD HH:MM" (or ISO date alone)
    size_t space = t.find(' ');
    if (space != std::string_view::npos) {
        auto date = parse_date(t.substr(0, space));
        auto time = parse_time(t.substr(space + 1));
        if (date && time) return SessionStamp{*date, time};
    }
    if (auto date = parse_date(t)) return SessionStamp{*date, std::nullopt};
    return std::nullopt;
}

}  // namespace chatmem
