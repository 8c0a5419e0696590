#include "chatmem/question_gen.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace chatmem {

namespace {

using nlohmann::json;

uint64_t fnv64(std::string_view s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Small deterministic PRNG; std::shuffle + distributions vary by stdlib.
struct SplitMix {
    uint64_t state;
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    size_t bounded(size_t n) { return static_cast<size_t>(next() % n); }
};

struct LogView {
    const ConversationSet* set = nullptr;
    std::vector<const Response*> real;  // rows before the padding boundary
    int n_real_sessions = 0;
    std::vector<Date> dates;                 // distinct, ascending
    std::vector<std::pair<int, int>> months; // distinct (year, month), ascending
};

LogView view_of(const ConversationSet& set) {
    LogView v;
    v.set = &set;
    std::set<Date> dates;
    std::set<std::pair<int, int>> months;
    for (const Response& r : set.responses) {
        if (r.response_index >= set.padding_start_index) break;
        v.real.push_back(&r);
        v.n_real_sessions = std::max(v.n_real_sessions, r.session_index);
        dates.insert(r.date);
        months.emplace(r.date.year, r.date.month);
    }
    v.dates.assign(dates.begin(), dates.end());
    v.months.assign(months.begin(), months.end());
    return v;
}

template <class Pred>
std::vector<int> rows_matching(const LogView& v, Pred&& pred) {
    std::vector<int> out;
    for (const Response* r : v.real)
        if (pred(*r)) out.push_back(r->response_index);
    return out;
}

std::string number_word(int n) { return n <= 100 ? cardinal_word(n) : std::to_string(n); }

// "2 days ago", "1 session ago", "two months ago"
std::string ago_phrase(int n, const char* unit, bool as_word) {
    std::string num = as_word ? number_word(n) : std::to_string(n);
    return num + " " + unit + (n == 1 ? "" : "s") + " ago";
}

std::string date_spelling(const Date& d, int form) {
    switch (form) {
        case 0: return d.to_long();  // "January 14, 2023"
        case 1:
            return std::string(month_name(d.month)) + " " + ordinal_digits(d.day) + ", " +
                   std::to_string(d.year);  // "January 14th, 2023"
        case 2:
            return std::to_string(d.day) + " " + month_name(d.month) + " " +
                   std::to_string(d.year);  // "14 January 2023"
        default:
            return "the " + ordinal_digits(d.day) + " of " + month_name(d.month) + ", " +
                   std::to_string(d.year);  // "the 14th of January, 2023"
    }
}

// p0/p1/p2 phrasings shared by most tests.
std::string phrased(int p, const std::string& x) {
    switch (p) {
        case 0: return "What did we discuss " + x + "?";
        case 1: return "What did we talk about " + x + "?";
        default: return "Can you summarize what we discussed " + x + "?";
    }
}

std::string month_label(int year, int month) {
    return std::string(month_name(month)) + ", " + std::to_string(year);
}

struct Builder {
    const ConversationSet* set;
    NowContext now;
    QuestionSet* out;

    void push(const std::string& test, const std::string& base_key, int variant,
              std::string query, std::map<std::string, std::string> slots,
              const std::vector<int>& gt) {
        Question q;
        q.id = set->id + ":" + test + ":" + base_key + ":v" + std::to_string(variant);
        q.test_name = test;
        q.query = std::move(query);
        q.variant_id = variant;
        slots["base"] = base_key;
        q.template_slots = std::move(slots);
        q.relevant_indices = gt;
        q.now = now;
        out->questions.push_back(std::move(q));
    }
};

json question_to_json(const Question& q) {
    json slots = json::object();
    for (const auto& [k, v] : q.template_slots) slots[k] = v;
    return json{
        {"id", q.id},
        {"test", q.test_name},
        {"query", q.query},
        {"variant_id", q.variant_id},
        {"context", q.context_turns},
        {"slots", slots},
        {"relevant", q.relevant_indices},
        {"now",
         {{"date", q.now.date.to_iso()}, {"time", q.now.time.to_hhmm()}, {"session", q.now.session}}},
    };
}

Question question_from_json(const json& j) {
    Question q;
    q.id = j.at("id").get<std::string>();
    q.test_name = j.at("test").get<std::string>();
    q.query = j.at("query").get<std::string>();
    q.variant_id = j.value("variant_id", 0);
    if (j.contains("context")) q.context_turns = j["context"].get<std::vector<std::string>>();
    if (j.contains("slots"))
        for (const auto& [k, v] : j["slots"].items()) q.template_slots[k] = v.get<std::string>();
    if (j.contains("relevant")) q.relevant_indices = j["relevant"].get<std::vector<int>>();
    const json& now = j.at("now");
    auto date = parse_date(now.at("date").get<std::string>());
    auto time = parse_time(now.at("time").get<std::string>());
    if (!date || !time) throw std::runtime_error("question " + q.id + " has a malformed now stamp");
    q.now = NowContext{*date, *time, now.at("session").get<int>()};
    return q;
}

}  // namespace

const std::vector<std::string>& time_test_names() {
    static const std::vector<std::string> names = {
        "earlier_today", "date_span",   "dates",        "day_span",
        "last_day",      "month",       "rel_day",      "rel_month",
        "rel_session",   "session_span", "session",
    };
    return names;
}

std::vector<const Question*> questions_of(const QuestionSet& qs, const std::string& test_name) {
    std::vector<const Question*> out;
    for (const Question& q : qs.questions)
        if (q.test_name == test_name) out.push_back(&q);
    return out;
}

std::map<std::string, int> count_by_test(const QuestionSet& qs) {
    std::map<std::string, int> out;
    for (const Question& q : qs.questions) ++out[q.test_name];
    return out;
}

std::map<std::string, int> base_count_by_test(const QuestionSet& qs) {
    std::map<std::string, int> out;
    for (const Question& q : qs.questions)
        if (q.variant_id == 0) ++out[q.test_name];
    return out;
}

NowContext advance_clock(const ConversationSet& set) {
    if (set.responses.empty())
        throw std::invalid_argument("cannot advance the clock of an empty conversation set");
    const Response& last = set.responses.back();
    DateTime now = last.datetime().plus_minutes(50);
    return NowContext{now.date, now.time, last.session_index};
}

QuestionSet generate_time_questions(const ConversationSet& set, const GenOptions& opts) {
    QuestionSet out;
    out.set_id = set.id;
    LogView v = view_of(set);
    if (v.real.empty()) {
        out.notes.push_back("log has no real rows; nothing generated");
        return out;
    }
    NowContext now = advance_clock(set);
    Builder b{&set, now, &out};

    // earlier_today: today's rows strictly before now.
    {
        auto gt = rows_matching(
            v, [&](const Response& r) { return r.date == now.date && r.time < now.time; });
        if (gt.empty()) {
            out.notes.push_back("earlier_today: no real conversation on " + now.date.to_iso() +
                                "; skipped");
        } else {
            for (int p = 0; p < 3; ++p)
                b.push("earlier_today", "earliertoday", p, phrased(p, "earlier today"),
                       {{"date", now.date.to_iso()}}, gt);
        }
    }

    // date_span: ordered date pairs, seeded sample when over the cap.
    {
        std::vector<std::pair<Date, Date>> pairs;
        for (size_t i = 0; i < v.dates.size(); ++i)
            for (size_t j = i + 1; j < v.dates.size(); ++j)
                pairs.emplace_back(v.dates[i], v.dates[j]);
        if (static_cast<int>(pairs.size()) > opts.date_span_cap) {
            SplitMix rng{opts.seed ^ fnv64(set.id)};
            for (size_t i = pairs.size() - 1; i > 0; --i)
                std::swap(pairs[i], pairs[rng.bounded(i + 1)]);
            pairs.resize(static_cast<size_t>(opts.date_span_cap));
            std::sort(pairs.begin(), pairs.end());
        }
        for (const auto& [d1, d2] : pairs) {
            auto gt = rows_matching(
                v, [&](const Response& r) { return d1 <= r.date && r.date <= d2; });
            std::string base_key = "datespan-" + d1.to_iso() + "-" + d2.to_iso();
            for (int p = 0; p < 3; ++p)
                for (int f = 0; f < 4; ++f)
                    b.push("date_span", base_key, p * 4 + f,
                           phrased(p, "between " + date_spelling(d1, f) + " and " +
                                          date_spelling(d2, f)),
                           {{"date1", d1.to_iso()}, {"date2", d2.to_iso()}}, gt);
        }
        if (pairs.empty()) out.notes.push_back("date_span: fewer than two dates; none generated");
    }

    // dates: one per distinct conversation date.
    for (const Date& d : v.dates) {
        auto gt = rows_matching(v, [&](const Response& r) { return r.date == d; });
        for (int p = 0; p < 3; ++p)
            for (int f = 0; f < 4; ++f)
                b.push("dates", "dates-" + d.to_iso(), p * 4 + f,
                       phrased(p, "on " + date_spelling(d, f)), {{"date", d.to_iso()}}, gt);
    }

    // day_span: the two fixed trailing windows.
    {
        struct Window {
            const char* key;
            int days;
        } windows[] = {{"3days", 3}, {"week", 7}};
        for (const auto& w : windows) {
            Date from = now.date.plus_days(-(w.days - 1));
            auto gt = rows_matching(
                v, [&](const Response& r) { return from <= r.date && r.date <= now.date; });
            if (gt.empty()) {
                out.notes.push_back(std::string("day_span: window ") + w.key +
                                    " has no rows; skipped");
                continue;
            }
            std::map<std::string, std::string> slots = {
                {"window", w.key}, {"date1", from.to_iso()}, {"date2", now.date.to_iso()}};
            std::string base_key = std::string("dayspan-") + w.key;
            if (w.days == 7) {
                for (int p = 0; p < 3; ++p) {
                    int order[3] = {1, 0, 2};  // canonical wording is "talk about"
                    b.push("day_span", base_key, p, phrased(order[p], "over the last week"),
                           slots, gt);
                }
            } else {
                for (int p = 0; p < 3; ++p)
                    for (int m = 0; m < 2; ++m) {
                        int order[3] = {1, 0, 2};
                        std::string num = (m == 0) ? "three" : "3";
                        b.push("day_span", base_key, p * 2 + m,
                               phrased(order[p], "over the last " + num + " days"), slots, gt);
                    }
            }
        }
    }

    // last_day: most recent weekday occurrence strictly before today.
    for (int k = 1; k <= 7; ++k) {
        Date d = now.date.plus_days(-k);
        auto gt = rows_matching(v, [&](const Response& r) { return r.date == d; });
        if (gt.empty()) continue;
        std::string day = d.day_name();
        for (int p = 0; p < 3; ++p)
            b.push("last_day", "lastday-" + day, p, phrased(p, "last " + day),
                   {{"day_name", day}, {"date", d.to_iso()}}, gt);
    }

    // month: every calendar month with conversation.
    for (const auto& [year, month] : v.months) {
        Date first = first_of_month(year, month);
        Date last = last_of_month(year, month);
        auto gt = rows_matching(
            v, [&](const Response& r) { return first <= r.date && r.date <= last; });
        char key[16];
        std::snprintf(key, sizeof key, "month-%04d-%02d", year, month);
        for (int p = 0; p < 3; ++p)
            b.push("month", key, p, phrased(p, "in " + month_label(year, month)),
                   {{"year", std::to_string(year)}, {"month", std::to_string(month)}}, gt);
    }

    // rel_day: every day strictly before today with conversation.
    {
        int64_t horizon = now.date.to_days() - v.dates.front().to_days();
        for (int n = 1; n <= horizon; ++n) {
            Date d = now.date.plus_days(-n);
            auto gt = rows_matching(v, [&](const Response& r) { return r.date == d; });
            if (gt.empty()) continue;
            std::string base_key = "relday-" + std::to_string(n);
            std::map<std::string, std::string> slots = {{"n", std::to_string(n)},
                                                        {"date", d.to_iso()}};
            b.push("rel_day", base_key, 0, phrased(0, ago_phrase(n, "day", false)), slots, gt);
            b.push("rel_day", base_key, 1, phrased(1, ago_phrase(n, "day", false)), slots, gt);
            b.push("rel_day", base_key, 2, phrased(0, ago_phrase(n, "day", true)), slots, gt);
        }
    }

    // rel_month: calendar months reachable as "N months ago".
    {
        Date earliest = v.dates.front();
        for (int n = 1; n <= 1200; ++n) {
            Date target = add_months_clamped(now.date, -n);
            Date first = first_of_month(target.year, target.month);
            Date last = last_of_month(target.year, target.month);
            if (last < earliest) break;
            auto gt = rows_matching(
                v, [&](const Response& r) { return first <= r.date && r.date <= last; });
            if (gt.empty()) continue;
            std::string base_key = "relmonth-" + std::to_string(n);
            std::map<std::string, std::string> slots = {{"n", std::to_string(n)},
                                                        {"year", std::to_string(target.year)},
                                                        {"month", std::to_string(target.month)}};
            b.push("rel_month", base_key, 0, phrased(0, ago_phrase(n, "month", false)), slots, gt);
            b.push("rel_month", base_key, 1, phrased(1, ago_phrase(n, "month", false)), slots, gt);
            b.push("rel_month", base_key, 2, phrased(0, ago_phrase(n, "month", true)), slots, gt);
        }
    }

    // rel_session: every real session reachable as "N sessions ago".
    for (int n = 1; n < now.session; ++n) {
        int s = now.session - n;
        if (s > v.n_real_sessions) continue;
        auto gt = rows_matching(v, [&](const Response& r) { return r.session_index == s; });
        if (gt.empty()) continue;
        std::string base_key = "relsession-" + std::to_string(n);
        std::map<std::string, std::string> slots = {{"n", std::to_string(n)},
                                                    {"session", std::to_string(s)}};
        b.push("rel_session", base_key, 0, phrased(0, ago_phrase(n, "session", false)), slots, gt);
        b.push("rel_session", base_key, 1, phrased(1, ago_phrase(n, "session", false)), slots, gt);
        b.push("rel_session", base_key, 2, phrased(0, ago_phrase(n, "session", true)), slots, gt);
    }

    // session_span: fixed-width session ranges.
    {
        int width = opts.session_span_width;
        if (v.n_real_sessions <= width)
            out.notes.push_back("session_span: log has too few sessions; none generated");
        for (int s1 = 1; s1 + width <= v.n_real_sessions; ++s1) {
            int s2 = s1 + width;
            auto gt = rows_matching(
                v, [&](const Response& r) { return s1 <= r.session_index && r.session_index <= s2; });
            std::string base_key = "sessionspan-" + std::to_string(s1) + "-" + std::to_string(s2);
            std::map<std::string, std::string> slots = {{"s1", std::to_string(s1)},
                                                        {"s2", std::to_string(s2)}};
            const char* nouns[2] = {"session", "conversation"};
            for (int nn = 0; nn < 2; ++nn)
                for (int m = 0; m < 2; ++m) {
                    std::string a = (m == 0) ? std::to_string(s1) : number_word(s1);
                    std::string bnum = (m == 0) ? std::to_string(s2) : number_word(s2);
                    b.push("session_span", base_key, nn * 2 + m,
                           phrased(1, std::string("between ") + nouns[nn] + " " + a + " and " +
                                          nouns[nn] + " " + bnum),
                           slots, gt);
                }
        }
    }

    // session: one per real session.
    for (int s = 1; s <= v.n_real_sessions; ++s) {
        auto gt = rows_matching(v, [&](const Response& r) { return r.session_index == s; });
        if (gt.empty()) continue;
        std::string base_key = "session-" + std::to_string(s);
        const char* nouns[3] = {"session", "conversation", "discussion"};
        for (int nn = 0; nn < 3; ++nn)
            for (int m = 0; m < 2; ++m) {
                std::string num = (m == 0) ? std::to_string(s) : number_word(s);
                b.push("session", base_key, nn * 2 + m,
                       "What did we discuss in " + std::string(nouns[nn]) + " " + num + "?",
                       {{"session", std::to_string(s)}}, gt);
            }
    }

    return out;
}

namespace {

std::string ambiguous_phrase(const Question& base) {
    const auto& s = base.template_slots;
    const std::string& test = base.test_name;
    if (test == "session") return "in session " + s.at("session");
    if (test == "rel_session") return ago_phrase(std::stoi(s.at("n")), "session", false);
    if (test == "dates") return "on " + parse_date(s.at("date"))->to_long();
    if (test == "date_span")
        return "between " + parse_date(s.at("date1"))->to_long() + " and " +
               parse_date(s.at("date2"))->to_long();
    if (test == "day_span")
        return s.at("window") == "week" ? "over the last week" : "over the last three days";
    if (test == "earlier_today") return "earlier today";
    if (test == "last_day") return "last " + s.at("day_name");
    if (test == "month")
        return "in " + month_label(std::stoi(s.at("year")), std::stoi(s.at("month")));
    if (test == "rel_month") return ago_phrase(std::stoi(s.at("n")), "month", false);
    if (test == "rel_day") return ago_phrase(std::stoi(s.at("n")), "day", false);
    if (test == "session_span")
        return "between session " + s.at("s1") + " and session " + s.at("s2");
    throw std::runtime_error("no ambiguous phrase for test " + test);
}

}  // namespace

QuestionSet generate_ambiguous_questions(const ConversationSet& set,
                                         const QuestionSet& unambiguous) {
    QuestionSet out;
    out.set_id = set.id;
    int skipped_one_day = 0;
    for (const Question& base : unambiguous.questions) {
        if (base.variant_id != 0 || base.ambiguous()) continue;
        if (base.test_name == "rel_day" && base.template_slots.at("n") == "1") {
            ++skipped_one_day;
            continue;
        }
        std::string x = ambiguous_phrase(base);
        struct Tmpl {
            std::vector<std::string> turns;  // {X} in the first turn
            std::string query;
        };
        static const Tmpl templates[3] = {
            {{"I see in my calendar that we talked {X}.",
              "Yes! we did talk then. I always enjoy our chats."},
             "I enjoy them too! Can you summarize what we discussed?"},
            {{"I am try to remember what we talked about {X}. Can you remember that far back?",
              "Yes, I can remember that far back.", "Wow! You have a better memory than me!",
              "I don't know about that! But I can summarize our discussion for you if you'd like."},
             "Yes, please do."},
            {{"I remember {X} we had several discussions.", "Yes, we did.",
              "But I cannot quite remember what we discussed.", "Would you like me to tell you?"},
             "Yes, could you describe, in as much detail as you can, the content of those "
             "conversations?"},
        };
        for (int t = 0; t < 3; ++t) {
            Question q;
            q.test_name = base.test_name;
            q.id = set.id + ":" + base.test_name + ":" + base.template_slots.at("base") + ":amb" +
                   std::to_string(t + 1);
            q.variant_id = t;
            q.query = templates[t].query;
            for (std::string turn : templates[t].turns) {
                size_t pos = turn.find("{X}");
                if (pos != std::string::npos) turn.replace(pos, 3, x);
                q.context_turns.push_back(std::move(turn));
            }
            q.template_slots = base.template_slots;
            q.template_slots["template"] = std::to_string(t + 1);
            q.template_slots["phrase"] = x;
            q.template_slots["base_query"] = base.query;
            q.relevant_indices = base.relevant_indices;
            q.now = base.now;
            out.questions.push_back(std::move(q));
        }
    }
    if (skipped_one_day > 0)
        out.notes.push_back("rel_day: skipped \"1 days ago\" in context templates");
    return out;
}

std::map<std::string, int> expected_base_counts(const ConversationSet& set,
                                                const GenOptions& opts) {
    LogView v = view_of(set);
    std::map<std::string, int> c;
    for (const std::string& t : time_test_names()) c[t] = 0;
    if (v.real.empty()) return c;
    NowContext now = advance_clock(set);

    c["session"] = v.n_real_sessions;
    c["rel_session"] = std::min(now.session - 1, v.n_real_sessions);
    c["dates"] = static_cast<int>(v.dates.size());

    int64_t n_dates = static_cast<int64_t>(v.dates.size());
    int64_t all_pairs = n_dates * (n_dates - 1) / 2;
    c["date_span"] = static_cast<int>(std::min<int64_t>(all_pairs, opts.date_span_cap));

    auto any_in = [&](const Date& from, const Date& to) {
        for (const Date& d : v.dates)
            if (from <= d && d <= to) return true;
        return false;
    };
    c["day_span"] = (any_in(now.date.plus_days(-2), now.date) ? 1 : 0) +
                    (any_in(now.date.plus_days(-6), now.date) ? 1 : 0);

    bool today = std::binary_search(v.dates.begin(), v.dates.end(), now.date);
    c["earlier_today"] = today ? 1 : 0;

    int last_day = 0;
    for (int k = 1; k <= 7; ++k)
        if (std::binary_search(v.dates.begin(), v.dates.end(), now.date.plus_days(-k)))
            ++last_day;
    c["last_day"] = last_day;

    c["month"] = static_cast<int>(v.months.size());
    bool now_month_has_rows =
        std::binary_search(v.months.begin(), v.months.end(),
                           std::make_pair(now.date.year, now.date.month));
    c["rel_month"] = static_cast<int>(v.months.size()) - (now_month_has_rows ? 1 : 0);

    int rel_day = 0;
    for (const Date& d : v.dates)
        if (d < now.date) ++rel_day;
    c["rel_day"] = rel_day;

    c["session_span"] = std::max(0, v.n_real_sessions - opts.session_span_width);
    return c;
}

int variant_multiplier(const std::string& test_name,
                       const std::map<std::string, std::string>& slots) {
    if (test_name == "session") return 6;
    if (test_name == "session_span") return 4;
    if (test_name == "dates" || test_name == "date_span") return 12;
    if (test_name == "day_span") {
        auto it = slots.find("window");
        return (it != slots.end() && it->second == "week") ? 3 : 6;
    }
    if (test_name == kTimeContentTest) return 1;
    return 3;  // earlier_today, last_day, month, rel_day, rel_month, rel_session
}

void write_question_file(const QuestionSet& qs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    json header = {{"format", "chatmem-questions"},
                   {"version", 1},
                   {"set_id", qs.set_id},
                   {"count", qs.questions.size()},
                   {"notes", qs.notes}};
    out << header.dump() << "\n";
    for (const Question& q : qs.questions) out << question_to_json(q).dump() << "\n";
    if (!out) throw std::runtime_error("failed writing " + path);
}

QuestionSet read_question_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + " is empty");
    json header = json::parse(line);
    if (header.value("format", "") != "chatmem-questions" || header.value("version", 0) != 1)
        throw std::runtime_error(path + " is not a version-1 question file");

    QuestionSet qs;
    qs.set_id = header.value("set_id", "");
    if (header.contains("notes")) qs.notes = header["notes"].get<std::vector<std::string>>();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        qs.questions.push_back(question_from_json(json::parse(line)));
    }
    return qs;
}

LoadedQuestions load_time_content_questions(const std::string& path, const ConversationSet& log) {
    QuestionSet raw = read_question_file(path);
    NowContext now = advance_clock(log);

    LoadedQuestions out;
    out.set.set_id = raw.set_id;
    for (Question& q : raw.questions) {
        std::vector<std::string> errs;
        if (q.test_name != kTimeContentTest)
            errs.push_back("test is '" + q.test_name + "', expected time_content");
        if (q.relevant_indices.empty()) errs.push_back("no relevant indices");
        for (int idx : q.relevant_indices) {
            if (idx < 0 || idx >= log.padding_start_index) {
                errs.push_back("index " + std::to_string(idx) + " is outside the real rows");
                continue;
            }
            const Response& r = log.responses[static_cast<size_t>(idx)];
            auto speaker = q.template_slots.find("speaker");
            if (speaker != q.template_slots.end() && r.speaker != speaker->second)
                errs.push_back("index " + std::to_string(idx) + " speaker is " + r.speaker +
                               ", question says " + speaker->second);
            auto date = q.template_slots.find("date");
            if (date != q.template_slots.end()) {
                auto d = parse_date(date->second);
                if (!d)
                    errs.push_back("malformed date slot '" + date->second + "'");
                else if (r.date != *d)
                    errs.push_back("index " + std::to_string(idx) + " date is " +
                                   r.date.to_iso() + ", question says " + d->to_iso());
            }
        }
        if (errs.empty()) {
            q.now = now;  // the bench clock is the log's, not the file's
            out.set.questions.push_back(std::move(q));
        } else {
            for (const std::string& e : errs) out.errors.push_back(q.id + ": " + e);
        }
    }
    return out;
}

}  // namespace chatmem
