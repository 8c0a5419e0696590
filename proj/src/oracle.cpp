#include "chatmem/oracle.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

namespace chatmem {

namespace {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string first_line(const std::string& s) {
    size_t nl = s.find('\n');
    return trim(nl == std::string::npos ? s : s.substr(0, nl));
}

bool contains(const std::string& hay, const char* needle) {
    return hay.find(needle) != std::string::npos;
}

// ---------------------------------------------------------------------------
// Tokenizer: alphanumeric runs with character offsets; hyphens join letter
// runs so "twenty-five" stays one token for the number parser.

struct Tok {
    std::string low;
    size_t begin = 0;
    size_t end = 0;
};

std::vector<Tok> tokenize(const std::string& text) {
    std::vector<Tok> out;
    size_t i = 0;
    auto alnum = [&](size_t p) { return std::isalnum(static_cast<unsigned char>(text[p])) != 0; };
    auto alpha = [&](size_t p) { return std::isalpha(static_cast<unsigned char>(text[p])) != 0; };
    while (i < text.size()) {
        if (!alnum(i)) {
            ++i;
            continue;
        }
        size_t b = i;
        while (i < text.size() &&
               (alnum(i) || (text[i] == '-' && i + 1 < text.size() && alpha(i - 1) && alpha(i + 1))))
            ++i;
        Tok t;
        t.begin = b;
        t.end = i;
        t.low = text.substr(b, i - b);
        for (char& c : t.low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(std::move(t));
    }
    return out;
}

const std::array<const char*, 7> kWeekdays = {"monday", "tuesday",  "wednesday", "thursday",
                                              "friday", "saturday", "sunday"};

std::optional<int> weekday_index(const std::string& low) {  // 1 = Monday .. 7 = Sunday
    for (size_t i = 0; i < kWeekdays.size(); ++i)
        if (low == kWeekdays[i]) return static_cast<int>(i) + 1;
    return std::nullopt;
}

std::string weekday_name(int index) {
    static const char* names[7] = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                   "Friday", "Saturday", "Sunday"};
    return names[(index - 1) % 7];
}

bool session_noun(const std::string& low) {
    return low == "session" || low == "sessions" || low == "conversation" ||
           low == "conversations" || low == "discussion" || low == "discussions";
}

bool year_token(const std::string& low, int& year) {
    if (low.size() != 4) return false;
    for (char c : low)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    year = std::stoi(low);
    return year >= 1900 && year <= 2100;
}

// parse_date over the original text spanned by tokens [a, b].
std::optional<Date> try_date(const std::string& text, const std::vector<Tok>& t, size_t a,
                             size_t b) {
    if (b >= t.size() || a > b) return std::nullopt;
    return parse_date(text.substr(t[a].begin, t[b].end - t[a].begin));
}

struct DateHit {
    Date date;
    size_t a = 0, b = 0;  // token span, inclusive
};

// A calendar date anchored at the month-name token `i`, longest spelling
// first ("the 14th of January, 2023", "14 January 2023", "January 14, 2023").
std::optional<DateHit> date_at(const std::string& text, const std::vector<Tok>& t, size_t i) {
    if (i >= 3)
        if (auto d = try_date(text, t, i - 3, i + 1)) return DateHit{*d, i - 3, i + 1};
    if (i >= 1)
        if (auto d = try_date(text, t, i - 1, i + 1)) return DateHit{*d, i - 1, i + 1};
    if (auto d = try_date(text, t, i, i + 2)) return DateHit{*d, i, i + 2};
    return std::nullopt;
}

bool connective(const std::string& low) {
    return low == "on" || low == "in" || low == "at" || low == "during" || low == "from" ||
           low == "since" || low == "between" || low == "and" || low == "of";
}

}  // namespace

ParsedQuery parse_query_text(const std::string& text) {
    ParsedQuery q;
    const std::vector<Tok> t = tokenize(text);
    const size_t n = t.size();
    auto num = [&](size_t i) -> std::optional<int> {
        return i < n ? parse_number_word(t[i].low) : std::nullopt;
    };
    auto span = [&](size_t a, size_t b) {
        q.match_begin = t[a].begin;
        q.match_end = t[b].end;
    };

    // "between session 2 and session 5" / "between conversation two and five"
    for (size_t i = 0; q.when == ParsedQuery::When::None && i + 3 < n; ++i) {
        if (t[i].low != "between" || !session_noun(t[i + 1].low)) continue;
        auto s1 = num(i + 2);
        if (!s1) continue;
        size_t j = i + 3;
        if (j < n && t[j].low != "and") continue;
        ++j;
        if (j < n && session_noun(t[j].low)) ++j;
        auto s2 = num(j);
        if (!s2) continue;
        q.when = ParsedQuery::When::SessionSpan;
        q.n = *s1;
        q.n2 = *s2;
        span(i, j);
    }

    // "<N> sessions|days|months ago"
    auto rel_rule = [&](const char* singular, const char* plural, ParsedQuery::When kind) {
        for (size_t i = 0; q.when == ParsedQuery::When::None && i + 2 < n; ++i) {
            auto k = num(i);
            if (!k || (t[i + 1].low != singular && t[i + 1].low != plural)) continue;
            if (t[i + 2].low != "ago") continue;
            q.when = kind;
            q.n = *k;
            span(i, i + 2);
        }
    };
    rel_rule("session", "sessions", ParsedQuery::When::RelSession);
    rel_rule("day", "days", ParsedQuery::When::RelDay);
    rel_rule("month", "months", ParsedQuery::When::RelMonth);

    // "between <date> and <date>"
    for (size_t i = 0; q.when == ParsedQuery::When::None && i + 4 < n; ++i) {
        if (t[i].low != "between") continue;
        size_t k = i + 1;
        while (k < n && t[k].low != "and") ++k;
        if (k + 1 >= n || k == i + 1) continue;
        auto d1 = try_date(text, t, i + 1, k - 1);
        if (!d1) continue;
        size_t last = std::min(n - 1, k + 5);
        for (size_t m = last; m > k; --m) {
            if (auto d2 = try_date(text, t, k + 1, m)) {
                q.when = ParsedQuery::When::DateSpan;
                q.d1 = *d1;
                q.d2 = *d2;
                span(i, m);
                break;
            }
        }
    }

    // A leading "over the" / "the" belongs to the window phrase.
    auto window_start = [&](size_t i) {
        if (i >= 2 && t[i - 1].low == "the" && t[i - 2].low == "over") return i - 2;
        if (i >= 1 && t[i - 1].low == "the") return i - 1;
        return i;
    };

    // "over the last week" (the "over the" part is optional)
    for (size_t i = 0; q.when == ParsedQuery::When::None && i + 1 < n; ++i) {
        if (t[i].low == "last" && t[i + 1].low == "week") {
            q.when = ParsedQuery::When::LastWeek;
            span(window_start(i), i + 1);
        }
    }

    // "over the last 3 days"
    for (size_t i = 0; q.when == ParsedQuery::When::None && i + 2 < n; ++i) {
        if (t[i].low != "last") continue;
        auto k = num(i + 1);
        if (!k || (t[i + 2].low != "days" && t[i + 2].low != "day")) continue;
        q.when = ParsedQuery::When::LastDays;
        q.n = *k;
        span(window_start(i), i + 2);
    }

    // "earlier today"
    for (size_t i = 0; q.when == ParsedQuery::When::None && i + 1 < n; ++i) {
        if (t[i].low == "earlier" && t[i + 1].low == "today") {
            q.when = ParsedQuery::When::EarlierToday;
            span(i, i + 1);
        }
    }

    // "last Friday"
    for (size_t i = 0; q.when == ParsedQuery::When::None && i + 1 < n; ++i) {
        if (t[i].low != "last") continue;
        if (auto w = weekday_index(t[i + 1].low)) {
            q.when = ParsedQuery::When::LastWeekday;
            q.weekday = weekday_name(*w);
            span(i, i + 1);
        }
    }

    // "in session 5" (the "in" part is optional)
    for (size_t i = 0; q.when == ParsedQuery::When::None && i + 1 < n; ++i) {
        if (!session_noun(t[i].low)) continue;
        auto s = num(i + 1);
        if (!s) continue;
        q.when = ParsedQuery::When::Session;
        q.n = *s;
        span(i, i + 1);
    }

    // "on January 14, 2023" in any of the four spellings
    for (size_t i = 0; q.when == ParsedQuery::When::None && i < n; ++i) {
        if (!parse_month_name(t[i].low)) continue;
        if (auto hit = date_at(text, t, i)) {
            q.when = ParsedQuery::When::OnDate;
            q.d1 = hit->date;
            span(hit->a, hit->b);
        }
    }

    // "on 2023-01-14": a year token starts the numeric spelling
    for (size_t i = 0; q.when == ParsedQuery::When::None && i + 2 < n; ++i) {
        int year = 0;
        if (!year_token(t[i].low, year)) continue;
        if (auto d = try_date(text, t, i, i + 2)) {
            q.when = ParsedQuery::When::OnDate;
            q.d1 = *d;
            span(i, i + 2);
        }
    }

    // "in January, 2023" with no day number
    for (size_t i = 0; q.when == ParsedQuery::When::None && i + 1 < n; ++i) {
        auto m = parse_month_name(t[i].low);
        int year = 0;
        if (!m || !year_token(t[i + 1].low, year)) continue;
        if (i > 0 && parse_number_word(t[i - 1].low)) continue;  // that's a day, not a month ref
        q.when = ParsedQuery::When::MonthOf;
        q.year = year;
        q.month = *m;
        span(i, i + 1);
    }

    // "What did <name> say/mention ..."
    for (size_t i = 0; i + 2 < n; ++i) {
        if (t[i].low != "did") continue;
        const std::string& verb = t[i + 2].low;
        if (verb != "say" && verb != "said" && verb != "mention" && verb != "mentioned") continue;
        const std::string& who = t[i + 1].low;
        if (who == "we" || who == "you" || who == "i" || who == "he" || who == "she" ||
            who == "they" || who == "it")
            continue;
        q.speaker = text.substr(t[i + 1].begin, t[i + 1].end - t[i + 1].begin);
        break;
    }

    // Content words after "about", outside the temporal phrase.
    for (size_t i = 0; i < n; ++i) {
        if (t[i].low != "about") continue;
        std::vector<size_t> kept;
        for (size_t j = i + 1; j < n; ++j) {
            if (q.has_time() && t[j].begin >= q.match_begin && t[j].end <= q.match_end) continue;
            kept.push_back(j);
        }
        while (!kept.empty() && connective(t[kept.front()].low)) kept.erase(kept.begin());
        while (!kept.empty() && connective(t[kept.back()].low)) kept.pop_back();
        if (!kept.empty())
            q.topic = text.substr(t[kept.front()].begin, t[kept.back()].end - t[kept.front()].begin);
        break;
    }

    return q;
}

std::vector<FunctionCall> plan_chain(const ParsedQuery& q, const NowContext& now,
                                     bool with_content) {
    using W = ParsedQuery::When;
    std::vector<FunctionCall> plan;
    bool cap = false;  // drop the current in-progress session from the window

    auto int_val = [](int v) { return CellValue(static_cast<int64_t>(v)); };

    switch (q.when) {
        case W::Session:
            plan.push_back(FunctionCall::value(Column::SessionIndex, {int_val(q.n)}));
            break;
        case W::RelSession:
            plan.push_back(FunctionCall::value(Column::SessionIndex,
                                               {int_val(std::max(1, now.session - q.n))}));
            break;
        case W::OnDate:
            plan.push_back(FunctionCall::value(Column::Date_, {q.d1}));
            cap = (q.d1 == now.date);
            break;
        case W::DateSpan:
            plan.push_back(FunctionCall::between(Column::Date_, q.d1, q.d2));
            cap = !(q.d2 < now.date);
            break;
        case W::LastWeek:
            plan.push_back(FunctionCall::between(Column::Date_, now.date.plus_days(-6), now.date));
            cap = true;
            break;
        case W::LastDays: {
            int days = std::max(1, q.n);
            plan.push_back(
                FunctionCall::between(Column::Date_, now.date.plus_days(-(days - 1)), now.date));
            cap = true;
            break;
        }
        case W::EarlierToday: {
            plan.push_back(FunctionCall::value(Column::Date_, {now.date}));
            TimeOfDay upper{std::max(0, now.time.minutes - 1)};
            plan.push_back(FunctionCall::between(Column::Time, TimeOfDay{0}, upper));
            cap = true;
            break;
        }
        case W::LastWeekday: {
            if (auto target = weekday_index(
                    [&] {
                        std::string low = q.weekday;
                        for (char& c : low)
                            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                        return low;
                    }())) {
                int back = ((now.date.iso_weekday() - *target + 6) % 7) + 1;
                plan.push_back(FunctionCall::value(Column::Date_, {now.date.plus_days(-back)}));
            }
            break;
        }
        case W::MonthOf:
        case W::RelMonth: {
            int year = q.year, month = q.month;
            if (q.when == W::RelMonth) {
                Date target = add_months_clamped(now.date, -q.n);
                year = target.year;
                month = target.month;
            }
            Date first = first_of_month(year, month);
            Date last = last_of_month(year, month);
            plan.push_back(FunctionCall::between(Column::Date_, first, last));
            cap = (first <= now.date && now.date <= last);
            break;
        }
        case W::RelDay:
            plan.push_back(FunctionCall::value(Column::Date_, {now.date.plus_days(-q.n)}));
            break;
        case W::SessionSpan:
            plan.push_back(
                FunctionCall::between(Column::SessionIndex, int_val(q.n), int_val(q.n2)));
            break;
        case W::None:
            break;
    }

    if (!q.speaker.empty())
        plan.insert(plan.begin(), FunctionCall::value(Column::Speaker, {q.speaker}));
    if (cap && now.session >= 2)
        plan.push_back(
            FunctionCall::between(Column::SessionIndex, int_val(1), int_val(now.session - 1)));
    if (with_content && !q.topic.empty())
        plan.push_back(FunctionCall::value(Column::Content, {q.topic}));
    return plan;
}

std::string canonical_query(const ParsedQuery& q) {
    using W = ParsedQuery::When;
    auto ago = [&](const char* unit) {
        return std::to_string(q.n) + " " + unit + (q.n == 1 ? "" : "s") + " ago";
    };
    switch (q.when) {
        case W::Session: return "What did we discuss in session " + std::to_string(q.n) + "?";
        case W::RelSession: return "What did we discuss " + ago("session") + "?";
        case W::OnDate: return "What did we discuss on " + q.d1.to_long() + "?";
        case W::DateSpan:
            return "What did we discuss between " + q.d1.to_long() + " and " + q.d2.to_long() +
                   "?";
        case W::LastWeek: return "What did we talk about over the last week?";
        case W::LastDays:
            return "What did we talk about over the last " + std::to_string(q.n) + " days?";
        case W::EarlierToday: return "What did we discuss earlier today?";
        case W::LastWeekday: return "What did we discuss last " + q.weekday + "?";
        case W::MonthOf:
            return "What did we discuss in " + std::string(month_name(q.month)) + ", " +
                   std::to_string(q.year) + "?";
        case W::RelMonth: return "What did we discuss " + ago("month") + "?";
        case W::RelDay: return "What did we discuss " + ago("day") + "?";
        case W::SessionSpan:
            return "What did we talk about between session " + std::to_string(q.n) +
                   " and session " + std::to_string(q.n2) + "?";
        case W::None: break;
    }
    return "";
}

namespace {

// The live query is the last "Query:" block; it ends at the next template
// marker (classifiers stop at Output:, chain prompts at Function Chain:,
// the rewriter at Rewrite:).
std::string last_query_block(const std::string& prompt) {
    size_t pos = prompt.rfind("\nQuery: ");
    if (pos == std::string::npos) throw BackendError("prompt has no query block");
    size_t b = pos + 8;
    size_t e = prompt.size();
    for (const char* marker : {"\nOutput:", "\nFunction Chain:", "\nRewrite:", "\nAnswer:"}) {
        size_t m = prompt.find(marker, b);
        if (m != std::string::npos) e = std::min(e, m);
    }
    return trim(prompt.substr(b, e - b));
}

NowContext last_now(const std::string& prompt) {
    size_t pos = prompt.rfind("Current Date:");
    if (pos == std::string::npos) throw BackendError("prompt has no clock line");
    size_t time_pos = prompt.find("Current Time:", pos);
    size_t sess_pos = prompt.find("Current Session:", pos);
    size_t eol = prompt.find('\n', pos);
    if (eol == std::string::npos) eol = prompt.size();
    if (time_pos == std::string::npos || sess_pos == std::string::npos || time_pos > eol ||
        sess_pos > eol)
        throw BackendError("prompt clock line is malformed");

    auto date = parse_date(trim(prompt.substr(pos + 13, time_pos - (pos + 13))));
    auto time = parse_time(trim(prompt.substr(time_pos + 13, sess_pos - (time_pos + 13))));
    std::string sess = trim(prompt.substr(sess_pos + 16, eol - (sess_pos + 16)));
    if (!date || !time || sess.empty()) throw BackendError("prompt clock line is malformed");
    return NowContext{*date, *time, std::stoi(sess)};
}

std::string last_chain_text(const std::string& prompt) {
    size_t pos = prompt.rfind("\nFunction Chain:");
    if (pos == std::string::npos) return "";
    size_t b = pos + 16;
    size_t e = prompt.find('\n', b);
    if (e == std::string::npos) e = prompt.size();
    return prompt.substr(b, e - b);
}

// Completed calls in the chain-so-far line; an unclosed trailing call (the
// argument-fill prompts) is not counted.
int count_complete_calls(const std::string& chain_text) {
    int count = 0;
    size_t start = 0;
    while (start <= chain_text.size()) {
        size_t sep = chain_text.find(" -> ", start);
        std::string piece =
            trim(chain_text.substr(start, sep == std::string::npos ? std::string::npos : sep - start));
        if ((piece.rfind("f_value(", 0) == 0 || piece.rfind("f_between(", 0) == 0) &&
            piece.find(')') != std::string::npos)
            ++count;
        if (sep == std::string::npos) break;
        start = sep + 4;
    }
    return count;
}

}  // namespace

std::string ScriptedOracle::complete(const std::string& prompt, int /*max_tokens*/) {
    calls_.fetch_add(1, std::memory_order_relaxed);

    if (contains(prompt, "Answer whether the query is referring to the meta-data")) {
        ParsedQuery q = parse_query_text(last_query_block(prompt));
        return q.has_time() ? "y" : "n";
    }

    if (contains(prompt, "Answer whether the query is on some specific topic")) {
        ParsedQuery q = parse_query_text(last_query_block(prompt));
        bool semantic = !q.speaker.empty() || !q.topic.empty() || !q.has_time();
        return semantic ? "y" : "n";
    }

    if (contains(prompt, "reformulate the question into a rewrite")) {
        std::string block = last_query_block(prompt);
        if (!contains(block, "User: ") && !contains(block, "Assistant: "))
            return first_line(block);  // unambiguous: repeat the question
        std::string canon = canonical_query(parse_query_text(block));
        if (!canon.empty()) return canon;
        size_t user = block.rfind("User: ");
        return user == std::string::npos ? first_line(block) : trim(block.substr(user + 6));
    }

    bool arg1 = contains(prompt, "Only output the first argument of the 'f_value' function") ||
                contains(prompt, "Only output the first argument of the 'f_between' function");
    bool arg2 = contains(prompt, "Fill in the remaining argument of the f_value function") ||
                contains(prompt, "Fill in the remaining argument of the f_between function");
    bool name = contains(prompt, "If do not need to call a function, write <END>.");
    if (!arg1 && !arg2 && !name)
        throw BackendError("scripted backend got a prompt it does not recognize");

    ParsedQuery q = parse_query_text(last_query_block(prompt));
    NowContext now = last_now(prompt);
    bool with_content = contains(prompt, "| Content");
    std::vector<FunctionCall> plan = plan_chain(q, now, with_content);
    int idx = count_complete_calls(last_chain_text(prompt));

    if (name) {
        if (idx >= static_cast<int>(plan.size())) return "<END>";
        return plan[static_cast<size_t>(idx)].name == FuncName::Between ? "f_between" : "f_value";
    }
    if (idx >= static_cast<int>(plan.size()))
        throw BackendError("argument prompt arrived after the chain was complete");
    const FunctionCall& call = plan[static_cast<size_t>(idx)];
    if (arg1) return column_name(call.column);

    std::string rendered = call.render();  // "f_value(Session_Index, [5])"
    size_t bracket = rendered.find('[');
    if (bracket == std::string::npos) throw BackendError("planned call rendered without values");
    return rendered.substr(bracket);
}

}  // namespace chatmem
