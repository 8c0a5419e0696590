#include "chatmem/table_engine.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace chatmem {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view strip_quotes(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
        return trim(s.substr(1, s.size() - 2));
    return s;
}

// 0 = integer, 1 = text, 2 = date, 3 = time
int expected_tag(Column c) {
    switch (c) {
        case Column::ResponseIndex:
        case Column::SessionIndex:
        case Column::Week:
        case Column::Content:
            return 0;
        case Column::Speaker:
        case Column::DayName:
            return 1;
        case Column::Date_:
            return 2;
        case Column::Time:
            return 3;
    }
    return 1;
}

bool orderable(Column c) {
    switch (c) {
        case Column::ResponseIndex:
        case Column::SessionIndex:
        case Column::Week:
        case Column::Date_:
        case Column::Time:
            return true;
        default:
            return false;
    }
}

void check_tags(Column column, const std::vector<CellValue>& values) {
    int want = expected_tag(column);
    for (const auto& v : values) {
        if (static_cast<int>(v.index()) != want)
            throw ChainError(ChainError::Code::TypeMismatch,
                             "value " + render_cell(v) + " does not match column " +
                                 column_name(column));
    }
}

std::optional<std::string> canonical_day_name(std::string_view text) {
    static const char* kDays[] = {"Monday", "Tuesday", "Wednesday", "Thursday",
                                  "Friday", "Saturday", "Sunday"};
    std::string t = lower(trim(text));
    for (const char* d : kDays) {
        std::string full = lower(d);
        if (t == full || t == full.substr(0, 3)) return std::string(d);
    }
    return std::nullopt;
}

}  // namespace

std::string column_name(Column c) {
    switch (c) {
        case Column::ResponseIndex: return "Response_Index";
        case Column::SessionIndex: return "Session_Index";
        case Column::Speaker: return "Speaker";
        case Column::DayName: return "Day_Name";
        case Column::Week: return "Week";
        case Column::Date_: return "Date";
        case Column::Time: return "Time";
        case Column::Content: return "Content";
    }
    return "?";
}

std::optional<Column> parse_column(std::string_view text, bool allow_content) {
    std::string t = lower(strip_quotes(text));
    for (Column c : table_columns_with_content()) {
        if (c == Column::Content && !allow_content) continue;
        if (t == lower(column_name(c))) return c;
    }
    return std::nullopt;
}

const std::vector<Column>& table_columns() {
    static const std::vector<Column> cols = {Column::ResponseIndex, Column::SessionIndex,
                                             Column::Speaker,       Column::DayName,
                                             Column::Week,          Column::Date_,
                                             Column::Time};
    return cols;
}

const std::vector<Column>& table_columns_with_content() {
    static const std::vector<Column> cols = {Column::ResponseIndex, Column::SessionIndex,
                                             Column::Speaker,       Column::DayName,
                                             Column::Week,          Column::Date_,
                                             Column::Time,          Column::Content};
    return cols;
}

std::string render_column_header(const std::vector<Column>& schema) {
    std::string out;
    for (size_t i = 0; i < schema.size(); ++i) {
        if (i) out += " | ";
        out += column_name(schema[i]);
    }
    return out;
}

std::string render_cell(const CellValue& v) {
    switch (v.index()) {
        case 0: return std::to_string(std::get<int64_t>(v));
        case 1: return std::get<std::string>(v);
        case 2: return std::get<Date>(v).to_long();
        default: return std::get<TimeOfDay>(v).to_hhmm();
    }
}

bool cell_less(const CellValue& a, const CellValue& b) {
    if (a.index() != b.index())
        throw ChainError(ChainError::Code::TypeMismatch, "comparing cells of different types");
    switch (a.index()) {
        case 0: return std::get<int64_t>(a) < std::get<int64_t>(b);
        case 1: return std::get<std::string>(a) < std::get<std::string>(b);
        case 2: return std::get<Date>(a) < std::get<Date>(b);
        default: return std::get<TimeOfDay>(a) < std::get<TimeOfDay>(b);
    }
}

bool cell_equal(const CellValue& a, const CellValue& b) { return a == b; }

bool FunctionCall::operator==(const FunctionCall& other) const {
    if (name != other.name) return false;
    if (name == FuncName::End) return true;
    return column == other.column && args == other.args;
}

std::string FunctionCall::render() const {
    if (name == FuncName::End) return "<END>";
    std::string out = (name == FuncName::Value) ? "f_value(" : "f_between(";
    out += column_name(column) + ", [";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += render_cell(args[i]);
    }
    out += "])";
    return out;
}

FunctionCall FunctionCall::value(Column c, std::vector<CellValue> vals) {
    return FunctionCall{FuncName::Value, c, std::move(vals)};
}

FunctionCall FunctionCall::between(Column c, CellValue lo, CellValue hi) {
    return FunctionCall{FuncName::Between, c, {std::move(lo), std::move(hi)}};
}

FunctionCall FunctionCall::end() { return FunctionCall{}; }

int Chain::filter_count() const {
    int n = 0;
    for (const auto& c : calls)
        if (c.name != FuncName::End) ++n;
    return n;
}

std::string Chain::render() const {
    if (calls.empty()) return "";
    std::string out;
    for (size_t i = 0; i < calls.size(); ++i) {
        if (i) out += " -> ";
        out += calls[i].render();
    }
    return out;
}

ChatTable ChatTable::over(const ConversationSet& log) {
    ChatTable t;
    t.log_ = &log;
    t.rows_.resize(log.responses.size());
    for (size_t i = 0; i < t.rows_.size(); ++i) t.rows_[i] = static_cast<int>(i);
    return t;
}

ChatTable ChatTable::with_rows(std::vector<int> rows) const {
    ChatTable t;
    t.log_ = log_;
    t.rows_ = std::move(rows);
    return t;
}

CellValue ChatTable::cell(size_t pos, Column c) const {
    const Response& r = response_at(pos);
    switch (c) {
        case Column::ResponseIndex: return static_cast<int64_t>(r.response_index);
        case Column::SessionIndex: return static_cast<int64_t>(r.session_index);
        case Column::Speaker: return r.speaker;
        case Column::DayName: return r.day_name();
        case Column::Week: return static_cast<int64_t>(r.week());
        case Column::Date_: return r.date;
        case Column::Time: return r.time;
        case Column::Content: return static_cast<int64_t>(r.response_index);
    }
    return int64_t{0};
}

ChatTable f_value(const ChatTable& table, Column column, const std::vector<CellValue>& values) {
    if (values.empty())
        throw ChainError(ChainError::Code::BadCall, "f_value requires at least one value");
    check_tags(column, values);

    std::vector<int> keep;
    for (size_t pos = 0; pos < table.row_count(); ++pos) {
        CellValue cell = table.cell(pos, column);
        for (const auto& v : values) {
            if (cell_equal(cell, v)) {
                keep.push_back(table.row_ids()[pos]);
                break;
            }
        }
    }
    return table.with_rows(std::move(keep));
}

ChatTable f_between(const ChatTable& table, Column column, const CellValue& min_value,
                    const CellValue& max_value, bool time_pinned_to_date) {
    if (!orderable(column))
        throw ChainError(ChainError::Code::TypeMismatch,
                         "column " + column_name(column) + " is not orderable");
    check_tags(column, {min_value, max_value});
    if (cell_less(max_value, min_value))
        throw ChainError(ChainError::Code::EmptyRange,
                         "range minimum exceeds maximum: " + render_cell(min_value) + " > " +
                             render_cell(max_value));

    std::vector<int> keep;
    if (column == Column::Time && !time_pinned_to_date) {
        // No prior equality filter on Date: read the range as one contiguous
        // (date,time) window anchored to the sub-table's date span, not as a
        // per-day slice.
        if (table.empty()) return table.with_rows({});
        Date first = table.response_at(0).date;
        Date last = first;
        for (size_t pos = 0; pos < table.row_count(); ++pos) {
            Date d = table.response_at(pos).date;
            first = std::min(first, d);
            last = std::max(last, d);
        }
        DateTime lo{first, std::get<TimeOfDay>(min_value)};
        DateTime hi{last, std::get<TimeOfDay>(max_value)};
        for (size_t pos = 0; pos < table.row_count(); ++pos) {
            DateTime dt = table.response_at(pos).datetime();
            if (!(dt < lo) && !(hi < dt)) keep.push_back(table.row_ids()[pos]);
        }
        return table.with_rows(std::move(keep));
    }

    for (size_t pos = 0; pos < table.row_count(); ++pos) {
        CellValue cell = table.cell(pos, column);
        if (!cell_less(cell, min_value) && !cell_less(max_value, cell))
            keep.push_back(table.row_ids()[pos]);
    }
    return table.with_rows(std::move(keep));
}

ApplyOutcome apply_chain(const ChatTable& table, const Chain& chain, const ApplyOptions& opts) {
    if (chain.filter_count() > opts.max_filters)
        throw ChainError(ChainError::Code::ChainTooLong,
                         "chain has " + std::to_string(chain.filter_count()) +
                             " filters, limit is " + std::to_string(opts.max_filters));

    ApplyOutcome out{table, {}};
    std::vector<FunctionCall> applied;
    bool date_pinned = false;
    for (size_t step = 0; step < chain.calls.size(); ++step) {
        const FunctionCall& call = chain.calls[step];
        if (call.name == FuncName::End) break;
        if (std::find(applied.begin(), applied.end(), call) != applied.end()) {
            out.warnings.push_back("dropped duplicate call: " + call.render());
            continue;
        }
        applied.push_back(call);

        try {
            if (call.column == Column::Content) {
                if (!opts.content_search)
                    throw ChainError(ChainError::Code::UnknownColumn,
                                     "Content column is not filterable in this mode");
                out.table = out.table.with_rows(opts.content_search(out.table.row_ids(), call.args));
            } else if (call.name == FuncName::Value) {
                out.table = f_value(out.table, call.column, call.args);
            } else {
                if (call.args.size() != 2)
                    throw ChainError(ChainError::Code::BadCall,
                                     "f_between requires exactly [min, max]");
                out.table = f_between(out.table, call.column, call.args[0], call.args[1],
                                      call.column == Column::Time && date_pinned);
            }
        } catch (const ChainError& e) {
            throw ChainError(e.code, std::string(e.what()) + " (chain step " +
                                         std::to_string(step) + ")",
                             static_cast<int>(step));
        }

        if (call.column == Column::Date_) {
            if (call.name == FuncName::Value)
                date_pinned = true;
            else if (call.args.size() == 2 && cell_equal(call.args[0], call.args[1]))
                date_pinned = true;
        }
    }
    return out;
}

namespace {

// Splits the inside of a value list on commas, then types each fragment for
// `column`, re-joining fragments that only parse as a unit ("January 5" +
// "2023").
std::vector<CellValue> type_values(Column column, const std::string& list_text,
                                   const std::string& raw) {
    std::vector<std::string> fragments;
    std::string cur;
    for (char c : list_text) {
        if (c == ',') {
            fragments.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fragments.push_back(cur);
    for (auto& f : fragments) f = std::string(strip_quotes(f));
    fragments.erase(std::remove_if(fragments.begin(), fragments.end(),
                                   [](const std::string& f) { return f.empty(); }),
                    fragments.end());
    if (fragments.empty())
        throw FunctionParseError("empty value list", raw);

    std::vector<CellValue> values;
    // Content args are search phrases, not cell values (those project the
    // row index); keep them as text for the semantic-search hook.
    int want = (column == Column::Content) ? 1 : expected_tag(column);
    for (size_t i = 0; i < fragments.size(); ++i) {
        const std::string& frag = fragments[i];
        switch (want) {
            case 0: {
                auto n = parse_number_word(frag);
                if (!n) throw FunctionParseError("expected a number, got '" + frag + "'", raw);
                values.emplace_back(static_cast<int64_t>(*n));
                break;
            }
            case 1: {
                if (column == Column::DayName) {
                    auto day = canonical_day_name(frag);
                    if (!day)
                        throw FunctionParseError("expected a weekday name, got '" + frag + "'", raw);
                    values.emplace_back(*day);
                } else {
                    values.emplace_back(frag);
                }
                break;
            }
            case 2: {
                if (auto d = parse_date(frag)) {
                    values.emplace_back(*d);
                } else if (i + 1 < fragments.size()) {
                    // "January 5" + "2023" split by the comma inside the date
                    auto merged = parse_date(frag + ", " + fragments[i + 1]);
                    if (!merged)
                        throw FunctionParseError("expected a date, got '" + frag + "'", raw);
                    values.emplace_back(*merged);
                    ++i;
                } else {
                    throw FunctionParseError("expected a date, got '" + frag + "'", raw);
                }
                break;
            }
            default: {
                auto t = parse_time(frag);
                if (!t) throw FunctionParseError("expected a time, got '" + frag + "'", raw);
                values.emplace_back(*t);
                break;
            }
        }
    }
    return values;
}

}  // namespace

FunctionCall parse_function_call(std::string_view text, bool allow_content) {
    std::string raw(text);
    std::string_view t = trim(text);
    if (t.empty()) throw FunctionParseError("empty emission", raw);

    std::string low = lower(t);
    if (low.rfind("<end>", 0) == 0 || low == "end" || low.rfind("end.", 0) == 0)
        return FunctionCall::end();

    FuncName name;
    size_t name_len;
    if (low.rfind("f_value", 0) == 0) {
        name = FuncName::Value;
        name_len = 7;
    } else if (low.rfind("f_between", 0) == 0) {
        name = FuncName::Between;
        name_len = 9;
    } else {
        throw FunctionParseError("unrecognized function name", raw);
    }

    size_t open = t.find('(', name_len);
    if (open == std::string_view::npos)
        throw FunctionParseError("missing '(' after function name", raw);

    // Closing paren outside any [...] group; trailing prose after it is fine.
    size_t close = std::string_view::npos;
    int depth = 0;
    for (size_t i = open + 1; i < t.size(); ++i) {
        if (t[i] == '[') ++depth;
        else if (t[i] == ']') --depth;
        else if (t[i] == ')' && depth <= 0) {
            close = i;
            break;
        }
    }
    if (close == std::string_view::npos)
        throw FunctionParseError("missing closing ')'", raw);

    std::string_view inside = t.substr(open + 1, close - open - 1);
    size_t comma = inside.find(',');
    if (comma == std::string_view::npos)
        throw FunctionParseError("missing value list", raw);

    auto column = parse_column(inside.substr(0, comma), allow_content);
    if (!column)
        throw FunctionParseError(
            "unknown column '" + std::string(trim(inside.substr(0, comma))) + "'", raw);

    std::string_view list = trim(inside.substr(comma + 1));
    if (!list.empty() && list.front() == '[') list.remove_prefix(1);
    if (!list.empty() && list.back() == ']') list.remove_suffix(1);

    FunctionCall call;
    call.name = name;
    call.column = *column;
    call.args = type_values(*column, std::string(list), raw);
    if (name == FuncName::Between && call.args.size() != 2)
        throw FunctionParseError("f_between requires exactly two values", raw);
    return call;
}

}  // namespace chatmem
