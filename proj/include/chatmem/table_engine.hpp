/*
 * chatmem - columnar chat table, the two row-filter functions (f_value,
 * f_between), a parser for model-emitted function calls, and the chain
 * executor.
 *
 * Tables are immutable views over a ConversationSet; every filter returns a
 * new sub-table and leaves its input untouched.
 */
#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "chatmem/chatlog.hpp"

namespace chatmem {

enum class Column {
    ResponseIndex,
    SessionIndex,
    Speaker,
    DayName,
    Week,
    Date_,
    Time,
    Content,  // exposed to the chain writer only in the no-classifier ablation
};

std::string column_name(Column c);  // canonical "Response_Index" etc.
std::optional<Column> parse_column(std::string_view text, bool allow_content = false);

// The seven columns of the chat table, prompt order.
const std::vector<Column>& table_columns();
// Seven columns plus Content, for the ablation.
const std::vector<Column>& table_columns_with_content();
std::string render_column_header(const std::vector<Column>& schema);

// Typed cell: integers (indices, week), text (speaker, day name), calendar
// dates, wall-clock times. Comparisons are chronological for dates and
// times, never lexical.
using CellValue = std::variant<int64_t, std::string, Date, TimeOfDay>;

std::string render_cell(const CellValue& v);
bool cell_less(const CellValue& a, const CellValue& b);   // same alternative required
bool cell_equal(const CellValue& a, const CellValue& b);  // false across alternatives

enum class FuncName { Value, Between, End };

struct FunctionCall {
    FuncName name = FuncName::End;
    Column column = Column::ResponseIndex;  // unused for End
    std::vector<CellValue> args;            // Value: >=1; Between: [min, max]

    bool operator==(const FunctionCall& other) const;
    // Canonical prompt surface form: "f_value(Session_Index, [5])", "<END>".
    std::string render() const;

    static FunctionCall value(Column c, std::vector<CellValue> vals);
    static FunctionCall between(Column c, CellValue lo, CellValue hi);
    static FunctionCall end();
};

struct Chain {
    std::vector<FunctionCall> calls;  // filters, then End

    bool complete() const { return !calls.empty() && calls.back().name == FuncName::End; }
    int filter_count() const;
    std::string render() const;  // " -> "-separated, END included
};

class ChainError : public std::runtime_error {
public:
    enum class Code { UnknownColumn, TypeMismatch, EmptyRange, ChainTooLong, BadCall };

    ChainError(Code code, std::string message, int step = -1)
        : std::runtime_error(std::move(message)), code(code), step(step) {}

    Code code;
    int step;  // 0-based position in the chain, -1 for standalone calls
};

class FunctionParseError : public std::runtime_error {
public:
    explicit FunctionParseError(std::string message, std::string raw)
        : std::runtime_error(std::move(message)), raw_text(std::move(raw)) {}

    std::string raw_text;
};

class ChatTable {
public:
    ChatTable() = default;
    static ChatTable over(const ConversationSet& log);  // all rows, original order

    size_t row_count() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    const std::vector<int>& row_ids() const { return rows_; }  // response indices
    const ConversationSet& log() const { return *log_; }
    const Response& response_at(size_t pos) const { return log_->responses[static_cast<size_t>(rows_[pos])]; }

    CellValue cell(size_t pos, Column c) const;
    ChatTable with_rows(std::vector<int> rows) const;

private:
    const ConversationSet* log_ = nullptr;
    std::vector<int> rows_;
};

// Rows whose cell in `column` equals at least one of `values`.
ChatTable f_value(const ChatTable& table, Column column, const std::vector<CellValue>& values);

// Rows with min <= cell <= max, both ends inclusive. min > max is an error
// (strict; never silently swapped). `time_pinned_to_date` selects the
// minute-of-day reading for Time ranges; see apply_chain.
ChatTable f_between(const ChatTable& table, Column column, const CellValue& min_value,
                    const CellValue& max_value, bool time_pinned_to_date = false);

struct ApplyOptions {
    int max_filters = 5;
    // Semantic-search hook for f_value(Content, ...) in the ablation:
    // (candidate row ids, args) -> surviving row ids.
    std::function<std::vector<int>(const std::vector<int>&, const std::vector<CellValue>&)>
        content_search;
};

struct ApplyOutcome {
    ChatTable table;
    std::vector<std::string> warnings;  // e.g. dropped duplicate calls
};

// Left-fold of the chain's filters over the table. Exact-duplicate calls are
// dropped with a warning. A Time range compares minutes-of-day when an
// earlier call equality-filtered the Date column, and otherwise compares
// full (date,time) anchored to the sub-table's date span, so a lone time
// range cannot slice across days.
ApplyOutcome apply_chain(const ChatTable& table, const Chain& chain, const ApplyOptions& opts = {});

// Parses one model-emitted call. Tolerates surrounding whitespace, quotes
// around values, trailing prose after the closing bracket, "5th"/"fifth"
// ordinals, and the date spellings of parse_date (including commas inside
// dates: "f_between(Date, [January 5, 2023, January 9, 2023])").
FunctionCall parse_function_call(std::string_view text, bool allow_content = false);

}  // namespace chatmem
