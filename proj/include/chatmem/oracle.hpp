/*
 * chatmem - scripted rule backend that stands in for a remote chat model.
 *
 * It answers this library's own prompts (the two classifiers, the
 * three-step function-chain protocol, query rewriting) by parsing the
 * temporal phrase out of the query with a small grammar and planning the
 * filter chain an ideal agent would write. Deterministic, offline, and
 * stateless, which makes full-pipeline runs reproducible and gives the
 * benchmark a retrieval ceiling to measure against.
 */
#pragma once

#include <atomic>
#include <string>
#include <vector>

#include "chatmem/llm.hpp"
#include "chatmem/table_engine.hpp"

namespace chatmem {

// What the grammar understood of a query (or of a whole dialogue).
struct ParsedQuery {
    enum class When {
        None,
        Session,       // "in session 5"                  -> n
        RelSession,    // "2 sessions ago"                -> n
        OnDate,        // "on January 14, 2023"           -> d1
        DateSpan,      // "between <date> and <date>"     -> d1, d2
        LastWeek,      // "over the last week"
        LastDays,      // "over the last 3 days"          -> n
        EarlierToday,  // "earlier today"
        LastWeekday,   // "last Friday"                   -> weekday
        MonthOf,       // "in January, 2023"              -> year, month
        RelMonth,      // "2 months ago"                  -> n
        RelDay,        // "2 days ago"                    -> n
        SessionSpan,   // "between session 2 and session 5" -> n, n2
    };

    When when = When::None;
    int n = 0;
    int n2 = 0;
    Date d1{};
    Date d2{};
    int year = 0;
    int month = 0;
    std::string weekday;  // canonical "Monday".."Sunday"

    std::string speaker;  // "What did <name> say ..." (original casing)
    std::string topic;    // content words left after "about"/"say"

    size_t match_begin = 0;  // character span of the temporal phrase
    size_t match_end = 0;

    bool has_time() const { return when != When::None; }
};

ParsedQuery parse_query_text(const std::string& text);

// The filter chain an ideal agent would write for a parsed query. Appends a
// session cap when the requested window reaches the current (in-progress)
// session; appends an f_value(Content, ...) probe when `with_content` and a
// topic was found.
std::vector<FunctionCall> plan_chain(const ParsedQuery& q, const NowContext& now,
                                     bool with_content);

// Canonical one-sentence restatement ("What did we discuss 2 days ago?");
// empty when no temporal phrase was parsed.
std::string canonical_query(const ParsedQuery& q);

class ScriptedOracle : public LlmBackend {
public:
    std::string complete(const std::string& prompt, int max_tokens) override;

    long call_count() const { return calls_.load(); }

private:
    std::atomic<long> calls_{0};
};

}  // namespace chatmem
