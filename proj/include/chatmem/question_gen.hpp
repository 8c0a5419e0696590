/*
 * chatmem - benchmark question generation: the eleven time-based question
 * templates, their ambiguous three-turn variants, wording/numeral variant
 * expansion, ground-truth attachment, and the question file format.
 *
 * Ground truth is computed by brute-force evaluation of each template's
 * temporal predicate over the real (non-padding) rows, so generated
 * questions never reference padding.
 */
#pragma once

#include <map>
#include <string>
#include <vector>

#include "chatmem/chatlog.hpp"
#include "chatmem/prompts.hpp"

namespace chatmem {

// Canonical report order for the eleven time tests.
const std::vector<std::string>& time_test_names();
inline constexpr const char* kTimeContentTest = "time_content";

struct Question {
    std::string id;          // "<set>:<test>:<base>:v<variant>" (+ ":amb<t>" when ambiguous)
    std::string test_name;
    std::string query;       // for ambiguous questions, the final context turn
    int variant_id = 0;
    std::vector<std::string> context_turns;             // empty <=> unambiguous
    std::map<std::string, std::string> template_slots;  // resolved machine-readable slots
    std::vector<int> relevant_indices;                  // ascending response indices
    NowContext now;

    bool ambiguous() const { return !context_turns.empty(); }
};

struct QuestionSet {
    std::string set_id;
    std::vector<Question> questions;
    std::vector<std::string> notes;  // skipped templates etc.
};

std::vector<const Question*> questions_of(const QuestionSet& qs, const std::string& test_name);
std::map<std::string, int> count_by_test(const QuestionSet& qs);       // every variant
std::map<std::string, int> base_count_by_test(const QuestionSet& qs); // variant_id == 0 only

struct GenOptions {
    uint64_t seed = 20230614;   // date-span pair sampling
    int date_span_cap = 15;     // max sampled date pairs per set
    int session_span_width = 3; // S2 = S1 + width
};

// Questions are asked once the whole log (padding included) has been seen:
// now = last response timestamp + 50 minutes, in the last session.
NowContext advance_clock(const ConversationSet& set);

QuestionSet generate_time_questions(const ConversationSet& set, const GenOptions& opts = {});

// Wraps every base time question in the three fixed context templates; the
// final turn is deliberately self-insufficient and ground truth is the base
// question's. "1 days ago" is skipped as ungrammatical in context.
QuestionSet generate_ambiguous_questions(const ConversationSet& set,
                                         const QuestionSet& unambiguous);

// The per-test cardinality formulas, computed from the log's session/date
// structure alone. generate_time_questions must agree with this exactly.
std::map<std::string, int> expected_base_counts(const ConversationSet& set,
                                                const GenOptions& opts = {});
// Wording-variant count of one base question (day_span differs per window).
int variant_multiplier(const std::string& test_name,
                       const std::map<std::string, std::string>& slots);

struct LoadedQuestions {
    QuestionSet set;
    std::vector<std::string> errors;  // "<id>: <reason>", offending questions excluded
};
// Reads a hand-curated time+content question file and validates each record
// against the log (indices real and in range, speaker/date slots consistent).
LoadedQuestions load_time_content_questions(const std::string& path, const ConversationSet& log);

// Line-delimited records with a versioned header line.
void write_question_file(const QuestionSet& qs, const std::string& path);
QuestionSet read_question_file(const std::string& path);

}  // namespace chatmem
