/*
 * chatmem - dialogue ingestion: per-response timestamp simulation at a word
 * rate, session segmentation, the appended padding session, and the
 * canonical conversation-set file.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chatmem/datetime.hpp"

namespace chatmem {

struct RawTurn {
    std::string speaker;
    std::string text;
};

struct RawSession {
    DateTime start;
    std::vector<RawTurn> turns;
    bool time_was_defaulted = false;  // input carried no time-of-day
};

struct RawDialogue {
    std::string id;
    std::vector<RawSession> sessions;
};

struct Response {
    int response_index = 0;  // 0-based, global
    int session_index = 1;   // 1-based
    std::string speaker;
    Date date;
    TimeOfDay time;
    std::string text;

    DateTime datetime() const { return DateTime{date, time}; }
    std::string day_name() const { return date.day_name(); }
    int week() const { return date.iso_week(); }
};

// Immutable after construction; safe to share across readers.
struct ConversationSet {
    std::string id;
    std::vector<Response> responses;
    // First response index belonging to the appended padding session;
    // equals responses.size() while no padding has been appended.
    int padding_start_index = 0;
    std::vector<std::string> notes;

    int session_count() const {
        return responses.empty() ? 0 : responses.back().session_index;
    }
    bool has_padding() const { return padding_start_index < static_cast<int>(responses.size()); }
    // Sessions that questions may reference (padding excluded).
    int real_session_count() const {
        return padding_start_index == 0 ? 0 : responses[static_cast<size_t>(padding_start_index) - 1].session_index;
    }
};

class IngestError : public std::runtime_error {
public:
    enum class Kind { EmptyDialogue, NonMonotonicSessions, EmptyTurn, UnorderedResponses, BadPaddingStart, ParseFailure };

    IngestError(Kind kind, std::string message, int index = -1)
        : std::runtime_error(std::move(message)), kind(kind), index(index) {}

    Kind kind;
    int index;  // 1-based session ordinal where applicable
};

constexpr double kDefaultSpeechRateWpm = 160.0;
constexpr int kDefaultSessionGapMinutes = 20;
constexpr int kDefaultPaddingTokens = 4000;

int count_tokens(const std::string& text);  // whitespace-delimited words

// Timestamp per turn: turn 0 at session_start, turn i+1 at turn i plus
// word_count(turn i)/rate minutes. Stored at minute resolution; the
// fractional remainder is carried so long sessions keep advancing.
std::vector<DateTime> augment_timestamps(const std::vector<std::string>& turn_texts,
                                         DateTime session_start, double speech_rate_wpm);

// Session index per response: starts at 1, increments when the gap to the
// previous response is strictly greater than gap_minutes.
std::vector<int> infer_sessions(const std::vector<DateTime>& times,
                                int gap_minutes = kDefaultSessionGapMinutes);
std::vector<int> infer_sessions(const std::vector<Response>& responses,
                                int gap_minutes = kDefaultSessionGapMinutes);

ConversationSet ingest_dialogue(const RawDialogue& doc,
                                double speech_rate_wpm = kDefaultSpeechRateWpm);

struct PaddingReport {
    int token_count = 0;
    int turn_count = 0;
    int session_index = 0;
};

PaddingReport append_padding_session(ConversationSet& set, const RawSession& padding,
                                     double speech_rate_wpm = kDefaultSpeechRateWpm);

// Deterministic small-talk filler between the same two speakers, sized to
// roughly target_tokens whitespace words.
RawSession make_padding_session(DateTime start, const std::string& speaker_a,
                                const std::string& speaker_b,
                                int target_tokens = kDefaultPaddingTokens);

// Dialogue file reading. Accepts the canonical layout
//   {"id": ..., "sessions": [{"start": ..., "turns": [{"speaker","text"}]}]}
// and the LoCoMo-style layout ({"conversation": {"session_1": [...],
// "session_1_date_time": "1:56 pm on 8 May, 2023", ...}}), including a
// top-level array of either. Missing time-of-day defaults to 09:00 and is
// flagged on the session.
std::vector<RawDialogue> read_dialogue_file(const std::filesystem::path& path);

// Canonical conversation-set file (round-trippable).
void write_conversation_set(const ConversationSet& set, const std::filesystem::path& path);
ConversationSet read_conversation_set(const std::filesystem::path& path);

}  // namespace chatmem
