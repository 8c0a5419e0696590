#include "chatmem/chatlog.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace chatmem {

namespace {

using nlohmann::json;

int word_count(const std::string& text) {
    std::istringstream is(text);
    std::string w;
    int n = 0;
    while (is >> w) ++n;
    return n;
}

DateTime stamp_to_datetime(const SessionStamp& stamp, bool& defaulted) {
    defaulted = !stamp.time.has_value();
    return DateTime{stamp.date, stamp.time.value_or(TimeOfDay{9 * 60})};
}

RawDialogue dialogue_from_canonical(const json& doc, const std::string& fallback_id) {
    RawDialogue out;
    out.id = doc.value("id", fallback_id);
    for (const auto& s : doc.at("sessions")) {
        RawSession session;
        auto stamp = parse_session_stamp(s.at("start").get<std::string>());
        if (!stamp)
            throw IngestError(IngestError::Kind::ParseFailure,
                              "unparseable session start: " + s.at("start").get<std::string>());
        session.start = stamp_to_datetime(*stamp, session.time_was_defaulted);
        for (const auto& t : s.at("turns"))
            session.turns.push_back(RawTurn{t.at("speaker").get<std::string>(),
                                            t.at("text").get<std::string>()});
        out.sessions.push_back(std::move(session));
    }
    return out;
}

RawDialogue dialogue_from_locomo(const json& doc, const std::string& fallback_id) {
    const json& conv = doc.contains("conversation") ? doc.at("conversation") : doc;
    RawDialogue out;
    out.id = doc.value("sample_id", fallback_id);
    for (int n = 1;; ++n) {
        std::string key = "session_" + std::to_string(n);
        if (!conv.contains(key)) break;
        RawSession session;
        std::string stamp_text = conv.value(key + "_date_time", "");
        auto stamp = parse_session_stamp(stamp_text);
        if (!stamp)
            throw IngestError(IngestError::Kind::ParseFailure,
                              "unparseable session stamp for " + key + ": " + stamp_text, n);
        session.start = stamp_to_datetime(*stamp, session.time_was_defaulted);
        for (const auto& t : conv.at(key)) {
            std::string text = t.contains("text") ? t.at("text").get<std::string>()
                                                  : t.at("clean_text").get<std::string>();
            session.turns.push_back(RawTurn{t.at("speaker").get<std::string>(), text});
        }
        out.sessions.push_back(std::move(session));
    }
    if (out.sessions.empty())
        throw IngestError(IngestError::Kind::ParseFailure, "no session_N keys found");
    return out;
}

}  // namespace

int count_tokens(const std::string& text) { return word_count(text); }

std::vector<DateTime> augment_timestamps(const std::vector<std::string>& turn_texts,
                                         DateTime session_start, double speech_rate_wpm) {
    if (speech_rate_wpm <= 0.0)
        throw std::invalid_argument("speech_rate_wpm must be positive");
    std::vector<DateTime> out;
    out.reserve(turn_texts.size());
    int64_t words_before = 0;
    for (const auto& text : turn_texts) {
        // Offset from cumulative words, not per-turn accumulation, so the
        // fractional remainder never drifts.
        double offset_minutes = static_cast<double>(words_before) / speech_rate_wpm;
        auto whole = static_cast<int64_t>(std::floor(offset_minutes + 1e-9));
        out.push_back(session_start.plus_minutes(whole));
        words_before += word_count(text);
    }
    return out;
}

std::vector<int> infer_sessions(const std::vector<DateTime>& times, int gap_minutes) {
    std::vector<int> out;
    out.reserve(times.size());
    int session = 1;
    for (size_t i = 0; i < times.size(); ++i) {
        if (i > 0) {
            int64_t gap = times[i].total_minutes() - times[i - 1].total_minutes();
            if (gap < 0)
                throw IngestError(IngestError::Kind::UnorderedResponses,
                                  "responses are not time-ordered at position " + std::to_string(i),
                                  static_cast<int>(i));
            if (gap > gap_minutes) ++session;
        }
        out.push_back(session);
    }
    return out;
}

std::vector<int> infer_sessions(const std::vector<Response>& responses, int gap_minutes) {
    std::vector<DateTime> times;
    times.reserve(responses.size());
    for (const auto& r : responses) times.push_back(r.datetime());
    return infer_sessions(times, gap_minutes);
}

ConversationSet ingest_dialogue(const RawDialogue& doc, double speech_rate_wpm) {
    if (doc.sessions.empty())
        throw IngestError(IngestError::Kind::EmptyDialogue, "dialogue has no sessions");

    ConversationSet set;
    set.id = doc.id;
    DateTime prev_start{};
    DateTime last_ts{};
    for (size_t si = 0; si < doc.sessions.size(); ++si) {
        const RawSession& session = doc.sessions[si];
        int ordinal = static_cast<int>(si) + 1;
        if (si > 0 && session.start <= prev_start)
            throw IngestError(IngestError::Kind::NonMonotonicSessions,
                              "session " + std::to_string(ordinal) +
                                  " starts at or before the previous session",
                              ordinal);
        prev_start = session.start;

        DateTime effective_start = session.start;
        if (si > 0 && effective_start < last_ts) {
            // Previous session's simulated speech ran past this start.
            effective_start = last_ts;
            set.notes.push_back("session " + std::to_string(ordinal) +
                                " start clamped to previous response timestamp");
        }
        if (session.time_was_defaulted)
            set.notes.push_back("session " + std::to_string(ordinal) +
                                " had no time-of-day; defaulted to 09:00");

        std::vector<std::string> texts;
        texts.reserve(session.turns.size());
        for (const auto& turn : session.turns) {
            if (turn.speaker.empty() || turn.text.empty())
                throw IngestError(IngestError::Kind::EmptyTurn,
                                  "empty speaker or utterance in session " + std::to_string(ordinal),
                                  ordinal);
            texts.push_back(turn.text);
        }
        auto stamps = augment_timestamps(texts, effective_start, speech_rate_wpm);
        for (size_t ti = 0; ti < session.turns.size(); ++ti) {
            Response r;
            r.response_index = static_cast<int>(set.responses.size());
            r.session_index = ordinal;
            r.speaker = session.turns[ti].speaker;
            r.date = stamps[ti].date;
            r.time = stamps[ti].time;
            r.text = session.turns[ti].text;
            set.responses.push_back(std::move(r));
            last_ts = stamps[ti];
        }
    }
    if (set.responses.empty())
        throw IngestError(IngestError::Kind::EmptyDialogue, "dialogue has no turns");
    set.padding_start_index = static_cast<int>(set.responses.size());
    return set;
}

PaddingReport append_padding_session(ConversationSet& set, const RawSession& padding,
                                     double speech_rate_wpm) {
    if (set.responses.empty())
        throw IngestError(IngestError::Kind::EmptyDialogue, "cannot pad an empty set");
    if (padding.start <= set.responses.back().datetime())
        throw IngestError(IngestError::Kind::BadPaddingStart,
                          "padding session must start after the last response");

    PaddingReport report;
    report.session_index = set.responses.back().session_index + 1;
    set.padding_start_index = static_cast<int>(set.responses.size());

    std::vector<std::string> texts;
    for (const auto& turn : padding.turns) {
        texts.push_back(turn.text);
        report.token_count += word_count(turn.text);
    }
    report.turn_count = static_cast<int>(texts.size());

    auto stamps = augment_timestamps(texts, padding.start, speech_rate_wpm);
    for (size_t ti = 0; ti < padding.turns.size(); ++ti) {
        Response r;
        r.response_index = static_cast<int>(set.responses.size());
        r.session_index = report.session_index;
        r.speaker = padding.turns[ti].speaker;
        r.date = stamps[ti].date;
        r.time = stamps[ti].time;
        r.text = padding.turns[ti].text;
        set.responses.push_back(std::move(r));
    }
    set.notes.push_back("padding session " + std::to_string(report.session_index) + ": " +
                        std::to_string(report.token_count) + " tokens in " +
                        std::to_string(report.turn_count) + " turns");
    return report;
}

RawSession make_padding_session(DateTime start, const std::string& speaker_a,
                                const std::string& speaker_b, int target_tokens) {
    static const char* kFiller[] = {
        "Oh by the way, the weather around here has been so changeable lately, sunny one minute "
        "and pouring rain the next, I never know what to wear when I head out the door.",
        "I know exactly what you mean, I keep an umbrella in my bag now no matter what the "
        "forecast says because it has been wrong three times this week already.",
        "That is very wise of you. I finally repotted the plants on my windowsill this morning "
        "and they look much happier for it, the basil especially has perked right up.",
        "Fresh basil is the best, you should make something nice with it before it flowers. I "
        "tried a new pasta recipe over the weekend that would suit it perfectly.",
        "You will have to send me that recipe sometime. I have been cooking more at home lately "
        "and it is surprisingly relaxing once you get into a bit of a rhythm with it.",
        "Agreed, chopping vegetables is practically meditation for me these days. Did I mention "
        "the little bakery near the station started selling sourdough on weekday mornings?",
        "You did not! I will have to stop by on my way in tomorrow. There is something about "
        "warm bread that makes the whole morning feel a little more manageable somehow.",
        "It really does. Anyway, I also finally fixed that squeaky hinge on the kitchen cabinet, "
        "which took five minutes after I spent two months being annoyed by it every day.",
    };
    constexpr int kFillerCount = static_cast<int>(sizeof(kFiller) / sizeof(kFiller[0]));

    RawSession session;
    session.start = start;
    int tokens = 0;
    int i = 0;
    while (tokens < target_tokens) {
        const std::string text = kFiller[i % kFillerCount];
        session.turns.push_back(RawTurn{(i % 2 == 0) ? speaker_a : speaker_b, text});
        tokens += word_count(text);
        ++i;
    }
    return session;
}

std::vector<RawDialogue> read_dialogue_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IngestError(IngestError::Kind::ParseFailure, "cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IngestError(IngestError::Kind::ParseFailure,
                          path.string() + ": " + std::string(e.what()));
    }

    auto parse_one = [&](const json& item, const std::string& fallback_id) {
        if (item.contains("sessions")) return dialogue_from_canonical(item, fallback_id);
        return dialogue_from_locomo(item, fallback_id);
    };

    std::string stem = path.stem().string();
    std::vector<RawDialogue> out;
    if (doc.is_array()) {
        for (size_t i = 0; i < doc.size(); ++i)
            out.push_back(parse_one(doc[i], stem + "-" + std::to_string(i)));
    } else {
        out.push_back(parse_one(doc, stem));
    }
    return out;
}

void write_conversation_set(const ConversationSet& set, const std::filesystem::path& path) {
    json doc;
    doc["format"] = "chatmem-conversation-set";
    doc["version"] = 1;
    doc["id"] = set.id;
    doc["padding_start_index"] = set.padding_start_index;
    doc["notes"] = set.notes;
    json rows = json::array();
    for (const auto& r : set.responses) {
        rows.push_back({{"response_index", r.response_index},
                        {"session_index", r.session_index},
                        {"speaker", r.speaker},
                        {"date", r.date.to_iso()},
                        {"time", r.time.to_hhmm()},
                        {"text", r.text}});
    }
    doc["responses"] = std::move(rows);
    std::ofstream out(path);
    if (!out)
        throw IngestError(IngestError::Kind::ParseFailure, "cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

ConversationSet read_conversation_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IngestError(IngestError::Kind::ParseFailure, "cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IngestError(IngestError::Kind::ParseFailure,
                          path.string() + ": " + std::string(e.what()));
    }
    if (doc.value("format", "") != "chatmem-conversation-set")
        throw IngestError(IngestError::Kind::ParseFailure,
                          path.string() + " is not a conversation-set file");

    ConversationSet set;
    set.id = doc.value("id", path.stem().string());
    set.padding_start_index = doc.at("padding_start_index").get<int>();
    if (doc.contains("notes")) set.notes = doc.at("notes").get<std::vector<std::string>>();
    for (const auto& row : doc.at("responses")) {
        Response r;
        r.response_index = row.at("response_index").get<int>();
        r.session_index = row.at("session_index").get<int>();
        r.speaker = row.at("speaker").get<std::string>();
        auto d = parse_date(row.at("date").get<std::string>());
        auto t = parse_time(row.at("time").get<std::string>());
        if (!d || !t)
            throw IngestError(IngestError::Kind::ParseFailure,
                              "bad date/time in response " + std::to_string(r.response_index));
        r.date = *d;
        r.time = *t;
        r.text = row.at("text").get<std::string>();
        set.responses.push_back(std::move(r));
    }
    return set;
}

}  // namespace chatmem
