#include "fixture_corpus.hpp"

#include <cstdio>

namespace chatmem::testing {

namespace {

struct SplitMix {
    uint64_t state;
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    int bounded(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }
};

const char* kNamesA[12] = {"Alice", "Carol", "Elena", "Grace", "Irene", "Karen",
                           "Maya",  "Nora",  "Priya", "Rosa",  "Tessa", "Vera"};
const char* kNamesB[12] = {"Ben",  "David", "Felix", "Henry", "Jonas", "Liam",
                           "Noel", "Oscar", "Quinn", "Sam",   "Umar",  "Wade"};

// Session themes. Kept clear of calendar words, weekday names, number words,
// and the grammar's trigger words so log text never looks like a time phrase.
const char* kTopics[16] = {
    "pottery glaze firing",      "sourdough starter hydration", "telescope collimation",
    "houseplant propagation",    "cycling gear ratios",         "watercolor pigment mixing",
    "chess endgame studies",     "beehive inspection notes",    "climbing grip strength",
    "fermented hot sauce",       "trail camera placement",      "kite aerodynamics",
    "synthesizer filter repair", "orchard grafting",            "canoe portage routes",
    "letterpress ink rollers",
};

const char* kSentences[6] = {
    "I spent the evening reading about %s and took pages of notes.",
    "My experiments with %s finally went better than expected.",
    "Tell me everything about your %s project, please.",
    "That advice about %s saved me a lot of frustration.",
    "Progress on %s stalled, so I am trying a fresh approach.",
    "I keep a little journal about %s and it is filling up fast.",
};

// Planted-event subjects; each appears in exactly one turn of its set.
const char* kEventPhrases[12] = {
    "the cedar bookshelf",      "the lighthouse mural",    "the glacier documentary",
    "the heirloom tomato seeds", "the banjo duet",          "the origami crane mobile",
    "the tide pool photographs", "the copper weather vane", "the marble cake recipe",
    "the quilted star blanket",  "the fox den sighting",    "the harbor ferry ride",
};

std::string sentence(SplitMix& rng, const char* topic) {
    char buf[160];
    std::snprintf(buf, sizeof buf, kSentences[rng.bounded(6)], topic);
    std::string text = buf;
    if (rng.bounded(3) == 0) text += " It took patience.";
    return text;
}

}  // namespace

FixtureSet make_fixture_set(int index) {
    SplitMix rng{0xF1C50000ull + static_cast<uint64_t>(index) * 0x9e37ull};
    const std::string speaker_a = kNamesA[index % 12];
    const std::string speaker_b = kNamesB[index % 12];

    char id[32];
    std::snprintf(id, sizeof id, "fixture-%02d", index + 1);

    const int n_sessions = 8 + index % 5;

    // Schedule: a body of spread-out sessions (with one same-date
    // morning/afternoon pair on even sets), then three consecutive dates so
    // the trailing windows are never empty. The final session starts
    // mid-afternoon, which keeps the padding session and the advanced clock
    // on the same date.
    std::vector<std::pair<Date, int>> schedule;  // date, start minute of day
    Date cur{2023, 1 + index % 3, 4 + index % 9};
    const int body = n_sessions - 3;
    for (int s = 0; s < body; ++s) {
        if (s == 0) {
            schedule.emplace_back(cur, 9 * 60 + 30);
            continue;
        }
        if (s == 1 && index % 2 == 0) {
            schedule.emplace_back(cur, 15 * 60);  // same date, afternoon
            continue;
        }
        cur = cur.plus_days(3 + rng.bounded(6));
        int start = (s % 2) ? 9 * 60 + 15 + rng.bounded(40) : 13 * 60 + 30 + rng.bounded(40);
        schedule.emplace_back(cur, start);
    }
    cur = cur.plus_days(2 + rng.bounded(4));
    schedule.emplace_back(cur, 10 * 60);
    cur = cur.plus_days(1);
    schedule.emplace_back(cur, 9 * 60 + 45);
    cur = cur.plus_days(1);
    schedule.emplace_back(cur, 14 * 60);

    // Planted events: (session position, turn position, phrase index).
    struct Plant {
        int session;
        int turn;
        const char* phrase;
    };
    const Plant plants[3] = {
        {1, 2, kEventPhrases[(index * 3 + 0) % 12]},
        {n_sessions / 2, 3, kEventPhrases[(index * 3 + 1) % 12]},
        {n_sessions - 2, 4, kEventPhrases[(index * 3 + 2) % 12]},
    };

    RawDialogue doc;
    doc.id = id;
    std::vector<int> turns_per_session;
    for (int s = 0; s < n_sessions; ++s) {
        RawSession sess;
        sess.start = DateTime{schedule[static_cast<size_t>(s)].first,
                              TimeOfDay{schedule[static_cast<size_t>(s)].second}};
        const char* topic = kTopics[(index * 3 + s) % 16];
        int n_turns = 8 + rng.bounded(7);
        for (int t = 0; t < n_turns; ++t) {
            RawTurn turn;
            turn.speaker = (t % 2 == 0) ? speaker_a : speaker_b;
            turn.text = sentence(rng, topic);
            for (const Plant& p : plants)
                if (p.session == s && p.turn == t)
                    turn.text = std::string("I have wonderful news about ") + p.phrase +
                                ". It came together beautifully.";
            sess.turns.push_back(std::move(turn));
        }
        turns_per_session.push_back(n_turns);
        doc.sessions.push_back(std::move(sess));
    }

    FixtureSet fx;
    fx.log = ingest_dialogue(doc);

    const Response& last = fx.log.responses.back();
    DateTime padding_start = last.datetime().plus_minutes(kDefaultSessionGapMinutes + 1);
    append_padding_session(fx.log,
                           make_padding_session(padding_start, speaker_a, speaker_b));

    NowContext now = advance_clock(fx.log);
    fx.time_content.set_id = fx.log.id;
    for (int j = 0; j < 3; ++j) {
        const Plant& p = plants[j];
        int row = 0;
        for (int s = 0; s < p.session; ++s) row += turns_per_session[static_cast<size_t>(s)];
        row += p.turn;
        const Response& r = fx.log.responses[static_cast<size_t>(row)];

        Question q;
        q.id = fx.log.id + ":time_content:evt" + std::to_string(j) + ":v0";
        q.test_name = kTimeContentTest;
        q.query = "What did " + r.speaker + " say about " + p.phrase + " on " + r.date.to_long() +
                  "?";
        q.variant_id = 0;
        q.template_slots = {{"base", "evt" + std::to_string(j)},
                            {"speaker", r.speaker},
                            {"date", r.date.to_iso()},
                            {"topic", p.phrase}};
        q.relevant_indices = {row};
        q.now = now;
        fx.time_content.questions.push_back(std::move(q));
    }
    return fx;
}

std::vector<FixtureSet> make_fixture_corpus(int count) {
    std::vector<FixtureSet> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(make_fixture_set(i));
    return out;
}

}  // namespace chatmem::testing
