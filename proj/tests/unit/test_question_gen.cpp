/*
 * Benchmark question generation: the clock rule, per-test base counts
 * (hand-counted on a small log and closed-form on the synthetic corpus),
 * wording-variant structure, ambiguous wrapping, and the question file
 * format with its validating loader.
 */
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chatmem/question_gen.hpp"
#include "support/fixture_corpus.hpp"

using namespace chatmem;
namespace fs = std::filesystem;

namespace {

struct RowSpec {
    int session;
    const char* speaker;
    const char* date;
    const char* time;
    const char* text;
};

ConversationSet make_log(const std::string& id, const std::vector<RowSpec>& rows) {
    ConversationSet set;
    set.id = id;
    for (size_t i = 0; i < rows.size(); ++i) {
        Response r;
        r.response_index = static_cast<int>(i);
        r.session_index = rows[i].session;
        r.speaker = rows[i].speaker;
        r.date = *parse_date(rows[i].date);
        r.time = *parse_time(rows[i].time);
        r.text = rows[i].text;
        set.responses.push_back(std::move(r));
    }
    set.padding_start_index = static_cast<int>(set.responses.size());
    return set;
}

// Five sessions over four dates and two months; the last session sits on the
// clock's date so the trailing-window tests have rows. Ten rows, two per
// session. No padding, so "now" is session 5's clock plus 50 minutes.
ConversationSet tiny_log() {
    return make_log("tiny", {
        {1, "Ann", "2023-03-10", "10:00", "morning chat"},
        {1, "Bob", "2023-03-10", "10:01", "reply"},
        {2, "Ann", "2023-03-10", "15:00", "afternoon follow-up"},
        {2, "Bob", "2023-03-10", "15:02", "noted"},
        {3, "Ann", "2023-03-28", "09:30", "late march topic"},
        {3, "Bob", "2023-03-28", "09:33", "reply"},
        {4, "Ann", "2023-04-12", "11:00", "april planning"},
        {4, "Bob", "2023-04-12", "11:05", "sounds good"},
        {5, "Ann", "2023-04-20", "13:30", "final session talk"},
        {5, "Bob", "2023-04-20", "13:31", "wrapping up"},
    });
}

// base_count_by_test only has keys for tests that produced questions;
// fill in the zeros so it can be compared against the closed-form map.
std::map<std::string, int> filled(std::map<std::string, int> counts) {
    for (const std::string& t : time_test_names()) counts.emplace(t, 0);
    return counts;
}

const Question* find_question(const QuestionSet& qs, const std::string& id) {
    for (const Question& q : qs.questions)
        if (q.id == id) return &q;
    return nullptr;
}

fs::path temp_file(const std::string& name) {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() /
                   ("chatmem-qg-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("the eleven time tests are reported in a fixed order") {
    const std::vector<std::string> want = {"earlier_today", "date_span", "dates",
                                           "day_span",      "last_day",  "month",
                                           "rel_day",       "rel_month", "rel_session",
                                           "session_span",  "session"};
    CHECK(time_test_names() == want);
}

TEST_CASE("the clock is 50 minutes past the last response, same session") {
    ConversationSet log = tiny_log();
    NowContext now = advance_clock(log);
    CHECK(now.date == Date{2023, 4, 20});
    CHECK(now.time == TimeOfDay{14 * 60 + 21});  // 13:31 + 50
    CHECK(now.session == 5);

    ConversationSet late = make_log("late", {{1, "A", "2023-12-31", "23:40", "countdown"}});
    NowContext rolled = advance_clock(late);
    CHECK(rolled.date == Date{2024, 1, 1});
    CHECK(rolled.time == TimeOfDay{30});
    CHECK(rolled.session == 1);

    CHECK_THROWS_AS(advance_clock(ConversationSet{}), std::invalid_argument);
}

TEST_CASE("base counts on the small log match hand counting") {
    ConversationSet log = tiny_log();

    // Dates: Mar 10, Mar 28, Apr 12, Apr 20 (= today). Months: March, April.
    std::map<std::string, int> want = {
        {"earlier_today", 1},  // session 5 spoke today before 14:21
        {"date_span", 6},      // C(4,2) ordered date pairs
        {"dates", 4},
        {"day_span", 2},       // both trailing windows contain Apr 20
        {"last_day", 0},       // nothing on Apr 13..19
        {"month", 2},
        {"rel_day", 3},        // Mar 10, Mar 28, Apr 12 are all before today
        {"rel_month", 1},      // March; February is past the earliest row
        {"rel_session", 4},    // sessions 1..4 (5 is the current one)
        {"session_span", 2},   // 1..4 and 2..5 at width 3
        {"session", 5},
    };
    CHECK(expected_base_counts(log) == want);

    QuestionSet qs = generate_time_questions(log);
    CHECK(filled(base_count_by_test(qs)) == want);

    // Variant totals follow the per-test multipliers; day_span mixes a
    // six-variant window and a three-variant window.
    std::map<std::string, int> counts = count_by_test(qs);
    CHECK(counts["session"] == 30);
    CHECK(counts["session_span"] == 8);
    CHECK(counts["dates"] == 48);
    CHECK(counts["date_span"] == 72);
    CHECK(counts["day_span"] == 9);
    CHECK(counts["month"] == 6);
    CHECK(counts["rel_month"] == 3);
    CHECK(counts["rel_day"] == 9);
    CHECK(counts["earlier_today"] == 3);
    CHECK(counts["rel_session"] == 12);
    CHECK(qs.questions.size() == 200);
}

TEST_CASE("ground truth on the small log is the exact row set") {
    ConversationSet log = tiny_log();
    QuestionSet qs = generate_time_questions(log);

    auto relevant = [&](const std::string& id) {
        const Question* q = find_question(qs, id);
        REQUIRE_MESSAGE(q != nullptr, id);
        return q->relevant_indices;
    };

    CHECK(relevant("tiny:session:session-3:v0") == std::vector<int>{4, 5});
    CHECK(relevant("tiny:dates:dates-2023-03-10:v0") == std::vector<int>{0, 1, 2, 3});
    CHECK(relevant("tiny:date_span:datespan-2023-03-10-2023-03-28:v0") ==
          std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(relevant("tiny:month:month-2023-04:v0") == std::vector<int>{6, 7, 8, 9});
    CHECK(relevant("tiny:rel_month:relmonth-1:v0") == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(relevant("tiny:earlier_today:earliertoday:v0") == std::vector<int>{8, 9});
    CHECK(relevant("tiny:rel_session:relsession-1:v0") == std::vector<int>{6, 7});
    CHECK(relevant("tiny:rel_session:relsession-4:v0") == std::vector<int>{0, 1});
    CHECK(relevant("tiny:rel_day:relday-23:v0") == std::vector<int>{4, 5});  // Mar 28
    CHECK(relevant("tiny:day_span:dayspan-week:v0") == std::vector<int>{8, 9});
    CHECK(relevant("tiny:session_span:sessionspan-2-5:v0") ==
          std::vector<int>{2, 3, 4, 5, 6, 7, 8, 9});

    NowContext now = advance_clock(log);
    for (const Question& q : qs.questions) {
        CAPTURE(q.id);
        REQUIRE(q.now == now);
        REQUIRE_FALSE(q.relevant_indices.empty());
        REQUIRE(std::is_sorted(q.relevant_indices.begin(), q.relevant_indices.end()));
        REQUIRE(q.context_turns.empty());
        REQUIRE(q.template_slots.count("base") == 1);
    }
}

TEST_CASE("a log with too few sessions skips the span test with a note") {
    ConversationSet log = make_log("short", {
        {1, "A", "2023-05-01", "10:00", "one"},
        {2, "A", "2023-05-03", "10:00", "two"},
        {3, "A", "2023-05-05", "10:00", "three"},
    });
    CHECK(expected_base_counts(log)["session_span"] == 0);
    QuestionSet qs = generate_time_questions(log);
    CHECK(base_count_by_test(qs)["session_span"] == 0);
    bool noted = false;
    for (const auto& n : qs.notes) noted = noted || n.find("session_span") != std::string::npos;
    CHECK(noted);
}

TEST_CASE("generated counts match the closed-form expectation on the corpus") {
    for (const auto& fx : testing::make_fixture_corpus()) {
        CAPTURE(fx.log.id);
        QuestionSet qs = generate_time_questions(fx.log);
        REQUIRE(filled(base_count_by_test(qs)) == expected_base_counts(fx.log));

        // Per-base variant groups are dense and share ground truth.
        std::map<std::string, std::vector<const Question*>> by_base;
        std::set<std::string> ids;
        for (const Question& q : qs.questions) {
            REQUIRE_MESSAGE(ids.insert(q.id).second, "duplicate id " << q.id);
            REQUIRE(q.relevant_indices.front() >= 0);
            REQUIRE(q.relevant_indices.back() < fx.log.padding_start_index);
            by_base[q.test_name + "/" + q.template_slots.at("base")].push_back(&q);
        }
        for (const auto& [key, group] : by_base) {
            CAPTURE(key);
            int want = variant_multiplier(group[0]->test_name, group[0]->template_slots);
            REQUIRE(static_cast<int>(group.size()) == want);
            std::set<int> variant_ids;
            for (const Question* q : group) {
                variant_ids.insert(q->variant_id);
                REQUIRE(q->relevant_indices == group[0]->relevant_indices);
                REQUIRE(q->now == group[0]->now);
            }
            REQUIRE(static_cast<int>(variant_ids.size()) == want);
            REQUIRE(*variant_ids.begin() == 0);
            REQUIRE(*variant_ids.rbegin() == want - 1);
        }
    }
}

TEST_CASE("date-span sampling caps the pair count deterministically") {
    testing::FixtureSet fx = testing::make_fixture_set(0);
    QuestionSet a = generate_time_questions(fx.log);
    QuestionSet b = generate_time_questions(fx.log);

    REQUIRE(base_count_by_test(a)["date_span"] == 15);  // capped from a larger pair set
    REQUIRE(a.questions.size() == b.questions.size());
    for (size_t i = 0; i < a.questions.size(); ++i) {
        REQUIRE(a.questions[i].id == b.questions[i].id);
        REQUIRE(a.questions[i].query == b.questions[i].query);
        REQUIRE(a.questions[i].relevant_indices == b.questions[i].relevant_indices);
    }

    GenOptions other;
    other.seed = 999;
    QuestionSet c = generate_time_questions(fx.log, other);
    REQUIRE(base_count_by_test(c)["date_span"] == 15);
    auto span_ids = [](const QuestionSet& qs) {
        std::set<std::string> out;
        for (const Question& q : qs.questions)
            if (q.test_name == "date_span") out.insert(q.template_slots.at("base"));
        return out;
    };
    CHECK(span_ids(a) != span_ids(c));  // a different seed samples different pairs
}

TEST_CASE("ambiguous questions wrap each base in three dialogues") {
    ConversationSet log = tiny_log();
    QuestionSet qs = generate_time_questions(log);
    QuestionSet amb = generate_ambiguous_questions(log, qs);

    // 30 bases, none of which is "1 day ago" here.
    CHECK(amb.questions.size() == 90);

    const Question* t1 = find_question(amb, "tiny:session:session-3:amb1");
    REQUIRE(t1 != nullptr);
    CHECK(t1->variant_id == 0);
    REQUIRE(t1->context_turns.size() == 2);
    CHECK(t1->context_turns[0] == "I see in my calendar that we talked in session 3.");
    CHECK(t1->context_turns[1] == "Yes! we did talk then. I always enjoy our chats.");
    CHECK(t1->query == "I enjoy them too! Can you summarize what we discussed?");
    CHECK(t1->relevant_indices == std::vector<int>{4, 5});
    CHECK(t1->ambiguous());
    CHECK(t1->template_slots.at("template") == "1");
    CHECK(t1->template_slots.at("phrase") == "in session 3");
    CHECK(t1->template_slots.at("base_query") == "What did we discuss in session 3?");

    const Question* t2 = find_question(amb, "tiny:rel_day:relday-23:amb2");
    REQUIRE(t2 != nullptr);
    REQUIRE(t2->context_turns.size() == 4);
    CHECK(t2->context_turns[0] ==
          "I am try to remember what we talked about 23 days ago. Can you remember that far "
          "back?");
    CHECK(t2->query == "Yes, please do.");

    const Question* t3 = find_question(amb, "tiny:month:month-2023-03:amb3");
    REQUIRE(t3 != nullptr);
    CHECK(t3->context_turns[0] == "I remember in March, 2023 we had several discussions.");
    CHECK(t3->query ==
          "Yes, could you describe, in as much detail as you can, the content of those "
          "conversations?");
}

TEST_CASE("\"1 days ago\" is not wrapped into the dialogues") {
    testing::FixtureSet fx = testing::make_fixture_set(0);
    QuestionSet qs = generate_time_questions(fx.log);

    bool has_one_day = false;
    int bases = 0;
    for (const Question& q : qs.questions) {
        if (q.variant_id != 0) continue;
        ++bases;
        if (q.test_name == "rel_day" && q.template_slots.at("n") == "1") has_one_day = true;
    }
    REQUIRE(has_one_day);  // the fixture's tail sessions are on consecutive days

    QuestionSet amb = generate_ambiguous_questions(fx.log, qs);
    CHECK(static_cast<int>(amb.questions.size()) == (bases - 1) * 3);
    for (const Question& q : amb.questions) {
        bool is_one_day = q.test_name == "rel_day" && q.template_slots.at("n") == "1";
        CHECK_FALSE(is_one_day);
    }
    bool noted = false;
    for (const auto& n : amb.notes) noted = noted || n.find("1 days ago") != std::string::npos;
    CHECK(noted);
}

TEST_CASE("question files round-trip") {
    ConversationSet log = tiny_log();
    QuestionSet qs = generate_time_questions(log);
    qs.notes.push_back("generated for the round-trip test");
    QuestionSet amb = generate_ambiguous_questions(log, qs);
    for (Question& q : amb.questions) qs.questions.push_back(std::move(q));

    fs::path path = temp_file("tiny.questions.jsonl");
    write_question_file(qs, path.string());
    QuestionSet back = read_question_file(path.string());

    CHECK(back.set_id == qs.set_id);
    CHECK(back.notes == qs.notes);
    REQUIRE(back.questions.size() == qs.questions.size());
    for (size_t i = 0; i < qs.questions.size(); ++i) {
        CAPTURE(qs.questions[i].id);
        const Question& a = qs.questions[i];
        const Question& b = back.questions[i];
        REQUIRE(a.id == b.id);
        REQUIRE(a.test_name == b.test_name);
        REQUIRE(a.query == b.query);
        REQUIRE(a.variant_id == b.variant_id);
        REQUIRE(a.context_turns == b.context_turns);
        REQUIRE(a.template_slots == b.template_slots);
        REQUIRE(a.relevant_indices == b.relevant_indices);
        REQUIRE(a.now == b.now);
    }

    CHECK_THROWS(read_question_file((path.parent_path() / "missing.jsonl").string()));
    fs::path junk = temp_file("junk.jsonl");
    write_question_file(QuestionSet{}, junk.string());
    CHECK(read_question_file(junk.string()).questions.empty());
}

TEST_CASE("curated time-content files are validated against the log") {
    testing::FixtureSet fx = testing::make_fixture_set(2);
    REQUIRE_FALSE(fx.time_content.questions.empty());

    SUBCASE("a clean file loads fully and takes the bench clock") {
        fs::path path = temp_file("clean.jsonl");
        write_question_file(fx.time_content, path.string());
        LoadedQuestions loaded = load_time_content_questions(path.string(), fx.log);
        CHECK(loaded.errors.empty());
        REQUIRE(loaded.set.questions.size() == fx.time_content.questions.size());
        NowContext now = advance_clock(fx.log);
        for (const Question& q : loaded.set.questions) CHECK(q.now == now);
    }

    SUBCASE("offending records are excluded with reasons") {
        QuestionSet tampered = fx.time_content;
        REQUIRE(tampered.questions.size() >= 3);
        tampered.questions[0].test_name = "dates";
        tampered.questions[1].relevant_indices = {fx.log.padding_start_index};
        tampered.questions[2].template_slots["speaker"] = "Nobody";

        fs::path path = temp_file("tampered.jsonl");
        write_question_file(tampered, path.string());
        LoadedQuestions loaded = load_time_content_questions(path.string(), fx.log);

        CHECK(loaded.set.questions.size() == tampered.questions.size() - 3);
        REQUIRE(loaded.errors.size() == 3);
        CHECK(loaded.errors[0].find("expected time_content") != std::string::npos);
        CHECK(loaded.errors[1].find("outside the real rows") != std::string::npos);
        CHECK(loaded.errors[2].find("speaker") != std::string::npos);
        CHECK(loaded.errors[0].find(tampered.questions[0].id) == 0);
    }

    SUBCASE("empty ground truth and bad date slots are rejected") {
        QuestionSet tampered = fx.time_content;
        REQUIRE(tampered.questions.size() >= 2);
        tampered.questions[0].relevant_indices.clear();
        tampered.questions[1].template_slots["date"] = "3023-01-01";

        fs::path path = temp_file("tampered2.jsonl");
        write_question_file(tampered, path.string());
        LoadedQuestions loaded = load_time_content_questions(path.string(), fx.log);

        CHECK(loaded.set.questions.size() == tampered.questions.size() - 2);
        REQUIRE(loaded.errors.size() == 2);
        CHECK(loaded.errors[0].find("no relevant indices") != std::string::npos);
        CHECK(loaded.errors[1].find("date") != std::string::npos);
    }
}
