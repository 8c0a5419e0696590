/*
 * Retrieval pipeline: mode naming, the three query-input modes, the four
 * retriever kinds end-to-end over a synthetic log with the scripted rule
 * backend, the degraded fallback, and the benchmark runner's trace file
 * with resume.
 */
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "chatmem/oracle.hpp"
#include "chatmem/pipeline.hpp"
#include "chatmem/prompts.hpp"
#include "chatmem/question_gen.hpp"
#include "chatmem/vector_store.hpp"
#include "support/fixture_corpus.hpp"

using namespace chatmem;
namespace fs = std::filesystem;

namespace {

struct ThrowingBackend : LlmBackend {
    std::string complete(const std::string&, int) override {
        throw BackendError("backend connection refused");
    }
};

std::vector<int> all_rows(const ConversationSet& log) {
    std::vector<int> ids(log.responses.size());
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

// What the pipeline's plain/imbued semantic path must produce: top-k by
// cosine over every row, reported as ascending ids.
std::vector<int> semantic_reference(const ConversationSet& log, bool imbued,
                                    const std::string& text, int k) {
    HashedBowEmbedder emb;
    VectorIndex index = build_response_index(log, emb, imbued);
    auto ids = all_rows(log);
    auto scored = index.top_k(emb.embed(text), ids, std::min<int>(k, static_cast<int>(ids.size())));
    std::vector<int> out;
    for (const Scored& s : scored) out.push_back(s.id);
    std::sort(out.begin(), out.end());
    return out;
}

fs::path temp_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() /
                   ("chatmem-pipe-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

struct Harness {
    testing::FixtureSet fx;
    ScriptedOracle oracle;
    LlmInterface llm;
    HashedBowEmbedder embedder;
    Retriever retriever;

    explicit Harness(int fixture_index)
        : fx(testing::make_fixture_set(fixture_index)),
          llm(oracle, PromptLibrary::builtin()),
          retriever(fx.log, llm, embedder) {}
};

}  // namespace

TEST_CASE("mode names parse back to themselves") {
    const RetrieverKind kinds[] = {RetrieverKind::CoTableSemantic,
                                   RetrieverKind::CoTableNoClassifier,
                                   RetrieverKind::SemanticOnly,
                                   RetrieverKind::SemanticMetaImbued};
    for (RetrieverKind k : kinds) CHECK(parse_retriever_kind(retriever_kind_name(k)) == k);
    CHECK(retriever_kind_name(RetrieverKind::CoTableSemantic) == "cotable");
    CHECK(retriever_kind_name(RetrieverKind::CoTableNoClassifier) == "cotable_nc");
    CHECK(retriever_kind_name(RetrieverKind::SemanticOnly) == "semantic");
    CHECK(retriever_kind_name(RetrieverKind::SemanticMetaImbued) == "semantic_imbued");
    CHECK_FALSE(parse_retriever_kind("cosine").has_value());

    const QueryInput inputs[] = {QueryInput::OriginalQuery, QueryInput::ContextPlusQuery,
                                 QueryInput::QueryRewrite};
    for (QueryInput i : inputs) CHECK(parse_query_input(query_input_name(i)) == i);
    CHECK_FALSE(parse_query_input("verbatim").has_value());

    CHECK(mode_label(RetrievalMode{}) == "cotable+original");
    RetrievalMode m;
    m.kind = RetrieverKind::SemanticMetaImbued;
    m.input = QueryInput::QueryRewrite;
    CHECK(mode_label(m) == "semantic_imbued+rewrite");
}

TEST_CASE("time questions come back as exactly the relevant rows") {
    Harness h(1);
    QuestionSet qs = generate_time_questions(h.fx.log);
    RetrievalMode mode;  // cotable+original

    for (const std::string& test : time_test_names()) {
        auto of_test = questions_of(qs, test);
        if (of_test.empty()) continue;
        const Question& q = *of_test.front();
        CAPTURE(q.id);
        RetrievalResult res = h.retriever.retrieve(q, mode);
        REQUIRE_FALSE(res.degraded);
        REQUIRE(res.classified);
        CHECK(res.classification.needs_meta);
        CHECK_FALSE(res.classification.needs_semantic);
        CHECK_FALSE(res.chain.calls.empty());
        REQUIRE(res.retrieved == q.relevant_indices);
    }

    // Metadata-only answers are not cut to k: a span question with dozens of
    // relevant rows keeps all of them.
    const Question* big = nullptr;
    for (const Question& q : qs.questions)
        if (q.relevant_indices.size() > 10 && (!big || q.relevant_indices.size() >
                                                           big->relevant_indices.size()))
            big = &q;
    REQUIRE(big != nullptr);
    RetrievalResult res = h.retriever.retrieve(*big, mode);
    CHECK(res.retrieved.size() > 10);
    CHECK(res.retrieved == big->relevant_indices);
}

TEST_CASE("topic questions filter by metadata then cut semantically") {
    Harness h(1);
    RetrievalMode mode;

    for (const Question& q : h.fx.time_content.questions) {
        CAPTURE(q.id);
        RetrievalResult res = h.retriever.retrieve(q, mode);
        REQUIRE_FALSE(res.degraded);
        REQUIRE(res.classified);
        CHECK(res.classification.needs_meta);
        CHECK(res.classification.needs_semantic);

        std::string chain = res.chain.render();
        CHECK(chain.find("f_value(Speaker") != std::string::npos);
        CHECK(chain.find("f_value(Date") != std::string::npos);
        CHECK(chain.find("Content") == std::string::npos);  // not in the plain schema

        CHECK(res.retrieved.size() <= 10);
        REQUIRE(std::is_sorted(res.retrieved.begin(), res.retrieved.end()));
        // The filtered candidate pool (one speaker, one date) is small enough
        // that the planted row always survives the cut.
        for (int want : q.relevant_indices)
            CHECK(std::count(res.retrieved.begin(), res.retrieved.end(), want) == 1);
    }
}

TEST_CASE("the no-classifier mode writes a content probe into the chain") {
    Harness h(1);
    RetrievalMode mode;
    mode.kind = RetrieverKind::CoTableNoClassifier;

    const Question& q = h.fx.time_content.questions.front();
    RetrievalResult res = h.retriever.retrieve(q, mode);
    REQUIRE_FALSE(res.degraded);
    CHECK_FALSE(res.classified);  // no classifier calls in this mode

    std::string chain = res.chain.render();
    CHECK(chain.find("f_value(Speaker") != std::string::npos);
    CHECK(chain.find("f_value(Content") != std::string::npos);

    CHECK(res.retrieved.size() <= 10);
    for (int want : q.relevant_indices)
        CHECK(std::count(res.retrieved.begin(), res.retrieved.end(), want) == 1);
}

TEST_CASE("semantic-only modes rank the whole log by cosine") {
    Harness h(2);
    const Question& q = h.fx.time_content.questions.front();

    RetrievalMode plain;
    plain.kind = RetrieverKind::SemanticOnly;
    RetrievalResult res = h.retriever.retrieve(q, plain);
    CHECK_FALSE(res.classified);
    CHECK(res.chain.calls.empty());
    CHECK(res.retrieved == semantic_reference(h.fx.log, false, q.query, 10));

    plain.k = 3;
    CHECK(h.retriever.retrieve(q, plain).retrieved ==
          semantic_reference(h.fx.log, false, q.query, 3));

    RetrievalMode imbued;
    imbued.kind = RetrieverKind::SemanticMetaImbued;
    CHECK(h.retriever.retrieve(q, imbued).retrieved ==
          semantic_reference(h.fx.log, true, q.query, 10));
}

TEST_CASE("query input modes shape what the pipeline searches with") {
    Harness h(1);
    NowContext now = advance_clock(h.fx.log);

    SUBCASE("the original mode passes the final turn through") {
        RetrievalMode mode;
        mode.kind = RetrieverKind::SemanticOnly;
        RetrievalResult res =
            h.retriever.retrieve("What did we discuss in session 2?", {}, now, mode);
        CHECK(res.query_used == "What did we discuss in session 2?");
        CHECK(res.rewrite.empty());
    }

    SUBCASE("the context mode keeps only the trailing turns") {
        RetrievalMode mode;
        mode.kind = RetrieverKind::SemanticOnly;
        mode.input = QueryInput::ContextPlusQuery;
        std::vector<std::string> turns = {"alpha opening", "beta remark",   "gamma aside",
                                          "delta detail",  "epsilon reply", "zeta closer"};
        RetrievalResult res = h.retriever.retrieve("What about the harbor?", turns, now, mode);
        std::vector<std::string> window(turns.end() - 4, turns.end());
        CHECK(res.query_used == LlmInterface::format_dialogue(window, "What about the harbor?"));
        CHECK(res.query_used.find("alpha opening") == std::string::npos);
        CHECK(res.query_used.find("gamma aside") != std::string::npos);
        CHECK(res.query_used.find("What about the harbor?") != std::string::npos);
    }

    SUBCASE("the rewrite mode resolves ambiguous dialogue to one question") {
        QuestionSet time_qs = generate_time_questions(h.fx.log);
        QuestionSet amb = generate_ambiguous_questions(h.fx.log, time_qs);
        const Question* pick = nullptr;
        for (const Question& q : amb.questions)
            if (q.test_name == "session" && q.variant_id == 0) pick = &q;
        REQUIRE(pick != nullptr);

        RetrievalMode mode;
        mode.input = QueryInput::QueryRewrite;
        RetrievalResult res = h.retriever.retrieve(*pick, mode);
        REQUIRE_FALSE(res.degraded);
        CHECK(res.rewrite == pick->template_slots.at("base_query"));
        CHECK(res.query_used == res.rewrite);
        REQUIRE(res.retrieved == pick->relevant_indices);
    }
}

TEST_CASE("model failures degrade to plain semantic retrieval") {
    testing::FixtureSet fx = testing::make_fixture_set(3);
    ThrowingBackend bad;
    LlmInterface llm(bad, PromptLibrary::builtin());
    HashedBowEmbedder embedder;
    Retriever retriever(fx.log, llm, embedder);

    QuestionSet qs = generate_time_questions(fx.log);
    const Question& q = qs.questions.front();

    RetrievalMode mode;  // cotable needs the classifiers, which will throw
    RetrievalResult res = retriever.retrieve(q, mode);
    CHECK(res.degraded);
    CHECK_FALSE(res.classified);
    CHECK(res.error.find("connection refused") != std::string::npos);
    CHECK(res.retrieved == semantic_reference(fx.log, false, q.query, 10));

    // A failed rewrite falls back to searching with the raw final turn.
    mode.input = QueryInput::QueryRewrite;
    RetrievalResult rw = retriever.retrieve(q, mode);
    CHECK(rw.degraded);
    CHECK(rw.rewrite.empty());
    CHECK(rw.query_used == q.query);
    CHECK_FALSE(rw.retrieved.empty());
}

TEST_CASE("the benchmark runner writes, resumes, and rereads traces") {
    Harness h(0);
    QuestionSet qs = generate_time_questions(h.fx.log);
    REQUIRE(qs.questions.size() >= 8);

    QuestionSet six;
    six.set_id = qs.set_id;
    for (size_t i = 0; i < 6; ++i) six.questions.push_back(qs.questions[i]);
    QuestionSet eight = six;
    eight.questions.push_back(qs.questions[6]);
    eight.questions.push_back(qs.questions[7]);

    fs::path trace = temp_dir() / "bench.jsonl";
    BenchOptions opts;
    opts.trace_path = trace.string();

    BenchRun run1 = run_bench(h.retriever, six, opts);
    CHECK(run1.reused == 0);
    REQUIRE(run1.traces.size() == 6);
    for (size_t i = 0; i < 6; ++i) {
        const TraceRecord& t = run1.traces[i];
        CHECK(t.question_id == six.questions[i].id);
        CHECK(t.test_name == six.questions[i].test_name);
        CHECK(t.mode == "cotable+original");
        CHECK(t.query == six.questions[i].query);
        CHECK(t.classified);
        CHECK(t.meta);
        CHECK_FALSE(t.chain.empty());
        CHECK(t.retrieved == six.questions[i].relevant_indices);
        CHECK(t.relevant == six.questions[i].relevant_indices);
        CHECK(t.elapsed_ms >= 0.0);
        CHECK_FALSE(t.degraded);
    }
    CHECK(read_trace_file(trace.string()).size() == 6);

    long calls_before = h.oracle.call_count();
    BenchRun run2 = run_bench(h.retriever, six, opts);
    CHECK(run2.reused == 6);
    CHECK(h.oracle.call_count() == calls_before);  // everything came from the file
    for (size_t i = 0; i < 6; ++i)
        CHECK(run2.traces[i].retrieved == run1.traces[i].retrieved);

    BenchRun run3 = run_bench(h.retriever, eight, opts);
    CHECK(run3.reused == 6);
    CHECK(read_trace_file(trace.string()).size() == 8);

    opts.resume = false;
    BenchRun run4 = run_bench(h.retriever, eight, opts);
    CHECK(run4.reused == 0);
    CHECK(read_trace_file(trace.string()).size() == 8);  // file was rewritten, not appended

    // A parallel run over a fresh file answers every question identically.
    BenchOptions par;
    par.trace_path = (temp_dir() / "parallel.jsonl").string();
    par.parallelism = 3;
    BenchRun run5 = run_bench(h.retriever, eight, par);
    REQUIRE(run5.traces.size() == 8);
    for (size_t i = 0; i < 8; ++i) {
        CHECK(run5.traces[i].question_id == eight.questions[i].id);
        CHECK(run5.traces[i].retrieved == run4.traces[i].retrieved);
    }
}

TEST_CASE("trace records survive a file round trip") {
    TraceRecord t;
    t.question_id = "set:session:session-2:v1";
    t.test_name = "session";
    t.mode = "cotable+rewrite";
    t.query = "Yes, please do.";
    t.query_used = "What did we discuss in session 2?";
    t.rewrite = t.query_used;
    t.classified = true;
    t.meta = true;
    t.semantic = false;
    t.chain = "f_value(Session_Index, [2]) -> <END>";
    t.retrieved = {4, 5, 6};
    t.relevant = {4, 5, 6, 7};
    t.warnings = {"dropped duplicate call: f_value(Session_Index, [2])"};
    t.degraded = false;
    t.error = "";
    t.elapsed_ms = 12.5;

    fs::path path = temp_dir() / "single.jsonl";
    write_trace_file({t}, path.string());
    auto back = read_trace_file(path.string());
    REQUIRE(back.size() == 1);
    const TraceRecord& b = back[0];
    CHECK(b.question_id == t.question_id);
    CHECK(b.test_name == t.test_name);
    CHECK(b.mode == t.mode);
    CHECK(b.query == t.query);
    CHECK(b.query_used == t.query_used);
    CHECK(b.rewrite == t.rewrite);
    CHECK(b.classified == t.classified);
    CHECK(b.meta == t.meta);
    CHECK(b.semantic == t.semantic);
    CHECK(b.chain == t.chain);
    CHECK(b.retrieved == t.retrieved);
    CHECK(b.relevant == t.relevant);
    CHECK(b.warnings == t.warnings);
    CHECK(b.degraded == t.degraded);
    CHECK(b.elapsed_ms == doctest::Approx(t.elapsed_ms));

    CHECK_THROWS_AS(read_trace_file((temp_dir() / "absent.jsonl").string()), std::runtime_error);
}
