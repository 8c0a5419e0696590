/*
 * chatmem - the retrieval pipeline. Builds the query input (final turn,
 * context window, or model rewrite), routes it through the classifiers,
 * writes and applies the filter chain, runs the semantic cut, and falls
 * back to plain semantic search when a model step fails. Also the
 * benchmark runner, which records one JSONL trace per question and can
 * resume a half-finished run.
 */
#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "chatmem/chatlog.hpp"
#include "chatmem/llm.hpp"
#include "chatmem/question_gen.hpp"
#include "chatmem/table_engine.hpp"
#include "chatmem/vector_store.hpp"

namespace chatmem {

enum class RetrieverKind {
    CoTableSemantic,      // classify, filter chain, then the semantic cut
    CoTableNoClassifier,  // one chain over the table with a Content column; no classifiers
    SemanticOnly,         // flat top-k over raw response embeddings
    SemanticMetaImbued,   // flat top-k over metadata-imbued response embeddings
};

enum class QueryInput {
    OriginalQuery,     // the final user turn only
    ContextPlusQuery,  // the last few dialogue turns plus the final turn
    QueryRewrite,      // model-rewritten self-contained question
};

std::string retriever_kind_name(RetrieverKind kind);
std::string query_input_name(QueryInput input);
std::optional<RetrieverKind> parse_retriever_kind(std::string_view text);
std::optional<QueryInput> parse_query_input(std::string_view text);

struct RetrievalMode {
    RetrieverKind kind = RetrieverKind::CoTableSemantic;
    QueryInput input = QueryInput::OriginalQuery;
    int k = 10;             // semantic cut size
    int context_turns = 4;  // dialogue turns shown for ContextPlusQuery
    int step_limit = 5;     // filters allowed per chain
};

// "cotable+rewrite" etc.; stamped on every trace record.
std::string mode_label(const RetrievalMode& mode);

struct RetrievalResult {
    std::vector<int> retrieved;  // response indices, ascending
    QueryClassification classification;
    bool classified = false;
    std::string query_used;  // text handed to classifiers, chain writer, embedder
    std::string rewrite;     // non-empty when a rewrite ran
    Chain chain;
    std::vector<std::string> warnings;
    bool degraded = false;  // a model step failed; plain semantic fallback answered
    std::string error;      // what failed when degraded
};

class Retriever {
public:
    // All three are borrowed and must outlive the retriever. Embedding
    // indices are built lazily, one per representation, and cached.
    Retriever(const ConversationSet& log, LlmInterface& llm, Embedder& embedder);

    RetrievalResult retrieve(const std::string& query, const std::vector<std::string>& context,
                             const NowContext& now, const RetrievalMode& mode);
    RetrievalResult retrieve(const Question& question, const RetrievalMode& mode);

    const ConversationSet& log() const { return *log_; }

private:
    std::string build_query_input(const std::string& query,
                                  const std::vector<std::string>& context,
                                  const RetrievalMode& mode, RetrievalResult& res);
    Chain write_chain(const std::vector<Column>& schema, const std::string& query,
                      const NowContext& now, int step_limit, std::vector<std::string>& warnings);
    std::vector<int> semantic_cut(bool imbued, const std::string& text,
                                  const std::vector<int>& candidates, int k);
    VectorIndex& index_for(bool imbued);

    const ConversationSet* log_;
    LlmInterface* llm_;
    Embedder* embedder_;
    ChatTable base_;
    std::optional<VectorIndex> plain_;
    std::optional<VectorIndex> imbued_;
    std::mutex embed_mutex_;  // guards lazy index builds and query embeds
};

// One benchmark answer, self-contained enough to score offline.
struct TraceRecord {
    std::string question_id;
    std::string test_name;
    std::string mode;
    std::string query;       // the question's final turn
    std::string query_used;  // what the pipeline actually searched with
    std::string rewrite;
    bool classified = false;
    bool meta = false;
    bool semantic = false;
    std::string chain;  // rendered filter chain, empty when none was written
    std::vector<int> retrieved;
    std::vector<int> relevant;
    std::vector<std::string> warnings;
    bool degraded = false;
    std::string error;
    double elapsed_ms = 0.0;
};

struct BenchOptions {
    RetrievalMode mode;
    std::string trace_path;  // empty: keep traces in memory only
    bool resume = true;      // reuse matching records already in trace_path
    int parallelism = 1;
};

struct BenchRun {
    std::vector<TraceRecord> traces;  // question order
    int reused = 0;                   // records taken from an earlier run
};

BenchRun run_bench(Retriever& retriever, const QuestionSet& questions, const BenchOptions& opts);

std::vector<TraceRecord> read_trace_file(const std::string& path);
void write_trace_file(const std::vector<TraceRecord>& traces, const std::string& path);

}  // namespace chatmem
