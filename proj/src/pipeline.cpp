#include "chatmem/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

namespace chatmem {

namespace {

using nlohmann::json;

json trace_to_json(const TraceRecord& t) {
    return json{
        {"id", t.question_id},   {"test", t.test_name},   {"mode", t.mode},
        {"query", t.query},      {"query_used", t.query_used},
        {"rewrite", t.rewrite},  {"classified", t.classified},
        {"meta", t.meta},        {"semantic", t.semantic},
        {"chain", t.chain},      {"retrieved", t.retrieved},
        {"relevant", t.relevant},{"warnings", t.warnings},
        {"degraded", t.degraded},{"error", t.error},
        {"elapsed_ms", t.elapsed_ms},
    };
}

TraceRecord trace_from_json(const json& j) {
    TraceRecord t;
    t.question_id = j.at("id").get<std::string>();
    t.test_name = j.value("test", "");
    t.mode = j.value("mode", "");
    t.query = j.value("query", "");
    t.query_used = j.value("query_used", "");
    t.rewrite = j.value("rewrite", "");
    t.classified = j.value("classified", false);
    t.meta = j.value("meta", false);
    t.semantic = j.value("semantic", false);
    t.chain = j.value("chain", "");
    if (j.contains("retrieved")) t.retrieved = j["retrieved"].get<std::vector<int>>();
    if (j.contains("relevant")) t.relevant = j["relevant"].get<std::vector<int>>();
    if (j.contains("warnings")) t.warnings = j["warnings"].get<std::vector<std::string>>();
    t.degraded = j.value("degraded", false);
    t.error = j.value("error", "");
    t.elapsed_ms = j.value("elapsed_ms", 0.0);
    return t;
}

}  // namespace

std::string retriever_kind_name(RetrieverKind kind) {
    switch (kind) {
        case RetrieverKind::CoTableSemantic: return "cotable";
        case RetrieverKind::CoTableNoClassifier: return "cotable_nc";
        case RetrieverKind::SemanticOnly: return "semantic";
        case RetrieverKind::SemanticMetaImbued: return "semantic_imbued";
    }
    return "cotable";
}

std::string query_input_name(QueryInput input) {
    switch (input) {
        case QueryInput::OriginalQuery: return "original";
        case QueryInput::ContextPlusQuery: return "context";
        case QueryInput::QueryRewrite: return "rewrite";
    }
    return "original";
}

std::optional<RetrieverKind> parse_retriever_kind(std::string_view text) {
    if (text == "cotable") return RetrieverKind::CoTableSemantic;
    if (text == "cotable_nc") return RetrieverKind::CoTableNoClassifier;
    if (text == "semantic") return RetrieverKind::SemanticOnly;
    if (text == "semantic_imbued") return RetrieverKind::SemanticMetaImbued;
    return std::nullopt;
}

std::optional<QueryInput> parse_query_input(std::string_view text) {
    if (text == "original") return QueryInput::OriginalQuery;
    if (text == "context") return QueryInput::ContextPlusQuery;
    if (text == "rewrite") return QueryInput::QueryRewrite;
    return std::nullopt;
}

std::string mode_label(const RetrievalMode& mode) {
    return retriever_kind_name(mode.kind) + "+" + query_input_name(mode.input);
}

Retriever::Retriever(const ConversationSet& log, LlmInterface& llm, Embedder& embedder)
    : log_(&log), llm_(&llm), embedder_(&embedder), base_(ChatTable::over(log)) {}

VectorIndex& Retriever::index_for(bool imbued) {
    std::optional<VectorIndex>& slot = imbued ? imbued_ : plain_;
    if (!slot) slot = build_response_index(*log_, *embedder_, imbued);
    return *slot;
}

std::vector<int> Retriever::semantic_cut(bool imbued, const std::string& text,
                                         const std::vector<int>& candidates, int k) {
    if (candidates.empty() || k < 1) return {};
    std::lock_guard<std::mutex> lock(embed_mutex_);
    VectorIndex& index = index_for(imbued);
    Eigen::VectorXf query_vec = embedder_->embed(text);
    auto scored = index.top_k(query_vec, candidates, std::min<int>(k, candidates.size()));
    std::vector<int> ids;
    ids.reserve(scored.size());
    for (const Scored& s : scored) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::string Retriever::build_query_input(const std::string& query,
                                         const std::vector<std::string>& context,
                                         const RetrievalMode& mode, RetrievalResult& res) {
    switch (mode.input) {
        case QueryInput::OriginalQuery:
            return query;
        case QueryInput::ContextPlusQuery: {
            std::vector<std::string> window = context;
            if (static_cast<int>(window.size()) > mode.context_turns)
                window.erase(window.begin(),
                             window.end() - static_cast<ptrdiff_t>(mode.context_turns));
            return LlmInterface::format_dialogue(window, query);
        }
        case QueryInput::QueryRewrite:
            res.rewrite = llm_->rewrite_query(context, query);
            return res.rewrite;
    }
    return query;
}

Chain Retriever::write_chain(const std::vector<Column>& schema, const std::string& query,
                             const NowContext& now, int step_limit,
                             std::vector<std::string>& warnings) {
    Chain chain;
    const int ask_limit = step_limit + 3;  // headroom for dropped duplicates
    int asks = 0;
    while (!chain.complete()) {
        if (chain.filter_count() >= step_limit || asks >= ask_limit) {
            chain.calls.push_back(FunctionCall::end());
            warnings.push_back("chain forced closed at the step limit");
            break;
        }
        ++asks;
        chain.calls.push_back(llm_->write_function_step(schema, query, now, chain));
    }
    return chain;
}

RetrievalResult Retriever::retrieve(const std::string& query,
                                    const std::vector<std::string>& context,
                                    const NowContext& now, const RetrievalMode& mode) {
    RetrievalResult res;
    try {
        res.query_used = build_query_input(query, context, mode, res);

        switch (mode.kind) {
            case RetrieverKind::SemanticOnly:
                res.retrieved = semantic_cut(false, res.query_used, base_.row_ids(), mode.k);
                break;

            case RetrieverKind::SemanticMetaImbued:
                res.retrieved = semantic_cut(true, res.query_used, base_.row_ids(), mode.k);
                break;

            case RetrieverKind::CoTableSemantic: {
                res.classification = llm_->classify(res.query_used);
                res.classified = true;
                ChatTable table = base_;
                if (res.classification.needs_meta) {
                    res.chain = write_chain(table_columns(), res.query_used, now, mode.step_limit,
                                            res.warnings);
                    ApplyOptions apply_opts;
                    apply_opts.max_filters = mode.step_limit;
                    ApplyOutcome outcome = apply_chain(table, res.chain, apply_opts);
                    table = outcome.table;
                    for (auto& w : outcome.warnings) res.warnings.push_back(std::move(w));
                }
                if (res.classification.needs_semantic)
                    res.retrieved = semantic_cut(false, res.query_used, table.row_ids(), mode.k);
                else
                    res.retrieved = table.row_ids();  // meta-only answers keep every survivor
                break;
            }

            case RetrieverKind::CoTableNoClassifier: {
                res.chain = write_chain(table_columns_with_content(), res.query_used, now,
                                        mode.step_limit, res.warnings);
                ApplyOptions opts;
                opts.max_filters = mode.step_limit;
                opts.content_search = [&](const std::vector<int>& candidates,
                                          const std::vector<CellValue>& args) {
                    std::string phrase;
                    for (const CellValue& v : args) {
                        if (!phrase.empty()) phrase += ", ";
                        phrase += render_cell(v);
                    }
                    return semantic_cut(false, phrase, candidates, mode.k);
                };
                ApplyOutcome outcome = apply_chain(base_, res.chain, opts);
                res.retrieved = outcome.table.row_ids();
                for (auto& w : outcome.warnings) res.warnings.push_back(std::move(w));
                break;
            }
        }
    } catch (const BackendError& e) {
        res.degraded = true;
        res.error = e.what();
    } catch (const ClassifyError& e) {
        res.degraded = true;
        res.error = e.what();
    } catch (const StepError& e) {
        res.degraded = true;
        res.error = "step " + e.stage + ": " + e.what();
    } catch (const ChainError& e) {
        res.degraded = true;
        res.error = e.what();
    } catch (const FunctionParseError& e) {
        res.degraded = true;
        res.error = e.what();
    }

    if (res.degraded) {
        if (res.query_used.empty()) res.query_used = query;
        res.retrieved = semantic_cut(false, res.query_used, base_.row_ids(), mode.k);
    }
    std::sort(res.retrieved.begin(), res.retrieved.end());
    return res;
}

RetrievalResult Retriever::retrieve(const Question& question, const RetrievalMode& mode) {
    return retrieve(question.query, question.context_turns, question.now, mode);
}

BenchRun run_bench(Retriever& retriever, const QuestionSet& questions, const BenchOptions& opts) {
    const std::string label = mode_label(opts.mode);

    std::unordered_map<std::string, TraceRecord> previous;
    if (opts.resume && !opts.trace_path.empty()) {
        std::ifstream probe(opts.trace_path);
        if (probe.good())
            for (TraceRecord& t : read_trace_file(opts.trace_path))
                if (t.mode == label) previous[t.question_id] = std::move(t);
    }

    std::ofstream out;
    if (!opts.trace_path.empty()) {
        out.open(opts.trace_path, previous.empty() ? std::ios::trunc : std::ios::app);
        if (!out) throw std::runtime_error("cannot open " + opts.trace_path + " for writing");
    }

    BenchRun run;
    run.traces.resize(questions.questions.size());
    std::vector<size_t> todo;
    for (size_t i = 0; i < questions.questions.size(); ++i) {
        const Question& q = questions.questions[i];
        auto hit = previous.find(q.id);
        if (hit != previous.end()) {
            run.traces[i] = hit->second;
            ++run.reused;
        } else {
            todo.push_back(i);
        }
    }

    std::mutex sink;
    std::atomic<size_t> cursor{0};
    auto worker = [&] {
        while (true) {
            size_t slot = cursor.fetch_add(1);
            if (slot >= todo.size()) break;
            size_t i = todo[slot];
            const Question& q = questions.questions[i];

            auto begin = std::chrono::steady_clock::now();
            RetrievalResult res;
            try {
                res = retriever.retrieve(q, opts.mode);
            } catch (const std::exception& e) {  // keep one bad question from killing the run
                res.degraded = true;
                res.error = e.what();
                res.retrieved.clear();
            }
            auto end = std::chrono::steady_clock::now();

            TraceRecord t;
            t.question_id = q.id;
            t.test_name = q.test_name;
            t.mode = label;
            t.query = q.query;
            t.query_used = res.query_used;
            t.rewrite = res.rewrite;
            t.classified = res.classified;
            t.meta = res.classification.needs_meta;
            t.semantic = res.classification.needs_semantic;
            t.chain = res.chain.calls.empty() ? "" : res.chain.render();
            t.retrieved = res.retrieved;
            t.relevant = q.relevant_indices;
            t.warnings = res.warnings;
            t.degraded = res.degraded;
            t.error = res.error;
            t.elapsed_ms = std::chrono::duration<double, std::milli>(end - begin).count();

            std::lock_guard<std::mutex> lock(sink);
            if (out.is_open()) out << trace_to_json(t).dump() << "\n" << std::flush;
            run.traces[i] = std::move(t);
        }
    };

    int threads = std::max(1, opts.parallelism);
    if (threads == 1 || todo.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return run;
}

std::vector<TraceRecord> read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<TraceRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(trace_from_json(json::parse(line)));
    }
    return out;
}

void write_trace_file(const std::vector<TraceRecord>& traces, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const TraceRecord& t : traces) out << trace_to_json(t).dump() << "\n";
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace chatmem
