/*
 * chatmem - command-line entry point.
 *
 * Subcommands: ingest (dialogue files -> canonical conversation sets),
 * generate (conversation sets -> question files), bench (questions ->
 * traces + report), query (ad-hoc retrieval against one set), report
 * (re-score existing trace files).
 *
 * Exit codes: 0 success, 1 usage, 2 data validation, 3 backend failure
 * budget exceeded. Endpoints and keys come from the environment
 * (CHATMEM_LLM_* / CHATMEM_EMBED_*); everything else is a flag.
 */
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chatmem/chatlog.hpp"
#include "chatmem/eval.hpp"
#include "chatmem/llm.hpp"
#include "chatmem/oracle.hpp"
#include "chatmem/pipeline.hpp"
#include "chatmem/question_gen.hpp"
#include "chatmem/vector_store.hpp"

namespace fs = std::filesystem;
using namespace chatmem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBudget = 3;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Files straight through; directories expanded to files with the suffix.
std::vector<fs::path> collect_files(const std::vector<std::string>& inputs,
                                    const std::string& suffix) {
    std::vector<fs::path> out;
    for (const std::string& raw : inputs) {
        fs::path p(raw);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (!entry.is_regular_file()) continue;
                std::string name = entry.path().filename().string();
                if (name.size() >= suffix.size() &&
                    name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
                    found.push_back(entry.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::exists(p)) {
            out.push_back(p);
        } else {
            throw std::runtime_error("no such file or directory: " + raw);
        }
    }
    if (out.empty()) throw std::runtime_error("no input files found");
    return out;
}

// --- shared flag bundles ----------------------------------------------------

struct ModeFlags {
    std::string kind = "cotable";
    std::string input = "original";
    int k = 10;
    int context_turns = 4;
    int step_limit = 5;

    void attach(CLI::App* cmd) {
        cmd->add_option("--kind", kind,
                        "retriever: cotable | cotable_nc | semantic | semantic_imbued")
            ->capture_default_str();
        cmd->add_option("--query-input", input, "query input: original | context | rewrite")
            ->capture_default_str();
        cmd->add_option("--k", k, "semantic cut size")->capture_default_str();
        cmd->add_option("--context-turns", context_turns,
                        "dialogue turns shown in context mode")
            ->capture_default_str();
        cmd->add_option("--step-limit", step_limit, "filters allowed per chain")
            ->capture_default_str();
    }

    RetrievalMode mode() const {
        auto parsed_kind = parse_retriever_kind(kind);
        if (!parsed_kind) throw UsageError("unknown retriever kind: " + kind);
        auto parsed_input = parse_query_input(input);
        if (!parsed_input) throw UsageError("unknown query input: " + input);
        RetrievalMode m;
        m.kind = *parsed_kind;
        m.input = *parsed_input;
        m.k = k;
        m.context_turns = context_turns;
        m.step_limit = step_limit;
        return m;
    }
};

struct BackendFlags {
    std::string backend = "oracle";
    std::string embedder = "hashed";
    int dim = 256;
    std::string prompt_dir;

    void attach(CLI::App* cmd) {
        cmd->add_option("--backend", backend, "chat backend: oracle | remote")
            ->capture_default_str();
        cmd->add_option("--embedder", embedder, "embedder: hashed | remote")
            ->capture_default_str();
        cmd->add_option("--dim", dim, "hashed embedder dimension")->capture_default_str();
        cmd->add_option("--prompts", prompt_dir, "prompt template directory (default: built in)");
    }

    std::unique_ptr<LlmBackend> make_backend() const {
        if (backend == "oracle") return std::make_unique<ScriptedOracle>();
        if (backend == "remote") {
            RemoteChatConfig config = RemoteChatConfig::from_env();
            if (!config.configured())
                throw UsageError("--backend remote needs CHATMEM_LLM_ENDPOINT in the environment");
            return std::make_unique<RemoteChatBackend>(std::move(config));
        }
        throw UsageError("unknown backend: " + backend);
    }

    std::unique_ptr<Embedder> make_embedder() const {
        if (embedder == "hashed") return std::make_unique<HashedBowEmbedder>(dim);
        if (embedder == "remote") {
            RemoteEmbedderConfig config = RemoteEmbedderConfig::from_env();
            if (!config.configured())
                throw UsageError(
                    "--embedder remote needs CHATMEM_EMBED_ENDPOINT in the environment");
            return std::make_unique<RemoteEmbedder>(std::move(config));
        }
        throw UsageError("unknown embedder: " + embedder);
    }

    PromptLibrary make_prompts() const {
        return prompt_dir.empty() ? PromptLibrary::builtin() : PromptLibrary::load(prompt_dir);
    }
};

// --- ingest ------------------------------------------------------------------

struct IngestArgs {
    std::vector<std::string> inputs;
    std::string out_dir;
    double speech_rate = kDefaultSpeechRateWpm;
    int gap_minutes = kDefaultSessionGapMinutes;
    int padding_tokens = kDefaultPaddingTokens;
    bool no_padding = false;
};

void add_default_padding(ConversationSet& set, int target_tokens, double speech_rate) {
    const Response& last = set.responses.back();
    std::string speaker_a = set.responses.front().speaker;
    std::string speaker_b = speaker_a;
    for (const Response& r : set.responses)
        if (r.speaker != speaker_a) {
            speaker_b = r.speaker;
            break;
        }
    DateTime start = last.datetime().plus_minutes(kDefaultSessionGapMinutes + 1);
    RawSession padding = make_padding_session(start, speaker_a, speaker_b, target_tokens);
    append_padding_session(set, padding, speech_rate);  // records its own note
}

int cmd_ingest(const IngestArgs& args) {
    fs::create_directories(args.out_dir);
    int written = 0;
    for (const fs::path& file : collect_files(args.inputs, ".json")) {
        std::vector<RawDialogue> dialogues;
        try {
            dialogues = read_dialogue_file(file);
        } catch (const std::exception& e) {
            std::cerr << file.string() << ": " << e.what() << "\n";
            return kExitData;
        }
        for (const RawDialogue& doc : dialogues) {
            ConversationSet set = ingest_dialogue(doc, args.speech_rate);
            if (args.gap_minutes != kDefaultSessionGapMinutes) {
                std::vector<int> sessions = infer_sessions(set.responses, args.gap_minutes);
                for (size_t i = 0; i < sessions.size(); ++i)
                    set.responses[i].session_index = sessions[i];
            }
            int real_sessions = set.session_count();
            long tokens = 0;
            for (const Response& r : set.responses) tokens += count_tokens(r.text);
            if (!args.no_padding) add_default_padding(set, args.padding_tokens, args.speech_rate);

            fs::path out = fs::path(args.out_dir) / (set.id + ".set.json");
            write_conversation_set(set, out);
            ++written;
            std::printf("%s: %d sessions%s, %d responses, %ld tokens -> %s\n", set.id.c_str(),
                        real_sessions, args.no_padding ? "" : " (+1 padding)",
                        set.padding_start_index, tokens, out.string().c_str());
            for (const std::string& note : set.notes) std::printf("  %s\n", note.c_str());
        }
    }
    std::printf("wrote %d conversation set%s\n", written, written == 1 ? "" : "s");
    return kExitOk;
}

// --- generate ----------------------------------------------------------------

struct GenerateArgs {
    std::vector<std::string> sets;
    std::string out_dir;
    uint64_t seed = GenOptions{}.seed;
    int date_span_cap = GenOptions{}.date_span_cap;
    int session_span_width = GenOptions{}.session_span_width;
    bool ambiguous = false;
};

int cmd_generate(const GenerateArgs& args) {
    fs::create_directories(args.out_dir);
    GenOptions opts;
    opts.seed = args.seed;
    opts.date_span_cap = args.date_span_cap;
    opts.session_span_width = args.session_span_width;

    long total = 0, total_ambiguous = 0;
    for (const fs::path& file : collect_files(args.sets, ".set.json")) {
        ConversationSet set = read_conversation_set(file);
        QuestionSet qs = generate_time_questions(set, opts);

        auto bases = base_count_by_test(qs);
        auto expected = expected_base_counts(set, opts);
        std::printf("%s:\n", set.id.c_str());
        for (const std::string& test : time_test_names()) {
            int base = bases.count(test) ? bases[test] : 0;
            if (base != expected[test]) {
                std::cerr << set.id << ": " << test << " produced " << base
                          << " base questions, formula says " << expected[test] << "\n";
                return kExitData;
            }
            int with_variants = 0;
            for (const Question& q : qs.questions)
                if (q.test_name == test) ++with_variants;
            std::printf("  %-13s %4d base %5d total\n", test.c_str(), base, with_variants);
        }
        for (const std::string& note : qs.notes) std::printf("  note: %s\n", note.c_str());

        fs::path out = fs::path(args.out_dir) / (set.id + ".questions.jsonl");
        write_question_file(qs, out);
        total += static_cast<long>(qs.questions.size());
        std::printf("  %zu questions -> %s\n", qs.questions.size(), out.string().c_str());

        if (args.ambiguous) {
            QuestionSet amb = generate_ambiguous_questions(set, qs);
            fs::path amb_out = fs::path(args.out_dir) / (set.id + ".ambiguous.jsonl");
            write_question_file(amb, amb_out);
            total_ambiguous += static_cast<long>(amb.questions.size());
            std::printf("  %zu ambiguous questions -> %s\n", amb.questions.size(),
                        amb_out.string().c_str());
        }
    }
    std::printf("generated %ld questions", total);
    if (args.ambiguous) std::printf(" and %ld ambiguous questions", total_ambiguous);
    std::printf("\n");
    return kExitOk;
}

// --- bench -------------------------------------------------------------------

struct BenchArgs {
    std::vector<std::string> sets;
    std::vector<std::string> questions;
    std::string out_dir;
    ModeFlags mode;
    BackendFlags backend;
    int parallelism = 1;
    bool no_resume = false;
    int max_degraded = -1;
};

int cmd_bench(const BenchArgs& args) {
    fs::create_directories(args.out_dir);
    RetrievalMode mode = args.mode.mode();
    const std::string label = mode_label(mode);

    std::map<std::string, ConversationSet> sets;
    for (const fs::path& file : collect_files(args.sets, ".set.json")) {
        ConversationSet set = read_conversation_set(file);
        std::string id = set.id;
        sets.emplace(std::move(id), std::move(set));
    }

    PromptLibrary prompts = args.backend.make_prompts();
    std::unique_ptr<LlmBackend> backend = args.backend.make_backend();
    std::unique_ptr<Embedder> embedder = args.backend.make_embedder();
    LlmInterface llm(*backend, prompts);

    std::map<std::string, std::unique_ptr<Retriever>> retrievers;
    std::vector<TraceRecord> all_traces;
    int reused = 0;

    for (const fs::path& file : collect_files(args.questions, ".jsonl")) {
        QuestionSet qs = read_question_file(file);
        auto set_it = sets.find(qs.set_id);
        if (set_it == sets.end()) {
            std::cerr << file.string() << ": no conversation set with id '" << qs.set_id << "'\n";
            return kExitData;
        }

        // Externally produced speaker/topic/date files get the validating
        // loader; offenders are dropped with a report.
        if (!qs.questions.empty() && qs.questions.front().test_name == kTimeContentTest) {
            LoadedQuestions loaded = load_time_content_questions(file, set_it->second);
            for (const std::string& err : loaded.errors)
                std::cerr << file.string() << ": " << err << "\n";
            qs = std::move(loaded.set);
            qs.set_id = set_it->first;
        }

        auto retriever_it = retrievers.find(qs.set_id);
        if (retriever_it == retrievers.end())
            retriever_it = retrievers
                               .emplace(qs.set_id, std::make_unique<Retriever>(set_it->second,
                                                                               llm, *embedder))
                               .first;

        std::string stem = file.stem().string();  // "x.questions.jsonl" -> "x.questions"
        BenchOptions opts;
        opts.mode = mode;
        opts.trace_path = (fs::path(args.out_dir) / (stem + "." + label + ".trace.jsonl")).string();
        opts.resume = !args.no_resume;
        opts.parallelism = args.parallelism;

        auto begin = std::chrono::steady_clock::now();
        BenchRun run = run_bench(*retriever_it->second, qs, opts);
        auto end = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(end - begin).count();

        reused += run.reused;
        std::printf("%s: %zu questions (%d reused) in %.1f s -> %s\n", file.string().c_str(),
                    run.traces.size(), run.reused, secs, opts.trace_path.c_str());
        all_traces.insert(all_traces.end(), run.traces.begin(), run.traces.end());
    }

    Report report = build_report(all_traces);
    std::printf("\n%s", format_report(report).c_str());

    fs::path json_path = fs::path(args.out_dir) / ("report." + label + ".json");
    write_report_json({report}, json_path.string());
    fs::path tsv_path = fs::path(args.out_dir) / ("report." + label + ".tsv");
    {
        std::ofstream tsv(tsv_path);
        tsv << format_report_tsv(report);
    }
    std::printf("report -> %s, %s\n", json_path.string().c_str(), tsv_path.string().c_str());

    if (args.max_degraded >= 0 && report.degraded > args.max_degraded) {
        std::cerr << "degraded answers (" << report.degraded << ") exceed the budget ("
                  << args.max_degraded << ")\n";
        return kExitBudget;
    }
    return kExitOk;
}

// --- query -------------------------------------------------------------------

struct QueryArgs {
    std::string set_file;
    std::string text;
    ModeFlags mode;
    BackendFlags backend;
};

int cmd_query(const QueryArgs& args) {
    ConversationSet set = read_conversation_set(args.set_file);
    RetrievalMode mode = args.mode.mode();

    PromptLibrary prompts = args.backend.make_prompts();
    std::unique_ptr<LlmBackend> backend = args.backend.make_backend();
    std::unique_ptr<Embedder> embedder = args.backend.make_embedder();
    LlmInterface llm(*backend, prompts);
    Retriever retriever(set, llm, *embedder);

    NowContext now = advance_clock(set);
    RetrievalResult res = retriever.retrieve(args.text, {}, now, mode);

    std::printf("set %s, now %s %s (session %d), mode %s\n", set.id.c_str(),
                now.date.to_iso().c_str(), now.time.to_hhmm().c_str(), now.session,
                mode_label(mode).c_str());
    if (res.classified)
        std::printf("classified: meta=%c semantic=%c\n",
                    res.classification.needs_meta ? 'y' : 'n',
                    res.classification.needs_semantic ? 'y' : 'n');
    if (!res.rewrite.empty()) std::printf("rewrite: %s\n", res.rewrite.c_str());
    if (!res.chain.calls.empty()) std::printf("chain: %s\n", res.chain.render().c_str());
    for (const std::string& w : res.warnings) std::printf("warning: %s\n", w.c_str());
    if (res.degraded) std::printf("degraded to semantic search: %s\n", res.error.c_str());

    if (res.retrieved.empty()) {
        std::printf("no rows retrieved\n");
        return kExitOk;
    }
    std::printf("%zu rows:\n", res.retrieved.size());
    for (int id : res.retrieved) {
        const Response& r = set.responses[static_cast<size_t>(id)];
        std::printf("[%4d] s%02d %-9s %s %s %s: %s\n", r.response_index, r.session_index,
                    r.day_name().c_str(), r.date.to_iso().c_str(), r.time.to_hhmm().c_str(),
                    r.speaker.c_str(), r.text.c_str());
    }
    return kExitOk;
}

// --- report ------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> traces;
    std::string out_dir;
};

int cmd_report(const ReportArgs& args) {
    std::vector<TraceRecord> all;
    for (const fs::path& file : collect_files(args.traces, ".jsonl")) {
        std::vector<TraceRecord> traces = read_trace_file(file);
        all.insert(all.end(), traces.begin(), traces.end());
    }
    std::vector<Report> reports = build_reports(all);
    for (const Report& r : reports) std::printf("%s\n", format_report(r).c_str());

    if (!args.out_dir.empty()) {
        fs::create_directories(args.out_dir);
        fs::path json_path = fs::path(args.out_dir) / "report.json";
        write_report_json(reports, json_path.string());
        for (const Report& r : reports) {
            std::ofstream tsv(fs::path(args.out_dir) / ("report." + r.mode + ".tsv"));
            tsv << format_report_tsv(r);
        }
        std::printf("report -> %s\n", json_path.string().c_str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chatmem: conversational long-term memory retrieval benchmark"};
    app.require_subcommand(1);

    IngestArgs ingest;
    CLI::App* ingest_cmd = app.add_subcommand("ingest", "dialogue files -> conversation sets");
    ingest_cmd->add_option("--input", ingest.inputs, "dialogue files or directories")->required();
    ingest_cmd->add_option("--out", ingest.out_dir, "output directory")->required();
    ingest_cmd->add_option("--speech-rate", ingest.speech_rate, "words per minute")
        ->capture_default_str();
    ingest_cmd->add_option("--gap-minutes", ingest.gap_minutes, "session gap threshold")
        ->capture_default_str();
    ingest_cmd->add_option("--padding-tokens", ingest.padding_tokens, "padding session size")
        ->capture_default_str();
    ingest_cmd->add_flag("--no-padding", ingest.no_padding, "skip the padding session");

    GenerateArgs generate;
    CLI::App* generate_cmd = app.add_subcommand("generate", "conversation sets -> question files");
    generate_cmd->add_option("--sets", generate.sets, "conversation-set files or directories")
        ->required();
    generate_cmd->add_option("--out", generate.out_dir, "output directory")->required();
    generate_cmd->add_option("--seed", generate.seed, "date-pair sampling seed")
        ->capture_default_str();
    generate_cmd->add_option("--date-span-cap", generate.date_span_cap, "date pairs kept per set")
        ->capture_default_str();
    generate_cmd
        ->add_option("--session-span-width", generate.session_span_width, "session span width")
        ->capture_default_str();
    generate_cmd->add_flag("--ambiguous", generate.ambiguous,
                           "also write dialogue-context variants");

    BenchArgs bench;
    CLI::App* bench_cmd = app.add_subcommand("bench", "questions -> traces and a report");
    bench_cmd->add_option("--sets", bench.sets, "conversation-set files or directories")
        ->required();
    bench_cmd->add_option("--questions", bench.questions, "question files or directories")
        ->required();
    bench_cmd->add_option("--out", bench.out_dir, "output directory")->required();
    bench.mode.attach(bench_cmd);
    bench.backend.attach(bench_cmd);
    bench_cmd->add_option("--parallelism", bench.parallelism, "worker threads")
        ->capture_default_str();
    bench_cmd->add_flag("--no-resume", bench.no_resume, "ignore existing trace files");
    bench_cmd->add_option("--max-degraded", bench.max_degraded,
                          "fail (exit 3) when more answers degrade; -1 = no budget")
        ->capture_default_str();

    QueryArgs query;
    CLI::App* query_cmd = app.add_subcommand("query", "ad-hoc retrieval against one set");
    query_cmd->add_option("--set", query.set_file, "conversation-set file")->required();
    query_cmd->add_option("text", query.text, "query text")->required();
    query.mode.attach(query_cmd);
    query.backend.attach(query_cmd);

    ReportArgs report;
    CLI::App* report_cmd = app.add_subcommand("report", "re-score existing trace files");
    report_cmd->add_option("--traces", report.traces, "trace files or directories")->required();
    report_cmd->add_option("--out", report.out_dir, "output directory (optional)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (ingest_cmd->parsed()) return cmd_ingest(ingest);
        if (generate_cmd->parsed()) return cmd_generate(generate);
        if (bench_cmd->parsed()) return cmd_bench(bench);
        if (query_cmd->parsed()) return cmd_query(query);
        if (report_cmd->parsed()) return cmd_report(report);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
