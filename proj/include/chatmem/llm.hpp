/*
 * chatmem - language-model call layer: the completion backend contract, a
 * remote chat-completion client, and the typed calls built on top of it
 * (the two query classifiers, the three-step function-chain writer, and
 * the query rewriter).
 */
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "chatmem/prompts.hpp"
#include "chatmem/table_engine.hpp"

namespace chatmem {

class BackendError : public std::runtime_error {
public:
    explicit BackendError(std::string message, int retries = 0)
        : std::runtime_error(std::move(message)), retries(retries) {}

    int retries;
};

class ClassifyError : public std::runtime_error {
public:
    explicit ClassifyError(std::string message, std::string raw = "")
        : std::runtime_error(std::move(message)), raw_text(std::move(raw)) {}

    std::string raw_text;
};

class StepError : public std::runtime_error {
public:
    StepError(std::string message, std::string stage, std::string raw)
        : std::runtime_error(std::move(message)), stage(std::move(stage)), raw_text(std::move(raw)) {}

    std::string stage;  // "name", "arg1", "arg2"
    std::string raw_text;
};

// Completion backends are deterministic for a fixed prompt (greedy /
// temperature-zero contract) and safe for concurrent calls.
class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string complete(const std::string& prompt, int max_tokens) = 0;
};

// OpenAI-style chat-completions client: POST {endpoint}/chat/completions,
// temperature 0.
struct RemoteChatConfig {
    std::string endpoint;
    std::string model;
    std::string api_key;  // optional
    int max_retries = 1;  // retries after the first attempt
    int timeout_seconds = 120;

    // CHATMEM_LLM_ENDPOINT / CHATMEM_LLM_MODEL / CHATMEM_LLM_API_KEY
    static RemoteChatConfig from_env();
    bool configured() const { return !endpoint.empty(); }
};

class RemoteChatBackend : public LlmBackend {
public:
    explicit RemoteChatBackend(RemoteChatConfig config);
    std::string complete(const std::string& prompt, int max_tokens) override;

private:
    RemoteChatConfig config_;
};

struct QueryClassification {
    bool needs_meta = false;
    bool needs_semantic = true;

    bool operator==(const QueryClassification&) const = default;
};

// Typed calls over a backend + prompt library. Each malformed emission gets
// one retry before the structured error surfaces.
class LlmInterface {
public:
    LlmInterface(LlmBackend& backend, const PromptLibrary& prompts)
        : backend_(&backend), prompts_(&prompts) {}

    bool classify_meta(const std::string& query);
    bool classify_semantic(const std::string& query);
    // Both classifiers; a double-no is coerced to semantic-only so retrieval
    // always has a route.
    QueryClassification classify(const std::string& query);

    // One chain step: the name call, then (unless the name was <END>) the
    // two argument calls for that function. Parsed via
    // parse_function_call; a full call emitted at the name step is accepted
    // as-is.
    FunctionCall write_function_step(const std::vector<Column>& schema, const std::string& query,
                                     const NowContext& now, const Chain& chain_so_far);

    // Self-contained reformulation of `query` given preceding turns;
    // unambiguous queries pass through per the prompt contract.
    std::string rewrite_query(const std::vector<std::string>& context_turns,
                              const std::string& query);

    // "User:"/"Assistant:" alternation ending with the user's query; the
    // [QUERY] payload for rewrite calls and the Context+Qry input mode.
    static std::string format_dialogue(const std::vector<std::string>& context_turns,
                                       const std::string& query);

private:
    bool classify_one(PromptName name, const std::string& query);

    LlmBackend* backend_;
    const PromptLibrary* prompts_;
};

}  // namespace chatmem
