#include "chatmem/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace chatmem {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string env_or(const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string(fallback);
}

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    size_t scheme = endpoint.find("://");
    size_t path_start = (scheme == std::string::npos) ? endpoint.find('/')
                                                      : endpoint.find('/', scheme + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string path = endpoint.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {endpoint.substr(0, path_start), path};
}

std::string first_line(std::string_view s) {
    s = trim(s);
    size_t nl = s.find('\n');
    if (nl != std::string_view::npos) s = trim(s.substr(0, nl));
    return std::string(s);
}

bool is_end_emission(std::string_view s) {
    std::string low;
    for (char c : trim(s)) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return low.rfind("<end>", 0) == 0 || low == "end" || low.rfind("end.", 0) == 0;
}

}  // namespace

RemoteChatConfig RemoteChatConfig::from_env() {
    RemoteChatConfig c;
    c.endpoint = env_or("CHATMEM_LLM_ENDPOINT", "");
    c.model = env_or("CHATMEM_LLM_MODEL", "");
    c.api_key = env_or("CHATMEM_LLM_API_KEY", "");
    return c;
}

RemoteChatBackend::RemoteChatBackend(RemoteChatConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw BackendError("chat endpoint not configured");
}

std::string RemoteChatBackend::complete(const std::string& prompt, int max_tokens) {
    auto [base, prefix] = split_endpoint(config_.endpoint);
    nlohmann::json body = {
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", 0},
        {"max_tokens", max_tokens},
    };
    std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        httplib::Client client(base);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);

        auto res = client.Post(prefix + "/chat/completions", headers, payload, "application/json");
        if (!res) {
            last_error = "no response from " + base;
            continue;
        }
        if (res->status != 200) {
            last_error = "chat service returned status " + std::to_string(res->status);
            continue;
        }
        try {
            nlohmann::json parsed = nlohmann::json::parse(res->body);
            return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("malformed chat response: ") + e.what();
        }
    }
    throw BackendError("chat request failed: " + last_error, config_.max_retries);
}

bool LlmInterface::classify_one(PromptName name, const std::string& query) {
    if (trim(query).empty()) throw ClassifyError("cannot classify an empty query");
    PromptArgs args;
    args.query = query;
    std::string prompt = prompts_->render(name, args);

    std::string raw;
    for (int attempt = 0; attempt < 2; ++attempt) {
        raw = backend_->complete(prompt, 4);
        std::string_view t = trim(raw);
        if (!t.empty()) {
            char c = static_cast<char>(std::tolower(static_cast<unsigned char>(t.front())));
            if (c == 'y') return true;
            if (c == 'n') return false;
        }
    }
    throw ClassifyError("classifier emitted neither 'y' nor 'n'", raw);
}

bool LlmInterface::classify_meta(const std::string& query) {
    return classify_one(PromptName::MetaClassify, query);
}

bool LlmInterface::classify_semantic(const std::string& query) {
    return classify_one(PromptName::SemanticClassify, query);
}

QueryClassification LlmInterface::classify(const std::string& query) {
    QueryClassification out;
    out.needs_meta = classify_meta(query);
    out.needs_semantic = classify_semantic(query);
    if (!out.needs_meta && !out.needs_semantic) out.needs_semantic = true;
    return out;
}

FunctionCall LlmInterface::write_function_step(const std::vector<Column>& schema,
                                               const std::string& query, const NowContext& now,
                                               const Chain& chain_so_far) {
    bool allow_content =
        std::find(schema.begin(), schema.end(), Column::Content) != schema.end();

    PromptArgs args;
    args.query = query;
    args.now = now;
    args.chain_so_far = chain_so_far.render();
    args.schema = schema;

    // Step 1: function name.
    FuncName fname = FuncName::End;
    std::string name_raw;
    bool have_name = false;
    for (int attempt = 0; attempt < 2 && !have_name; ++attempt) {
        name_raw = backend_->complete(prompts_->render(PromptName::FunctionWrite, args), 48);
        std::string_view t = trim(name_raw);
        if (is_end_emission(t)) return FunctionCall::end();
        try {
            // Some backends emit the whole call at once; take it.
            FunctionCall full = parse_function_call(t, allow_content);
            return full;
        } catch (const FunctionParseError&) {
        }
        std::string low;
        for (char c : t) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (low.find("f_between") != std::string::npos) {
            fname = FuncName::Between;
            have_name = true;
        } else if (low.find("f_value") != std::string::npos) {
            fname = FuncName::Value;
            have_name = true;
        }
    }
    if (!have_name)
        throw StepError("function-name emission is not f_value, f_between, or <END>", "name",
                        name_raw);

    // Step 2: first argument (column name).
    PromptName arg1_prompt =
        (fname == FuncName::Value) ? PromptName::Arg1Value : PromptName::Arg1Between;
    std::optional<Column> column;
    std::string arg1_raw;
    for (int attempt = 0; attempt < 2 && !column; ++attempt) {
        arg1_raw = backend_->complete(prompts_->render(arg1_prompt, args), 8);
        column = parse_column(first_line(arg1_raw), allow_content);
    }
    if (!column) throw StepError("column emission is not a table column", "arg1", arg1_raw);

    // Step 3: remaining argument (values), assembled into a full call.
    PromptName arg2_prompt =
        (fname == FuncName::Value) ? PromptName::Arg2Value : PromptName::Arg2Between;
    PromptArgs arg2_args = args;
    std::string partial = (fname == FuncName::Value) ? "f_value(" : "f_between(";
    partial += column_name(*column);
    arg2_args.chain_so_far =
        chain_so_far.calls.empty() ? partial : chain_so_far.render() + " -> " + partial;

    std::string arg2_raw;
    for (int attempt = 0; attempt < 2; ++attempt) {
        arg2_raw = backend_->complete(prompts_->render(arg2_prompt, arg2_args), 96);
        std::string full = partial + ", " + std::string(trim(arg2_raw));
        if (std::count(full.begin(), full.end(), '(') > std::count(full.begin(), full.end(), ')'))
            full += ")";
        try {
            return parse_function_call(full, allow_content);
        } catch (const FunctionParseError&) {
        }
    }
    throw StepError("value emission does not complete a parseable call", "arg2", arg2_raw);
}

std::string LlmInterface::rewrite_query(const std::vector<std::string>& context_turns,
                                        const std::string& query) {
    PromptArgs args;
    args.query = format_dialogue(context_turns, query);
    std::string raw = backend_->complete(prompts_->render(PromptName::QueryRewrite, args), 128);
    std::string rewrite = first_line(raw);
    return rewrite.empty() ? query : rewrite;
}

std::string LlmInterface::format_dialogue(const std::vector<std::string>& context_turns,
                                          const std::string& query) {
    if (context_turns.empty()) return query;
    std::string out;
    size_t n = context_turns.size();
    for (size_t i = 0; i < n; ++i) {
        // The query is always the user's; parity walks backwards from it.
        bool user = ((n - i) % 2) == 0;
        out += (user ? "User: " : "Assistant: ");
        out += context_turns[i];
        out += "\n";
    }
    out += "User: " + query;
    return out;
}

}  // namespace chatmem
