/*
 * chatmem - prompt templates for the classifiers, the three chain-writing
 * calls, and the query rewriter.
 *
 * Templates live as plain-text assets (one .txt per prompt) with bracketed slot
 * markers; example blocks are separate editable files so few-shot content
 * can change without touching code. A compiled-in copy of the shipped
 * assets backs PromptLibrary::builtin().
 */
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chatmem/table_engine.hpp"

namespace chatmem {

enum class PromptName {
    MetaClassify,
    SemanticClassify,
    FunctionWrite,
    Arg1Value,
    Arg1Between,
    Arg2Value,
    Arg2Between,
    QueryRewrite,
};

const std::vector<PromptName>& all_prompt_names();
std::string prompt_name_str(PromptName name);  // asset file stem, e.g. "meta_classify"

class PromptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The clock a query is asked at; rendered into the chain prompts as
// "Current Date:... Current Time:... Current Session:...".
struct NowContext {
    Date date;
    TimeOfDay time;
    int session = 1;  // 1-based session number of "now"

    bool operator==(const NowContext&) const = default;
};

struct PromptArgs {
    std::string query;
    std::optional<NowContext> now;  // required by prompts that mention the clock
    std::string chain_so_far;       // surface-form chain text, may be empty
    std::vector<Column> schema = table_columns();
};

class PromptLibrary {
public:
    static const PromptLibrary& builtin();
    // Reads <dir>/<stem>.txt plus <dir>/examples/<stem>.<i>.txt blocks.
    static PromptLibrary load(const std::string& dir);

    const std::string& template_text(PromptName name) const;
    const std::vector<std::string>& example_blocks(PromptName name) const;

    // Fills every slot, truncates at the generation marker, and throws
    // PromptError if any slot would remain unfilled.
    std::string render(PromptName name, const PromptArgs& args) const;

private:
    struct Entry {
        std::string body;
        std::vector<std::string> examples;
    };
    std::map<PromptName, Entry> entries_;
};

}  // namespace chatmem
