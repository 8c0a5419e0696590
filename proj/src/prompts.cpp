#include "chatmem/prompts.hpp"

#include <fstream>
#include <sstream>

namespace chatmem {

namespace {

constexpr const char* kExamplesSlot = "[EXAMPLES]";
constexpr const char* kQuerySlot = "[QUERY]";
constexpr const char* kDateSlot = "[DATE]";
constexpr const char* kTimeSlot = "[TIME]";
constexpr const char* kSessionSlot = "[SESSION NUM]";
constexpr const char* kChainSlot = "[FUNCTION CHAIN SO FAR]";
constexpr const char* kOutputSlot = "[OUTPUT]";

void replace_all(std::string& text, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
}

std::string rstrip(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PromptError("cannot read prompt asset " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

constexpr const char* kMetaClassify =
    R"PROMPT(We have a table that stores a chat log of responses between two speakers in a table format. We store 1) semantic embeddings of the responses so we can search for responses with similar content, and 2) meta-data such as  the times, dates, session number, and response number for each response. Each row stores information about one response. The columns in the table are:

/*
Response_Index | Session_Index | Speaker | Day_Name | Week | Date | Time
*/

We need to decide if the user's query is referring to the meta-data of the chat log or not. You will be presented with a query from the user. Answer whether the query is referring to the meta-data of previous dialogues, such as the time, date, session or response number of previous portions of discussions. If the query is referring to meta-data, respond 'y' for yes. If the query is not referring to meta-data, respond 'n' for no. Only output a 'n' or 'y' character and nothing else. For example,

[EXAMPLES]

Query: [QUERY]
Output: [OUTPUT]
)PROMPT";

constexpr const char* kSemanticClassify =
    R"PROMPT(We have a table that stores a chat log of responses between two speakers in a table format. We store 1) semantic embeddings of the responses so we can search for responses with similar content, and 2) meta-data such as  the times, dates, session number, and response number for each response. Each row stores information about one response. The columns in the table are:

/*
Response_Index | Session_Index | Speaker | Day_Name | Week | Date | Time
*/

We need to decide if the user's query is referring to some specific topic or content, or if the query is only referring to meta-data or non-specific content. You will be presented with a query from the user. Answer whether the query is on some specific topic or content. If the query is referring specific topic or content, respond 'y' for yes. If the query is not referring to a specific topic or content, respond 'n' for no. Only output a 'n', or 'y' character and nothing else. For example,

[EXAMPLES]

Query: [QUERY]
Output: [OUTPUT]
)PROMPT";

constexpr const char* kFunctionWrite =
    R"PROMPT(We have a table that stores a log of responses between two speakers in a table format. Information about speakers, response times, indexes, sessions, and dates are stored in the table, where each row stores information about one response. There are functions that allow us to isolate rows in the table. The columns in the table are:

/*
Response_Index | Session_Index | Speaker | Day_Name | Week | Date | Time
*/

If the table only needs rows that have a certain value in a certain column to answer the question, we use 'f_value(column_name, [row_value1, row_value2, ...])' to select these rows. For example,

[EXAMPLES]

If the table only needs rows with that have values within a certain range, to answer the question we use 'f_between(column_name, [min_value, max_value])' to select these rows. For example,

[EXAMPLES]

If do not need to call a function, write <END>.

Here are examples of using the operations to respond to the query. Be sure to end the operation chain after a few function calls with <END>. Do not repeat function calls.

[EXAMPLES]

Current Date:[DATE] Current Time:[TIME] Current Session:[SESSION NUM]
Query: [QUERY]
Function Chain: [FUNCTION CHAIN SO FAR] -> [OUTPUT]
)PROMPT";

constexpr const char* kArg1Value =
    R"PROMPT(We have a table that stores a log of responses between two speakers in a table format. Information about response speaker names, and dates are stored in the table, where each row stores information about one response. There are functions that allow us to isolate rows in the table. The columns in the table are:

/*
Response_Index | Session_Index | Speaker | Day_Name | Week | Date | Time
*/

If the table only needs rows that have a certain value in a certain column to answer the question, we use 'f_value(column_name, [row_value1, row_value2, ...])' to select these rows. For example,

[EXAMPLES]

Here are examples of chaining together multiple function calls. Each chain of function calls is ended when the model outputs <END>. For example,

[EXAMPLES]

Finish the following function chain. Do not write any extra text. Only output the first argument of the 'f_value' function.

Current Date:[DATE] Current Time:[TIME] Current Session:[SESSION NUM]
Query: [QUERY]
Function Chain: [FUNCTION CHAIN SO FAR] -> [OUTPUT]
)PROMPT";

constexpr const char* kArg1Between =
    R"PROMPT(We have a table that stores a log of responses between two speakers in a table format. Information about response speaker names, and dates are stored in the table, where each row stores information about one response. There are functions that allow us to isolate rows in the table. The columns in the table are:

/*
Response_Index | Session_Index | Speaker | Day_Name | Week | Date | Time
*/

If the table needs rows between two values in a certain column, we use 'f_between(column_name, [min_value, max_value])' to select these rows. For example,

[EXAMPLES]

Here are examples of chaining together multiple function calls. Each chain of function calls is ended when the model outputs <END>. For example,

[EXAMPLES]

Finish the following function chain. Do not write any extra text. Only output the first argument of the 'f_between' function.

Current Date:[DATE] Current Time:[TIME] Current Session:[SESSION NUM]
Query: [QUERY]
Function Chain: [FUNCTION CHAIN SO FAR] -> [OUTPUT]
)PROMPT";

constexpr const char* kArg2Value =
    R"PROMPT(We have a table that stores a log of responses between two speakers in a table format. Information about response speaker names, and dates are stored in the table, where each row stores information about one response. There are functions that allow us to isolate rows in the table. The columns in the table are:

/*
Response_Index | Session_Index | Speaker | Day_Name | Week | Date | Time
*/

We are in the process of isolating the rows relevant to the query through a series of function calls. Our next step is to decide which rows to isolate using the f_value function. The f_value function returns all rows that have a value equal to at least one of the given values, i.e., f_value(column_name, [value_1, value_2,...]). Here are examples of how to fill in the values for the second argument:

[EXAMPLES]

Fill in the remaining argument of the f_value function. Do not explain your answer, just provide the missing values.

Current Date:[DATE] Current Time:[TIME] Current Session:[SESSION NUM]
Query: [QUERY]
Function Chain: [FUNCTION CHAIN SO FAR]
Answer: [OUTPUT]
)PROMPT";

constexpr const char* kArg2Between =
    R"PROMPT(We have a table that stores a log of responses between two speakers in a table format. Information about response speaker names, and dates are stored in the table, where each row stores information about one response. There are functions that allow us to isolate rows in the table. The columns in the table are:

/*
Response_Index | Session_Index | Speaker | Day_Name | Week | Date | Time
*/

We are in the process of isolating the rows relevant to the query through a series of function calls. Our next step is to decide which rows to isolate using the f_between function. The f_between function returns all rows that have a value between a given minimum and maximum value for a given column, i.e., f_between(column_name, [min_value, max_value]). Here are examples of how to fill in the values for the second argument:

[EXAMPLES]

Fill in the remaining argument of the f_between function. Do not explain your answer, just provide the missing values.

Current Date:[DATE] Current Time:[TIME] Current Session:[SESSION NUM]
Query: [QUERY]
Function Chain: [FUNCTION CHAIN SO FAR]
Answer: [OUTPUT]
)PROMPT";

constexpr const char* kQueryRewrite =
    R"PROMPT(Please help reformulate the question into a rewrite that can fully express the user's information needs without the need of context and while removing irrelevant sentences. Here are several example dialogues, where each turn contains a portion of dialogue and a rewrite.

[EXAMPLES]

If the query is not ambiguous or if there are no preceding sentences, just repeat the question. For example,

[EXAMPLES]

Query: [QUERY]
Rewrite: [OUTPUT]
)PROMPT";

constexpr const char* kMetaClassifyEx1 =
    R"PROMPT(Query: What did we talk about last Tuesday?
Output: y

Query: What did you say about your favorite movies?
Output: n

Query: Can you summarize what we discussed in session 3?
Output: y

Query: What video game did Jolene mention playing on January 27, 2023?
Output: y

Query: Do you remember my opinion on hiking?
Output: n
)PROMPT";

constexpr const char* kSemanticClassifyEx1 =
    R"PROMPT(Query: What did we talk about last Tuesday?
Output: n

Query: What did you say about your favorite movies?
Output: y

Query: Can you summarize what we discussed in session 3?
Output: n

Query: What video game did Jolene mention playing on January 27, 2023?
Output: y

Query: What were you up to over the last week?
Output: n
)PROMPT";

constexpr const char* kFunctionWriteEx1 =
    R"PROMPT(Query: what did we discuss in session 5?
Function Chain: f_value(Session_Index, [5])

Query: what did we talk about on January 14, 2023?
Function Chain: f_value(Date, [January 14, 2023])

Query: what did Sam say on Monday and Tuesday?
Function Chain: f_value(Speaker, [Sam]) -> f_value(Day_Name, [Monday, Tuesday])
)PROMPT";

constexpr const char* kFunctionWriteEx2 =
    R"PROMPT(Query: what did we talk about between session 2 and session 6?
Function Chain: f_between(Session_Index, [2, 6])

Query: what did we discuss between January 5, 2023 and January 9, 2023?
Function Chain: f_between(Date, [January 5, 2023, January 9, 2023])
)PROMPT";

constexpr const char* kFunctionWriteEx3 =
    R"PROMPT(Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what did we discuss in session 5?
Function Chain: f_value(Session_Index, [5]) -> <END>

Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what did we talk about 2 days ago?
Function Chain: f_value(Date, [June 8, 2023]) -> <END>

Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what have we discussed earlier today?
Function Chain: f_value(Date, [June 10, 2023]) -> f_between(Time, [00:00, 14:04]) -> <END>
)PROMPT";

constexpr const char* kArg1ValueEx1 =
    R"PROMPT(Query: what did we discuss in session 5?
Function Chain: f_value(Session_Index, [5])

Query: what did we talk about on January 14, 2023?
Function Chain: f_value(Date, [January 14, 2023])
)PROMPT";

constexpr const char* kArg1ValueEx2 =
    R"PROMPT(Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what did we discuss in session 5?
Function Chain:  -> Session_Index

Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what did Sam say on June 8, 2023?
Function Chain: f_value(Speaker, [Sam]) -> Date
)PROMPT";

constexpr const char* kArg1BetweenEx1 =
    R"PROMPT(Query: what did we talk about between session 2 and session 6?
Function Chain: f_between(Session_Index, [2, 6])

Query: what did we discuss between January 5, 2023 and January 9, 2023?
Function Chain: f_between(Date, [January 5, 2023, January 9, 2023])
)PROMPT";

constexpr const char* kArg1BetweenEx2 =
    R"PROMPT(Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what did we talk about between session 2 and session 6?
Function Chain:  -> Session_Index

Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what were we discussing over the last week?
Function Chain:  -> Date
)PROMPT";

constexpr const char* kArg2ValueEx1 =
    R"PROMPT(Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what did we discuss in session 5?
Function Chain: f_value(Session_Index
Answer: [5])

Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what did we talk about on January 14, 2023?
Function Chain: f_value(Date
Answer: [January 14, 2023])

Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what did we talk about 2 days ago?
Function Chain: f_value(Date
Answer: [June 8, 2023])
)PROMPT";

constexpr const char* kArg2BetweenEx1 =
    R"PROMPT(Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what did we talk about between session 2 and session 6?
Function Chain: f_between(Session_Index
Answer: [2, 6])

Current Date:June 10, 2023 Current Time:14:05 Current Session:12
Query: what were we discussing over the last week?
Function Chain: f_between(Date
Answer: [June 4, 2023, June 10, 2023])
)PROMPT";

constexpr const char* kQueryRewriteEx1 =
    R"PROMPT(User: I see in my calendar that we talked on January 14, 2023.
Assistant: Yes! we did talk then. I always enjoy our chats.
User: I enjoy them too! Can you summarize what we discussed?
Rewrite: What did we discuss on January 14, 2023?

User: I remember in session 3 we had several discussions.
Assistant: Yes, we did.
User: But I cannot quite remember what we discussed.
Assistant: Would you like me to tell you?
User: Yes, could you describe, in as much detail as you can, the content of those conversations?
Rewrite: Could you describe, in as much detail as you can, the content of what we discussed in session 3?
)PROMPT";

constexpr const char* kQueryRewriteEx2 =
    R"PROMPT(Query: what did we discuss in session 5?
Rewrite: what did we discuss in session 5?

Query: What video game did Jolene mention playing with her partner on January 27, 2023?
Rewrite: What video game did Jolene mention playing with her partner on January 27, 2023?
)PROMPT";

}  // namespace

const std::vector<PromptName>& all_prompt_names() {
    static const std::vector<PromptName> names = {
        PromptName::MetaClassify, PromptName::SemanticClassify, PromptName::FunctionWrite,
        PromptName::Arg1Value,    PromptName::Arg1Between,      PromptName::Arg2Value,
        PromptName::Arg2Between,  PromptName::QueryRewrite,
    };
    return names;
}

std::string prompt_name_str(PromptName name) {
    switch (name) {
        case PromptName::MetaClassify: return "meta_classify";
        case PromptName::SemanticClassify: return "semantic_classify";
        case PromptName::FunctionWrite: return "function_write";
        case PromptName::Arg1Value: return "arg1_value";
        case PromptName::Arg1Between: return "arg1_between";
        case PromptName::Arg2Value: return "arg2_value";
        case PromptName::Arg2Between: return "arg2_between";
        case PromptName::QueryRewrite: return "query_rewrite";
    }
    return "?";
}

const PromptLibrary& PromptLibrary::builtin() {
    static const PromptLibrary lib = [] {
        PromptLibrary l;
        auto put = [&l](PromptName name, const char* body, std::vector<const char*> examples) {
            Entry e;
            e.body = body;
            for (const char* ex : examples) e.examples.push_back(rstrip(ex));
            l.entries_.emplace(name, std::move(e));
        };
        put(PromptName::MetaClassify, kMetaClassify, {kMetaClassifyEx1});
        put(PromptName::SemanticClassify, kSemanticClassify, {kSemanticClassifyEx1});
        put(PromptName::FunctionWrite, kFunctionWrite,
            {kFunctionWriteEx1, kFunctionWriteEx2, kFunctionWriteEx3});
        put(PromptName::Arg1Value, kArg1Value, {kArg1ValueEx1, kArg1ValueEx2});
        put(PromptName::Arg1Between, kArg1Between, {kArg1BetweenEx1, kArg1BetweenEx2});
        put(PromptName::Arg2Value, kArg2Value, {kArg2ValueEx1});
        put(PromptName::Arg2Between, kArg2Between, {kArg2BetweenEx1});
        put(PromptName::QueryRewrite, kQueryRewrite, {kQueryRewriteEx1, kQueryRewriteEx2});
        return l;
    }();
    return lib;
}

PromptLibrary PromptLibrary::load(const std::string& dir) {
    PromptLibrary lib;
    for (PromptName name : all_prompt_names()) {
        std::string stem = prompt_name_str(name);
        Entry e;
        e.body = read_file(dir + "/" + stem + ".txt");
        for (int i = 1;; ++i) {
            std::string path = dir + "/examples/" + stem + "." + std::to_string(i) + ".txt";
            std::ifstream probe(path);
            if (!probe) break;
            e.examples.push_back(rstrip(read_file(path)));
        }
        if (e.examples.empty())
            throw PromptError("no example blocks found for prompt " + stem + " under " + dir);
        lib.entries_.emplace(name, std::move(e));
    }
    return lib;
}

const std::string& PromptLibrary::template_text(PromptName name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
        throw PromptError("prompt " + prompt_name_str(name) + " not loaded");
    return it->second.body;
}

const std::vector<std::string>& PromptLibrary::example_blocks(PromptName name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
        throw PromptError("prompt " + prompt_name_str(name) + " not loaded");
    return it->second.examples;
}

std::string PromptLibrary::render(PromptName name, const PromptArgs& args) const {
    const Entry& entry = entries_.at(name);
    std::string text = entry.body;

    static const std::string kDefaultHeader = render_column_header(table_columns());
    std::string header = render_column_header(args.schema);
    if (header != kDefaultHeader) replace_all(text, kDefaultHeader, header);

    size_t filled = 0;
    size_t pos = 0;
    while ((pos = text.find(kExamplesSlot, pos)) != std::string::npos) {
        if (filled >= entry.examples.size())
            throw PromptError("prompt " + prompt_name_str(name) + " has more example slots than blocks");
        text.replace(pos, std::string(kExamplesSlot).size(), entry.examples[filled]);
        pos += entry.examples[filled].size();
        ++filled;
    }
    if (filled != entry.examples.size())
        throw PromptError("prompt " + prompt_name_str(name) + " has fewer example slots than blocks");

    replace_all(text, kQuerySlot, args.query);

    bool needs_now = text.find(kDateSlot) != std::string::npos ||
                     text.find(kTimeSlot) != std::string::npos ||
                     text.find(kSessionSlot) != std::string::npos;
    if (needs_now) {
        if (!args.now)
            throw PromptError("prompt " + prompt_name_str(name) + " requires a now context");
        replace_all(text, kDateSlot, args.now->date.to_long());
        replace_all(text, kTimeSlot, args.now->time.to_hhmm());
        replace_all(text, kSessionSlot, std::to_string(args.now->session));
    }
    replace_all(text, kChainSlot, args.chain_so_far);

    pos = text.find(kOutputSlot);
    if (pos == std::string::npos)
        throw PromptError("prompt " + prompt_name_str(name) + " is missing its generation marker");
    text.erase(pos);

    for (const char* marker : {kExamplesSlot, kQuerySlot, kDateSlot, kTimeSlot, kSessionSlot,
                               kChainSlot, kOutputSlot}) {
        if (text.find(marker) != std::string::npos)
            throw PromptError("prompt " + prompt_name_str(name) + " left slot " + marker +
                              " unfilled");
    }
    return text;
}

}  // namespace chatmem
