#include "forge/prompts.hpp"

#include "forge/errors.hpp"

#include <array>

namespace forge::prompts {

namespace {

constexpr std::string_view kLaminiGenerationHeader =
    R"(### SYSTEM: You are an AI assistant. Answer as honestly and correctly as possible.
### YOUR TASK: Generate 5 diverse examples that are similar to the provided examples.
You do not need to provide responses to the generated examples.
Do not repeat the provided examples.
Each generated example must include an instruction.
Each generated example may have an additional context if necessary.
Each generated example can be either an imperative sentence or a question.
Each generated example must begin with "<example>" and end with "</example>"
)";

constexpr std::string_view kLaminiTopicsPrefix =
    "Each generated example should be themed on one of the topics of ";

constexpr std::string_view kLaminiResponseSystem =
    "### SYSTEM: You are an AI chat assistant. Answer as honestly and correctly as possible. "
    "Do not use ### in your response.";

constexpr std::string_view kEvolInDepthHeader =
    R"(<human>: I want you to act as a prompt rewriter.
Your objective is to rewrite the #Given Prompt# into a more complex version.
But the rewritten prompt must be reasonable and must be understood and responded by humans.
Your rewriting cannot omit the non-text parts such as the table and code in #Given Prompt#:. Also, please do not omit the context in #Given Prompt#.
You should try your best not to make the #Rewritten Prompt# become verbose, #Rewritten Prompt# can only add 10 to 20 words into #Given Prompt#.
'#Given Prompt#', '#Rewritten Prompt#', 'given prompt' and 'rewritten prompt' are not allowed to appear in #Rewritten Prompt#
)";

constexpr std::string_view kEvolAddConstraintsLine =
    "You SHOULD complicate the given prompt by adding one more constraints/requirements into "
    "#Given Prompt#";
constexpr std::string_view kEvolDeepeningLine =
    "You SHOULD complicate the given prompt if #Given Prompt# contains inquiries about certain "
    "issues, the depth and breadth of the inquiry can be increased.";
constexpr std::string_view kEvolConcretizingLine =
    "You SHOULD complicate the given prompt by replacing general concepts with more specific "
    "concepts.";
constexpr std::string_view kEvolReasoningLine =
    "You SHOULD complicate the given prompt if #Given Prompt# can be solved with just a few "
    "simple thinking processes, you can rewrite it to explicitly request multiple-step "
    "reasoning.";

constexpr std::string_view kEvolInBreadth =
    R"(<human>: I want you to act as a prompt creator.
Your goal is to draw inspiration from the #Given Prompt# to create a brand new prompt.
This new prompt should belong to the same domain as the #Given Prompt# but be even more rare.
The LENGTH and difficulty level of the #Created Prompt# should be similar to that of the #Given Prompt#.
The #Created Prompt# must be reasonable and must be understood and responded by humans.
'#Given Prompt#', '#Created Prompt#', 'given prompt' and 'created prompt' are not allowed to appear in #Created Prompt#.
Your response only contains the #Created Prompt# and no explanation of the new prompt. Do not provide a response to either the #Given Prompt# or the #Created Prompt#.
#Given Prompt#:
)";

constexpr std::string_view kEqualityHeader =
    R"(<human>: Do you think the following two instructions are equal to each other in that they meet the following requirements:
1. They have same constraints and requirements.
2. They have same depth and breadth of the inquiry.
)";

constexpr std::string_view kDefaultFinetuneSystem =
    "Below is an instruction that describes a task, optionally paired with an input that "
    "provides further context following that instruction. Write a response that appropriately "
    "completes the request.";

constexpr std::string_view kJudgeSystemPair =
    R"(I want you to act as an expert instruction/response evaluator.
You are given an instruction and a response below.
The instruction is within <instruction> and </instruction> tags, and the response is within <response> and </response> tags.
Your task is to evaluate whether the given response contains sufficient information to be clear, complete and specific to the given instruction.
You should also rate the response on a scale of 1 to 7, 1 being the worst and 7 being the best.
If it is suitable, you should output <status>Accept</status>, rating within <rating> and </rating> and a reasoning for this status, rating within <reason> and </reason>.
If it is not suitable, you should output <status>Reject</status> rating within <rating> and </rating> and a reasoning for this status, rating within <reason> and </reason>.
Your response should contain none other than the status, rating and reason.)";

constexpr std::string_view kJudgeSystemExpectedHead =
    R"(I want you to act as an expert prompt/response evaluator.
You are given an instruction and a corresponding expected response. You are also given the generated response from an LLM for the same instruction.
The instruction is within <instruction> and </instruction> tags, the expected response is within <expected> and </expected> tags, and the generated response is within <generated> and </generated> tags.
Your task is to evaluate whether the generated response is an accurate explanation of the expected response for the given instruction.
You should also rate the generated response on a scale of 1 to 7, 1 being the worst and 7 being the best.
If it is an accurate explanation, the status of the response should be "Accept", and "Reject", if not.
Your response should be in the following format:
<status>Accept/Reject</status>
)";

// The original prompt misses the closing '>' of the opening rating tag; the
// corrected form keeps downstream tag parsing well-formed.
constexpr std::string_view kJudgeRatingLineCorrected =
    "<rating>Integer Rating between 1 and 7</rating>\n";
constexpr std::string_view kJudgeRatingLineVerbatim =
    "<ratingInteger Rating between 1 and 7</rating>\n";

constexpr std::string_view kJudgeSystemExpectedTail =
    "<reason>Your reasoning for status and rating</reason>";

constexpr std::array<std::string_view, 17> kOrcaSystemMessages = {
    // id 0 unused; id 1 is the empty system message.
    "",
    "",
    "You are an AI assistant. Provide a detailed answer so user don't need to search outside to "
    "understand the answer.",
    "You are an AI assistant. You will be given a task. You must generate a detailed and long "
    "answer.",
    "You are a helpful assistant, who always provide explanation. Think like you are answering "
    "to a five year old.",
    "You are an AI assistant that follows instruction extremely well. Help as much as you can.",
    "You are an AI assistant that helps people find information. Provide a detailed answer so "
    "user don't need to search outside to understand the answer.",
    "You are an AI assistant. User will you give you a task. Your goal is to complete the task "
    "as faithfully as you can. While performing the task think step-by-step and justify your "
    "steps.",
    "You should describe the task and explain your answer. While answering a multiple choice "
    "question, first output the correct answer(s). Then explain why other answers are wrong. "
    "Think like you are answering to a five year old.",
    "Explain how you used the definition to come up with the answer.",
    "You are an AI assistant. You should describe the task and explain your answer. While "
    "answering a multiple choice question, first output the correct answer(s). Then explain why "
    "other answers are wrong. You might need to use additional knowledge to answer the "
    "question.",
    "You are an AI assistant that helps people find information. User will you give you a "
    "question. Your task is to answer as faithfully as you can. While answering think step-by "
    "step and justify your answer.",
    "User will you give you a task with some instruction. Your job is follow the instructions "
    "as faithfully as you can. While answering think step-by-step and justify your answer.",
    "You are a teacher. Given a task, you explain in simple steps what the task is asking, any "
    "guidelines it provides and how to use those guidelines to find the answer.",
    "You are an AI assistant, who knows every language and how to translate one language to "
    "another. Given a task, you explain in simple steps what the task is asking, any guidelines "
    "that it provides. You solve the task and show how you used the guidelines to solve the "
    "task.",
    "Given a definition of a task and a sample input, break the definition into small parts. "
    "Each of those parts will have some instruction. Explain their meaning by showing an "
    "example that meets the criteria in the instruction. Use the following format:\nPart #: a "
    "key part of the definition.\nUsage: Sample response that meets the criteria from the key "
    "part. Explain why you think it meets the criteria.",
    "You are an AI assistant that helps people find information.",
};

std::string_view operation_line(corpus::EvolOperation op) {
    switch (op) {
        case corpus::EvolOperation::add_constraints: return kEvolAddConstraintsLine;
        case corpus::EvolOperation::deepening: return kEvolDeepeningLine;
        case corpus::EvolOperation::concretizing: return kEvolConcretizingLine;
        case corpus::EvolOperation::increase_reasoning: return kEvolReasoningLine;
    }
    throw ArgumentError("unknown evol operation");
}

std::string require_field(const std::optional<std::string>& value, std::string_view field) {
    if (!value || value->empty()) {
        throw ValidationError("record field '" + std::string(field) +
                              "' is required for judge prompts");
    }
    return *value;
}

}  // namespace

std::string lamini_generation_prompt(std::span<const corpus::InstructionRecord> seeds,
                                     corpus::Category category,
                                     const std::optional<std::vector<std::string>>& topics) {
    if (seeds.size() != static_cast<std::size_t>(kSeedsPerPrompt)) {
        throw ArgumentError("lamini generation prompt takes exactly 3 seed examples, got " +
                            std::to_string(seeds.size()));
    }
    for (const auto& seed : seeds) {
        if (!seed.category || *seed.category != category) {
            throw ValidationError("seed '" + seed.id + "' is not from category '" +
                                  std::string(corpus::to_string(category)) + "'");
        }
    }
    if (topics && topics->size() != 3) {
        throw ArgumentError("topic-guided generation takes exactly 3 topics, got " +
                            std::to_string(topics->size()));
    }

    std::string prompt(kLaminiGenerationHeader);
    if (topics) {
        prompt += kLaminiTopicsPrefix;
        prompt += (*topics)[0];
        prompt += ',';
        prompt += (*topics)[1];
        prompt += ',';
        prompt += (*topics)[2];
        prompt += '\n';
    }
    prompt += "\n### PROVIDED EXAMPLES(Category: ";
    prompt += corpus::to_string(category);
    prompt += "):\n";
    for (const auto& seed : seeds) {
        prompt += "<example>";
        prompt += seed.instruction;
        if (seed.context) {
            prompt += "\nInput:";
            prompt += *seed.context;
        }
        prompt += "</example>\n";
    }
    prompt += "\n###RESPONSE:";
    return prompt;
}

std::string lamini_response_prompt(std::string_view instruction,
                                   const std::optional<std::string>& context) {
    if (instruction.empty()) {
        throw ValidationError("instruction must be non-empty");
    }
    std::string prompt(kLaminiResponseSystem);
    prompt += "\n### INSRUCTION: ";
    prompt += instruction;
    if (context) {
        prompt += " Input:";
        prompt += *context;
    }
    prompt += "\n\n### RESPONSE:";
    return prompt;
}

std::string evol_prompt(std::string_view seed_instruction, corpus::EvolStrategy strategy,
                        std::optional<corpus::EvolOperation> operation) {
    if (seed_instruction.empty()) {
        throw ValidationError("seed instruction must be non-empty");
    }
    std::string prompt;
    if (strategy == corpus::EvolStrategy::in_depth) {
        if (!operation) {
            throw ArgumentError("in-depth evolving requires an operation");
        }
        prompt = kEvolInDepthHeader;
        prompt += operation_line(*operation);
        prompt += "\n#Given Prompt#:\n";
        prompt += seed_instruction;
        prompt += "\n<bot>: #Rewritten Prompt#:";
    } else {
        if (operation) {
            throw ArgumentError("in-breadth evolving takes no operation");
        }
        prompt = kEvolInBreadth;
        prompt += seed_instruction;
        prompt += "\n<bot>: #Created Prompt#:";
    }
    return prompt;
}

std::string evol_response_prompt(std::string_view instruction) {
    if (instruction.empty()) {
        throw ValidationError("instruction must be non-empty");
    }
    std::string prompt = "<human>: ";
    prompt += instruction;
    prompt += "\n<bot>:";
    return prompt;
}

std::string equality_prompt(std::string_view first, std::string_view second) {
    if (first.empty() || second.empty()) {
        throw ValidationError("equality prompt takes two non-empty instructions");
    }
    std::string prompt(kEqualityHeader);
    prompt += "The First Prompt: ";
    prompt += first;
    prompt += "\nThe Second Prompt: ";
    prompt += second;
    prompt += "\nYour response should be either equal or not equal.\n<bot>: The two prompts are";
    return prompt;
}

std::string orca_prompt(std::string_view system_msg, std::string_view query,
                        std::string_view target) {
    if (query.empty()) {
        throw ValidationError("query must be non-empty");
    }
    if (target.empty()) {
        throw ValidationError("target must be non-empty");
    }
    std::string prompt = "###";
    if (!system_msg.empty()) {
        prompt += ' ';
        prompt += system_msg;
    }
    prompt += "\n### your task is:\n";
    prompt += query;
    prompt += "\n### the correct answer to this task is:\n";
    prompt += target;
    prompt += "\nuse this correct answer to guide you.\n#Response:";
    return prompt;
}

std::string finetune_prompt(const std::optional<std::string>& system,
                            std::string_view instruction) {
    if (instruction.empty()) {
        throw ValidationError("instruction must be non-empty");
    }
    std::string prompt = "### System:\n";
    prompt += system ? *system : std::string(kDefaultFinetuneSystem);
    prompt += "\n\n### Instruction:\n";
    prompt += instruction;
    prompt += "\n\n### Response:";
    return prompt;
}

std::string_view default_finetune_system() {
    return kDefaultFinetuneSystem;
}

PromptBundle judge_prompts(corpus::Scheme scheme, const corpus::InstructionRecord& record,
                           bool paper_verbatim) {
    if (record.instruction.empty()) {
        throw ValidationError("record field 'instruction' is required for judge prompts");
    }
    PromptBundle bundle;
    if (scheme == corpus::Scheme::orca) {
        std::string system(kJudgeSystemExpectedHead);
        system += paper_verbatim ? kJudgeRatingLineVerbatim : kJudgeRatingLineCorrected;
        system += kJudgeSystemExpectedTail;
        bundle.system = std::move(system);
        bundle.body = "<instruction>" + record.instruction + "</instruction>\n<expected>" +
                      require_field(record.expected, "expected") + "</expected>\n<generated>" +
                      require_field(record.response, "response") + "</generated>";
    } else {
        bundle.system = std::string(kJudgeSystemPair);
        bundle.body = "<instruction>" + record.instruction + "</instruction>\n<response>" +
                      require_field(record.response, "response") + "</response>";
    }
    return bundle;
}

std::string_view orca_system_message(int id) {
    if (id < 1 || id > 16) {
        throw ArgumentError("system message id must be in [1,16], got " + std::to_string(id));
    }
    return kOrcaSystemMessages[static_cast<std::size_t>(id)];
}

}  // namespace forge::prompts
