#pragma once

#include "forge/corpus.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forge::prompts {

// Number of examples each generation request asks for; fixed by the template.
inline constexpr int kExamplesPerRequest = 5;
// Number of seed examples interpolated into each generation prompt.
inline constexpr int kSeedsPerPrompt = 3;

struct PromptBundle {
    std::optional<std::string> system;  // separate system prompt (judges only)
    std::string body;
};

// Example-guided instruction generation prompt. Takes exactly 3 seed records
// of the stated category; topics, when present, must hold exactly 3 entries
// and add the themed-topics line.
std::string lamini_generation_prompt(std::span<const corpus::InstructionRecord> seeds,
                                     corpus::Category category,
                                     const std::optional<std::vector<std::string>>& topics =
                                         std::nullopt);

// Response-generation prompt; context, when present, is appended after
// "Input:". The template's header token is reproduced verbatim, historical
// misspelling included.
std::string lamini_response_prompt(std::string_view instruction,
                                   const std::optional<std::string>& context = std::nullopt);

// Instruction-evolution prompt in conversational <human>/<bot> syntax.
// in_depth requires an operation, in_breadth forbids one.
std::string evol_prompt(std::string_view seed_instruction, corpus::EvolStrategy strategy,
                        std::optional<corpus::EvolOperation> operation = std::nullopt);

std::string evol_response_prompt(std::string_view instruction);

// Asks whether two instructions are equal; ends with the answer-priming
// suffix so the completion starts with the decision.
std::string equality_prompt(std::string_view first, std::string_view second);

// Explanation-tuning prompt: system / task / correct answer / response.
// system_msg may be empty (message id 1).
std::string orca_prompt(std::string_view system_msg, std::string_view query,
                        std::string_view target);

// Fine-tuning template; an absent system falls back to the default below.
std::string finetune_prompt(const std::optional<std::string>& system,
                            std::string_view instruction);
std::string_view default_finetune_system();

// Judge prompts for rejection sampling. lamini/evol records need
// instruction+response, orca records need instruction+expected+response.
// paper_verbatim reproduces the malformed <rating line of the original orca
// judge prompt instead of the corrected tag.
PromptBundle judge_prompts(corpus::Scheme scheme, const corpus::InstructionRecord& record,
                           bool paper_verbatim = false);

// System messages 1..16 used for explanation tuning; id 1 is empty.
std::string_view orca_system_message(int id);

}  // namespace forge::prompts
