#include "trapeval/prompt.hpp"

#include "trapeval/common.hpp"

namespace trapeval::prompt {

namespace {

constexpr std::string_view kTemplate =
    "Below is an instruction that describes a classification task.\n"
    "Devise a label name suitable for categorizing items as either vulnerable or safe.\n"
    "### Instruction:\n"
    "Please review the code. Please find out if it is vulnerable.\n"
    "### Input:\n"
    "```C++\n"
    "{code}\n"
    "```\n"
    "### Response:";

constexpr std::string_view kRulesBlock =
    "### Rules:\n"
    "* You MUST respond with exactly one of the following two sentences:\n"
    "    * The code is vulnerable.\n"
    "    * The code is safe.\n"
    "* Do NOT provide any explanation, reasoning, or additional text.";

constexpr std::string_view kInstructionAnchor = "### Instruction:";

} // namespace

std::string_view template_mode_name(TemplateMode m) {
    return m == TemplateMode::FineTuned ? "finetuned" : "zeroshot";
}

TemplateMode parse_template_mode(std::string_view name) {
    if (name == "finetuned") return TemplateMode::FineTuned;
    if (name == "zeroshot") return TemplateMode::ZeroShotWithRules;
    throw ConfigError("unknown template mode: " + std::string(name));
}

std::string render_prompt(std::string_view code, TemplateMode mode) {
    std::string text(kTemplate);
    if (mode == TemplateMode::ZeroShotWithRules) {
        size_t at = text.find(kInstructionAnchor);
        text.insert(at, std::string(kRulesBlock) + "\n");
    }
    size_t slot = text.find("{code}");
    text.replace(slot, 6, code);
    return text;
}

} // namespace trapeval::prompt
