#pragma once

#include <string>
#include <string_view>

namespace trapeval::prompt {

enum class TemplateMode : uint8_t { FineTuned, ZeroShotWithRules };

std::string_view template_mode_name(TemplateMode m);
TemplateMode parse_template_mode(std::string_view name); // throws ConfigError

// Byte-exact template instantiation. The code slot is filled verbatim inside
// a fenced block labeled C++; ZeroShotWithRules additionally carries the
// fixed rules block naming the two allowed response sentences.
std::string render_prompt(std::string_view code, TemplateMode mode);

} // namespace trapeval::prompt
