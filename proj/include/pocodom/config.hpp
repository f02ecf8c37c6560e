#pragma once

#include <filesystem>
#include <string>

#include "pocodom/pipeline.hpp"

namespace pocodom {

/// INI-style text: `[section]` headers and `key = value` lines, `#` or `;`
/// comments. Keys mirror PipelineConfig fields; unknown sections or keys
/// throw MalformedConfig. Missing keys keep their defaults.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Every field in the same format, so parse_config(format_config(c)) == c.
std::string format_config(const PipelineConfig& config);

SignedAxis parse_signed_axis(const std::string& text);
std::string format_signed_axis(SignedAxis axis);

}  // namespace pocodom
