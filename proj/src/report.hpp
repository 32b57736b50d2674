#pragma once

// Byte-stable report text: fixed key order from ordered_json, every double printed with 17
// significant digits, and non-finite values written as the strings "inf", "-inf" or "nan".

#include <string>

#include "json.hpp"

namespace scaleevo {

std::string format_double(double v);
std::string to_report_json(const nlohmann::ordered_json& j);
// Writes text to path; failure raises IoError.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace scaleevo
