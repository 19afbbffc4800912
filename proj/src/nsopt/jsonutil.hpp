#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsopt/errors.hpp"

namespace nsopt {

// Insertion-ordered JSON keeps every serialized artifact byte-stable across
// runs, which the trajectory/corpus determinism contracts rely on.
using json = nlohmann::ordered_json;

// Shortest round-trip decimal form (std::to_chars). "14" stays "14",
// "1e+16" parses back to exactly 1e16.
std::string format_double(double v);

json parse_json(const std::string& text, const std::string& what = "document");

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Last n lines of text, newline-joined; used for solver-log tails and
// recovery-prompt truncation.
std::string tail_lines(const std::string& text, std::size_t n);

std::vector<std::string> split_lines(const std::string& text);

} // namespace nsopt
