#include "nsopt/jsonutil.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nsopt {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(Errc::parse_error, what + ": not valid JSON");
    return j;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + path);
    out << content;
    out.flush();
    if (!out) fail(Errc::io_error, "short write to " + path);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

std::string tail_lines(const std::string& text, std::size_t n) {
    auto lines = split_lines(text);
    std::size_t first = lines.size() > n ? lines.size() - n : 0;
    std::string out;
    for (std::size_t i = first; i < lines.size(); ++i) {
        if (i > first) out.push_back('\n');
        out += lines[i];
    }
    return out;
}

} // namespace nsopt
