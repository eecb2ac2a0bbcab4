#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sd2/error.hpp"

namespace sd2 {

// Line-oriented "name = value" documents. "[section]" headers prefix the
// following names as "section.name"; '#' starts a comment.
class TextMap {
public:
    TextMap() = default;

    static TextMap parse(std::string_view text) {
        TextMap map;
        std::string section;
        std::size_t line_no = 0;
        std::istringstream in{std::string(text)};
        for (std::string line; std::getline(in, line);) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::string_view body = trim(line);
            if (body.empty()) continue;
            if (body.front() == '[') {
                if (body.back() != ']')
                    throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": unterminated section");
                section = std::string(trim(body.substr(1, body.size() - 2)));
                continue;
            }
            auto eq = body.find('=');
            if (eq == std::string_view::npos)
                throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected name = value");
            std::string name(trim(body.substr(0, eq)));
            if (name.empty())
                throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": empty name");
            if (!section.empty()) name = section + "." + name;
            map.set(name, std::string(trim(body.substr(eq + 1))));
        }
        return map;
    }

    static TextMap load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    void set(const std::string& name, std::string value) {
        if (!values_.count(name)) order_.push_back(name);
        values_[name] = std::move(value);
    }

    bool contains(const std::string& name) const { return values_.count(name) != 0; }

    std::optional<std::string> get(const std::string& name) const {
        auto it = values_.find(name);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& require(const std::string& name) const {
        auto it = values_.find(name);
        if (it == values_.end()) throw Error(ErrorKind::Config, "missing field '" + name + "'");
        return it->second;
    }

    std::string get_or(const std::string& name, std::string fallback) const {
        auto v = get(name);
        return v ? *v : fallback;
    }

    /// Insertion order is preserved so serialization is stable.
    std::string to_string() const {
        std::string out;
        for (const auto& name : order_) out += name + " = " + values_.at(name) + "\n";
        return out;
    }

    static std::string_view trim(std::string_view s) {
        const char* ws = " \t\r\n";
        auto b = s.find_first_not_of(ws);
        if (b == std::string_view::npos) return {};
        auto e = s.find_last_not_of(ws);
        return s.substr(b, e - b + 1);
    }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
};

inline double parse_double(std::string_view text, const std::string& what) {
    text = TextMap::trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(ErrorKind::Config, "bad number for " + what + ": '" + std::string(text) + "'");
    return v;
}

template <typename Int>
Int parse_int(std::string_view text, const std::string& what) {
    text = TextMap::trim(text);
    Int v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(ErrorKind::Config, "bad integer for " + what + ": '" + std::string(text) + "'");
    return v;
}

inline bool parse_bool(std::string_view text, const std::string& what) {
    text = TextMap::trim(text);
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw Error(ErrorKind::Config, "bad flag for " + what + ": '" + std::string(text) + "'");
}

inline std::vector<std::string> split_list(std::string_view text, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(sep, start);
        if (end == std::string_view::npos) end = text.size();
        auto item = TextMap::trim(text.substr(start, end - start));
        if (!item.empty()) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace sd2
