#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "persum/util/error.hpp"

namespace persum {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open input file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a sibling temp file and renames it into place, so readers
/// never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write file: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ConfigError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

inline Json read_json(const std::filesystem::path& path) {
    return parse_json(read_file(path), path.string());
}

/// One JSON value per non-empty line.
inline std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<Json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_json(line, path.string() + ":" + std::to_string(lineno)));
    }
    return out;
}

inline std::string to_jsonl(const std::vector<Json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out.push_back('\n');
    }
    return out;
}

/// Typed field access that reports the missing/mistyped field by name.
template <typename T>
T require(const Json& obj, const char* field, const std::string& where) {
    if (!obj.is_object() || !obj.contains(field)) {
        throw ParseError(where + ": missing field '" + field + "'");
    }
    try {
        return obj.at(field).get<T>();
    } catch (const Json::exception&) {
        throw ParseError(where + ": field '" + field + "' has the wrong type");
    }
}

template <typename T>
T optional_field(const Json& obj, const char* field, T fallback) {
    if (!obj.is_object() || !obj.contains(field) || obj.at(field).is_null()) return fallback;
    return obj.at(field).get<T>();
}

} // namespace persum
