#pragma once

#include <fstream>
#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "budgetseg/errors.hpp"

namespace budgetseg::detail {

// Strict-schema helpers: unknown fields and type mismatches become ParseError
// with the field path, never silent acceptance.

inline void check_object(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) {
        throw ParseError(where + ": expected an object");
    }
}

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    check_object(j, where);
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ParseError(where + ": unknown field '" + item.key() + "'");
        }
    }
}

inline const nlohmann::json& get_field(const nlohmann::json& j, const char* key,
                                       const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ParseError(where + ": missing field '" + key + "'");
    }
    return *it;
}

inline int get_int(const nlohmann::json& j, const char* key, const std::string& where) {
    const nlohmann::json& v = get_field(j, key, where);
    if (!v.is_number_integer()) {
        throw ParseError(where + "/" + key + ": expected an integer");
    }
    return v.get<int>();
}

inline double get_double(const nlohmann::json& j, const char* key, const std::string& where) {
    const nlohmann::json& v = get_field(j, key, where);
    if (!v.is_number()) {
        throw ParseError(where + "/" + key + ": expected a number");
    }
    return v.get<double>();
}

inline std::string get_string(const nlohmann::json& j, const char* key,
                              const std::string& where) {
    const nlohmann::json& v = get_field(j, key, where);
    if (!v.is_string()) {
        throw ParseError(where + "/" + key + ": expected a string");
    }
    return v.get<std::string>();
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace budgetseg::detail
