#pragma once

#include <set>
#include <string>

#include "cbf_teleop/config.hpp"

namespace cbf_teleop::detail {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Fields {
public:
    Fields(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path_ + "." + key + ": wrong type");
        }
    }

    const Json* child(const char* key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void allow(const char* key) { seen_.insert(key); }

    std::string path(const char* key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
        }
    }

private:
    const Json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace cbf_teleop::detail
