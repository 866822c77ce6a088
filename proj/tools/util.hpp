#pragma once

#include <string>
#include <vector>

#include <hamflow/types.hpp>

#include "experiments.hpp"

namespace hamflow::cli {

/// Parameter list as a vector of the required length.
inline Vec vec_param(const Params& p, const std::string& key, int n) {
    const auto xs = p.reals(key);
    if (static_cast<int>(xs.size()) != n) {
        throw ConfigError("parameter '" + key + "' needs " + std::to_string(n) + " entries");
    }
    return Eigen::Map<const Vec>(xs.data(), n);
}

inline std::vector<std::string> name_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ' && c != '\t') {
            cur += c;
        }
    }
    return out;
}

inline double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

}  // namespace hamflow::cli
