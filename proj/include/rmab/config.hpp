#pragma once

// JSON experiment configuration.
//
//   {
//     "environment": {"family": "one_dim", "num_states": 10, "epsilon": 0.05, ...},
//     "N": 10, "M": 1, "H": 100, "T": 50, "gamma": 0.99,
//     "drift_exponent": null, "window": "auto",
//     "eta1": 0.05, "eta2": 0.05,
//     "policies": ["ours", "ucwhittle", "wiql", "random"],
//     "runs": 50, "seed": 1, "output": "results", "workers": 1,
//     "search_tol": 1e-4, "vi_tol": 1e-8, "generator": "mt19937_64"
//   }
//
// Every key is optional; unknown keys are rejected.

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rmab/errors.hpp"
#include "rmab/harness.hpp"

namespace rmab {

namespace detail {
template <class T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config key '") + key + "': " + e.what());
    }
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw InvalidArgument("unknown key '" + key + "' in " + where);
    }
}
}  // namespace detail

inline EnvironmentSpec environment_from_json(const nlohmann::json& j) {
    detail::require(j.is_object(), "environment must be an object");
    detail::reject_unknown(j,
                           {"family", "num_states", "mix", "epsilon", "up_prob", "initial_state", "drift_p_init",
                            "drift_q", "known_p", "known_q", "sigma2", "drift_q_init", "stationary_q"},
                           "environment");
    std::string family = "one_dim";
    detail::read_key(j, "family", family);
    auto spec = family_from_string(family) == Family::Aoi ? EnvironmentSpec::aoi() : EnvironmentSpec::one_dim();
    detail::read_key(j, "num_states", spec.num_states);
    detail::read_key(j, "mix", spec.mix);
    detail::read_key(j, "epsilon", spec.epsilon);
    detail::read_key(j, "up_prob", spec.up_prob);
    detail::read_key(j, "initial_state", spec.initial_state);
    detail::read_key(j, "drift_p_init", spec.drift_p_init);
    detail::read_key(j, "drift_q", spec.drift_q);
    detail::read_key(j, "known_p", spec.known_p);
    detail::read_key(j, "known_q", spec.known_q);
    detail::read_key(j, "sigma2", spec.sigma2);
    detail::read_key(j, "drift_q_init", spec.drift_q_init);
    detail::read_key(j, "stationary_q", spec.stationary_q);
    return spec;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    detail::require(j.is_object(), "config must be a JSON object");
    detail::reject_unknown(j,
                           {"environment", "N", "M", "H", "T", "gamma", "drift_exponent", "window", "eta1", "eta2",
                            "policies", "runs", "seed", "output", "workers", "search_tol", "vi_tol", "generator"},
                           "config");
    ExperimentConfig c;
    if (j.contains("environment")) c.environment = environment_from_json(j.at("environment"));
    detail::read_key(j, "N", c.num_arms);
    detail::read_key(j, "M", c.budget);
    detail::read_key(j, "H", c.horizon);
    detail::read_key(j, "T", c.episodes);
    detail::read_key(j, "gamma", c.gamma);
    if (j.contains("drift_exponent") && !j.at("drift_exponent").is_null()) {
        double k = 0.0;
        detail::read_key(j, "drift_exponent", k);
        c.drift_exponent = k;
    }
    if (j.contains("window")) {
        const auto& w = j.at("window");
        if (w.is_string()) {
            detail::require(w.get<std::string>() == "auto", "window must be \"auto\" or a positive integer");
        } else if (!w.is_null()) {
            std::size_t v = 0;
            detail::read_key(j, "window", v);
            c.window = v;
        }
    }
    detail::read_key(j, "eta1", c.eta1);
    detail::read_key(j, "eta2", c.eta2);
    detail::read_key(j, "policies", c.policies);
    detail::read_key(j, "runs", c.runs);
    detail::read_key(j, "seed", c.seed);
    detail::read_key(j, "output", c.output);
    detail::read_key(j, "workers", c.workers);
    detail::read_key(j, "search_tol", c.search_tol);
    detail::read_key(j, "vi_tol", c.vi_tol);
    detail::read_key(j, "generator", c.generator);
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

/// Parses a curves.csv into per-policy mean cumulative regret curves, in file order.
inline std::vector<std::pair<std::string, std::vector<double>>> read_curves_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    detail::require(line.rfind("policy,episode,mean_cumulative_regret", 0) == 0, path.string() + ": not a curves.csv");
    std::vector<std::pair<std::string, std::vector<double>>> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        row.imbue(std::locale::classic());
        std::string policy, episode, mean;
        if (!std::getline(row, policy, ',') || !std::getline(row, episode, ',') || !std::getline(row, mean, ',')) {
            throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": malformed row");
        }
        double value = 0.0;
        try {
            value = std::stod(mean);
        } catch (const std::exception&) {
            throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": bad number '" + mean + "'");
        }
        if (out.empty() || out.back().first != policy) out.emplace_back(policy, std::vector<double>{});
        out.back().second.push_back(value);
    }
    return out;
}

}  // namespace rmab
