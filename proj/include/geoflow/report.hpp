#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/errors.hpp"

namespace geoflow {

using ordered_json = nlohmann::ordered_json;

/// One lost digit per differentiation order in double precision.
struct ToleranceLadder {
    double second = 1e-9;  // quantities with at most 2nd metric derivatives
    double third = 1e-7;   // 3rd derivatives (Cotton level)
    double fourth = 1e-6;  // 4th derivatives (Bach level)

    ToleranceLadder scaled(double s) const { return ToleranceLadder{second * s, third * s, fourth * s}; }

    ordered_json to_json() const {
        return ordered_json{{"second_derivative", second}, {"third_derivative", third},
                            {"fourth_derivative", fourth}};
    }
};

enum class CheckStatus { applied, skipped, unmet };

inline const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::applied: return "applied";
        case CheckStatus::skipped: return "skipped";
        case CheckStatus::unmet: return "precondition-unmet";
    }
    return "?";
}

struct CheckRecord {
    std::string id;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    CheckStatus status = CheckStatus::applied;
    std::string note;  // skip reason / unmet message
    int points = 0;

    void accumulate(double residual) {
        max_residual = std::max(max_residual, residual);
        mean_residual += residual;
        ++points;
    }
    void finalize() {
        if (points > 0) mean_residual /= points;
        if (status == CheckStatus::applied) pass = max_residual < tolerance;
        if (status == CheckStatus::unmet) pass = false;
    }

    ordered_json to_json() const {
        ordered_json j{{"id", id},
                       {"status", to_string(status)},
                       {"points", points},
                       {"max_residual", max_residual},
                       {"mean_residual", mean_residual},
                       {"tolerance", tolerance},
                       {"pass", pass}};
        if (!note.empty()) j["note"] = note;
        return j;
    }
};

struct VerificationReport {
    std::string instance;
    int dim = 0;
    double rho = 0.0, lambda = 0.0;
    std::uint64_t seed = 0;
    int points = 0;
    double tol_scale = 1.0;
    double perturb = 0.0;
    ToleranceLadder ladder;
    std::vector<CheckRecord> checks;

    bool overall_pass() const {
        for (const auto& c : checks)
            if (!c.pass && c.status != CheckStatus::skipped) return false;
        return true;
    }

    ordered_json to_json(bool with_timestamp = true) const {
        ordered_json j;
        j["schema"] = 1;
        j["instance"] = instance;
        j["parameters"] = ordered_json{{"n", dim},     {"rho", rho},
                                       {"lambda", lambda}, {"seed", seed},
                                       {"points", points}, {"tol_scale", tol_scale},
                                       {"perturb", perturb}};
        j["tolerance_ladder"] = ladder.to_json();
        ordered_json arr = ordered_json::array();
        for (const auto& c : checks) arr.push_back(c.to_json());
        j["checks"] = arr;
        j["overall_pass"] = overall_pass();
        if (with_timestamp) {
            const auto now = std::chrono::system_clock::now();
            j["timestamp"] =
                static_cast<std::int64_t>(std::chrono::system_clock::to_time_t(now));
        }
        return j;
    }
};

/// Atomic file write: stage to a sibling temp file, then rename into place.
inline void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc | std::ios::binary);
        if (!os) throw evaluation_error("cannot open '" + tmp + "' for writing");
        os << text;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw evaluation_error("cannot move report into place at '" + path + "'");
}

inline void write_json_atomic(const std::string& path, const ordered_json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace geoflow
