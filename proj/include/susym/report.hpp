#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace susym {

/// One verified identity: a human-readable name, the formula it instantiates,
/// the worst residual observed, and the tolerance it was held to.
struct CheckEntry {
    std::string identity;
    std::string anchor;
    double residual = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::string stage;
    std::vector<CheckEntry> entries;

    void add(std::string identity, std::string anchor, double residual, double tol) {
        entries.push_back({std::move(identity), std::move(anchor), residual, tol, residual < tol});
    }
    void add_flag(std::string identity, std::string anchor, bool ok) {
        entries.push_back({std::move(identity), std::move(anchor), ok ? 0.0 : 1.0, 1.0, ok});
    }
    /// Falsification entry: passes when the value stays at or above the floor
    /// (for residuals that must be bounded away from zero).
    void add_floor(std::string identity, std::string anchor, double value, double floor) {
        entries.push_back({std::move(identity), std::move(anchor), value, floor, value >= floor});
    }

    bool passed() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }

    double worst_residual() const {
        double w = 0.0;
        for (const auto& e : entries) w = std::max(w, e.residual);
        return w;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : entries)
            arr.push_back({{"identity", e.identity},
                           {"anchor", e.anchor},
                           {"residual", e.residual},
                           {"tol", e.tol},
                           {"verdict", e.pass ? "pass" : "fail"}});
        return {{"stage", stage}, {"checks", arr}, {"verdict", passed() ? "pass" : "fail"}};
    }

    std::string summary_lines() const {
        std::ostringstream os;
        for (const auto& e : entries)
            os << (e.pass ? "pass" : "FAIL") << "  " << std::scientific << std::setprecision(3)
               << e.residual << "  " << e.identity << "  [" << e.anchor << "]\n";
        return os.str();
    }
};

/// Relative residual with an absolute floor: ||diff|| / max(1, scale).
inline double normalized(double diff, double scale) { return diff / std::max(1.0, scale); }

} // namespace susym
