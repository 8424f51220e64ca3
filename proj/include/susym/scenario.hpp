#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "susym/chains.hpp"
#include "susym/config.hpp"
#include "susym/errors.hpp"
#include "susym/expr.hpp"
#include "susym/func.hpp"
#include "susym/ode_chain.hpp"

namespace susym {

/// A scenario document: the problem data (matrix potential plus chains, or
/// stacked scalar components) together with run options.  Parsing validates
/// shapes eagerly; building the ChainSet is deferred so ODE-backed members
/// pick up the effective Config.
struct Scenario {
    struct ChainData {
        cx lambda;
        std::vector<std::vector<ExprPtr>> members; // members x n, closed form
        bool ode = false;
        std::vector<std::array<cx, 2>> ode_seeds;  // chain of seeds, n == 1 only
        double x0 = 0.0;
    };
    struct ComponentData {
        ExprPtr potential;
        std::vector<ExprPtr> members;
    };

    std::string name = "scenario";
    std::string kind;       // "chains" or "irreducible"
    int n = 0;
    std::uint64_t seed = 2024;
    std::vector<std::string> stages;
    std::optional<std::array<double, 2>> window;
    std::optional<int> ladder_start;                  // factorization starting member

    std::vector<std::vector<ExprPtr>> potential;      // chains kind, n x n
    std::vector<ChainData> chains;

    int big_n = 0;                                    // irreducible kind
    cx lambda0;
    std::vector<ComponentData> components;

    nlohmann::json raw;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw ScenarioError(std::string("missing field \"") + key + "\"");
    return j[key];
}

inline int require_int(const nlohmann::json& j, const char* key, int lo, int hi) {
    const auto& v = require_field(j, key);
    if (!v.is_number_integer())
        throw ScenarioError(std::string("field \"") + key + "\" must be an integer");
    const int i = v.get<int>();
    if (i < lo || i > hi)
        throw ScenarioError(std::string("field \"") + key + "\" out of range [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return i;
}

inline ExprPtr parse_expr(const nlohmann::json& j) {
    try {
        return ScalarExpr::from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("bad expression: ") + e.what());
    }
}

inline Scenario::ChainData parse_chain(const nlohmann::json& jc, int n) {
    Scenario::ChainData cd;
    cd.lambda = cx_from_json(require_field(jc, "lambda"));
    const auto& jm = require_field(jc, "members");
    if (!jm.is_array() || jm.empty()) throw ScenarioError("chain needs a nonempty member array");

    const bool first_ode = jm[0].is_object() && jm[0].contains("ode_seed");
    if (first_ode) {
        if (n != 1) throw ScenarioError("ode_seed members are supported for n = 1 only");
        cd.ode = true;
        bool have_x0 = false;
        for (const auto& m : jm) {
            if (!m.is_object() || !m.contains("ode_seed"))
                throw ScenarioError("a chain mixes ode_seed and closed-form members");
            const auto& s = m["ode_seed"];
            if (!s.is_array() || s.size() != 2)
                throw ScenarioError("ode_seed must be [[re,im],[re,im]]");
            cd.ode_seeds.push_back({cx_from_json(s[0]), cx_from_json(s[1])});
            if (m.contains("x0")) {
                const double t = m["x0"].get<double>();
                if (have_x0 && t != cd.x0)
                    throw ScenarioError("ode_seed members of one chain must share x0");
                cd.x0 = t;
                have_x0 = true;
            }
        }
        return cd;
    }

    for (const auto& m : jm) {
        if (m.is_object() && m.contains("ode_seed"))
            throw ScenarioError("a chain mixes ode_seed and closed-form members");
        std::vector<ExprPtr> vec;
        if (n == 1 && !m.is_array()) {
            vec.push_back(parse_expr(m));
        } else {
            if (!m.is_array() || static_cast<int>(m.size()) != n)
                throw ScenarioError("chain member must be an array of n expressions");
            for (const auto& comp : m) vec.push_back(parse_expr(comp));
        }
        cd.members.push_back(std::move(vec));
    }
    return cd;
}

} // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j) {
    using detail::parse_expr;
    using detail::require_field;
    using detail::require_int;

    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    Scenario sc;
    sc.raw = j;
    if (j.contains("name")) {
        if (!j["name"].is_string()) throw ScenarioError("\"name\" must be a string");
        sc.name = j["name"].get<std::string>();
    }
    const auto& jk = require_field(j, "kind");
    if (!jk.is_string()) throw ScenarioError("\"kind\" must be a string");
    sc.kind = jk.get<std::string>();
    sc.n = require_int(j, "n", 1, 6);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0)
            throw ScenarioError("\"seed\" must be a nonnegative integer");
        sc.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("stages")) {
        if (!j["stages"].is_array()) throw ScenarioError("\"stages\" must be an array");
        for (const auto& s : j["stages"]) {
            if (!s.is_string()) throw ScenarioError("stage names must be strings");
            sc.stages.push_back(s.get<std::string>());
        }
    }
    if (j.contains("window")) {
        const auto& w = j["window"];
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number() ||
            !(w[0].get<double>() < w[1].get<double>()))
            throw ScenarioError("\"window\" must be [lo, hi] with lo < hi");
        sc.window = {{w[0].get<double>(), w[1].get<double>()}};
    }
    if (j.contains("ladder_start")) sc.ladder_start = require_int(j, "ladder_start", 0, 1 << 20);

    if (sc.kind == "chains") {
        const auto& jp = require_field(j, "potential");
        if (!jp.is_array() || static_cast<int>(jp.size()) != sc.n)
            throw ScenarioError("\"potential\" must be an n x n array of expressions");
        for (const auto& row : jp) {
            if (!row.is_array() || static_cast<int>(row.size()) != sc.n)
                throw ScenarioError("\"potential\" must be an n x n array of expressions");
            std::vector<ExprPtr> r;
            for (const auto& e : row) r.push_back(parse_expr(e));
            sc.potential.push_back(std::move(r));
        }
        const auto& jc = require_field(j, "chains");
        if (!jc.is_array() || jc.empty()) throw ScenarioError("\"chains\" must be a nonempty array");
        int total = 0;
        for (const auto& c : jc) {
            sc.chains.push_back(detail::parse_chain(c, sc.n));
            const auto& cd = sc.chains.back();
            total += static_cast<int>(cd.ode ? cd.ode_seeds.size() : cd.members.size());
        }
        if (total % sc.n != 0)
            throw ScenarioError("total member count " + std::to_string(total) +
                                " is not divisible by n = " + std::to_string(sc.n));
        return sc;
    }

    if (sc.kind == "irreducible") {
        sc.big_n = require_int(j, "N", 1, 8);
        sc.lambda0 = cx_from_json(require_field(j, "lambda0"));
        const auto& jcomp = require_field(j, "components");
        if (!jcomp.is_array() || static_cast<int>(jcomp.size()) != sc.n)
            throw ScenarioError("\"components\" must list n scalar components");
        for (int c = 0; c < sc.n; ++c) {
            const auto& je = jcomp[static_cast<size_t>(c)];
            Scenario::ComponentData comp;
            comp.potential = parse_expr(require_field(je, "potential"));
            const auto& jm = require_field(je, "members");
            const int want = sc.big_n * (sc.n - c);
            if (!jm.is_array() || static_cast<int>(jm.size()) != want)
                throw ScenarioError("component " + std::to_string(c + 1) + " needs " +
                                    std::to_string(want) + " members");
            for (const auto& m : jm) comp.members.push_back(parse_expr(m));
            sc.components.push_back(std::move(comp));
        }
        return sc;
    }

    throw ScenarioError("unknown kind \"" + sc.kind + "\" (expected \"chains\" or \"irreducible\")");
}

/// Chains-kind scenario to the ChainSet the builder consumes.
inline ChainSet build_chain_set(const Scenario& sc, const Config& cfg) {
    if (sc.kind != "chains") throw ContractViolation("build_chain_set: kind must be \"chains\"");
    std::vector<std::vector<ExprPtr>> vrows = sc.potential;
    FuncPtr V = make_expr_func(std::move(vrows));
    std::vector<Chain> chains;
    for (const auto& cd : sc.chains) {
        Chain ch{cd.lambda, {}};
        if (cd.ode) {
            ch.members = chain_from_scalar(make_scalar_func(sc.potential[0][0]), cd.lambda,
                                           cd.ode_seeds, cd.x0, cfg);
        } else {
            for (const auto& vec : cd.members) {
                std::vector<std::vector<ExprPtr>> col;
                for (const auto& e : vec) col.push_back({e});
                ch.members.push_back(make_expr_func(std::move(col)));
            }
        }
        chains.push_back(std::move(ch));
    }
    return ChainSet(make_hamiltonian(std::move(V)), std::move(chains));
}

/// Irreducible-kind scenario to the stacked scalar components.
inline std::vector<ScalarChain> build_components(const Scenario& sc) {
    if (sc.kind != "irreducible")
        throw ContractViolation("build_components: kind must be \"irreducible\"");
    std::vector<ScalarChain> comps;
    for (const auto& cd : sc.components) {
        ScalarChain one;
        one.potential = make_scalar_func(cd.potential);
        one.lambda = sc.lambda0;
        for (const auto& m : cd.members) one.members.push_back(make_scalar_func(m));
        comps.push_back(std::move(one));
    }
    return comps;
}

} // namespace susym
