#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "susym/builder.hpp"
#include "susym/chains.hpp"
#include "susym/config.hpp"
#include "susym/errors.hpp"
#include "susym/factor.hpp"
#include "susym/scenario.hpp"
#include "susym/susy.hpp"

namespace susym {

struct RunResult {
    nlohmann::json report;
    std::string summary;
    bool pass = true;
};

namespace detail {

inline nlohmann::json jordan_json(const JordanSpec& js) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : js.entries)
        arr.push_back({{"lambda", cx_to_json(e.lambda)}, {"orders", e.orders}});
    return arr;
}

inline nlohmann::json spectral_json(const SpectralPolynomial& P) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [lam, m] : P.roots)
        arr.push_back({{"lambda", cx_to_json(lam)}, {"power", m}});
    return arr;
}

} // namespace detail

/// Requested stages in canonical execution order.  CLI override beats the
/// scenario's own list beats the default pipeline; unknown names are schema
/// errors.  Irreducible scenarios have a single fixed stage.
inline std::vector<std::string> effective_stages(const Scenario& sc,
                                                 const std::vector<std::string>& override_stages) {
    if (sc.kind == "irreducible") return {"irreducible"};
    const std::vector<std::string> stages =
        !override_stages.empty() ? override_stages
        : !sc.stages.empty()
            ? sc.stages
            : std::vector<std::string>{"build", "factorize", "minimize", "conjugate"};
    static const std::vector<std::string> known{"build",    "factorize", "theorem2",
                                               "minimize", "conjugate", "uniqueness"};
    for (const auto& s : stages)
        if (std::find(known.begin(), known.end(), s) == known.end())
            throw ScenarioError("unknown stage \"" + s + "\"");
    std::vector<std::string> ordered;
    for (const auto& k : known)
        if (std::find(stages.begin(), stages.end(), k) != stages.end()) ordered.push_back(k);
    return ordered;
}

inline RunResult run_scenario(const Scenario& sc, const Config& cfg,
                              const std::vector<std::string>& override_stages = {}) {
    const std::vector<std::string> stages = effective_stages(sc, override_stages);
    auto requested = [&](const char* s) {
        return std::find(stages.begin(), stages.end(), std::string(s)) != stages.end();
    };

    nlohmann::json results = nlohmann::json::object();
    std::vector<VerificationReport> reports;
    std::string stage_now = "setup";

    try {
    if (sc.kind == "irreducible") {
        stage_now = "irreducible";
        std::vector<ScalarChain> comps = build_components(sc);
        IrreducibleExample ex = irreducible_example(comps, sc.big_n, cfg);
        results["order"] = ex.Q.order();
        results["lambda0"] = cx_to_json(sc.lambda0);
        reports.push_back(ex.certificate);
    } else {
        stage_now = "build";
        ChainSet cs = build_chain_set(sc, cfg);
        const int n = cs.dim(), N = cs.order_n();
        results["order"] = N;

        auto [T, js] = t_matrix(cs, cfg);
        results["jordan"] = detail::jordan_json(js);

        MatDiffOperator Q = build_intertwiner(cs, cfg);
        const Hamiltonian& H_src = cs.hamiltonian();
        const Hamiltonian H_dst = partner_hamiltonian(Q, H_src);

        if (requested("build")) {
            VerificationReport rep;
            rep.stage = "build";
            rep.add("chain relations", "(H+ - l) phi_i = phi_{i-1}",
                    chain_relation_residual(cs, cfg), cfg.tol_accept);
            rep.add("kernel annihilation", "Q Phi_l = 0", kernel_residual(Q, cs, cfg),
                    cfg.tol_accept);
            rep.add("intertwining", "Q H+ - H- Q = 0",
                    intertwining_residual(Q, H_src, H_dst, cfg), cfg.tol_accept);
            reports.push_back(std::move(rep));
        }

        FactorizationChain fc;
        bool have_full_ladder = false;
        if (requested("factorize") || requested("theorem2")) {
            stage_now = "factorize";
            std::vector<int> ladder = nonvanishing_ladder(cs, cfg);
            fc = factorize(Q, cs, ladder, cfg);
            have_full_ladder = static_cast<int>(ladder.size()) == N;
            results["ladder"] = ladder;
            if (requested("factorize")) reports.push_back(factorization_report(fc, Q, cs, cfg));
        }

        if (requested("theorem2")) {
            stage_now = "theorem2";
            if (!have_full_ladder)
                throw Theorem2ConditionsFail("some intermediate Wronskian vanishes identically");
            Theorem2Conjugate tc = theorem2_conjugate(fc, cs, cfg);
            nlohmann::json lam = nlohmann::json::array();
            for (cx v : tc.lambdas) lam.push_back(cx_to_json(v));
            results["theorem2"] = {{"Nprime", tc.Qplus.order()},
                                   {"lambdas", lam},
                                   {"spectral_polynomial", detail::spectral_json(tc.P)}};
            reports.push_back(tc.report);
        }

        if (requested("minimize")) {
            stage_now = "minimize";
            MinimizationResult min = minimize_weak(Q, H_src, js, cfg);
            results["minimize"] = {{"order", min.P.order()},
                                   {"sum_delta", min.sum_delta},
                                   {"removed", detail::spectral_json(min.removed)}};
            reports.push_back(minimize_report(min, Q, H_src, cfg));
        }

        if (requested("conjugate") || requested("uniqueness")) {
            stage_now = "conjugate";
            ConjugateResult conj = conjugate_general(Q, H_src, js, cfg);
            results["Nprime"] = conj.Nprime;
            results["spectral_polynomial"] = detail::spectral_json(conj.P);
            results["jordan_minus"] = detail::jordan_json(conj.js_minus);
            if (requested("conjugate")) {
                reports.push_back(conjugate_report(conj, Q, H_src, H_dst, cfg));
                reports.push_back(det_identity_check(js, conj.js_minus, conj.P, n, cfg));
                SusyAlgebraReport alg = susy_algebra(H_src, H_dst, Q, conj.Qplus, conj.P, cfg);
                reports.push_back(alg.report);
            }
            if (requested("uniqueness")) {
                stage_now = "uniqueness";
                reports.push_back(uniqueness_check(Q, conj.Qplus, H_src, js, cfg));
            }
        }
    }
    } catch (const Error& e) {
        throw Error("stage " + stage_now + ": " + e.what());
    }

    bool pass = true;
    nlohmann::json jreports = nlohmann::json::array();
    for (const auto& r : reports) {
        pass = pass && r.passed();
        jreports.push_back(r.to_json());
    }

    RunResult out;
    out.pass = pass;
    out.report = {{"schema", 1},         {"scenario", sc.name},
                  {"kind", sc.kind},     {"n", sc.n},
                  {"seed", cfg.seed},    {"stages", stages},
                  {"results", results},  {"reports", jreports},
                  {"verdict", pass ? "pass" : "fail"}};

    std::ostringstream os;
    os << "scenario " << sc.name << "  (kind " << sc.kind << ", n=" << sc.n
       << ", seed=" << cfg.seed << ")\n";
    for (const auto& r : reports) {
        os << "-- " << r.stage << " --\n";
        os << r.summary_lines();
    }
    os << "verdict: " << (pass ? "pass" : "fail") << "\n";
    out.summary = os.str();
    return out;
}

} // namespace susym
