#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "susym/errors.hpp"
#include "susym/jet.hpp"

namespace susym {

using json = nlohmann::json;

inline json cx_to_json(cx v) { return json::array({v.real(), v.imag()}); }
inline cx cx_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ScenarioError("expected complex number as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

/// Closed-form scalar function given as an expression tree.  Nodes: constants,
/// the variable x, +, *, /, integer powers, exp, sin, cos, and composition
/// with an affine argument f(a*x + b).  Evaluation produces a Jet of any
/// requested order; division by a near-zero jet throws SingularPoint.
class ScalarExpr {
public:
    using Ptr = std::shared_ptr<const ScalarExpr>;

    enum class Kind { Const, X, Add, Mul, Div, Pow, Exp, Sin, Cos, AffineCompose };

    static Ptr constant(cx v) {
        auto e = make(Kind::Const);
        e->value_ = v;
        return e;
    }
    static Ptr x() { return make(Kind::X); }
    static Ptr add(std::vector<Ptr> args) { return nary(Kind::Add, std::move(args)); }
    static Ptr mul(std::vector<Ptr> args) { return nary(Kind::Mul, std::move(args)); }
    static Ptr div(Ptr num, Ptr den, std::vector<cx> poles = {}) {
        auto e = make(Kind::Div);
        e->args_ = {std::move(num), std::move(den)};
        e->poles_ = std::move(poles);
        return e;
    }
    static Ptr pow(Ptr base, long long exponent) {
        auto e = make(Kind::Pow);
        e->args_ = {std::move(base)};
        e->exponent_ = exponent;
        return e;
    }
    static Ptr exp(Ptr arg) { return unary(Kind::Exp, std::move(arg)); }
    static Ptr sin(Ptr arg) { return unary(Kind::Sin, std::move(arg)); }
    static Ptr cos(Ptr arg) { return unary(Kind::Cos, std::move(arg)); }
    /// f(a*x + b)
    static Ptr affine_compose(Ptr f, cx a, cx b) {
        auto e = make(Kind::AffineCompose);
        e->args_ = {std::move(f)};
        e->value_ = a;
        e->shift_ = b;
        return e;
    }

    /// Polynomial sum_k coeffs[k] x^k as a tree (trailing zeros kept).
    static Ptr poly(const std::vector<cx>& coeffs) {
        std::vector<Ptr> terms;
        for (size_t k = 0; k < coeffs.size(); ++k) {
            if (coeffs[k] == cx{} && coeffs.size() > 1) continue;
            Ptr t = constant(coeffs[k]);
            if (k > 0) t = mul({t, pow(x(), static_cast<long long>(k))});
            terms.push_back(std::move(t));
        }
        if (terms.empty()) return constant(cx{});
        if (terms.size() == 1) return terms[0];
        return add(std::move(terms));
    }

    Kind kind() const { return kind_; }

    Jet eval(cx x0, int order) const {
        switch (kind_) {
            case Kind::Const: return Jet::constant(x0, order, value_);
            case Kind::X: return Jet::variable(x0, order);
            case Kind::Add: {
                Jet acc = args_[0]->eval(x0, order);
                for (size_t i = 1; i < args_.size(); ++i) acc = acc + args_[i]->eval(x0, order);
                return acc;
            }
            case Kind::Mul: {
                Jet acc = args_[0]->eval(x0, order);
                for (size_t i = 1; i < args_.size(); ++i) acc = acc * args_[i]->eval(x0, order);
                return acc;
            }
            case Kind::Div: return args_[0]->eval(x0, order) * args_[1]->eval(x0, order).inverse();
            case Kind::Pow: return jet_pow_int(args_[0]->eval(x0, order), exponent_);
            case Kind::Exp: return jet_exp(args_[0]->eval(x0, order));
            case Kind::Sin: return jet_sin_cos(args_[0]->eval(x0, order)).first;
            case Kind::Cos: return jet_sin_cos(args_[0]->eval(x0, order)).second;
            case Kind::AffineCompose: {
                // jet of f(a x + b): evaluate f at a*x0 + b, then scale
                // coefficient k by a^k.
                Jet inner = args_[0]->eval(value_ * x0 + shift_, order);
                Jet r(x0, order);
                cx p = 1.0;
                for (int k = 0; k <= order; ++k) {
                    r.set_coeff(k, inner.coeff(k) * p);
                    p *= value_;
                }
                return r;
            }
        }
        throw ContractViolation("ScalarExpr: unreachable kind");
    }

    /// Declared singular points (poles listed on division nodes), collected
    /// over the whole tree.  Used by samplers to keep clear of poles.
    void collect_singular_points(std::vector<cx>& out) const {
        for (cx p : poles_) out.push_back(p);
        for (const auto& a : args_) a->collect_singular_points(out);
    }
    std::vector<cx> singular_points() const {
        std::vector<cx> out;
        collect_singular_points(out);
        return out;
    }

    json to_json() const {
        json j;
        switch (kind_) {
            case Kind::Const:
                j["kind"] = "const";
                j["value"] = cx_to_json(value_);
                return j;
            case Kind::X:
                j["kind"] = "x";
                return j;
            case Kind::Add:
            case Kind::Mul: {
                j["kind"] = kind_ == Kind::Add ? "add" : "mul";
                json a = json::array();
                for (const auto& e : args_) a.push_back(e->to_json());
                j["args"] = std::move(a);
                return j;
            }
            case Kind::Div:
                j["kind"] = "div";
                j["num"] = args_[0]->to_json();
                j["den"] = args_[1]->to_json();
                if (!poles_.empty()) {
                    json p = json::array();
                    for (cx v : poles_) p.push_back(cx_to_json(v));
                    j["poles"] = std::move(p);
                }
                return j;
            case Kind::Pow:
                j["kind"] = "pow";
                j["base"] = args_[0]->to_json();
                j["exp"] = exponent_;
                return j;
            case Kind::Exp:
            case Kind::Sin:
            case Kind::Cos:
                j["kind"] = kind_ == Kind::Exp ? "exp" : kind_ == Kind::Sin ? "sin" : "cos";
                j["arg"] = args_[0]->to_json();
                return j;
            case Kind::AffineCompose:
                j["kind"] = "affine-compose";
                j["f"] = args_[0]->to_json();
                j["a"] = cx_to_json(value_);
                j["b"] = cx_to_json(shift_);
                return j;
        }
        throw ContractViolation("ScalarExpr: unreachable kind");
    }

    static Ptr from_json(const json& j) {
        if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
            throw ScenarioError("expression node must be an object with a \"kind\" string");
        const std::string k = j["kind"].get<std::string>();
        auto need = [&](const char* field) -> const json& {
            if (!j.contains(field))
                throw ScenarioError("expression node \"" + k + "\" missing field \"" + field + "\"");
            return j[field];
        };
        if (k == "const") return constant(cx_from_json(need("value")));
        if (k == "x") return x();
        if (k == "add" || k == "mul") {
            const json& a = need("args");
            if (!a.is_array() || a.empty())
                throw ScenarioError("\"" + k + "\" needs a non-empty args array");
            std::vector<Ptr> args;
            for (const auto& e : a) args.push_back(from_json(e));
            return k == "add" ? add(std::move(args)) : mul(std::move(args));
        }
        if (k == "div") {
            std::vector<cx> poles;
            if (j.contains("poles"))
                for (const auto& p : j["poles"]) poles.push_back(cx_from_json(p));
            return div(from_json(need("num")), from_json(need("den")), std::move(poles));
        }
        if (k == "pow") {
            const json& e = need("exp");
            if (!e.is_number_integer()) throw ScenarioError("\"pow\" exponent must be an integer");
            return pow(from_json(need("base")), e.get<long long>());
        }
        if (k == "exp") return exp(from_json(need("arg")));
        if (k == "sin") return sin(from_json(need("arg")));
        if (k == "cos") return cos(from_json(need("arg")));
        if (k == "affine-compose")
            return affine_compose(from_json(need("f")), cx_from_json(need("a")), cx_from_json(need("b")));
        throw ScenarioError("unknown expression node kind \"" + k + "\"");
    }

private:
    static std::shared_ptr<ScalarExpr> make(Kind k) {
        auto e = std::shared_ptr<ScalarExpr>(new ScalarExpr);
        e->kind_ = k;
        return e;
    }
    static Ptr unary(Kind k, Ptr arg) {
        auto e = make(k);
        e->args_ = {std::move(arg)};
        return e;
    }
    static Ptr nary(Kind k, std::vector<Ptr> args) {
        if (args.empty()) throw ContractViolation("ScalarExpr: empty argument list");
        auto e = make(k);
        e->args_ = std::move(args);
        return e;
    }

    ScalarExpr() = default;

    Kind kind_ = Kind::Const;
    cx value_{};
    cx shift_{};
    long long exponent_ = 0;
    std::vector<Ptr> args_;
    std::vector<cx> poles_;
};

using ExprPtr = ScalarExpr::Ptr;

inline ExprPtr operator+(ExprPtr a, ExprPtr b) { return ScalarExpr::add({std::move(a), std::move(b)}); }
inline ExprPtr operator*(ExprPtr a, ExprPtr b) { return ScalarExpr::mul({std::move(a), std::move(b)}); }
inline ExprPtr operator-(ExprPtr a, ExprPtr b) {
    return ScalarExpr::add({std::move(a), ScalarExpr::mul({ScalarExpr::constant(-1.0), std::move(b)})});
}
inline ExprPtr operator*(cx s, ExprPtr a) { return ScalarExpr::mul({ScalarExpr::constant(s), std::move(a)}); }

} // namespace susym
