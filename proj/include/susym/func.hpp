#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "susym/expr.hpp"
#include "susym/matrix_jet.hpp"

namespace susym {

/// Matrix-valued function of one variable, evaluable as a MatrixJet of any
/// order.  Evaluations are memoized per base point behind a mutex; since all
/// evaluators are prefix-exact, a cached higher-order jet truncates to the
/// same answer a direct lower-order evaluation would give.
class MatrixFuncBase {
public:
    MatrixFuncBase(int rows, int cols) : rows_(rows), cols_(cols) {}
    virtual ~MatrixFuncBase() = default;

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    MatrixJet eval(cx x0, int order) const {
        const std::pair<double, double> key{x0.real(), x0.imag()};
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end() && it->second.order() >= order)
                return it->second.truncated(order);
        }
        MatrixJet full = compute(x0, order);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find(key);
            if (it == cache_.end() || it->second.order() < full.order())
                cache_.insert_or_assign(key, full);
        }
        return full;
    }

    /// Declared poles to steer samplers away from.
    virtual std::vector<cx> singular_points() const { return {}; }

protected:
    virtual MatrixJet compute(cx x0, int order) const = 0;

private:
    int rows_, cols_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<double, double>, MatrixJet> cache_;
};

using FuncPtr = std::shared_ptr<const MatrixFuncBase>;

class ExprFunc final : public MatrixFuncBase {
public:
    explicit ExprFunc(std::vector<std::vector<ExprPtr>> entries)
        : MatrixFuncBase(static_cast<int>(entries.size()),
                         entries.empty() ? 0 : static_cast<int>(entries[0].size())),
          entries_(std::move(entries)) {
        for (const auto& row : entries_)
            if (static_cast<int>(row.size()) != cols())
                throw ContractViolation("ExprFunc: ragged entry matrix");
    }

    std::vector<cx> singular_points() const override {
        std::vector<cx> out;
        for (const auto& row : entries_)
            for (const auto& e : row) e->collect_singular_points(out);
        return out;
    }

protected:
    MatrixJet compute(cx x0, int order) const override {
        MatrixJet m(rows(), cols(), x0, order);
        for (int i = 0; i < rows(); ++i)
            for (int j = 0; j < cols(); ++j) m(i, j) = entries_[static_cast<size_t>(i)][static_cast<size_t>(j)]->eval(x0, order);
        return m;
    }

private:
    std::vector<std::vector<ExprPtr>> entries_;
};

class ConstFunc final : public MatrixFuncBase {
public:
    explicit ConstFunc(CMat m) : MatrixFuncBase(m.rows(), m.cols()), m_(std::move(m)) {}

protected:
    MatrixJet compute(cx x0, int order) const override {
        return MatrixJet::from_const(m_, x0, order);
    }

private:
    CMat m_;
};

class LambdaFunc final : public MatrixFuncBase {
public:
    LambdaFunc(int rows, int cols, std::function<MatrixJet(cx, int)> fn, std::vector<cx> poles = {})
        : MatrixFuncBase(rows, cols), fn_(std::move(fn)), poles_(std::move(poles)) {}

    std::vector<cx> singular_points() const override { return poles_; }

protected:
    MatrixJet compute(cx x0, int order) const override { return fn_(x0, order); }

private:
    std::function<MatrixJet(cx, int)> fn_;
    std::vector<cx> poles_;
};

class DerivFunc final : public MatrixFuncBase {
public:
    DerivFunc(FuncPtr inner, int times)
        : MatrixFuncBase(inner->rows(), inner->cols()), inner_(std::move(inner)), times_(times) {
        if (times < 0) throw ContractViolation("DerivFunc: negative derivative count");
    }

    std::vector<cx> singular_points() const override { return inner_->singular_points(); }

protected:
    MatrixJet compute(cx x0, int order) const override {
        MatrixJet m = inner_->eval(x0, order + times_);
        for (int t = 0; t < times_; ++t) m = m.derivative();
        return m;
    }

private:
    FuncPtr inner_;
    int times_;
};

class LinCombFunc final : public MatrixFuncBase {
public:
    explicit LinCombFunc(std::vector<std::pair<cx, FuncPtr>> terms)
        : MatrixFuncBase(terms.at(0).second->rows(), terms.at(0).second->cols()),
          terms_(std::move(terms)) {
        for (const auto& [c, f] : terms_)
            if (f->rows() != rows() || f->cols() != cols())
                throw ContractViolation("LinCombFunc: shape mismatch");
    }

    std::vector<cx> singular_points() const override {
        std::vector<cx> out;
        for (const auto& [c, f] : terms_)
            for (cx p : f->singular_points()) out.push_back(p);
        return out;
    }

protected:
    MatrixJet compute(cx x0, int order) const override {
        MatrixJet acc(rows(), cols(), x0, order);
        for (const auto& [c, f] : terms_) acc = acc + c * f->eval(x0, order);
        return acc;
    }

private:
    std::vector<std::pair<cx, FuncPtr>> terms_;
};

class ProdFunc final : public MatrixFuncBase {
public:
    ProdFunc(FuncPtr a, FuncPtr b)
        : MatrixFuncBase(a->rows(), b->cols()), a_(std::move(a)), b_(std::move(b)) {
        if (a_->cols() != b_->rows()) throw ContractViolation("ProdFunc: shape mismatch");
    }

    std::vector<cx> singular_points() const override {
        std::vector<cx> out = a_->singular_points();
        for (cx p : b_->singular_points()) out.push_back(p);
        return out;
    }

protected:
    MatrixJet compute(cx x0, int order) const override {
        return a_->eval(x0, order) * b_->eval(x0, order);
    }

private:
    FuncPtr a_, b_;
};

inline FuncPtr make_expr_func(std::vector<std::vector<ExprPtr>> entries) {
    return std::make_shared<ExprFunc>(std::move(entries));
}
inline FuncPtr make_scalar_func(ExprPtr e) { return make_expr_func({{std::move(e)}}); }
inline FuncPtr make_const_func(CMat m) { return std::make_shared<ConstFunc>(std::move(m)); }
inline FuncPtr make_deriv(FuncPtr f, int times = 1) {
    return std::make_shared<DerivFunc>(std::move(f), times);
}
inline FuncPtr make_lincomb(std::vector<std::pair<cx, FuncPtr>> terms) {
    return std::make_shared<LinCombFunc>(std::move(terms));
}
inline FuncPtr make_prod(FuncPtr a, FuncPtr b) {
    return std::make_shared<ProdFunc>(std::move(a), std::move(b));
}

} // namespace susym
