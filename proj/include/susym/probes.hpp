#pragma once

#include <vector>

#include "susym/func.hpp"

namespace susym {

/// Smooth scalar profiles used to compare operators by application: two
/// polynomials, two Gaussian-type envelopes, two trigonometric waves.  All
/// entire, so jets of any order exist everywhere.
inline std::vector<ExprPtr> probe_profiles() {
    using E = ScalarExpr;
    const ExprPtr x = E::x();
    std::vector<ExprPtr> p;
    p.push_back(E::poly({cx{-1.0}, cx{0.0}, cx{1.0}}));                       // x^2 - 1
    p.push_back(E::poly({cx{0.5}, cx{-1.0}, cx{0.0}, cx{0.25}}));             // cubic
    p.push_back(E::exp(cx{-0.5} * E::pow(x, 2)));                             // Gaussian
    p.push_back(E::mul({x, E::exp(cx{-0.25} * E::pow(x, 2))}));               // odd envelope
    p.push_back(E::sin(E::affine_compose(E::x(), cx{2.0}, cx{0.3})));         // sin(2x + 0.3)
    p.push_back(E::cos(x));
    return p;
}

/// Battery of 6 vector probes in dimension n.  Component c of probe j uses
/// profile (j + c) mod 6 with a small component-dependent weight so no two
/// components coincide.
inline std::vector<FuncPtr> probe_battery(int n) {
    const auto profiles = probe_profiles();
    std::vector<FuncPtr> battery;
    for (int j = 0; j < 6; ++j) {
        std::vector<std::vector<ExprPtr>> col;
        col.reserve(static_cast<size_t>(n));
        for (int c = 0; c < n; ++c) {
            const cx w{1.0 + 0.3 * c, 0.1 * c};
            col.push_back({w * profiles[static_cast<size_t>((j + c) % 6)]});
        }
        battery.push_back(make_expr_func(std::move(col)));
    }
    return battery;
}

} // namespace susym
