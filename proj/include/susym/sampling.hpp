#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "susym/errors.hpp"
#include "susym/jet.hpp"

namespace susym {

/// Deterministic sample-point stream on a real window.  Raw 64-bit draws are
/// mapped to doubles by hand so streams are identical across platforms
/// (std::uniform_real_distribution is not pinned by the standard).
class SampleStream {
public:
    SampleStream(std::uint64_t seed, std::array<double, 2> window)
        : rng_(seed), lo_(window[0]), hi_(window[1]) {
        if (!(lo_ < hi_)) throw ContractViolation("SampleStream: empty window");
    }

    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double next() { return lo_ + (hi_ - lo_) * unit(); }

    cx next_complex(double re_lo, double re_hi, double im_lo, double im_hi) {
        const double re = re_lo + (re_hi - re_lo) * unit();
        const double im = im_lo + (im_hi - im_lo) * unit();
        return {re, im};
    }

    /// Draw points keeping a minimum distance from declared singular points
    /// (only those near the real axis matter).
    std::vector<double> draw_avoiding(int count, const std::vector<cx>& avoid,
                                      double min_dist = 1e-2, int max_tries = 1000) {
        std::vector<double> pts;
        pts.reserve(static_cast<size_t>(count));
        for (int i = 0; i < count; ++i) {
            bool ok = false;
            for (int t = 0; t < max_tries && !ok; ++t) {
                const double x = next();
                ok = true;
                for (cx p : avoid)
                    if (std::abs(cx{x, 0.0} - p) < min_dist) { ok = false; break; }
                if (ok) pts.push_back(x);
            }
            if (!ok) throw PoleCluster("could not place sample points clear of declared poles");
        }
        return pts;
    }

private:
    std::mt19937_64 rng_;
    double lo_, hi_;
};

/// Max of f over `count` sample points, redrawing (up to a retry budget) any
/// point where evaluation lands on a pole of procedural coefficients.
template <typename F>
double max_over_resampled(F&& f, const std::vector<cx>& avoid, int count, std::uint64_t seed,
                          std::array<double, 2> window, int retries) {
    SampleStream stream(seed, window);
    double worst = 0.0;
    int used = 0, skipped = 0;
    while (used < count) {
        double x;
        try {
            x = stream.draw_avoiding(1, avoid).at(0);
            worst = std::max(worst, f(x));
            ++used;
        } catch (const SingularWronskian&) {
            if (++skipped > retries)
                throw PoleCluster("sample points keep landing on coefficient poles");
        } catch (const SingularPoint&) {
            if (++skipped > retries)
                throw PoleCluster("sample points keep landing on coefficient poles");
        }
    }
    return worst;
}

inline std::vector<double> uniform_grid(std::array<double, 2> window, int points) {
    std::vector<double> g;
    g.reserve(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i)
        g.push_back(window[0] + (window[1] - window[0]) * (points == 1 ? 0.5 : static_cast<double>(i) / (points - 1)));
    return g;
}

} // namespace susym
