#pragma once

// Seeded random generators for expressions, forms and vector fields used by the
// property tests. Every generated expression is smooth and finite on [-1.5, 1.5]^n.

#include <random>

#include "cartan/forms.hpp"

namespace cartan::testing {

class Corpus {
public:
    explicit Corpus(std::uint64_t seed, int dimension = 4) : rng_(seed), n_(dimension) {}

    int dimension() const { return n_; }
    std::mt19937_64& rng() { return rng_; }

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    Expr coordinate() { return Expr::coordinate(pick(0, n_ - 1)); }

    Expr small_constant() {
        static const double values[] = {-2, -1, -0.5, 0.5, 1, 1.5, 2, 3};
        return values[pick(0, 7)];
    }

    Expr expr(int depth = 3) {
        if (depth <= 0) return pick(0, 3) == 0 ? small_constant() : coordinate();
        switch (pick(0, 9)) {
            case 0:
            case 1: return expr(depth - 1) + expr(depth - 1);
            case 2:
            case 3: return expr(depth - 1) * expr(depth - 1);
            case 4: return pow(expr(depth - 1), pick(2, 3));
            case 5: return sin(expr(depth - 1));
            case 6: return cos(expr(depth - 1));
            case 7: return exp(expr(depth - 1) * 0.5);
            case 8: return expr(depth - 1) / (2 + pow(expr(depth - 1), 2));
            default: return ln(1 + pow(expr(depth - 1), 2));
        }
    }

    DifferentialForm form(const Chart& chart, int degree, int depth = 2) {
        DifferentialForm w(chart, degree);
        auto masks = w.basis_masks();
        for (IndexMask m : masks) {
            if (pick(0, 3) == 0) continue;
            w.set(m, expr(depth));
        }
        if (w.terms().empty() && !masks.empty()) w.set(masks[0], expr(depth));
        return w;
    }

    VectorField field(const Chart& chart, int depth = 2, bool with_support = false) {
        std::vector<Expr> comps;
        for (int k = 0; k < chart.dimension(); ++k) comps.push_back(pick(0, 4) == 0 ? Expr(0) : expr(depth));
        Expr rho = with_support ? 1 + pow(expr(1), 2) : Expr(1);
        return VectorField(chart, std::move(comps), rho);
    }

    std::vector<double> point(double lo = -1.0, double hi = 1.0) {
        std::vector<double> p(static_cast<std::size_t>(n_));
        for (auto& v : p) v = uniform(lo, hi);
        return p;
    }

private:
    std::mt19937_64 rng_;
    int n_;
};

}  // namespace cartan::testing
