#pragma once

// Differential forms on a chart and the Cartan operations d, ∧, i(V), L(V).
//
// A p-form stores one coefficient per strictly increasing index tuple, encoded as a
// bitmask (bit k set <=> dx^k present). Basis elements are ordered ascending, so the
// volume form of the (x, y, z, t) chart is dx∧dy∧dz∧dt.

#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include "cartan/expr.hpp"

namespace cartan {

using IndexMask = std::uint32_t;

/// Indices set in `mask`, ascending.
std::vector<int> mask_indices(IndexMask mask);
IndexMask indices_mask(std::span<const int> indices);

class DifferentialForm {
public:
    DifferentialForm(Chart chart, int degree);

    static DifferentialForm scalar(Chart chart, Expr f);
    /// Σ a_k dx^k.
    static DifferentialForm one_form(Chart chart, std::span<const Expr> components);
    /// dx^{i1}∧...∧dx^{ip} in the given order (sign applied when the order is not ascending).
    static DifferentialForm basis(Chart chart, std::initializer_list<int> indices);
    /// dx^0∧...∧dx^{n-1}.
    static DifferentialForm volume(Chart chart);

    const Chart& chart() const { return chart_; }
    int degree() const { return degree_; }
    const std::map<IndexMask, Expr>& terms() const { return terms_; }

    /// Coefficient of the ascending basis element `mask` (zero when absent).
    Expr coefficient(IndexMask mask) const;
    /// Coefficient of dx^{i1}∧...∧dx^{ip} for an arbitrary index order.
    Expr coefficient(std::initializer_list<int> indices) const;
    /// The lone coefficient of a 0-form or of a top-degree form.
    Expr scalar_part() const;

    /// Adds `c` to the coefficient of `mask`; zero results are dropped.
    void add(IndexMask mask, const Expr& c);
    void set(IndexMask mask, const Expr& c);

    /// Coefficients in ascending mask order, one per basis element of this degree,
    /// including zeros. Size C(n, p).
    std::vector<Expr> dense() const;
    std::vector<IndexMask> basis_masks() const;

    DifferentialForm simplified() const;
    DifferentialForm substituted(std::string_view parameter, const Expr& value) const;

    friend DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b);
    friend DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b);
    friend DifferentialForm operator-(const DifferentialForm& a);
    friend DifferentialForm operator*(const Expr& f, const DifferentialForm& a);

private:
    Chart chart_;
    int degree_;
    std::map<IndexMask, Expr> terms_;
};

/// Renders e.g. "x*dy^dz - dx^dt"; "0" for the zero form.
std::string to_string(const DifferentialForm& w);

/// Vector field on a chart. The process is J = support · (components).
struct VectorField {
    Chart chart;
    std::vector<Expr> components;
    Expr support = 1;

    VectorField(Chart c, std::vector<Expr> comps, Expr rho = 1);
    static VectorField basis(Chart c, int k);

    /// support · components[k]
    Expr effective(int k) const;
    std::vector<Expr> effective() const;
    /// Same direction field with support multiplied by f.
    VectorField rescaled(const Expr& f) const;
};

DifferentialForm exterior_derivative(const DifferentialForm& w);
DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm interior(const VectorField& v, const DifferentialForm& w);
/// L(J)ω = i(J)dω + d i(J)ω, with J including its support function.
DifferentialForm lie_derivative(const VectorField& j, const DifferentialForm& w);

/// Splits Z − dQ for the process ρv acting on Σ, where Q = L(ρv)Σ and Z = L(ρv)dΣ.
/// `rescaling` = dρ∧i(v)Σ is the degree-p term separating L(ρv)Σ from ρL(v)Σ;
/// `residual` = ρ·d d(i(v)Σ) is the degree-(p+1) term, which vanishes for smooth
/// coefficients. Z − dQ equals `residual` exactly.
struct Excess {
    DifferentialForm rescaling;
    DifferentialForm residual;
};
Excess excess_function(const Expr& rho, const VectorField& v, const DifferentialForm& sigma);

/// Joint zero test over every coefficient.
ZeroVerdict is_zero(const DifferentialForm& w, const SamplingBox& box);

/// Evaluates each coefficient listed by `masks` at `point`.
std::vector<double> evaluate(const DifferentialForm& w, std::span<const IndexMask> masks,
                             std::span<const double> point, const ParamMap& params = {});

}  // namespace cartan
