#include "cartan/pfaff.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "cartan/errors.hpp"

namespace cartan {

namespace {

void require_one_form(const DifferentialForm& a, const char* op) {
    if (a.degree() != 1) throw UsageError(std::string(op) + ": expected a 1-form");
}

void require_four_chart(const DifferentialForm& a, const char* op) {
    require_one_form(a, op);
    if (a.chart().dimension() != 4) throw UsageError(std::string(op) + ": expected a 4-dimensional chart");
}

/// Binds every parameter of `exprs` missing from box.params to the midpoint of the free
/// parameter range.
ParamMap bound_params(const SamplingBox& box, std::span<const Expr> exprs) {
    ParamMap out = box.params;
    double mid = 0.5 * (box.free_parameter_range.first + box.free_parameter_range.second);
    for (const auto& e : exprs) {
        for (const auto& p : parameters(e)) out.emplace(p, mid);
    }
    return out;
}

/// Seeded points of the box, outside its exclusions.
std::vector<std::vector<double>> box_points(const SamplingBox& box, const ParamMap& params, int count) {
    std::mt19937_64 rng(box.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Program> excl;
    for (const auto& ex : box.exclusions) excl.emplace_back(std::span<const Expr>(&ex.indicator, 1), params);
    std::vector<std::vector<double>> out;
    int attempts = 0;
    while (static_cast<int>(out.size()) < count && attempts < 100 * count) {
        ++attempts;
        std::vector<double> p;
        for (auto [lo, hi] : box.ranges) p.push_back(std::uniform_real_distribution<double>(lo, hi)(rng));
        bool keep = true;
        for (std::size_t i = 0; i < excl.size() && keep; ++i) {
            double v = 0.0;
            try {
                excl[i].evaluate(p, std::span<double>(&v, 1));
            } catch (const SingularityError&) {
                keep = false;
                break;
            }
            if (std::fabs(v) < box.exclusions[i].threshold) keep = false;
        }
        if (keep) out.push_back(std::move(p));
    }
    return out;
}

/// T^k = (-1)^k H_{all \ k}, so that i(T)Ω = H.
std::vector<Expr> torsion_components(const DifferentialForm& h) {
    int n = h.chart().dimension();
    IndexMask all = (IndexMask{1} << n) - 1;
    std::vector<Expr> t;
    for (int k = 0; k < n; ++k) {
        Expr c = h.coefficient(all & ~(IndexMask{1} << k));
        t.push_back((k % 2) ? -c : c);
    }
    return t;
}

}  // namespace

std::string pfaff_element_name(std::size_t index) {
    // even index: A∧(dA)^m, odd index: (dA)^(m+1)
    std::size_t m = index / 2;
    std::string out;
    if (index % 2 == 0) {
        out = "A";
        for (std::size_t i = 0; i < m; ++i) out += "^dA";
    } else {
        out = "dA";
        for (std::size_t i = 0; i < m; ++i) out += "^dA";
    }
    return out;
}

PfaffSequence pfaff_sequence(const DifferentialForm& a, const SamplingBox& box,
                             const std::vector<std::vector<double>>& points, double point_tolerance) {
    require_one_form(a, "pfaff_sequence");
    int n = a.chart().dimension();
    PfaffSequence seq;
    seq.elements.push_back(a);
    while (seq.elements.back().degree() < n) {
        const auto& last = seq.elements.back();
        if (seq.elements.size() % 2 == 1) {
            seq.elements.push_back(exterior_derivative(last));
        } else {
            seq.elements.push_back(wedge(a, last));
        }
    }
    bool leading = true;
    for (const auto& e : seq.elements) {
        auto v = is_zero(e, box);
        seq.nonzero.push_back(!v.zero);
        seq.verdicts.push_back(std::move(v));
        if (leading && seq.nonzero.back()) {
            ++seq.dimension;
        } else {
            leading = false;
        }
    }
    for (const auto& p : points) seq.pointwise.push_back(pointwise_pfaff_dimension(seq, p, box.params, point_tolerance));
    return seq;
}

bool frobenius_integrable(const DifferentialForm& a, const SamplingBox& box) {
    require_one_form(a, "frobenius_integrable");
    return is_zero(wedge(a, exterior_derivative(a)), box).zero;
}

int pointwise_pfaff_dimension(const PfaffSequence& seq, std::span<const double> point, const ParamMap& params,
                              double tolerance) {
    int dim = 0;
    for (const auto& e : seq.elements) {
        std::vector<Expr> coeffs;
        for (const auto& [m, c] : e.terms()) coeffs.push_back(c);
        if (coeffs.empty()) break;
        Program prog(coeffs, params);
        std::vector<double> val(coeffs.size()), mag(coeffs.size());
        prog.evaluate_with_magnitude(point, val, mag);
        bool nonzero = false;
        for (std::size_t i = 0; i < val.size(); ++i) {
            if (std::fabs(val[i]) > tolerance * (1.0 + mag[i])) nonzero = true;
        }
        if (!nonzero) break;
        ++dim;
    }
    return dim;
}

TopologicalBase topological_base(const PfaffSequence& seq) {
    TopologicalBase base;
    for (std::size_t k = 0; k < seq.elements.size(); k += 2) {
        base.members.push_back({pfaff_element_name(k), {seq.elements[k]}});
        if (k + 1 < seq.elements.size()) {
            base.members.push_back({pfaff_element_name(k) + " u " + pfaff_element_name(k + 1),
                                    {seq.elements[k], seq.elements[k + 1]}});
        }
    }
    base.disconnected = seq.nonzero.size() > 2 && seq.nonzero[2];
    return base;
}

ParityData parity(const DifferentialForm& a, const SamplingBox& box) {
    require_four_chart(a, "parity");
    auto da = exterior_derivative(a);
    auto h = wedge(a, da);
    ParityData out{wedge(da, da), 0, 0};
    auto defect = is_zero(exterior_derivative(h) - out.K, box);
    if (!defect.zero) throw ConsistencyError("parity: dH - K is not zero");
    out.k = out.K.terms().empty() ? Expr(0) : out.K.scalar_part();
    // dt∧dx∧dy∧dz = -dx∧dy∧dz∧dt
    out.k_time_first = -out.k;
    return out;
}

TorsionData torsion_data(const DifferentialForm& a, const SamplingBox& box) {
    require_four_chart(a, "torsion_data");
    const Chart& chart = a.chart();
    auto da = exterior_derivative(a);
    TorsionData td{wedge(a, da), parity(a, box), VectorField(chart, {0, 0, 0, 0}), 0, std::nullopt, "zero", {}, 0};
    auto t = torsion_components(td.H);
    td.T = VectorField(chart, t);
    for (int k = 0; k < 3; ++k) td.current[static_cast<std::size_t>(k)] = -t[static_cast<std::size_t>(k)];
    td.helicity = -t[3];

    if (!is_zero(interior(td.T, a), box).zero) throw ConsistencyError("torsion_data: i(T)A is not zero");

    auto itda = interior(td.T, da);
    bool found = false;
    if (is_zero(itda, box).zero) {
        found = true;
    } else {
        // exact symbolic quotient on each nonzero component of A, verified on all components
        for (const auto& [m, am] : a.terms()) {
            if (is_zero(am, box).zero) continue;
            Expr candidate = simplify(itda.coefficient(m) / am);
            SamplingBox guarded = box;
            guarded.exclusions.push_back({am, 1e-6});
            ZeroVerdict v;
            try {
                v = is_zero(itda - candidate * a, guarded);
            } catch (const InconclusiveError&) {
                continue;
            }
            if (v.zero) {
                td.gamma = candidate;
                td.gamma_method = "symbolic-quotient";
                found = true;
                break;
            }
        }
    }
    if (!found) {
        // numeric fallback: pointwise ratio on the dominant component of A
        std::vector<Expr> outs;
        for (int k = 0; k < 4; ++k) outs.push_back(a.coefficient(IndexMask{1} << k));
        for (int k = 0; k < 4; ++k) outs.push_back(itda.coefficient(IndexMask{1} << k));
        ParamMap params = bound_params(box, outs);
        Program prog(outs, params);
        std::vector<double> val(8), mag(8);
        std::vector<double> weight(4, 0.0);
        int checked = 0;
        for (const auto& p : box_points(box, params, box.samples)) {
            try {
                prog.evaluate_with_magnitude(p, val, mag);
            } catch (const SingularityError&) {
                continue;
            }
            std::size_t best = 0;
            for (std::size_t k = 1; k < 4; ++k)
                if (std::fabs(val[k]) > std::fabs(val[best])) best = k;
            if (std::fabs(val[best]) <= box.tolerance * (1.0 + mag[best])) continue;
            double ratio = val[4 + best] / val[best];
            for (std::size_t k = 0; k < 4; ++k) {
                double resid = val[4 + k] - ratio * val[k];
                double scale = 1.0 + mag[4 + k] + std::fabs(ratio) * mag[k];
                if (std::fabs(resid) > 1e3 * box.tolerance * scale)
                    throw ConsistencyError("torsion_data: i(T)dA is not proportional to A");
                weight[k] += std::fabs(val[k]);
            }
            ++checked;
        }
        if (checked == 0) throw ConsistencyError("torsion_data: no sample point determines the ratio i(T)dA / A");
        auto best = static_cast<int>(std::max_element(weight.begin(), weight.end()) - weight.begin());
        IndexMask m = IndexMask{1} << best;
        td.gamma = simplify(itda.coefficient(m) / a.coefficient(m));
        td.gamma_method = "numeric";
    }

    if (!td.parity.k.is_zero_literal() && !is_zero(td.parity.k, box).zero) {
        std::vector<Expr> outs{td.gamma, td.parity.k};
        ParamMap params = bound_params(box, outs);
        Program prog(outs, params);
        std::vector<double> ratios;
        double val[2];
        for (const auto& p : box_points(box, params, box.samples)) {
            try {
                prog.evaluate(p, val);
            } catch (const SingularityError&) {
                continue;
            }
            if (std::fabs(val[1]) > 1e-9) ratios.push_back(val[0] / val[1]);
        }
        if (!ratios.empty()) {
            std::nth_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2), ratios.end());
            td.gamma_over_k = ratios[ratios.size() / 2];
        }
    }
    return td;
}

CharacteristicSpace characteristic_space(const DifferentialForm& a, std::span<const double> point,
                                         const ParamMap& params, double rank_tolerance) {
    require_one_form(a, "characteristic_space");
    int n = a.chart().dimension();
    auto da = exterior_derivative(a);
    std::vector<Expr> outs;
    std::vector<std::pair<int, int>> slots;
    for (int k = 0; k < n; ++k) outs.push_back(a.coefficient(IndexMask{1} << k));
    for (const auto& [m, c] : da.terms()) {
        auto idx = mask_indices(m);
        slots.emplace_back(idx[0], idx[1]);
        outs.push_back(c);
    }
    Program prog(outs, params);
    std::vector<double> val(outs.size());
    prog.evaluate(point, val);

    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t s = 0; s < slots.size(); ++s) {
        auto [i, j] = slots[s];
        f(i, j) = val[static_cast<std::size_t>(n) + s];
        f(j, i) = -f(i, j);
    }
    Eigen::MatrixXd stacked(n + 1, n);
    stacked.topRows(n) = f;
    for (int k = 0; k < n; ++k) stacked(n, k) = val[static_cast<std::size_t>(k)];

    auto rank_of = [&](const Eigen::JacobiSVD<Eigen::MatrixXd>& svd) {
        const auto& s = svd.singularValues();
        double cut = rank_tolerance * std::max(1.0, s.size() ? s(0) : 0.0);
        int r = 0;
        for (int i = 0; i < s.size(); ++i)
            if (s(i) > cut) ++r;
        return r;
    };

    CharacteristicSpace out;
    Eigen::JacobiSVD<Eigen::MatrixXd> fsvd(f);
    out.rank_f = rank_of(fsvd);
    out.extremal_dimension = n - out.rank_f;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
    int r = rank_of(svd);
    out.dimension = n - r;
    for (int i = 0; i < svd.singularValues().size(); ++i) out.singular_values.push_back(svd.singularValues()(i));
    const auto& v = svd.matrixV();
    for (int c = r; c < n; ++c) {
        std::vector<double> col(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) col[static_cast<std::size_t>(k)] = v(k, c);
        out.basis.push_back(std::move(col));
    }
    return out;
}

GenusReport genus_diagnostic(const DifferentialForm& a, const SamplingBox& box) {
    require_four_chart(a, "genus_diagnostic");
    const Chart& chart = a.chart();
    auto da = exterior_derivative(a);
    auto t = torsion_components(wedge(a, da));
    GenusReport out{3, true, {-t[0], -t[1], -t[2]}, DifferentialForm(chart, 2)};

    // On A = 0 the time part is φ dt = A·dr, so φF = φF_spatial + (Σ F_it dx^i) ∧ (A·dr).
    Expr phi = -a.coefficient(IndexMask{1} << 3);
    DifferentialForm f_spatial(chart, 2), e_form(chart, 1), a_spatial(chart, 1);
    for (const auto& [m, c] : da.terms()) {
        if (m & (IndexMask{1} << 3)) {
            e_form.add(m & ~(IndexMask{1} << 3), c);
        } else {
            f_spatial.add(m, c);
        }
    }
    for (int k = 0; k < 3; ++k) a_spatial.add(IndexMask{1} << k, a.coefficient(IndexMask{1} << k));
    out.two_form = phi * f_spatial + wedge(e_form, a_spatial);

    bool current_zero = is_zero(std::span<const Expr>(out.current), box).zero;
    bool two_form_zero = is_zero(out.two_form, box).zero;
    out.torsion_current_zero = current_zero && two_form_zero;
    out.genus = out.torsion_current_zero ? 3 : 2;
    return out;
}

Projectivized projectivize(const DifferentialForm& a, const SamplingBox& box) {
    require_four_chart(a, "projectivize");
    Expr lambda2 = 0;
    for (const auto& [m, c] : a.terms()) lambda2 += pow(c, 2);
    Expr lambda = sqrt(lambda2);
    if (lambda2.is_zero_literal()) throw SingularityError("projectivize: lambda vanishes identically", "0");
    ParamMap params = bound_params(box, std::span<const Expr>(&lambda2, 1));
    Program prog(std::span<const Expr>(&lambda2, 1), params);
    for (const auto& p : box_points(box, params, box.samples)) {
        double v = 0.0, mag = 0.0;
        prog.evaluate_with_magnitude(p, std::span<double>(&v, 1), std::span<double>(&mag, 1));
        if (std::fabs(v) <= box.tolerance * (1.0 + mag))
            throw SingularityError("projectivize: lambda vanishes at a sample point", to_string(lambda, a.chart().names()));
    }
    auto form = (1 / lambda) * a;
    return {form, lambda, parity(form, box)};
}

Integral euler_integral(const Projectivized& p, const Chain& chain, const ParamMap& params) {
    return integrate(p.parity.K, chain, params);
}

}  // namespace cartan
