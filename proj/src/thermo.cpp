#include "cartan/thermo.hpp"

#include <algorithm>
#include <cmath>

#include "cartan/errors.hpp"
#include "cartan/pfaff.hpp"

namespace cartan {

namespace {

bool zero(const DifferentialForm& w, const SamplingBox& box) { return is_zero(w, box).zero; }

void require_one_form(const DifferentialForm& a, const VectorField& j, const char* op) {
    if (a.degree() != 1) throw UsageError(std::string(op) + ": expected a 1-form");
    if (!(a.chart() == j.chart)) throw UsageError(std::string(op) + ": form and process live on different charts");
}

/// Periods of a 1-form over the registered 1-cycles, with their ∫|w| scales.
void periods_of(const DifferentialForm& w, const ClassifyOptions& options, std::vector<double>& periods,
                std::vector<double>& scales) {
    for (const auto& c : options.cycles) {
        if (c.degree() != w.degree()) continue;
        auto r = integrate(w, c, options.params, {false, {}});
        periods.push_back(r.value);
        scales.push_back(r.magnitude);
    }
}

bool all_vanish(const std::vector<double>& periods, const std::vector<double>& scales, double threshold) {
    for (std::size_t i = 0; i < periods.size(); ++i)
        if (std::fabs(periods[i]) > threshold * std::max(1.0, scales[i])) return false;
    return true;
}

}  // namespace

FirstLaw first_law(const DifferentialForm& a, const VectorField& j, const SamplingBox& box) {
    require_one_form(a, j, "first_law");
    FirstLaw law{DifferentialForm(a.chart(), 1), interior(j, exterior_derivative(a)), 0};
    auto ia = interior(j, a);
    law.U = ia.terms().empty() ? Expr(0) : ia.scalar_part();
    law.Q = law.W + exterior_derivative(ia);
    if (!zero(law.Q - lie_derivative(j, a), box)) throw ConsistencyError("first_law: W + dU differs from L(J)A");
    return law;
}

std::string to_string(ProcessCategory c) {
    switch (c) {
        case ProcessCategory::Hamiltonian: return "hamiltonian";
        case ProcessCategory::EulerBernoulli: return "euler-bernoulli";
        case ProcessCategory::Stokes: return "stokes";
        case ProcessCategory::Open: return "open";
        case ProcessCategory::ClosedUndetermined: return "closed (exactness undetermined)";
    }
    return "unknown";
}

ProcessReport classify(const DifferentialForm& a, const VectorField& j, const SamplingBox& box,
                       const ClassifyOptions& options) {
    require_one_form(a, j, "classify");
    ProcessReport r{first_law(a, j, box), DifferentialForm(a.chart(), 2), DifferentialForm(a.chart(), 3),
                    DifferentialForm(a.chart(), 1)};
    const auto& q = r.law.Q;
    r.dQ = exterior_derivative(q);
    r.QdQ = wedge(q, r.dQ);
    r.R = lie_derivative(j, q);

    auto seq = pfaff_sequence(q, box, options.points);
    r.q_pfaff_dimension = seq.dimension;
    r.q_pfaff_pointwise = seq.pointwise;

    r.adiabatic = !seq.nonzero.empty() && !seq.nonzero[0];
    r.closed_flow = zero(r.dQ, box);
    r.open_flow = !r.closed_flow;
    r.reversible = zero(r.QdQ, box);
    r.irreversible = !r.reversible;
    r.associated = is_zero(r.law.U, box).zero;
    r.extremal = zero(r.law.W, box);
    r.characteristic = r.associated && r.extremal;
    r.radiative = !zero(r.R, box);

    if (r.extremal) {
        r.category = ProcessCategory::Hamiltonian;
        r.exact_work = true;
    } else if (zero(exterior_derivative(r.law.W), box)) {
        periods_of(r.law.W, options, r.work_periods, r.work_period_scales);
        if (r.work_periods.empty()) {
            r.category = ProcessCategory::ClosedUndetermined;
        } else if (all_vanish(r.work_periods, r.work_period_scales, options.period_threshold)) {
            r.category = ProcessCategory::EulerBernoulli;
            r.exact_work = true;
        } else {
            r.category = ProcessCategory::Stokes;
        }
    } else {
        r.category = ProcessCategory::Open;
    }
    return r;
}

Irreversibility irreversibility(const DifferentialForm& a, const VectorField& j, const SamplingBox& box) {
    require_one_form(a, j, "irreversibility");
    auto q = lie_derivative(j, a);
    Irreversibility out{wedge(q, exterior_derivative(q)), false, std::nullopt};
    out.reversible = zero(out.QdQ, box);
    if (a.chart().dimension() == 4) {
        auto h = wedge(a, exterior_derivative(a));
        // T^k = (-1)^k H_{all \ k}
        bool is_torsion = true;
        for (int k = 0; k < 4 && is_torsion; ++k) {
            Expr tk = h.coefficient(IndexMask{15} & ~(IndexMask{1} << k));
            if (k % 2) tk = -tk;
            is_torsion = is_zero(j.effective(k) - tk, box).zero;
        }
        if (is_torsion) {
            auto td = torsion_data(a, box);
            out.torsion_cross_check = zero(out.QdQ - pow(td.gamma, 2) * td.H, box);
        }
    }
    return out;
}

SecondVariation second_variation(const DifferentialForm& a, const VectorField& j, const SamplingBox& box,
                                 const ClassifyOptions& options) {
    require_one_form(a, j, "second_variation");
    auto q = lie_derivative(j, a);
    auto f = exterior_derivative(a);
    SecondVariation sv{lie_derivative(j, q), DifferentialForm(a.chart(), 2), false, {}, false,
                       DifferentialForm(a.chart(), 3), DifferentialForm(a.chart(), 3), false};
    sv.dR = exterior_derivative(sv.R);
    sv.closed_flow = zero(exterior_derivative(q), box);
    bool dr_zero = zero(sv.dR, box);
    if (sv.closed_flow && !dr_zero) throw ConsistencyError("second_variation: dR is nonzero on a closed flow");
    std::vector<double> scales;
    periods_of(sv.R, options, sv.periods, scales);
    sv.exact_evidence = dr_zero && all_vanish(sv.periods, scales, options.period_threshold);

    sv.lie_q_wedge_f = lie_derivative(j, wedge(q, f));
    auto iq = interior(j, q);
    Expr gamma_prime = iq.terms().empty() ? Expr(0) : iq.scalar_part();
    sv.d_gamma_f = exterior_derivative(gamma_prime * f);
    sv.q_wedge_f_matches = zero(sv.lie_q_wedge_f - sv.d_gamma_f, box);
    return sv;
}

}  // namespace cartan
