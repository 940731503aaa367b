#pragma once

// Topological anatomy of a single action 1-form A: the Pfaff sequence
// {A, dA, A∧dA, dA∧dA, ...}, Frobenius integrability, the Cartan topological base,
// torsion vector and parity, characteristic spaces, the genus dichotomy and the
// projectivized form.
//
// Orientation: Ω = dx^0∧...∧dx^{n-1}, i.e. dx∧dy∧dz∧dt on the spacetime chart. Many
// published component lists use the time-first volume dt∧dx∧dy∧dz = −Ω; parity data
// carries the coefficient relative to both.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cartan/chains.hpp"
#include "cartan/forms.hpp"

namespace cartan {

struct PfaffSequence {
    std::vector<DifferentialForm> elements;  // A, dA, A∧dA, dA∧dA, ... (degree ≤ n)
    std::vector<bool> nonzero;
    std::vector<ZeroVerdict> verdicts;
    int dimension = 0;                       // leading nonzero elements over the box
    std::vector<int> pointwise;              // same count at each caller-supplied point
};

/// Element names in sequence order: "A", "dA", "A^dA", "dA^dA", "A^dA^dA", ...
std::string pfaff_element_name(std::size_t index);

PfaffSequence pfaff_sequence(const DifferentialForm& a, const SamplingBox& box,
                             const std::vector<std::vector<double>>& points = {},
                             double point_tolerance = 1e-12);

/// True iff A∧dA vanishes on the box.
bool frobenius_integrable(const DifferentialForm& a, const SamplingBox& box);

/// Pointwise Pfaff dimension: leading elements with a coefficient above
/// tolerance·(1 + magnitude) at `point`.
int pointwise_pfaff_dimension(const PfaffSequence& seq, std::span<const double> point, const ParamMap& params,
                              double tolerance = 1e-12);

/// Base of the Cartan topology: each odd element with its closure {e, e ∪ de}.
struct TopologicalBase {
    struct Member {
        std::string name;                        // e.g. "A", "A u dA"
        std::vector<DifferentialForm> forms;
    };
    std::vector<Member> members;
    bool disconnected = false;                   // A∧dA ≠ 0
};
TopologicalBase topological_base(const PfaffSequence& seq);

struct ParityData {
    DifferentialForm K;
    Expr k;              // K = k·Ω
    Expr k_time_first;   // K = k_time_first · dt∧dx∧dy∧dz
};
/// dA∧dA on a 4-chart. Throws ConsistencyError if d(A∧dA) − K fails the zero test.
ParityData parity(const DifferentialForm& a, const SamplingBox& box);

struct TorsionData {
    DifferentialForm H;          // A∧dA
    ParityData parity;
    VectorField T;               // i(T)Ω = H
    Expr gamma;                  // i(T)dA = Γ·A
    std::optional<double> gamma_over_k;  // sampled Γ/k, absent when k ≡ 0
    std::string gamma_method;    // "zero", "symbolic-quotient" or "numeric"
    /// Spatial torsion current and helicity density in the layout where the EM action
    /// gives E×A + φB and A·B: current = −(T¹, T², T³), helicity = −T⁴.
    std::array<Expr, 3> current;
    Expr helicity;
};

/// Requires a 4-chart 1-form. Verifies i(T)A = 0, i(T)dA = ΓA and dH = K before
/// returning; throws ConsistencyError otherwise.
TorsionData torsion_data(const DifferentialForm& a, const SamplingBox& box);

struct CharacteristicSpace {
    std::vector<std::vector<double>> basis;  // orthonormal, characteristic vectors
    int dimension = 0;                       // dim(ker F ∩ ker A)
    int extremal_dimension = 0;              // dim(ker F)
    int rank_f = 0;
    std::vector<double> singular_values;     // of [F; A]
};
/// Null space of F_μν(point) intersected with the kernel of A(point).
CharacteristicSpace characteristic_space(const DifferentialForm& a, std::span<const double> point,
                                         const ParamMap& params = {}, double rank_tolerance = 1e-10);

struct GenusReport {
    int genus = 3;
    bool torsion_current_zero = true;
    std::array<Expr, 3> current;
    DifferentialForm two_form;   // φ F_spatial + (Σ F_it dx^i) ∧ (Σ A_j dx^j), free of dt
};
/// Genus of the Pfaff system A = 0, F = 0 on a 4-chart with time last: 3 when the
/// torsion current vanishes, 2 otherwise.
GenusReport genus_diagnostic(const DifferentialForm& a, const SamplingBox& box);

struct Projectivized {
    DifferentialForm form;       // A / λ
    Expr lambda;                 // sqrt(Σ A_μ²)
    ParityData parity;           // of A / λ
};
/// Throws SingularityError when λ vanishes (or nearly so) at a sample of the box.
Projectivized projectivize(const DifferentialForm& a, const SamplingBox& box);
/// ∫ K' over a 4-chain, without normalization constant.
Integral euler_integral(const Projectivized& p, const Chain& chain, const ParamMap& params = {});

}  // namespace cartan
