#pragma once

// Process analysis for an action 1-form A and a process J = ρV:
//   L(J)A = i(J)dA + d(i(J)A) = W + dU = Q,
// with classification of the work and heat 1-forms.

#include <optional>
#include <string>
#include <vector>

#include "cartan/chains.hpp"
#include "cartan/forms.hpp"

namespace cartan {

struct FirstLaw {
    DifferentialForm Q;  // heat, L(J)A
    DifferentialForm W;  // work, i(J)dA
    Expr U;              // internal energy, i(J)A
};

/// Throws ConsistencyError if W + dU − L(J)A fails the zero test.
FirstLaw first_law(const DifferentialForm& a, const VectorField& j, const SamplingBox& box);

enum class ProcessCategory {
    Hamiltonian,         // W = 0
    EulerBernoulli,      // dW = 0, every registered period of W vanishes
    Stokes,              // dW = 0, some registered period of W is nonzero
    Open,                // dW ≠ 0
    ClosedUndetermined,  // dW = 0 and W ≠ 0 but no cycles were registered
};
std::string to_string(ProcessCategory c);

struct ClassifyOptions {
    std::vector<Chain> cycles;   // registered 1-cycles for period tests
    ParamMap params;             // for period integrals
    double period_threshold = 1e-8;  // relative to max(1, ∫|W|)
    std::vector<std::vector<double>> points;  // for pointwise Pfaff dimension of Q
};

struct ProcessReport {
    FirstLaw law;
    DifferentialForm dQ;
    DifferentialForm QdQ;
    DifferentialForm R;            // L(J)Q
    int q_pfaff_dimension = 0;
    std::vector<int> q_pfaff_pointwise{};

    bool adiabatic = false;        // Q = 0
    bool closed_flow = false;      // dQ = 0
    bool open_flow = false;
    bool reversible = false;       // Q∧dQ = 0
    bool irreversible = false;
    bool associated = false;       // i(J)A = 0
    bool extremal = false;         // i(J)dA = 0
    bool characteristic = false;   // both
    bool radiative = false;        // R ≠ 0

    ProcessCategory category = ProcessCategory::Open;
    /// W = dφ on the evidence available: W = 0, or dW = 0 with no nonzero registered period.
    bool exact_work = false;
    std::vector<double> work_periods{};
    std::vector<double> work_period_scales{};// ∫|W| per cycle
};

ProcessReport classify(const DifferentialForm& a, const VectorField& j, const SamplingBox& box,
                       const ClassifyOptions& options = {});

struct Irreversibility {
    DifferentialForm QdQ;
    bool reversible = false;
    /// Set when J is the torsion vector of A: whether Q∧dQ = Γ²A∧dA.
    std::optional<bool> torsion_cross_check;
};
Irreversibility irreversibility(const DifferentialForm& a, const VectorField& j, const SamplingBox& box);

struct SecondVariation {
    DifferentialForm R;              // L(J)Q
    DifferentialForm dR;
    bool closed_flow = false;
    std::vector<double> periods;     // ∮R over registered 1-cycles
    bool exact_evidence = false;     // dR = 0 and no nonzero period found
    /// L(J)(Q∧F) compared with d(Γ'F), Γ' = i(J)Q; equal on closed flows since then R = dΓ'.
    DifferentialForm lie_q_wedge_f;
    DifferentialForm d_gamma_f;
    bool q_wedge_f_matches = false;
};
/// On closed flows, dR must vanish; a nonzero dR there raises ConsistencyError.
SecondVariation second_variation(const DifferentialForm& a, const VectorField& j, const SamplingBox& box,
                                 const ClassifyOptions& options = {});

}  // namespace cartan
