#pragma once

// Model systems on the (x, y, z, t) chart: kinematic fluids (Euler and Navier-Stokes) and
// electromagnetic potentials, with their derived fields, residuals and balance laws.

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "cartan/chains.hpp"
#include "cartan/pfaff.hpp"
#include "cartan/thermo.hpp"

namespace cartan {

using Vector3 = std::array<Expr, 3>;

namespace vec {
Vector3 cross(const Vector3& a, const Vector3& b);
Expr dot(const Vector3& a, const Vector3& b);
Vector3 curl(const Vector3& a);
Expr div(const Vector3& a);
Vector3 grad(const Expr& f);
Vector3 dt(const Vector3& a);
Vector3 add(const Vector3& a, const Vector3& b);
Vector3 scale(const Expr& s, const Vector3& a);
}  // namespace vec

/// Fluid with velocity v, pressure potential P_ρ = ∫dP/ρ and kinematic viscosity ν.
struct FluidSystem {
    Vector3 v;
    Expr pressure = 0;
    Expr nu = 0;
    ParamMap params;

    /// H = v·v/2 + P_ρ
    Expr hamiltonian() const;
    /// A = v·dr − H dt
    DifferentialForm action() const;
    /// V = (v, 1)
    VectorField process() const;
};

/// Potentials A⃗, φ with B = curl A⃗, E = −∂A⃗/∂t − grad φ.
struct EMSystem {
    Vector3 a;
    Expr phi = 0;
    ParamMap params;

    Vector3 E() const;
    Vector3 B() const;
    /// A = A⃗·dr − φ dt
    DifferentialForm action() const;
};

struct VorticityFields {
    Vector3 omega;      // curl v
    Vector3 accel;      // a = −∂v/∂t − grad H
    DifferentialForm F; // ω_z dx∧dy + ω_x dy∧dz + ω_y dz∧dx + a_i dx^i∧dt
    bool induction_holds = false;  // curl a + ∂ω/∂t = 0 and div ω = 0
    bool matches_dA = false;
};
VorticityFields vorticity_fields(const FluidSystem& s, const SamplingBox& box);

/// ∂v/∂t + grad(v·v/2) − v × curl v + grad P_ρ
Vector3 euler_residual(const FluidSystem& s);

struct NavierStokes {
    Vector3 residual;       // Euler residual + ν curl curl v
    bool satisfied = false;
    DifferentialForm W;     // −ν (curl ω)_i (dx^i − v^i dt)
    /// i(V)dA from the first law equals W (expected exactly when satisfied).
    bool first_law_matches = false;
};
NavierStokes navier_stokes_residual(const FluidSystem& s, const SamplingBox& box);

struct TorsionCurrent {
    Vector3 T;          // a × v + H ω
    Expr h;             // v · ω
    Expr anomaly;       // −2 a · ω
    bool balance_holds = false;        // div T + ∂h/∂t = anomaly
    bool matches_torsion_data = false; // agrees with pfaff::torsion_data's current and helicity
};
TorsionCurrent torsion_current(const FluidSystem& s, const SamplingBox& box);

struct EngineeringTorsion {
    Vector3 engineering;   // h v − L curl v − ν v × curl curl v, L = v·v/2 − P_ρ
    Vector3 reference;     // a × v + H ω
    bool is_solution = false;
    bool agrees = false;
    std::string warning;   // set when s does not satisfy the Navier-Stokes equations
};
EngineeringTorsion ns_engineering_torsion(const FluidSystem& s, const SamplingBox& box);

struct MassCurrent {
    DifferentialForm J;    // ρ (dx − vˣdt)∧(dy − vʸdt)∧(dz − vᶻdt)
    Expr residual;         // div(ρv) + ∂ρ/∂t
    bool identity_holds = false;   // dJ + residual·Ω = 0
};
MassCurrent mass_current(const Expr& rho, const Vector3& v, const SamplingBox& box);

/// i(ρV)dH for H = A∧dA, compared with the transversal current.
struct TorsionMassComparison {
    DifferentialForm i_rho_v_dH;
    bool equals_transversal = false;
};
TorsionMassComparison compare_mass_current(const DifferentialForm& action, const Expr& rho, const Vector3& v,
                                           const SamplingBox& box);

struct EMDiagnostics {
    TorsionData torsion;
    Vector3 E, B;
    Expr e_dot_b;
    bool parity_matches = false;    // k_time_first = −2E·B (and k = 2E·B)
    bool gamma_matches = false;     // Γ = E·B
    bool current_matches = false;   // current = E×A + φB, helicity = A·B
    bool divergence_law = false;    // div T + ∂h/∂t = −2E·B
    bool lie_identity = false;      // L(T)A = Γ A
    GenusReport genus;
    ProcessReport torsion_process;
    Irreversibility irreversibility;
};
EMDiagnostics em_diagnostics(const EMSystem& s, const SamplingBox& box);

struct Preset {
    std::string name;
    std::string description;
    std::variant<FluidSystem, EMSystem> system;
    /// Registered test cycles for period and invariance checks.
    std::vector<Chain> cycles;
    /// Default sampling box (unit cube with the preset parameters bound).
    SamplingBox box;

    const ParamMap& params() const;
    DifferentialForm action() const;
    bool is_fluid() const { return std::holds_alternative<FluidSystem>(system); }
};

std::vector<std::string> preset_names();
/// Throws UsageError for unknown names.
Preset make_preset(const std::string& name);

}  // namespace cartan
