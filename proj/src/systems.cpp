#include "cartan/systems.hpp"

#include "cartan/errors.hpp"

namespace cartan {

namespace {

const Chart& chart() {
    static const Chart c = Chart::spacetime();
    return c;
}

DifferentialForm basis(int k) { return DifferentialForm::basis(chart(), {k}); }

bool zero(const Expr& e, const SamplingBox& box) { return is_zero(e, box).zero; }
bool zero(const DifferentialForm& w, const SamplingBox& box) { return is_zero(w, box).zero; }
bool zero(const Vector3& v, const SamplingBox& box) { return is_zero(std::span<const Expr>(v), box).zero; }

Vector3 minus(const Vector3& a, const Vector3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

/// a = −∂v/∂t − grad H
Vector3 acceleration(const Vector3& v, const Expr& h) {
    return vec::scale(-1, vec::add(vec::dt(v), vec::grad(h)));
}

DifferentialForm one_form(const Vector3& spatial, const Expr& time) {
    return spatial[0] * basis(0) + spatial[1] * basis(1) + spatial[2] * basis(2) + time * basis(3);
}

}  // namespace

namespace vec {

Vector3 cross(const Vector3& a, const Vector3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
Expr dot(const Vector3& a, const Vector3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vector3 curl(const Vector3& a) {
    return {differentiate(a[2], 1) - differentiate(a[1], 2), differentiate(a[0], 2) - differentiate(a[2], 0),
            differentiate(a[1], 0) - differentiate(a[0], 1)};
}
Expr div(const Vector3& a) { return differentiate(a[0], 0) + differentiate(a[1], 1) + differentiate(a[2], 2); }
Vector3 grad(const Expr& f) { return {differentiate(f, 0), differentiate(f, 1), differentiate(f, 2)}; }
Vector3 dt(const Vector3& a) { return {differentiate(a[0], 3), differentiate(a[1], 3), differentiate(a[2], 3)}; }
Vector3 add(const Vector3& a, const Vector3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vector3 scale(const Expr& s, const Vector3& a) { return {s * a[0], s * a[1], s * a[2]}; }

}  // namespace vec

Expr FluidSystem::hamiltonian() const { return vec::dot(v, v) / 2 + pressure; }

DifferentialForm FluidSystem::action() const { return one_form(v, -hamiltonian()); }

VectorField FluidSystem::process() const { return VectorField(chart(), {v[0], v[1], v[2], 1}); }

Vector3 EMSystem::E() const { return vec::scale(-1, vec::add(vec::dt(a), vec::grad(phi))); }

Vector3 EMSystem::B() const { return vec::curl(a); }

DifferentialForm EMSystem::action() const { return one_form(a, -phi); }

VorticityFields vorticity_fields(const FluidSystem& s, const SamplingBox& box) {
    VorticityFields out{vec::curl(s.v), acceleration(s.v, s.hamiltonian()), DifferentialForm(chart(), 2), false, false};
    const auto& w = out.omega;
    const auto& a = out.accel;
    out.F = w[2] * wedge(basis(0), basis(1)) + w[0] * wedge(basis(1), basis(2)) + w[1] * wedge(basis(2), basis(0)) +
            a[0] * wedge(basis(0), basis(3)) + a[1] * wedge(basis(1), basis(3)) + a[2] * wedge(basis(2), basis(3));
    auto induction = vec::add(vec::curl(a), vec::dt(w));
    out.induction_holds = zero(induction, box) && zero(vec::div(w), box);
    out.matches_dA = zero(out.F - exterior_derivative(s.action()), box);
    return out;
}

Vector3 euler_residual(const FluidSystem& s) {
    Vector3 w = vec::curl(s.v);
    return vec::add(minus(vec::add(vec::dt(s.v), vec::grad(vec::dot(s.v, s.v) / 2)), vec::cross(s.v, w)),
                    vec::grad(s.pressure));
}

NavierStokes navier_stokes_residual(const FluidSystem& s, const SamplingBox& box) {
    Vector3 curl_w = vec::curl(vec::curl(s.v));
    NavierStokes out{vec::add(euler_residual(s), vec::scale(s.nu, curl_w)), false, DifferentialForm(chart(), 1), false};
    out.satisfied = zero(out.residual, box);
    for (int i = 0; i < 3; ++i) {
        auto k = static_cast<std::size_t>(i);
        out.W = out.W - (s.nu * curl_w[k]) * (basis(i) - s.v[k] * basis(3));
    }
    auto w_first_law = interior(s.process(), exterior_derivative(s.action()));
    out.first_law_matches = zero(w_first_law - out.W, box);
    return out;
}

TorsionCurrent torsion_current(const FluidSystem& s, const SamplingBox& box) {
    Expr h = s.hamiltonian();
    Vector3 w = vec::curl(s.v);
    Vector3 a = acceleration(s.v, h);
    TorsionCurrent out{vec::add(vec::cross(a, s.v), vec::scale(h, w)), vec::dot(s.v, w), -2 * vec::dot(a, w), false,
                       false};
    out.balance_holds = zero(vec::div(out.T) + differentiate(out.h, 3) - out.anomaly, box);
    auto td = torsion_data(s.action(), box);
    out.matches_torsion_data = zero(minus(td.current, out.T), box) && zero(td.helicity - out.h, box);
    return out;
}

EngineeringTorsion ns_engineering_torsion(const FluidSystem& s, const SamplingBox& box) {
    Vector3 w = vec::curl(s.v);
    Expr h = vec::dot(s.v, w);
    Expr lagrangian = vec::dot(s.v, s.v) / 2 - s.pressure;
    Vector3 curl_curl = vec::curl(w);
    EngineeringTorsion out;
    out.engineering =
        minus(minus(vec::scale(h, s.v), vec::scale(lagrangian, w)), vec::scale(s.nu, vec::cross(s.v, curl_curl)));
    Expr big_h = s.hamiltonian();
    out.reference = vec::add(vec::cross(acceleration(s.v, big_h), s.v), vec::scale(big_h, w));
    out.is_solution = navier_stokes_residual(s, box).satisfied;
    if (!out.is_solution) out.warning = "velocity field does not satisfy the Navier-Stokes equations";
    out.agrees = zero(minus(out.engineering, out.reference), box);
    return out;
}

MassCurrent mass_current(const Expr& rho, const Vector3& v, const SamplingBox& box) {
    auto j = rho * wedge(wedge(basis(0) - v[0] * basis(3), basis(1) - v[1] * basis(3)), basis(2) - v[2] * basis(3));
    Expr residual = vec::div(vec::scale(rho, v)) + differentiate(rho, 3);
    MassCurrent out{j, residual, false};
    out.identity_holds = zero(exterior_derivative(j) + residual * DifferentialForm::volume(chart()), box);
    return out;
}

TorsionMassComparison compare_mass_current(const DifferentialForm& action, const Expr& rho, const Vector3& v,
                                           const SamplingBox& box) {
    auto h = wedge(action, exterior_derivative(action));
    VectorField j(chart(), {v[0], v[1], v[2], 1}, rho);
    TorsionMassComparison out{interior(j, exterior_derivative(h)), false};
    out.equals_transversal = zero(out.i_rho_v_dH - mass_current(rho, v, box).J, box);
    return out;
}

EMDiagnostics em_diagnostics(const EMSystem& s, const SamplingBox& box) {
    auto a = s.action();
    auto td = torsion_data(a, box);
    Vector3 e = s.E(), b = s.B();
    Expr eb = vec::dot(e, b);
    auto process = classify(a, td.T, box);
    auto irr = irreversibility(a, td.T, box);
    EMDiagnostics out{td, e, b, eb, false, false, false, false, false, genus_diagnostic(a, box), process, irr};
    out.parity_matches = zero(td.parity.k_time_first + 2 * eb, box) && zero(td.parity.k - 2 * eb, box);
    out.gamma_matches = zero(td.gamma - eb, box);
    Vector3 expected = vec::add(vec::cross(e, s.a), vec::scale(s.phi, b));
    out.current_matches = zero(minus(td.current, expected), box) && zero(td.helicity - vec::dot(s.a, b), box);
    out.divergence_law = zero(vec::div(td.current) + differentiate(td.helicity, 3) + 2 * eb, box);
    out.lie_identity = zero(lie_derivative(td.T, a) - td.gamma * a, box);
    return out;
}

const ParamMap& Preset::params() const {
    return std::visit([](const auto& s) -> const ParamMap& { return s.params; }, system);
}

DifferentialForm Preset::action() const {
    return std::visit([](const auto& s) { return s.action(); }, system);
}

std::vector<std::string> preset_names() {
    return {"em.plane_wave", "em.torsion_nonzero", "euler.rigid_rotation", "fluid.beltrami_abc", "ns.decaying_abc",
            "ns.decaying_shear"};
}

Preset make_preset(const std::string& name) {
    const Expr x = chart().coordinate("x"), y = chart().coordinate("y"), z = chart().coordinate("z"),
               t = chart().coordinate("t");
    Preset p;
    p.name = name;
    if (name == "euler.rigid_rotation") {
        Expr om = Expr::parameter("Omega");
        FluidSystem s{{-om * y, om * x, 0}, pow(om, 2) * (pow(x, 2) + pow(y, 2)) / 2, 0, {{"Omega", 0.7}}};
        p.description = "rigid rotation v = (-Omega y, Omega x, 0) with centripetal pressure P = Omega^2 (x^2+y^2)/2";
        p.system = s;
    } else if (name == "ns.decaying_shear") {
        Expr nu = Expr::parameter("nu"), u = Expr::parameter("U"), k = Expr::parameter("kappa");
        Expr f = u * exp(-nu * pow(k, 2) * t) * cos(k * y);
        FluidSystem s{{f, 0, 0}, 0, nu, {{"nu", 0.1}, {"U", 1.0}, {"kappa", 1.3}}};
        p.description = "decaying shear v = (U exp(-nu kappa^2 t) cos(kappa y), 0, 0), P = 0";
        p.system = s;
    } else if (name == "fluid.beltrami_abc") {
        Vector3 v{sin(z) + cos(y), sin(x) + cos(z), sin(y) + cos(x)};
        FluidSystem s{v, -vec::dot(v, v) / 2, 0, {}};
        p.description = "steady ABC Beltrami flow (curl v = v) with P = -v.v/2, so H = 0";
        p.system = s;
    } else if (name == "ns.decaying_abc") {
        Expr nu = Expr::parameter("nu");
        Expr decay = exp(-nu * t);
        Vector3 v = vec::scale(decay, {sin(z) + cos(y), sin(x) + cos(z), sin(y) + cos(x)});
        FluidSystem s{v, -vec::dot(v, v) / 2, nu, {{"nu", 0.1}}};
        p.description = "decaying ABC flow v = exp(-nu t)(sin z + cos y, sin x + cos z, sin y + cos x), P = -v.v/2";
        p.system = s;
    } else if (name == "em.plane_wave") {
        EMSystem s{{0, cos(z - t), 0}, 0, {}};
        p.description = "plane wave A = (0, cos(z - t), 0), phi = 0; E.B = 0";
        p.system = s;
    } else if (name == "em.torsion_nonzero") {
        Expr lambda = Expr::parameter("lambda"), mu = Expr::parameter("mu");
        EMSystem s{{-lambda * y, lambda * x, 0}, mu * z, {{"lambda", 1.0}, {"mu", 0.5}}};
        p.description = "A = lambda (-y, x, 0), phi = mu z; E.B = -2 lambda mu";
        p.system = s;
    } else {
        throw UsageError("unknown preset '" + name + "'");
    }
    p.box = SamplingBox::cube(4);
    p.box.params = p.params();
    const std::vector<double> origin{0, 0, 0, 0};
    p.cycles.push_back(Chain::circle(chart(), origin, 0.8, 0, 1));
    p.cycles.push_back(Chain::circle(chart(), {0.1, 0.2, 0.0, 0.3}, 0.5, 1, 2));
    p.cycles.push_back(Chain::circle(chart(), {0.0, 0.1, 0.2, 0.0}, 0.6, 0, 3));
    return p;
}

}  // namespace cartan
