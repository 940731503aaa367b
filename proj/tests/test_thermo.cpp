#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cartan/errors.hpp"
#include "cartan/pfaff.hpp"
#include "cartan/thermo.hpp"
#include "corpus.hpp"

using namespace cartan;
using cartan::testing::Corpus;

namespace {

const Chart kChart = Chart::spacetime();
const Expr x = kChart.coordinate("x");
const Expr y = kChart.coordinate("y");
const Expr z = kChart.coordinate("z");
const Expr t = kChart.coordinate("t");
const Expr omega = Expr::parameter("Omega");

DifferentialForm dx(int k) { return DifferentialForm::basis(kChart, {k}); }

SamplingBox box() {
    SamplingBox b = SamplingBox::cube(4);
    b.params["Omega"] = 0.7;
    return b;
}

bool zero(const DifferentialForm& w, const SamplingBox& b = box()) { return is_zero(w, b).zero; }

/// A = v·dr − (v·v/2 + P) dt for the rigid rotation v = (−Ωy, Ωx, 0).
DifferentialForm rigid_rotation(const Expr& pressure) {
    Expr vx = -omega * y, vy = omega * x;
    Expr h = (pow(vx, 2) + pow(vy, 2)) / 2 + pressure;
    return vx * dx(0) + vy * dx(1) - h * dx(3);
}
VectorField rigid_process() { return VectorField(kChart, {-omega * y, omega * x, 0, 1}); }

DifferentialForm em_torsion() { return -y * dx(0) + x * dx(1) - z * dx(3); }

DifferentialForm harmonic() { return (1 / (pow(x, 2) + pow(y, 2))) * (y * dx(0) - x * dx(1)); }

}  // namespace

TEST_CASE("first law and transversality on corpus pairs") {
    Corpus c(61);
    for (int i = 0; i < 30; ++i) {
        auto a = c.form(kChart, 1, 2);
        auto j = c.field(kChart, 1, i % 2 == 0);
        auto law = first_law(a, j, box());
        CHECK(zero(law.Q - law.W - exterior_derivative(DifferentialForm::scalar(kChart, law.U))));
        CHECK(zero(interior(j, law.W)));
        CHECK(zero(law.Q - lie_derivative(j, a)));
    }
}

TEST_CASE("adiabatic and characteristic processes") {
    auto a = dx(2) - y * dx(0);
    // i(∂z)dA = 0 and i(∂z)A = 1
    auto r = classify(a, VectorField::basis(kChart, 2), box());
    CHECK(r.adiabatic);
    CHECK(r.extremal);
    CHECK_FALSE(r.associated);
    CHECK(r.category == ProcessCategory::Hamiltonian);
    CHECK(r.reversible);
    // ∂t lies in ker dA ∩ ker A
    auto cs = characteristic_space(a, std::vector<double>{0.1, 0.2, 0.3, 0.4});
    CHECK(cs.dimension == 1);
    CHECK(std::fabs(std::fabs(cs.basis[0][3]) - 1.0) <= 1e-12);
    auto rc = classify(a, VectorField::basis(kChart, 3), box());
    CHECK(rc.characteristic);
    CHECK(rc.adiabatic);
    CHECK(rc.category == ProcessCategory::Hamiltonian);
    CHECK_FALSE(rc.radiative);
    // the Hamiltonian verdict survives reparametrization J -> fJ
    Corpus c(62);
    for (int i = 0; i < 3; ++i) {
        Expr f = 1 + pow(c.expr(2), 2);
        auto rf = classify(a, VectorField::basis(kChart, 3).rescaled(f), box());
        CHECK(rf.category == ProcessCategory::Hamiltonian);
        CHECK(rf.characteristic);
        auto rr = classify(rigid_rotation(pow(omega, 2) * (pow(x, 2) + pow(y, 2)) / 2), rigid_process().rescaled(f), box());
        CHECK(rr.category == ProcessCategory::Hamiltonian);
    }
}

TEST_CASE("torsion process on the EM action: Q = ΓA, open and irreversible") {
    auto a = em_torsion();
    auto td = torsion_data(a, box());
    auto law = first_law(a, td.T, box());
    CHECK(zero(law.Q - td.gamma * a));
    auto r = classify(a, td.T, box());
    CHECK(r.open_flow);
    CHECK(r.irreversible);
    CHECK(r.category == ProcessCategory::Open);
    CHECK(r.radiative);
    auto irr = irreversibility(a, td.T, box());
    CHECK_FALSE(irr.reversible);
    REQUIRE(irr.torsion_cross_check.has_value());
    CHECK(*irr.torsion_cross_check);
    CHECK_FALSE(irreversibility(a, VectorField::basis(kChart, 0), box()).torsion_cross_check.has_value());
}

TEST_CASE("rigid rotation: centripetal pressure is Hamiltonian, pressure-free is Euler-Bernoulli") {
    ClassifyOptions opts;
    opts.params["Omega"] = 0.7;
    opts.cycles.push_back(Chain::circle(kChart, {0, 0, 0, 0}, 1.0, 0, 1));
    opts.cycles.push_back(Chain::circle(kChart, {0.3, 0.1, 0.2, 0}, 0.5, 0, 2));

    auto centripetal = classify(rigid_rotation(pow(omega, 2) * (pow(x, 2) + pow(y, 2)) / 2), rigid_process(), box(), opts);
    CHECK(centripetal.extremal);
    CHECK(centripetal.category == ProcessCategory::Hamiltonian);
    CHECK(centripetal.closed_flow);
    CHECK(centripetal.exact_work);

    auto free = classify(rigid_rotation(0), rigid_process(), box(), opts);
    CHECK_FALSE(free.extremal);
    CHECK(free.closed_flow);
    CHECK(free.category == ProcessCategory::EulerBernoulli);
    CHECK(free.exact_work);
    REQUIRE(free.work_periods.size() == 2);
    // W = −d(Ω²r²/2)
    Expr phi = -pow(omega, 2) * (pow(x, 2) + pow(y, 2)) / 2;
    CHECK(zero(free.law.W - exterior_derivative(DifferentialForm::scalar(kChart, phi))));
    // closed flows conserve W
    CHECK(zero(lie_derivative(rigid_process(), free.law.W)));

    auto undetermined = classify(rigid_rotation(0), rigid_process(), box());
    CHECK(undetermined.category == ProcessCategory::ClosedUndetermined);
    CHECK_FALSE(undetermined.exact_work);
}

TEST_CASE("harmonic work is Stokes") {
    SamplingBox b = box();
    b.exclusions.push_back({pow(x, 2) + pow(y, 2), 1e-4});
    ClassifyOptions opts;
    opts.cycles.push_back(Chain::circle(kChart, {0, 0, 0, 0}, 1.0, 0, 1));
    // A = t·γ, J = ∂t: W = i(∂t)(dt∧γ) = γ
    auto r = classify(t * harmonic(), VectorField::basis(kChart, 3), b, opts);
    CHECK(r.closed_flow);
    CHECK(r.category == ProcessCategory::Stokes);
    CHECK_FALSE(r.exact_work);
    REQUIRE(r.work_periods.size() == 1);
    CHECK(std::fabs(std::fabs(r.work_periods[0]) - 2 * std::numbers::pi) <= 1e-8);
}

TEST_CASE("irreversibility criterion") {
    // Q = x dy has Pfaff dimension 2 and admits an integrating factor
    auto a = t * x * dx(1);
    auto j = VectorField::basis(kChart, 3);
    auto r = classify(a, j, box());
    CHECK(zero(r.law.Q - x * dx(1)));
    CHECK(r.q_pfaff_dimension == 2);
    CHECK(r.reversible);
    CHECK(irreversibility(a, j, box()).reversible);
    // Hamiltonian processes are reversible
    Corpus c(63);
    for (int i = 0; i < 5; ++i) {
        auto phi = c.expr(2);
        auto exact = exterior_derivative(DifferentialForm::scalar(kChart, phi));
        auto v = c.field(kChart);
        CHECK(irreversibility(exact, v, box()).reversible);
    }
    // Q = dz − y dx as heat is irreversible
    auto contact = classify(t * (dx(2) - y * dx(0)), j, box(), {{}, {}, 1e-8, {{0.1, 0.2, 0.3, 0.4}}});
    CHECK(contact.irreversible);
    CHECK(contact.q_pfaff_dimension == 3);
    CHECK(contact.q_pfaff_pointwise == std::vector<int>{3});
}

TEST_CASE("second variation") {
    ClassifyOptions opts;
    opts.params["Omega"] = 0.7;
    opts.cycles.push_back(Chain::circle(kChart, {0.1, 0, 0.2, 0}, 0.8, 0, 1));
    opts.cycles.push_back(Chain::circle(kChart, {0, 0.1, 0, 0.3}, 0.6, 1, 2));
    // closed flow: R = dΓ' with Γ' = i(J)Q
    auto sv = second_variation(rigid_rotation(0), rigid_process(), box(), opts);
    CHECK(sv.closed_flow);
    CHECK(sv.exact_evidence);
    REQUIRE(sv.periods.size() == 2);
    for (double p : sv.periods) CHECK(std::fabs(p) <= 1e-10);
    CHECK(sv.q_wedge_f_matches);

    // Hamiltonian J: R = d(L(J)U)
    Corpus c(64);
    for (int i = 0; i < 5; ++i) {
        auto a = exterior_derivative(DifferentialForm::scalar(kChart, c.expr(2))) + c.expr(1) * DifferentialForm(kChart, 1);
        auto j = c.field(kChart);
        auto law = first_law(a, j, box());
        auto s = second_variation(a, j, box(), opts);
        auto lu = lie_derivative(j, DifferentialForm::scalar(kChart, law.U));
        CHECK(zero(s.R - exterior_derivative(lu)));
        CHECK(s.exact_evidence);
    }

    // open flow: torsion process on the EM action
    auto a = em_torsion();
    auto td = torsion_data(a, box());
    auto open = second_variation(a, td.T, box(), opts);
    CHECK_FALSE(open.closed_flow);
    CHECK_FALSE(zero(open.dR));
    CHECK_FALSE(open.exact_evidence);
}

TEST_CASE("usage errors") {
    CHECK_THROWS_AS(first_law(wedge(dx(0), dx(1)), VectorField::basis(kChart, 0), box()), UsageError);
    Chart c3({"x", "y", "z"});
    CHECK_THROWS_AS(first_law(dx(0), VectorField::basis(c3, 0), box()), UsageError);
}
