#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cartan/chains.hpp"
#include "cartan/errors.hpp"
#include "corpus.hpp"

using namespace cartan;
using cartan::testing::Corpus;

namespace {

const Chart kChart = Chart::spacetime();
const Expr x = kChart.coordinate("x");
const Expr y = kChart.coordinate("y");
const Expr z = kChart.coordinate("z");
const Expr t = kChart.coordinate("t");
constexpr double kPi = std::numbers::pi;

DifferentialForm dx(int k) { return DifferentialForm::basis(kChart, {k}); }

DifferentialForm gamma_form(const Expr& sigma) {
    return (sigma / (pow(x, 2) + pow(y, 2))) * (y * dx(0) - x * dx(1));
}

const std::vector<double> kOrigin{0, 0, 0, 0};

}  // namespace

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    for (int n : {1, 2, 5, 16, 33}) {
        const auto& rule = gauss_legendre(n);
        for (int deg = 0; deg <= 2 * n - 1; ++deg) {
            double s = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], deg);
            double exact = (deg % 2) ? 0.0 : 2.0 / (deg + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(gauss_legendre(0), UsageError);
}

TEST_CASE("period of the harmonic form on the unit circle") {
    auto circle = Chain::circle(kChart, kOrigin, 1.0, 0, 1);
    auto r = integrate(gamma_form(1), circle);
    CHECK(std::fabs(r.value + 2 * kPi) <= 1e-8);
    CHECK(r.error_estimate <= 1e-10);
    auto shifted = Chain::circle(kChart, {0.2, -0.1, 0.5, 0.3}, 0.7, 0, 1);
    CHECK(std::fabs(integrate(gamma_form(Expr::parameter("sigma_z")), shifted, {{"sigma_z", 2.0}}).value + 4 * kPi) <= 1e-8);
    CHECK(std::fabs(integrate(dx(0), circle).value) <= 1e-12);
    // a cycle that does not enclose the pole
    auto outside = Chain::circle(kChart, {3, 0, 0, 0}, 1.0, 0, 1);
    CHECK(std::fabs(integrate(gamma_form(1), outside).value) <= 1e-8);
}

TEST_CASE("integration errors") {
    // an odd node count puts the middle node exactly on the pole at x = 0
    Cell cell;
    cell.map = {Expr::coordinate(0), 0, 0, 0};
    cell.ranges = {{-1.0, 1.0}};
    auto segment = Chain::from_cells(kChart, 1, {cell}).set_order(15);
    try {
        integrate((1 / x) * dx(0), segment);
        FAIL("expected a singular integrand");
    } catch (const SingularityError& e) {
        CHECK(std::string(e.what()).find("cell 0") != std::string::npos);
    }
    CHECK_THROWS_AS(integrate(wedge(dx(0), dx(1)), Chain::circle(kChart, kOrigin, 1, 0, 1)), UsageError);
    CHECK_THROWS_AS(integrate(gamma_form(Expr::parameter("s")), Chain::circle(kChart, kOrigin, 1, 0, 1)),
                    UnboundParameterError);
}

TEST_CASE("Stokes theorem on disks for random 1-forms") {
    Corpus c(41);
    for (int i = 0; i < 25; ++i) {
        auto w = c.form(kChart, 1, 2);
        std::vector<double> center = c.point(-0.3, 0.3);
        int a = c.pick(0, 3), b = (a + c.pick(1, 3)) % 4;
        auto disk = Chain::disk(kChart, center, 0.6, a, b).set_order(24);
        auto boundary = Chain::circle(kChart, center, 0.6, a, b).set_order(40);
        auto inner = integrate(exterior_derivative(w), disk);
        auto outer = integrate(w, boundary);
        double scale = std::max({1.0, inner.magnitude, outer.magnitude});
        CHECK(std::fabs(inner.value - outer.value) / scale <= 1e-8);
    }
}

TEST_CASE("quadrature convergence on smooth integrands") {
    Corpus c(42);
    for (int i = 0; i < 10; ++i) {
        auto w = c.form(kChart, 2, 2);
        auto r = integrate(w, Chain::sphere2(kChart, c.point(-0.2, 0.2), 0.5, 0, 1, 2));
        CHECK(r.error_estimate <= 1e-10 * std::max(1.0, r.magnitude));
    }
}

TEST_CASE("advection") {
    auto circle = Chain::circle(kChart, kOrigin, 1.0, 0, 1);
    VectorField zero_field(kChart, {0, 0, 0, 0});
    auto same = advect(circle, zero_field, 1.0);
    CHECK(same.node_images(0) == circle.node_images(0));

    auto shifted = advect(circle, VectorField::basis(kChart, 0), 1.0);
    auto before = circle.node_images(0), after = shifted.node_images(0);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(after[i][0] == doctest::Approx(before[i][0] + 1.0).epsilon(1e-12));
        CHECK(after[i][1] == doctest::Approx(before[i][1]).epsilon(1e-12));
    }

    VectorField rotation(kChart, {-y, x, 0, 0});
    auto rotated = advect(circle, rotation, kPi / 2);
    for (const auto& p : rotated.node_images(0)) {
        CHECK(std::hypot(p[0], p[1]) == doctest::Approx(1.0).epsilon(1e-11));
    }
    auto w = (1 + x * y) * dx(0) + pow(x, 3) * dx(1);
    CHECK(integrate(w, rotated).value == doctest::Approx(integrate(w, circle).value).epsilon(1e-10));
    // exact flow map: rotation by pi/2 sends (cos θ, sin θ) to (-sin θ, cos θ)
    auto imgs = rotated.node_images(0);
    auto orig = circle.node_images(0);
    for (std::size_t i = 0; i < imgs.size(); ++i) {
        CHECK(imgs[i][0] == doctest::Approx(-orig[i][1]).epsilon(1e-10).scale(1));
        CHECK(imgs[i][1] == doctest::Approx(orig[i][0]).epsilon(1e-10).scale(1));
    }

    // blow-up: ẋ = x^2 from x = 1 leaves every bounded region at t = 1
    VectorField blowup(kChart, {pow(x, 2), 0, 0, 0});
    auto pt = Chain::point(kChart, {1, 0, 0, 0});
    CHECK_THROWS_AS(integrate(DifferentialForm::scalar(kChart, x), advect(pt, blowup, 2.0)), AdvectionError);
}

TEST_CASE("transport identity on corpus triples") {
    Corpus c(43);
    for (int i = 0; i < 12; ++i) {
        int p = 1 + i % 2;
        auto w = c.form(kChart, p, 2);
        auto v = c.field(kChart, 1, i % 3 == 0);
        Chain chain = p == 1 ? Chain::circle(kChart, c.point(-0.3, 0.3), 0.5, 0, 1 + i % 3)
                             : Chain::disk(kChart, c.point(-0.3, 0.3), 0.5, i % 4, (i + 1) % 4);
        auto r = invariance_check(w, chain, v, InvarianceMode::Transport);
        CHECK_MESSAGE(r.transport_ok, "error " << r.transport_error);
    }
}

TEST_CASE("relative invariance: closed 2-form over a closed 2-cycle is invariant") {
    Corpus c(44);
    for (int i = 0; i < 5; ++i) {
        auto a = c.form(kChart, 1, 2);
        auto v = c.field(kChart, 1);
        auto s = Chain::sphere2(kChart, c.point(-0.2, 0.2), 0.5, 0, 1, 3);
        auto r = invariance_check(exterior_derivative(a), s, v, InvarianceMode::Relative);
        CHECK(r.invariant);
        CHECK(r.transport_ok);
    }
    // a non-closed 2-form drifts
    auto s = Chain::sphere2(kChart, kOrigin, 0.5, 0, 1, 2);
    // ∫ z dx∧dy is the enclosed volume, which the stretching x∂x changes
    VectorField stretch(kChart, {x, 0, 0, 0});
    auto r = invariance_check(z * wedge(dx(0), dx(1)), s, stretch, InvarianceMode::Relative);
    CHECK(r.derivative_estimate == doctest::Approx(4.0 / 3.0 * kPi * 0.125).epsilon(1e-9));
    CHECK_FALSE(r.invariant);
    CHECK(r.transport_ok);
    CHECK_THROWS_AS(invariance_check(x * dx(0), Chain::disk(kChart, kOrigin, 1, 0, 1), VectorField::basis(kChart, 0),
                                     InvarianceMode::Relative),
                    UsageError);
}

TEST_CASE("closedness spot check") {
    CHECK(closedness_defect(Chain::circle(kChart, kOrigin, 1, 0, 1)) <= 1e-12);
    CHECK(closedness_defect(Chain::sphere2(kChart, kOrigin, 1, 0, 1, 2)) <= 1e-10);
    CHECK(closedness_defect(Chain::sphere3(kChart, kOrigin, 1)) <= 1e-8);
    CHECK(closedness_defect(Chain::disk(kChart, kOrigin, 1, 0, 1)) > 1e-3);
}

TEST_CASE("period spectrum") {
    SamplingBox box = SamplingBox::cube(4);
    box.exclusions.push_back({pow(x, 2) + pow(y, 2), 1e-4});
    std::vector<Chain> cycles;
    for (int w = 1; w <= 3; ++w) cycles.push_back(Chain::circle(kChart, kOrigin, 1.0, 0, 1, w));
    auto spec = period_spectrum(gamma_form(1), cycles, box);
    REQUIRE(spec.periods.size() == 3);
    CHECK(spec.smallest == doctest::Approx(2 * kPi).epsilon(1e-10));
    for (int w = 1; w <= 3; ++w) {
        CHECK(std::fabs(spec.ratios[static_cast<std::size_t>(w - 1)] + w) <= 1e-8);
        CHECK(spec.deviations[static_cast<std::size_t>(w - 1)] <= 1e-8);
    }
    // two-function format with φ = x, χ = y: the same family up to orientation
    auto two_function = (1 / (pow(x, 2) + pow(y, 2))) * (x * dx(1) - y * dx(0));
    auto spec2 = period_spectrum(two_function, cycles, box);
    for (std::size_t i = 0; i < 3; ++i) CHECK(spec2.periods[i] == doctest::Approx(-spec.periods[i]).epsilon(1e-10));
    // exact form: all periods vanish
    auto exact = exterior_derivative(DifferentialForm::scalar(kChart, sin(x) * y));
    auto spec3 = period_spectrum(exact, cycles, box);
    CHECK(spec3.smallest == 0.0);
    for (double p : spec3.periods) CHECK(std::fabs(p) <= 1e-10);
    CHECK_THROWS_AS(period_spectrum(x * dx(1), cycles, box), UsageError);
}
