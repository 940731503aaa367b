#pragma once

// Parametrized chains, quadrature of forms over them, advection along flows, and the
// integral-invariance checks built on the transport identity
//   (d/dt)|₀ ∫_{Φ_t(C)} ω = ∫_C L(V)ω.

#include <optional>
#include <string>
#include <vector>

#include "cartan/forms.hpp"

namespace cartan {

/// A smooth map from a box in parameter space into the chart. The map components are
/// expressions in which coordinate k stands for parameter k.
struct Cell {
    std::vector<Expr> map;                          // chart dimension entries
    std::vector<std::pair<double, double>> ranges;  // one per parameter
    std::vector<std::string> parameter_names;       // for printing only
    int orientation = 1;
    /// Composite rule: each range is split into this many equal panels (default 1), each
    /// integrated with the chain's Gauss-Legendre order.
    std::vector<int> panels;
};

/// One advection step applied to every point of a chain.
struct FlowSegment {
    VectorField field;
    double duration;
    ParamMap params;
};

struct AdvectionOptions {
    double tolerance = 1e-13;  // per-step local error, relative to 1 + |x|
    int max_steps = 100000;
};

class Chain {
public:
    Chain(Chart chart, int degree);

    static Chain from_cells(Chart chart, int degree, std::vector<Cell> cells, bool closed = false);

    /// Circle of the given radius in the (i, j) coordinate plane through `center`,
    /// traversed counter-clockwise `winding` times (negative winding reverses it).
    static Chain circle(Chart chart, std::vector<double> center, double radius, int i, int j, int winding = 1);
    /// Closed disk bounded by circle(center, radius, i, j).
    static Chain disk(Chart chart, std::vector<double> center, double radius, int i, int j);
    /// Round 2-sphere in the (i, j, k) coordinate 3-space, outward orientation.
    static Chain sphere2(Chart chart, std::vector<double> center, double radius, int i, int j, int k);
    /// Round 3-sphere in coordinates (0, 1, 2, 3) of a 4-chart.
    static Chain sphere3(Chart chart, std::vector<double> center, double radius);
    /// Single point (0-chain).
    static Chain point(Chart chart, std::vector<double> at);

    const Chart& chart() const { return chart_; }
    int degree() const { return degree_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<FlowSegment>& flows() const { return flows_; }
    bool closed() const { return closed_; }
    int order() const { return order_; }

    Chain& set_order(int gauss_legendre_points);
    Chain& set_closed(bool closed);
    void add_cell(Cell cell);

    /// Images of the tensor-product quadrature nodes of one cell.
    std::vector<std::vector<double>> node_images(std::size_t cell, const AdvectionOptions& = {}) const;

private:
    friend Chain advect(const Chain&, const VectorField&, double, const ParamMap&);
    friend struct ChainEvaluator;

    Chart chart_;
    int degree_;
    std::vector<Cell> cells_;
    std::vector<FlowSegment> flows_;
    int order_ = 16;
    bool closed_ = false;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int order);

struct Integral {
    double value = 0.0;
    double error_estimate = 0.0;  // |I(order) - I(2·order)|, or 0 when not requested
    double magnitude = 0.0;       // ∫|pulled-back integrand|
};

struct IntegrateOptions {
    bool estimate_error = true;
    AdvectionOptions advection;
};

/// ∫_C ω. Throws SingularityError naming the cell when the integrand is singular.
Integral integrate(const DifferentialForm& w, const Chain& c, const ParamMap& params = {},
                   const IntegrateOptions& options = {});

/// Chain whose cell maps are composed with the time-`dt` flow of V.
Chain advect(const Chain& c, const VectorField& v, double dt, const ParamMap& params = {});

enum class InvarianceMode {
    Relative,   // closed chain required; the derivative should vanish
    Absolute,   // any chain; the derivative should vanish
    Transport,  // derivative compared with ∫ L(V)ω only
};

struct InvarianceResult {
    double derivative_estimate = 0.0;
    double lie_integral = 0.0;
    double scale = 0.0;       // ∫|ω| + ∫|L(V)ω|
    double tolerance = 0.0;   // relative_tolerance · scale (with a floor)
    bool invariant = false;   // |derivative| ≤ tolerance
    double transport_error = 0.0;  // |derivative − lie| / max(|lie|, scale, 1e-9)
    bool transport_ok = false;     // transport_error ≤ transport_tolerance
    bool verdict = false;     // mode-dependent overall verdict
};

struct InvarianceOptions {
    double step = 1e-2;                  // h in the {±h, ±2h} central differences
    double relative_tolerance = 1e-6;
    double transport_tolerance = 1e-5;
    IntegrateOptions integrate{false, {}};
};

InvarianceResult invariance_check(const DifferentialForm& w, const Chain& c, const VectorField& v,
                                  InvarianceMode mode, const ParamMap& params = {},
                                  const InvarianceOptions& options = {});

/// Spot check of a declared-closed chain: ∫dφ for three seeded (p-1)-forms φ must vanish
/// relative to ∫|dφ|. Returns the largest relative boundary term.
double closedness_defect(const Chain& c, std::uint64_t seed = 1, const ParamMap& params = {});

struct PeriodSpectrum {
    std::vector<double> periods;
    std::vector<double> ratios;      // period / smallest nonzero |period|
    std::vector<double> deviations;  // |ratio − nearest integer|
    double smallest = 0.0;           // 0 if every period vanishes
};

/// Periods of a closed 1-form (or p-form) over cycles. Throws UsageError if dω ≠ 0 on box.
PeriodSpectrum period_spectrum(const DifferentialForm& w, const std::vector<Chain>& cycles,
                               const SamplingBox& box, const ParamMap& params = {},
                               double zero_threshold = 1e-9);

}  // namespace cartan
