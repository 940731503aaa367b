#include "cartan/chains.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "cartan/errors.hpp"

namespace cartan {

namespace {

double det(std::vector<double> a, int n) {
    double d = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r) {
            if (std::fabs(a[static_cast<std::size_t>(r * n + c)]) > std::fabs(a[static_cast<std::size_t>(piv * n + c)])) piv = r;
        }
        double pv = a[static_cast<std::size_t>(piv * n + c)];
        if (pv == 0.0) return 0.0;
        if (piv != c) {
            for (int k = 0; k < n; ++k) std::swap(a[static_cast<std::size_t>(c * n + k)], a[static_cast<std::size_t>(piv * n + k)]);
            d = -d;
        }
        d *= pv;
        for (int r = c + 1; r < n; ++r) {
            double f = a[static_cast<std::size_t>(r * n + c)] / pv;
            for (int k = c + 1; k < n; ++k) a[static_cast<std::size_t>(r * n + k)] -= f * a[static_cast<std::size_t>(c * n + k)];
        }
    }
    return d;
}

std::vector<Expr> centered(const std::vector<double>& center, int n) {
    if (static_cast<int>(center.size()) != n) throw UsageError("center has the wrong number of coordinates");
    std::vector<Expr> m;
    for (double c : center) m.push_back(c);
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadrature rule

const GaussLegendre& gauss_legendre(int order) {
    if (order < 1 || order > 256) throw UsageError("quadrature order must be in [1, 256]");
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(order); it != cache.end()) return it->second;
    GaussLegendre rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double xi = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = xi;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
            double step = p1 / dp;
            xi -= step;
            if (std::fabs(step) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - xi * xi) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -xi;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = xi;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return cache.emplace(order, std::move(rule)).first->second;
}

// Composite Gauss-Legendre nodes and weights for one parameter axis.
struct AxisRule {
    std::vector<double> u;
    std::vector<double> w;
};

AxisRule axis_rule(std::pair<double, double> range, int panels, int order) {
    const auto& rule = gauss_legendre(order);
    AxisRule out;
    double width = (range.second - range.first) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = range.first + p * width;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            out.u.push_back(lo + 0.5 * width * (1.0 + rule.nodes[i]));
            out.w.push_back(0.5 * width * rule.weights[i]);
        }
    }
    return out;
}

// Visits the tensor-product nodes of a cell: fn(u, weight).
template <class Fn>
void for_each_node(const Cell& cell, int order, Fn&& fn) {
    std::vector<AxisRule> axes;
    for (std::size_t k = 0; k < cell.ranges.size(); ++k) axes.push_back(axis_rule(cell.ranges[k], cell.panels[k], order));
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.u.size();
    std::vector<double> u(axes.size());
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        double w = 1.0;
        for (std::size_t k = 0; k < axes.size(); ++k) {
            std::size_t j = rem % axes[k].u.size();
            rem /= axes[k].u.size();
            u[k] = axes[k].u[j];
            w *= axes[k].w[j];
        }
        fn(std::span<const double>(u), w);
    }
}

// ---------------------------------------------------------------------------
// Chain construction

Chain::Chain(Chart chart, int degree) : chart_(std::move(chart)), degree_(degree) {
    if (degree < 0 || degree > chart_.dimension()) throw UsageError("chain degree out of range");
}

Chain Chain::from_cells(Chart chart, int degree, std::vector<Cell> cells, bool closed) {
    Chain c(std::move(chart), degree);
    for (auto& cell : cells) c.add_cell(std::move(cell));
    c.closed_ = closed;
    return c;
}

void Chain::add_cell(Cell cell) {
    if (static_cast<int>(cell.map.size()) != chart_.dimension()) {
        throw UsageError("cell map has " + std::to_string(cell.map.size()) + " components on a " +
                         std::to_string(chart_.dimension()) + "-chart");
    }
    if (static_cast<int>(cell.ranges.size()) != degree_) throw UsageError("cell needs one range per parameter");
    if (cell.orientation != 1 && cell.orientation != -1) throw UsageError("orientation must be +1 or -1");
    for (const auto& m : cell.map) {
        if (max_coordinate(m) >= degree_) throw UsageError("cell map references an undeclared parameter");
    }
    if (cell.panels.empty()) cell.panels.assign(static_cast<std::size_t>(degree_), 1);
    if (static_cast<int>(cell.panels.size()) != degree_) throw UsageError("cell needs one panel count per parameter");
    for (int pc : cell.panels) {
        if (pc < 1) throw UsageError("panel counts must be positive");
    }
    if (cell.parameter_names.empty()) {
        for (int k = 0; k < degree_; ++k) cell.parameter_names.push_back("u" + std::to_string(k));
    }
    cells_.push_back(std::move(cell));
}

Chain& Chain::set_order(int n) {
    gauss_legendre(n);
    order_ = n;
    return *this;
}

Chain& Chain::set_closed(bool closed) {
    closed_ = closed;
    return *this;
}

Chain Chain::circle(Chart chart, std::vector<double> center, double radius, int i, int j, int winding) {
    if (winding == 0) throw UsageError("winding number must be nonzero");
    Cell cell;
    cell.map = centered(center, chart.dimension());
    Expr th = Expr::coordinate(0);
    cell.map.at(static_cast<std::size_t>(i)) += radius * cos(th);
    cell.map.at(static_cast<std::size_t>(j)) += radius * sin(th);
    cell.ranges = {{0.0, 2 * std::numbers::pi * std::abs(winding)}};
    cell.parameter_names = {"theta"};
    cell.orientation = winding > 0 ? 1 : -1;
    cell.panels = {4 * std::abs(winding)};
    return from_cells(std::move(chart), 1, {cell}, true);
}

Chain Chain::disk(Chart chart, std::vector<double> center, double radius, int i, int j) {
    Cell cell;
    cell.map = centered(center, chart.dimension());
    Expr r = Expr::coordinate(0), th = Expr::coordinate(1);
    cell.map.at(static_cast<std::size_t>(i)) += r * cos(th);
    cell.map.at(static_cast<std::size_t>(j)) += r * sin(th);
    cell.ranges = {{0.0, radius}, {0.0, 2 * std::numbers::pi}};
    cell.parameter_names = {"r", "theta"};
    cell.panels = {1, 4};
    return from_cells(std::move(chart), 2, {cell}, false);
}

Chain Chain::sphere2(Chart chart, std::vector<double> center, double radius, int i, int j, int k) {
    Cell cell;
    cell.map = centered(center, chart.dimension());
    Expr th = Expr::coordinate(0), ph = Expr::coordinate(1);
    cell.map.at(static_cast<std::size_t>(i)) += radius * sin(th) * cos(ph);
    cell.map.at(static_cast<std::size_t>(j)) += radius * sin(th) * sin(ph);
    cell.map.at(static_cast<std::size_t>(k)) += radius * cos(th);
    cell.ranges = {{0.0, std::numbers::pi}, {0.0, 2 * std::numbers::pi}};
    cell.parameter_names = {"theta", "phi"};
    cell.panels = {2, 4};
    return from_cells(std::move(chart), 2, {cell}, true);
}

Chain Chain::sphere3(Chart chart, std::vector<double> center, double radius) {
    if (chart.dimension() != 4) throw UsageError("sphere3 needs a 4-chart");
    Cell cell;
    cell.map = centered(center, 4);
    Expr chi = Expr::coordinate(0), th = Expr::coordinate(1), ph = Expr::coordinate(2);
    cell.map[0] += radius * sin(chi) * sin(th) * cos(ph);
    cell.map[1] += radius * sin(chi) * sin(th) * sin(ph);
    cell.map[2] += radius * sin(chi) * cos(th);
    cell.map[3] += radius * cos(chi);
    cell.ranges = {{0.0, std::numbers::pi}, {0.0, std::numbers::pi}, {0.0, 2 * std::numbers::pi}};
    cell.parameter_names = {"chi", "theta", "phi"};
    cell.panels = {2, 2, 4};
    Chain c = from_cells(std::move(chart), 3, {cell}, true);
    c.order_ = 10;
    return c;
}

Chain Chain::point(Chart chart, std::vector<double> at) {
    Cell cell;
    cell.map = centered(at, chart.dimension());
    return from_cells(std::move(chart), 0, {cell}, false);
}

// ---------------------------------------------------------------------------
// Evaluation of node positions and tangent maps

// Compiled cell map plus the flows applied on top of it. For a parameter point u it
// produces x = Φ(c(u)) and the n×p tangent matrix M = DΦ · Dc(u).
struct ChainEvaluator {
    const Chain& chain;
    AdvectionOptions options;
    int n;
    int p;
    std::vector<Program> cell_programs;
    std::vector<Program> flow_programs;

    ChainEvaluator(const Chain& c, AdvectionOptions opts)
        : chain(c), options(opts), n(c.chart_.dimension()), p(c.degree_) {
        for (const auto& cell : c.cells_) {
            std::vector<Expr> outs = cell.map;
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < p; ++k) outs.push_back(differentiate(cell.map[static_cast<std::size_t>(i)], k));
            }
            cell_programs.emplace_back(outs, ParamMap{}, cell.parameter_names);
            if (!cell_programs.back().free_parameters().empty()) {
                throw UnboundParameterError(cell_programs.back().free_parameters().front());
            }
        }
        for (const auto& seg : c.flows_) {
            std::vector<Expr> outs = seg.field.effective();
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < n; ++k) outs.push_back(differentiate(outs[static_cast<std::size_t>(i)], k));
            }
            flow_programs.emplace_back(outs, seg.params, c.chart_.names());
            if (!flow_programs.back().free_parameters().empty()) {
                throw UnboundParameterError(flow_programs.back().free_parameters().front());
            }
        }
    }

    // state = (x[n], M[n×p] row-major)
    void rhs(const Program& prog, const std::vector<double>& s, std::vector<double>& ds,
             std::vector<double>& vals, std::vector<double>& work) const {
        const auto un = static_cast<std::size_t>(n), up = static_cast<std::size_t>(p);
        vals.resize(un + un * un);
        prog.evaluate(std::span<const double>(s.data(), un), vals, {}, work);
        ds.assign(s.size(), 0.0);
        for (std::size_t i = 0; i < un; ++i) ds[i] = vals[i];
        for (std::size_t i = 0; i < un; ++i) {
            for (std::size_t j = 0; j < up; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < un; ++k) acc += vals[un + i * un + k] * s[un + k * up + j];
                ds[un + i * up + j] = acc;
            }
        }
    }

    void rk4(const Program& prog, const std::vector<double>& s, double h, std::vector<double>& out,
             std::vector<double>& vals, std::vector<double>& work) const {
        std::vector<double> k1, k2, k3, k4, tmp(s.size());
        rhs(prog, s, k1, vals, work);
        for (std::size_t i = 0; i < s.size(); ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
        rhs(prog, tmp, k2, vals, work);
        for (std::size_t i = 0; i < s.size(); ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
        rhs(prog, tmp, k3, vals, work);
        for (std::size_t i = 0; i < s.size(); ++i) tmp[i] = s[i] + h * k3[i];
        rhs(prog, tmp, k4, vals, work);
        out.resize(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }

    // Step-doubling RK4 with local extrapolation.
    void flow(const Program& prog, double duration, std::vector<double>& s) const {
        if (duration == 0.0) return;
        std::vector<double> vals, work, full, half, two;
        double remaining = duration;
        double h = duration;
        int steps = 0;
        while (remaining != 0.0) {
            if (std::fabs(h) > std::fabs(remaining)) h = remaining;
            if (++steps > options.max_steps) throw AdvectionError("advection exceeded the step budget");
            if (std::fabs(h) < 1e-14 * std::fabs(duration)) throw AdvectionError("advection step size underflow");
            try {
                rk4(prog, s, h, full, vals, work);
                rk4(prog, s, h / 2, half, vals, work);
                rk4(prog, half, h / 2, two, vals, work);
            } catch (const SingularityError& e) {
                throw AdvectionError(std::string("flow left the domain of the vector field: ") + e.what());
            }
            double err = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                double scale = 1.0 + std::fabs(s[i]);
                err = std::max(err, std::fabs(two[i] - full[i]) / 15.0 / scale);
            }
            if (!std::isfinite(err)) {
                h /= 4;
                continue;
            }
            if (err <= options.tolerance) {
                for (std::size_t i = 0; i < s.size(); ++i) s[i] = two[i] + (two[i] - full[i]) / 15.0;
                remaining -= h;
                if (std::fabs(remaining) < 1e-15 * std::fabs(duration)) remaining = 0.0;
            }
            double factor = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(options.tolerance / err, 0.2), 0.1, 4.0);
            h *= factor;
        }
    }

    // Singular cell maps or flows surface as SingularityError / AdvectionError.
    void evaluate(std::size_t cell, std::span<const double> u, std::vector<double>& state) const {
        const auto un = static_cast<std::size_t>(n), up = static_cast<std::size_t>(p);
        std::vector<double> out(un + un * up);
        cell_programs[cell].evaluate(u, out);
        state = out;
        for (std::size_t f = 0; f < flow_programs.size(); ++f) flow(flow_programs[f], chain.flows_[f].duration, state);
    }
};

std::vector<std::vector<double>> Chain::node_images(std::size_t cell, const AdvectionOptions& opts) const {
    ChainEvaluator ev(*this, opts);
    std::vector<std::vector<double>> out;
    std::vector<double> state;
    for_each_node(cells_.at(cell), order_, [&](std::span<const double> u, double) {
        ev.evaluate(cell, u, state);
        out.emplace_back(state.begin(), state.begin() + chart_.dimension());
    });
    return out;
}

Chain advect(const Chain& c, const VectorField& v, double dt, const ParamMap& params) {
    if (!(v.chart == c.chart_)) throw UsageError("advect: vector field and chain live on different charts");
    Chain out = c;
    if (dt != 0.0) out.flows_.push_back({v, dt, params});
    // compile once so unbound flow parameters are reported at the call site
    ChainEvaluator ev(out, {});
    (void)ev;
    return out;
}

// ---------------------------------------------------------------------------
// Integration

namespace {

struct RawIntegral {
    double value = 0.0;
    double magnitude = 0.0;
};

RawIntegral integrate_at_order(const ChainEvaluator& ev, const Program& form, const std::vector<IndexMask>& masks,
                               int order) {
    const int p = ev.p;
    const auto un = static_cast<std::size_t>(ev.n), up = static_cast<std::size_t>(p);
    std::vector<std::vector<int>> rows;
    for (IndexMask m : masks) rows.push_back(mask_indices(m));

    RawIntegral total;
    std::vector<double> state, coeff(masks.size()), minor(up * up), work;
    for (std::size_t ci = 0; ci < ev.chain.cells().size(); ++ci) {
        const Cell& cell = ev.chain.cells()[ci];
        double cell_value = 0.0, cell_mag = 0.0;
        try {
            for_each_node(cell, order, [&](std::span<const double> u, double w) {
                ev.evaluate(ci, u, state);
                form.evaluate(std::span<const double>(state.data(), un), coeff, {}, work);
                double integrand = 0.0;
                for (std::size_t m = 0; m < masks.size(); ++m) {
                    if (coeff[m] == 0.0) continue;
                    for (std::size_t r = 0; r < up; ++r) {
                        for (std::size_t c = 0; c < up; ++c) {
                            minor[r * up + c] = state[un + static_cast<std::size_t>(rows[m][r]) * up + c];
                        }
                    }
                    integrand += coeff[m] * (p == 0 ? 1.0 : det(minor, p));
                }
                cell_value += w * integrand;
                cell_mag += w * std::fabs(integrand);
            });
        } catch (const SingularityError& e) {
            throw SingularityError("singular integrand on cell " + std::to_string(ci) + " (" + e.what() + ")",
                                   e.subexpression());
        }
        total.value += cell.orientation * cell_value;
        total.magnitude += cell_mag;
    }
    return total;
}

}  // namespace

Integral integrate(const DifferentialForm& w, const Chain& c, const ParamMap& params,
                   const IntegrateOptions& options) {
    if (w.degree() != c.degree()) {
        throw UsageError("integrate: " + std::to_string(w.degree()) + "-form over a " +
                         std::to_string(c.degree()) + "-chain");
    }
    if (!(w.chart() == c.chart())) throw UsageError("integrate: form and chain live on different charts");
    std::vector<IndexMask> masks;
    std::vector<Expr> coeffs;
    for (const auto& [m, e] : w.terms()) {
        masks.push_back(m);
        coeffs.push_back(e);
    }
    Integral out;
    if (coeffs.empty()) return out;
    Program form(coeffs, params, w.chart().names());
    if (!form.free_parameters().empty()) throw UnboundParameterError(form.free_parameters().front());
    ChainEvaluator ev(c, options.advection);
    RawIntegral r = integrate_at_order(ev, form, masks, c.order());
    out.value = r.value;
    out.magnitude = r.magnitude;
    if (options.estimate_error && c.degree() > 0) {
        RawIntegral fine = integrate_at_order(ev, form, masks, std::min(256, 2 * c.order()));
        out.error_estimate = std::fabs(fine.value - r.value);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Invariance checks

InvarianceResult invariance_check(const DifferentialForm& w, const Chain& c, const VectorField& v,
                                  InvarianceMode mode, const ParamMap& params, const InvarianceOptions& options) {
    if (mode == InvarianceMode::Relative && !c.closed()) {
        throw UsageError("relative invariance needs a chain declared closed");
    }
    const double h = options.step;
    auto at = [&](double s) { return integrate(w, advect(c, v, s, params), params, options.integrate).value; };
    double d1 = (at(h) - at(-h)) / (2 * h);
    double d2 = (at(2 * h) - at(-2 * h)) / (4 * h);

    InvarianceResult r;
    r.derivative_estimate = (4 * d1 - d2) / 3;
    Integral base = integrate(w, c, params, options.integrate);
    Integral lie = integrate(lie_derivative(v, w), c, params, options.integrate);
    r.lie_integral = lie.value;
    r.scale = base.magnitude + lie.magnitude;
    r.tolerance = options.relative_tolerance * r.scale + 1e-14;
    r.invariant = std::fabs(r.derivative_estimate) <= r.tolerance;
    // floor: forms that vanish on the chain would otherwise compare round-off with round-off
    double denom = std::max({std::fabs(r.lie_integral), r.scale, 1e-9});
    r.transport_error = std::fabs(r.derivative_estimate - r.lie_integral) / denom;
    r.transport_ok = r.transport_error <= options.transport_tolerance;
    r.verdict = mode == InvarianceMode::Transport ? r.transport_ok : r.invariant;
    return r;
}

double closedness_defect(const Chain& c, std::uint64_t seed, const ParamMap& params) {
    if (c.degree() == 0) throw UsageError("closedness check needs a chain of degree >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const int n = c.chart().dimension();
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        DifferentialForm phi(c.chart(), c.degree() - 1);
        for (IndexMask m : phi.basis_masks()) {
            Expr arg = coef(rng);
            for (int k = 0; k < n; ++k) arg += coef(rng) * Expr::coordinate(k);
            phi.set(m, sin(arg));
        }
        Integral r = integrate(exterior_derivative(phi), c, params, {false, {}});
        if (r.magnitude > 0) worst = std::max(worst, std::fabs(r.value) / r.magnitude);
    }
    return worst;
}

PeriodSpectrum period_spectrum(const DifferentialForm& w, const std::vector<Chain>& cycles,
                               const SamplingBox& box, const ParamMap& params, double zero_threshold) {
    SamplingBox b = box;
    for (const auto& [k, v] : params) b.params[k] = v;
    auto closed = is_zero(exterior_derivative(w), b);
    if (!closed.zero) throw UsageError("period_spectrum: the form is not closed");
    PeriodSpectrum out;
    std::vector<double> mags;
    for (const auto& cyc : cycles) {
        Integral r = integrate(w, cyc, params, {false, {}});
        out.periods.push_back(r.value);
        mags.push_back(r.magnitude);
    }
    for (std::size_t i = 0; i < out.periods.size(); ++i) {
        double a = std::fabs(out.periods[i]);
        if (a > zero_threshold * std::max(1.0, mags[i]) && (out.smallest == 0.0 || a < out.smallest)) out.smallest = a;
    }
    for (double pv : out.periods) {
        double ratio = out.smallest == 0.0 ? 0.0 : pv / out.smallest;
        out.ratios.push_back(ratio);
        out.deviations.push_back(std::fabs(ratio - std::round(ratio)));
    }
    return out;
}

}  // namespace cartan
