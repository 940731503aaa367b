#include "compile.hpp"

#include <algorithm>
#include <set>

#include "cartan/errors.hpp"

namespace cartan::detail {

namespace {

[[noreturn]] void fail(const std::string& message, Location at) { throw ParseError(message, at.line, at.column); }

Expr parse_at(const Text& t, const std::vector<std::string>& coordinates, const std::set<std::string>& parameters) {
    ParseOptions o;
    o.coordinates = coordinates;
    o.parameters = parameters;
    o.line = t.at.line;
    o.column = t.at.column;
    return parse_expression(t.value, o);
}

bool is_spacetime(const std::vector<std::string>& names) {
    return names == std::vector<std::string>{"x", "y", "z", "t"};
}

double constant(const Text& t, const std::set<std::string>& parameters, const ParamMap& params) {
    Expr e = parse_at(t, {}, parameters);
    try {
        return eval(e, std::span<const double>{}, params);
    } catch (const std::exception& ex) {
        fail(std::string("cannot evaluate bound: ") + ex.what(), t.at);
    }
}

}  // namespace

DifferentialForm parse_one_form(const Text& text, const Chart& chart, const std::set<std::string>& parameters,
                                const ParamMap& params) {
    const int n = chart.dimension();
    std::vector<std::string> names = chart.names();
    for (int k = 0; k < n; ++k) {
        std::string d = "d" + chart.name(k);
        if (std::find(names.begin(), names.end(), d) != names.end())
            fail("coordinate '" + d + "' clashes with a differential", text.at);
        names.push_back(d);
    }
    Expr e = parse_at(text, names, parameters);
    std::vector<Expr> coefficients;
    for (int k = 0; k < n; ++k) {
        Expr c = simplify(differentiate(e, n + k));
        if (max_coordinate(c) >= n) fail("1-form is not linear in the differentials", text.at);
        coefficients.push_back(c);
    }
    std::vector<Expr> zeroed;
    for (int k = 0; k < n; ++k) zeroed.push_back(Expr::coordinate(k));
    for (int k = 0; k < n; ++k) zeroed.push_back(Expr(0));
    Expr rest = simplify(substitute(e, zeroed));
    if (!rest.is_zero_literal()) {
        SamplingBox box = SamplingBox::cube(n);
        box.params = params;
        bool zero = false;
        try {
            zero = is_zero(rest, box).zero;
        } catch (const InconclusiveError&) {
        }
        if (!zero) fail("every term of a 1-form needs a differential (d" + chart.name(0) + ", ...)", text.at);
    }
    return DifferentialForm::one_form(chart, coefficients);
}

Compiled compile(const RunConfig& c) {
    Compiled out;
    const auto& coords = c.coordinates;
    if (coords.empty()) throw ParseError("chart needs at least one coordinate", 1, 1);
    out.chart = Chart(coords);
    const int n = out.chart.dimension();

    std::set<std::string> declared;
    std::optional<Preset> preset;
    if (c.preset) {
        const auto& names = preset_names();
        if (std::find(names.begin(), names.end(), c.preset->value) == names.end())
            fail("unknown preset '" + c.preset->value + "'", c.preset->at);
        if (!is_spacetime(coords)) fail("presets require the chart x, y, z, t", c.preset->at);
        preset = make_preset(c.preset->value);
        for (const auto& [k, v] : preset->params()) {
            declared.insert(k);
            out.params[k] = v;
        }
    }
    for (const auto& [k, v] : c.params) {
        if (std::find(coords.begin(), coords.end(), k) != coords.end())
            throw ParseError("parameter '" + k + "' shadows a coordinate", 1, 1);
        declared.insert(k);
        if (v) out.params[k] = *v;
        else out.params.erase(k);
    }

    out.box = SamplingBox::cube(n);
    out.box.params = out.params;
    out.box.samples = c.samples;
    out.box.tolerance = c.tolerance;
    out.box.seed = c.seed;
    for (const auto& e : c.exclusions) out.box.exclusions.push_back({parse_at(e.indicator, coords, declared), e.threshold});

    auto parse3 = [&](const std::array<Text, 3>& v) {
        return Vector3{parse_at(v[0], coords, declared), parse_at(v[1], coords, declared), parse_at(v[2], coords, declared)};
    };

    if (preset) {
        out.system_kind = "preset";
        out.system_name = preset->name;
        if (auto* f = std::get_if<FluidSystem>(&preset->system)) {
            out.fluid = *f;
            out.fluid->params = out.params;
        } else {
            out.em = std::get<EMSystem>(preset->system);
            out.em->params = out.params;
        }
        for (std::size_t i = 0; i < preset->cycles.size(); ++i)
            out.cycles.push_back({"cycle" + std::to_string(i + 1), preset->cycles[i]});
    } else if (c.action) {
        out.system_kind = "action";
        out.action = parse_one_form(*c.action, out.chart, declared, out.params);
    } else if (c.fluid) {
        if (!is_spacetime(coords)) fail("[fluid] requires the chart x, y, z, t", c.fluid->at);
        out.system_kind = "fluid";
        out.fluid = FluidSystem{parse3(c.fluid->v), parse_at(c.fluid->pressure, coords, declared),
                                parse_at(c.fluid->nu, coords, declared), out.params};
    } else if (c.em) {
        if (!is_spacetime(coords)) fail("[em] requires the chart x, y, z, t", c.em->at);
        out.system_kind = "em";
        out.em = EMSystem{parse3(c.em->a), parse_at(c.em->phi, coords, declared), out.params};
    }
    if (out.fluid) out.action = out.fluid->action();
    if (out.em) out.action = out.em->action();

    for (const auto& p : c.processes) {
        CompiledProcess cp{p.name, p.kind, std::nullopt};
        Expr support = parse_at(p.support, coords, declared);
        switch (p.kind) {
        case ProcessKind::Components: {
            if (static_cast<int>(p.components.size()) != n)
                fail("process needs " + std::to_string(n) + " components", p.at);
            std::vector<Expr> comps;
            for (const auto& t : p.components) comps.push_back(parse_at(t, coords, declared));
            cp.field = VectorField(out.chart, comps, support);
            break;
        }
        case ProcessKind::Flow:
            if (!out.fluid) fail("'flow' needs a fluid system", p.at);
            cp.field = out.fluid->process().rescaled(support);
            break;
        case ProcessKind::Torsion:
            if (!out.action || n != 4) fail("'torsion' needs an action on a 4-chart", p.at);
            if (p.support.value != "1") fail("the torsion process takes no support function", p.support.at);
            break;
        }
        out.processes.push_back(std::move(cp));
    }
    if (c.processes.empty()) {
        if (out.fluid) out.processes.push_back({"flow", ProcessKind::Flow, out.fluid->process()});
        if (out.em) out.processes.push_back({"torsion", ProcessKind::Torsion, std::nullopt});
    }

    for (const auto& ch : c.chains) {
        std::vector<std::string> pnames;
        Cell cell;
        for (const auto& p : ch.params) {
            if (std::find(coords.begin(), coords.end(), p.name) != coords.end() || declared.count(p.name))
                fail("chain parameter '" + p.name + "' shadows a coordinate or parameter", ch.at);
            pnames.push_back(p.name);
            double lo = constant(p.lo, declared, out.params), hi = constant(p.hi, declared, out.params);
            if (!(hi > lo)) fail("empty parameter range", p.lo.at);
            cell.ranges.emplace_back(lo, hi);
        }
        const int degree = static_cast<int>(pnames.size());
        if (degree > n) fail("chain has more parameters than the chart has coordinates", ch.at);
        if (static_cast<int>(ch.map.size()) != n) fail("chain map needs " + std::to_string(n) + " components", ch.at);
        for (const auto& m : ch.map) cell.map.push_back(parse_at(m, pnames, declared));
        cell.parameter_names = pnames;
        cell.orientation = ch.orientation;
        if (ch.panels.size() == 1) cell.panels.assign(pnames.size(), ch.panels[0]);
        else if (!ch.panels.empty() && ch.panels.size() != pnames.size())
            fail("give one panel count, or one per parameter", ch.at);
        else cell.panels = ch.panels;
        Chain chain = Chain::from_cells(out.chart, degree, {cell}, ch.closed);
        chain.set_order(ch.order);
        if (ch.closed && degree == 1) out.cycles.push_back({ch.name, chain});
        out.chains.push_back({ch.name, std::move(chain)});
    }

    for (const auto& f : c.forms) out.forms.push_back({f.name, parse_one_form(f.w, out.chart, declared, out.params)});

    for (const auto& t : c.topologies) {
        try {
            out.topologies.emplace_back(t.name, FiniteTopology::from_names(t.points, t.opens));
        } catch (const UsageError& e) {
            fail(e.what(), t.at);
        }
    }
    for (const auto& m : c.maps) {
        auto find = [&](const std::string& name) {
            for (std::size_t i = 0; i < out.topologies.size(); ++i)
                if (out.topologies[i].first == name) return i;
            fail("unknown topology '" + name + "'", m.at);
        };
        CompiledMap cm{m.name, find(m.from), find(m.to), {}, m.expect_continuous, m.expect_inverse_continuous};
        try {
            cm.map = make_point_map(out.topologies[cm.from].second, out.topologies[cm.to].second, m.pairs);
        } catch (const UsageError& e) {
            fail(e.what(), m.at);
        }
        out.maps.push_back(std::move(cm));
    }

    auto applicable = [&](const std::string& b) -> std::string {
        const bool four = out.action && n == 4;
        if (b == "pfaff") return out.action ? "" : "needs an action";
        if (b == "torsion") return four ? "" : "needs an action on a 4-chart";
        if (b == "thermo") return out.action && !out.processes.empty() ? "" : "needs an action and a process";
        if (b == "theorems") return four && !out.processes.empty() ? "" : "needs a 4-chart action and a process";
        if (b == "periods") return (out.action || !out.forms.empty()) && !out.cycles.empty() ? "" : "needs a closed 1-chain";
        if (b == "systems") return out.fluid || out.em ? "" : "needs a fluid or electromagnetic system";
        if (b == "topology") return out.topologies.empty() ? "needs a [topology]" : "";
        return "unknown battery";
    };
    if (c.batteries.empty()) {
        for (const auto& b : battery_names())
            if (applicable(b).empty()) out.batteries.push_back(b);
    } else {
        for (const auto& b : c.batteries) {
            std::string why = applicable(b);
            if (!why.empty()) throw UsageError("battery '" + b + "' " + why);
            out.batteries.push_back(b);
        }
    }
    if (out.batteries.empty()) throw UsageError("no applicable battery: define a system, a form with a cycle, or a topology");
    return out;
}

}  // namespace cartan::detail
