#include "cartan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "cartan/errors.hpp"
#include "compile.hpp"

namespace cartan {

using nlohmann::json;

namespace {

using detail::Compiled;
using detail::CompiledProcess;

constexpr int kSamplePoints = 4;

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Value within `tolerance` of `reference`.
json measurement(double value, double tolerance, double reference = 0.0) {
    bool ok = std::isfinite(value) && std::fabs(value - reference) <= tolerance;
    json m{{"value", value}, {"tolerance", tolerance}, {"pass", ok}};
    if (reference != 0.0) m["reference"] = reference;
    return m;
}

/// Accumulates one battery's data and checks. Only checks decide the exit code.
class Recorder {
public:
    explicit Recorder(const SamplingBox& box) : box_(box) {}

    json data = json::object();

    void zero(const std::string& name, const ZeroVerdict& v, bool expect_zero = true) {
        json c{{"name", name},
               {"kind", "zero-test"},
               {"expected", expect_zero ? "zero" : "nonzero"},
               {"tolerance", box_.tolerance},
               {"samples", v.evaluated},
               {"singular_samples", v.singular},
               {"syntactic", v.syntactic},
               {"pass", v.zero == expect_zero}};
        if (!v.zero) c["witness_value"] = v.witness_value;
        add(std::move(c));
    }
    void zero(const std::string& name, const DifferentialForm& w, bool expect_zero = true) {
        zero(name, is_zero(w, box_), expect_zero);
    }
    void zero(const std::string& name, const Expr& e, bool expect_zero = true) { zero(name, is_zero(e, box_), expect_zero); }

    void flag(const std::string& name, bool observed, bool expected = true) {
        add({{"name", name}, {"kind", "flag"}, {"observed", observed}, {"expected", expected}, {"pass", observed == expected}});
    }

    void bound(const std::string& name, double value, double tolerance, double reference = 0.0) {
        json c = measurement(value, tolerance, reference);
        c["name"] = name;
        c["kind"] = "bound";
        add(std::move(c));
    }

    void invariance(const std::string& name, const InvarianceResult& r) {
        add({{"name", name},
             {"kind", "invariance"},
             {"value", r.derivative_estimate},
             {"tolerance", r.tolerance},
             {"transport_error", r.transport_error},
             {"pass", r.verdict && r.transport_ok}});
    }

    json finish(const std::string* error) {
        json out = data;
        int passed = 0;
        for (const auto& c : checks_) passed += c["pass"].get<bool>() ? 1 : 0;
        out["checks"] = checks_;
        out["passed"] = passed;
        out["failed"] = static_cast<int>(checks_.size()) - passed;
        if (error) out["error"] = *error;
        out["pass"] = error == nullptr && passed == static_cast<int>(checks_.size());
        return out;
    }

    std::size_t check_count() const { return checks_.size(); }

private:
    void add(json c) { checks_.push_back(std::move(c)); }

    const SamplingBox& box_;
    json checks_ = json::array();
};

json invariance_json(const InvarianceResult& r, const std::string& mode, const std::string& chain) {
    return {{"mode", mode},
            {"chain", chain},
            {"derivative_estimate", r.derivative_estimate},
            {"lie_integral", r.lie_integral},
            {"scale", r.scale},
            {"tolerance", r.tolerance},
            {"transport_error", r.transport_error},
            {"transport_ok", r.transport_ok},
            {"pass", r.verdict && r.transport_ok}};
}

class Runner {
public:
    Runner(const RunConfig& config, Compiled cc) : config_(config), cc_(std::move(cc)) {
        eval_params_ = cc_.params;
        const double mid = (cc_.box.free_parameter_range.first + cc_.box.free_parameter_range.second) / 2;
        for (const auto& [k, v] : config_.params)
            if (!v) eval_params_[k] = mid;
        points_ = sample_points(kSamplePoints);
    }

    RunOutcome run() {
        json report;
        report["schema"] = kReportSchema;
        report["provenance"] = {
            {"version", kVersion},
            {"seed", config_.seed},
            {"tolerance", config_.tolerance},
            {"samples", config_.samples},
            {"theorem_tolerance", config_.theorem_tolerance},
            {"config_digest", config_digest()},
            {"sample_points", points_},
        };
        report["system"] = system_json();

        json batteries = json::object();
        json errors = json::array();
        int total = 0, passed = 0;
        for (const auto& name : cc_.batteries) {
            Recorder r(cc_.box);
            std::string error;
            try {
                run_battery(name, r);
            } catch (const std::exception& e) {
                error = e.what();
                errors.push_back({{"battery", name}, {"message", error}});
            }
            json b = r.finish(error.empty() ? nullptr : &error);
            total += static_cast<int>(b["checks"].size());
            passed += b["passed"].get<int>();
            batteries[name] = std::move(b);
        }
        report["batteries"] = std::move(batteries);

        int code = !errors.empty() ? kExitInternal : passed != total ? kExitFail : kExitPass;
        report["errors"] = std::move(errors);
        report["summary"] = {{"checks", total},
                             {"passed", passed},
                             {"failed", total - passed},
                             {"errors", report["errors"].size()},
                             {"exit_code", code},
                             {"pass", code == kExitPass}};
        return {std::move(report), code};
    }

private:
    // the output path names where the report goes, not what it contains
    std::string config_digest() const {
        RunConfig c = config_;
        c.out.clear();
        return hex64(fnv1a(serialize_config(c)));
    }
    const RunConfig& config_;
    Compiled cc_;
    ParamMap eval_params_;
    std::vector<std::vector<double>> points_;
    std::optional<TorsionData> torsion_;
    std::map<std::string, ProcessReport> reports_;

    const std::vector<std::string>& names() const { return cc_.chart.names(); }
    std::string str(const Expr& e) const { return to_string(e, names()); }
    std::vector<std::string> str(std::span<const Expr> es) const {
        std::vector<std::string> out;
        for (const auto& e : es) out.push_back(str(e));
        return out;
    }
    const DifferentialForm& action() const { return *cc_.action; }

    std::vector<std::vector<double>> sample_points(int count) const {
        std::mt19937_64 rng(cc_.box.seed ^ 0x9e3779b97f4a7c15ULL);
        auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        std::vector<std::vector<double>> out;
        for (int attempt = 0; attempt < 1000 * count && static_cast<int>(out.size()) < count; ++attempt) {
            std::vector<double> p;
            for (const auto& [lo, hi] : cc_.box.ranges) p.push_back(lo + (hi - lo) * unit());
            bool ok = true;
            for (const auto& ex : cc_.box.exclusions) {
                try {
                    ok = ok && std::fabs(eval(ex.indicator, p, eval_params_)) >= ex.threshold;
                } catch (const std::exception&) {
                    ok = false;
                }
            }
            if (ok) out.push_back(std::move(p));
        }
        return out;
    }

    json sampled(const Expr& e) const {
        json out = json::array();
        for (const auto& p : points_) {
            double v = NAN;
            try {
                v = eval(e, p, eval_params_);
            } catch (const std::exception&) {
            }
            json m = measurement(v, cc_.box.tolerance);
            m["point"] = p;
            out.push_back(std::move(m));
        }
        return out;
    }

    const TorsionData& torsion() {
        if (!torsion_) torsion_ = torsion_data(action(), cc_.box);
        return *torsion_;
    }

    VectorField field(const CompiledProcess& p) { return p.field ? *p.field : torsion().T; }

    ClassifyOptions classify_options() const {
        ClassifyOptions o;
        for (const auto& c : cc_.cycles) o.cycles.push_back(c.chain);
        o.params = eval_params_;
        o.points = points_;
        return o;
    }

    const ProcessReport& process_report(const CompiledProcess& p) {
        auto it = reports_.find(p.name);
        if (it == reports_.end()) it = reports_.emplace(p.name, classify(action(), field(p), cc_.box, classify_options())).first;
        return it->second;
    }

    json system_json() const {
        json s{{"kind", cc_.system_kind}, {"chart", names()}, {"params", json::object()}};
        for (const auto& [k, v] : cc_.params) s["params"][k] = v;
        for (const auto& [k, v] : config_.params)
            if (!v) s["params"][k] = "free";
        if (!cc_.system_name.empty()) s["name"] = cc_.system_name;
        if (cc_.action) s["action"] = to_string(*cc_.action);
        json procs = json::array();
        for (const auto& p : cc_.processes) {
            json j{{"name", p.name}};
            j["kind"] = p.kind == ProcessKind::Torsion ? "torsion" : p.kind == ProcessKind::Flow ? "flow" : "components";
            if (p.field) {
                j["components"] = str(p.field->components);
                j["support"] = str(p.field->support);
            }
            procs.push_back(std::move(j));
        }
        s["processes"] = std::move(procs);
        json cycles = json::array();
        for (const auto& c : cc_.cycles) cycles.push_back(c.name);
        s["cycles"] = std::move(cycles);
        return s;
    }

    void run_battery(const std::string& name, Recorder& r) {
        if (name == "pfaff") pfaff(r);
        else if (name == "torsion") torsion_battery(r);
        else if (name == "thermo") thermo(r);
        else if (name == "theorems") theorems(r);
        else if (name == "periods") periods(r);
        else if (name == "systems") systems(r);
        else if (name == "topology") topology(r);
    }

    void pfaff(Recorder& r) {
        const auto& a = action();
        auto seq = pfaff_sequence(a, cc_.box, points_);
        json elements = json::array();
        for (std::size_t i = 0; i < seq.elements.size(); ++i)
            elements.push_back({{"name", pfaff_element_name(i)},
                                {"degree", seq.elements[i].degree()},
                                {"nonzero", static_cast<bool>(seq.nonzero[i])},
                                {"expression", to_string(seq.elements[i])}});
        r.data["sequence"] = std::move(elements);
        r.data["dimension"] = seq.dimension;
        json pointwise = json::array();
        for (std::size_t i = 0; i < seq.pointwise.size(); ++i)
            pointwise.push_back({{"point", points_[i]}, {"dimension", seq.pointwise[i]}});
        r.data["pointwise"] = std::move(pointwise);
        r.data["frobenius_integrable"] = seq.elements.size() < 3 || !seq.nonzero[2];
        auto base = topological_base(seq);
        json members = json::array();
        for (const auto& m : base.members) members.push_back(m.name);
        r.data["topological_base"] = {{"members", members}, {"disconnected", base.disconnected}};

        json chars = json::array();
        for (const auto& p : points_) {
            auto cs = characteristic_space(a, p, eval_params_);
            chars.push_back({{"point", p},
                             {"dimension", cs.dimension},
                             {"extremal_dimension", cs.extremal_dimension},
                             {"rank_f", cs.rank_f}});
        }
        r.data["characteristic_space"] = std::move(chars);

        r.zero("d(dA) = 0", exterior_derivative(seq.elements[1]));
        if (seq.elements.size() >= 3) {
            auto dh = exterior_derivative(seq.elements[2]);
            if (seq.elements.size() >= 4) r.zero("d(A^dA) = dA^dA", dh - seq.elements[3]);
            else r.zero("d(A^dA) = 0", dh);
        }

        if (cc_.chart.dimension() == 4) {
            try {
                auto p = projectivize(a, cc_.box);
                r.data["projectivized"] = {{"singular", false},
                                           {"lambda", str(p.lambda)},
                                           {"parity_zero", is_zero(p.parity.k, cc_.box).zero}};
            } catch (const SingularityError& e) {
                r.data["projectivized"] = {{"singular", true}, {"reason", e.what()}};
            }
        }
    }

    void torsion_battery(Recorder& r) {
        const auto& a = action();
        const auto& td = torsion();
        r.data["H"] = to_string(td.H);
        r.data["T"] = str(td.T.components);
        r.data["gamma"] = str(td.gamma);
        r.data["gamma_method"] = td.gamma_method;
        r.data["k"] = str(td.parity.k);
        r.data["k_time_first"] = str(td.parity.k_time_first);
        r.data["current"] = str(td.current);
        r.data["helicity"] = str(td.helicity);
        r.data["sampled"] = {{"k", sampled(td.parity.k)}, {"gamma", sampled(td.gamma)}};
        auto g = genus_diagnostic(a, cc_.box);
        r.data["genus"] = {{"genus", g.genus}, {"torsion_current_zero", g.torsion_current_zero}};

        auto da = exterior_derivative(a);
        r.zero("i(T)A = 0", interior(td.T, a));
        r.zero("i(T)dA = gamma A", interior(td.T, da) - td.gamma * a);
        r.zero("dH = K", exterior_derivative(td.H) - td.parity.K);
        auto q = lie_derivative(td.T, a);
        r.zero("L(T)A = gamma A", q - td.gamma * a);
        r.zero("Q^dQ = gamma^2 A^dA", wedge(q, exterior_derivative(q)) - pow(td.gamma, 2) * td.H);
        r.zero("k_time_first = -k", td.parity.k_time_first + td.parity.k);
        if (td.gamma_over_k) {
            r.data["gamma_over_k"] = measurement(*td.gamma_over_k, 1e-9, 0.5);
            r.bound("gamma / k = 1/2", *td.gamma_over_k, 1e-9, 0.5);
        }
    }

    void thermo(Recorder& r) {
        const auto& a = action();
        json procs = json::object();
        const auto opts = classify_options();
        for (const auto& p : cc_.processes) {
            auto j = field(p);
            const auto& rep = process_report(p);
            json d;
            d["first_law"] = {{"Q", to_string(rep.law.Q)}, {"W", to_string(rep.law.W)}, {"U", str(rep.law.U)}};
            d["category"] = to_string(rep.category);
            d["exact_work"] = rep.exact_work;
            d["q_pfaff_dimension"] = rep.q_pfaff_dimension;
            d["q_pfaff_pointwise"] = rep.q_pfaff_pointwise;
            d["flags"] = {{"adiabatic", rep.adiabatic},         {"closed_flow", rep.closed_flow},
                          {"open_flow", rep.open_flow},         {"reversible", rep.reversible},
                          {"irreversible", rep.irreversible},   {"associated", rep.associated},
                          {"extremal", rep.extremal},           {"characteristic", rep.characteristic},
                          {"radiative", rep.radiative}};
            json periods = json::array();
            for (std::size_t i = 0; i < rep.work_periods.size(); ++i)
                periods.push_back(measurement(rep.work_periods[i], opts.period_threshold * std::max(1.0, rep.work_period_scales[i])));
            d["work_periods"] = std::move(periods);

            auto irr = irreversibility(a, j, cc_.box);
            d["irreversibility"] = {{"reversible", irr.reversible}};
            if (irr.torsion_cross_check) d["irreversibility"]["torsion_cross_check"] = *irr.torsion_cross_check;

            auto sv = second_variation(a, j, cc_.box, opts);
            json sp = json::array();
            for (std::size_t i = 0; i < sv.periods.size(); ++i)
                sp.push_back(measurement(sv.periods[i], opts.period_threshold));
            d["second_variation"] = {{"closed_flow", sv.closed_flow},
                                     {"exact_evidence", sv.exact_evidence},
                                     {"periods", sp},
                                     {"q_wedge_f_matches", sv.q_wedge_f_matches}};
            procs[p.name] = std::move(d);

            const std::string pre = p.name + ": ";
            r.zero(pre + "Q = W + dU", rep.law.Q - rep.law.W - exterior_derivative(DifferentialForm::scalar(cc_.chart, rep.law.U)));
            r.zero(pre + "i(J)W = 0", interior(j, rep.law.W));
            r.flag(pre + "reversible iff Q^dQ = 0", irr.reversible, rep.reversible);
            if (irr.torsion_cross_check) r.flag(pre + "Q^dQ = gamma^2 A^dA", *irr.torsion_cross_check);
            if (sv.closed_flow) r.flag(pre + "L(J)(Q^F) = d(i(J)Q F)", sv.q_wedge_f_matches);
        }
        r.data["processes"] = std::move(procs);
    }

    void theorems(Recorder& r) {
        const auto& a = action();
        const Chart& ch = cc_.chart;
        const std::vector<double> c1{0.1, 0.05, 0.02, 0.03}, c2{0.05, 0.1, 0.15, 0.02}, c3{0.05, 0.02, 0.1, 0.04};
        const Chain circle = Chain::circle(ch, c1, 0.5, 0, 1);
        const Chain disk = Chain::disk(ch, c1, 0.5, 0, 1);
        const Chain sphere2 = Chain::sphere2(ch, c2, 0.5, 0, 1, 2);
        const Chain sphere3 = Chain::sphere3(ch, c3, 0.5);
        r.data["chains"] = {{"circle", {{"center", c1}, {"radius", 0.5}, {"plane", "01"}}},
                            {"disk", {{"center", c1}, {"radius", 0.5}, {"plane", "01"}}},
                            {"sphere2", {{"center", c2}, {"radius", 0.5}, {"space", "012"}}},
                            {"sphere3", {{"center", c3}, {"radius", 0.5}}}};
        InvarianceOptions opts;
        opts.relative_tolerance = config_.theorem_tolerance;

        const auto f = exterior_derivative(a);
        json procs = json::object();
        for (const auto& p : cc_.processes) {
            auto j = field(p);
            const auto& rep = process_report(p);
            const std::string pre = p.name + ": ";
            json d = json::object();
            json skipped = json::object();

            auto res = invariance_check(f, sphere2, j, InvarianceMode::Relative, eval_params_, opts);
            d["F_relative"] = invariance_json(res, "relative", "sphere2");
            r.invariance(pre + "closed integral of F is a relative invariant", res);

            if (rep.closed_flow) {
                res = invariance_check(f, disk, j, InvarianceMode::Absolute, eval_params_, opts);
                d["F_absolute"] = invariance_json(res, "absolute", "disk");
                r.invariance(pre + "F is an absolute invariant under the closed flow", res);

                auto q = rep.law.Q;
                res = invariance_check(q, circle, j, InvarianceMode::Relative, eval_params_, opts);
                d["Q_relative"] = invariance_json(res, "relative", "circle");
                r.invariance(pre + "closed integral of Q is a relative invariant", res);
                auto ir = integrate(rep.R, circle, eval_params_);
                double tol = config_.theorem_tolerance * std::max(1.0, ir.magnitude);
                d["Q_relative"]["R_integral"] = measurement(ir.value, tol);
                r.bound(pre + "closed integral of R vanishes", ir.value, tol);
            } else {
                skipped["F_absolute"] = "open flow";
                skipped["Q_relative"] = "open flow";
                res = invariance_check(f, disk, j, InvarianceMode::Absolute, eval_params_, opts);
                json drift = invariance_json(res, "absolute", "disk");
                drift["drift_ratio"] = res.derivative_estimate == 0.0 ? 0.0 : std::fabs(res.derivative_estimate) / res.tolerance;
                drift["counterexample"] = std::fabs(res.derivative_estimate) >= 100 * res.tolerance;
                d["open_flow_drift"] = std::move(drift);
            }

            if (rep.extremal) {
                res = invariance_check(a, circle, j, InvarianceMode::Relative, eval_params_, opts);
                d["A_relative"] = invariance_json(res, "relative", "circle");
                r.invariance(pre + "closed integral of A is a relative invariant", res);
                res = invariance_check(wedge(a, f), sphere3, j, InvarianceMode::Relative, eval_params_, opts);
                d["H_relative"] = invariance_json(res, "relative", "sphere3");
                r.invariance(pre + "closed integral of A^dA is a relative invariant", res);
            } else {
                skipped["A_relative"] = "process is not extremal";
                skipped["H_relative"] = "process is not extremal";
            }
            d["skipped"] = std::move(skipped);
            procs[p.name] = std::move(d);
        }
        r.data["processes"] = std::move(procs);
    }

    json period_entry(const DifferentialForm& w, const detail::NamedChain& c, Recorder& r, const std::string& label) {
        auto in = integrate(w, c.chain, eval_params_);
        double tol = 1e-8 * std::max(1.0, in.magnitude);
        json m = measurement(in.error_estimate, tol);
        json e{{"cycle", c.name}, {"value", in.value}, {"error_estimate", in.error_estimate},
               {"tolerance", tol}, {"pass", m["pass"]}};
        r.bound(label + " over " + c.name + ": quadrature converged", in.error_estimate, tol);
        return e;
    }

    void periods(Recorder& r) {
        for (const auto& c : cc_.chains) {
            if (!c.chain.closed()) continue;
            double defect = closedness_defect(c.chain, cc_.box.seed, eval_params_);
            r.bound(c.name + ": declared closed", defect, 1e-8);
        }
        if (cc_.action) {
            json circ = json::array();
            for (const auto& c : cc_.cycles) circ.push_back(period_entry(action(), c, r, "A"));
            r.data["action_circulation"] = std::move(circ);
        }
        json forms = json::object();
        std::vector<Chain> cycles;
        for (const auto& c : cc_.cycles) cycles.push_back(c.chain);
        for (const auto& f : cc_.forms) {
            json d;
            d["expression"] = to_string(f.form);
            auto closed = is_zero(exterior_derivative(f.form), cc_.box);
            r.zero(f.name + ": closed", closed);
            if (!closed.zero) {
                forms[f.name] = std::move(d);
                continue;
            }
            auto spec = period_spectrum(f.form, cycles, cc_.box, eval_params_);
            json ps = json::array();
            for (const auto& c : cc_.cycles) ps.push_back(period_entry(f.form, c, r, f.name));
            d["periods"] = std::move(ps);
            d["smallest"] = spec.smallest;
            d["ratios"] = spec.ratios;
            json dev = json::array();
            for (double x : spec.deviations) dev.push_back(measurement(x, 1e-6));
            d["integer_deviations"] = std::move(dev);
            d["harmonic"] = spec.smallest != 0.0;
            forms[f.name] = std::move(d);
        }
        r.data["forms"] = std::move(forms);
    }

    json residual_norm(std::span<const Expr> es) const {
        double worst = 0.0;
        for (const auto& p : points_)
            for (const auto& e : es) worst = std::max(worst, std::fabs(eval(e, p, eval_params_)));
        return measurement(worst, cc_.box.tolerance * 1e3);
    }

    void systems(Recorder& r) {
        const auto& box = cc_.box;
        if (cc_.fluid) {
            const auto& s = *cc_.fluid;
            auto vf = vorticity_fields(s, box);
            r.data["omega"] = str(vf.omega);
            r.data["acceleration"] = str(vf.accel);
            r.flag("induction identities", vf.induction_holds);
            r.flag("F = dA", vf.matches_dA);

            auto eres = euler_residual(s);
            bool euler = is_zero(std::span<const Expr>(eres), box).zero;
            r.data["euler"] = {{"solution", euler}, {"residual_norm", residual_norm(eres)}};
            bool extremal = classify(action(), s.process(), box).extremal;
            r.flag("extremal iff Euler residual vanishes", extremal == euler);

            bool viscous = !simplify(s.nu).is_zero_literal();
            bool solution = euler && !viscous;
            if (viscous) {
                auto ns = navier_stokes_residual(s, box);
                r.data["navier_stokes"] = {{"solution", ns.satisfied},
                                           {"residual_norm", residual_norm(ns.residual)},
                                           {"W", to_string(ns.W)}};
                if (ns.satisfied) r.flag("viscous work matches the first law", ns.first_law_matches);
                solution = ns.satisfied;
            }

            auto tc = torsion_current(s, box);
            r.data["torsion_current"] = {{"T", str(tc.T)}, {"h", str(tc.h)}, {"anomaly", str(tc.anomaly)}};
            r.flag("torsion balance div T + dh/dt = -2 a.omega", tc.balance_holds);
            r.flag("torsion current matches torsion vector", tc.matches_torsion_data);

            auto eng = ns_engineering_torsion(s, box);
            r.data["engineering_torsion"] = {{"is_solution", eng.is_solution}, {"agrees", eng.agrees}, {"warning", eng.warning}};
            if (eng.is_solution) r.flag("engineering torsion agrees", eng.agrees);

            if (solution) {
                Vector3 w = vec::curl(s.v);
                auto par = parity(action(), box);
                r.zero("viscous parity k_time_first = -2 nu omega.curl omega",
                       par.k_time_first + 2 * s.nu * vec::dot(w, vec::curl(w)));
            }

            auto mc = mass_current(1, s.v, box);
            r.data["mass_current"] = {{"rho", "1"}, {"residual", str(mc.residual)},
                                      {"incompressible", is_zero(mc.residual, box).zero}};
            r.flag("dJ + (div rho v + drho/dt) vol = 0", mc.identity_holds);
        }
        if (cc_.em) {
            const auto& s = *cc_.em;
            auto d = em_diagnostics(s, box);
            r.data["E"] = str(d.E);
            r.data["B"] = str(d.B);
            r.data["e_dot_b"] = str(d.e_dot_b);
            r.data["e_dot_b_sampled"] = sampled(d.e_dot_b);
            r.data["genus"] = {{"genus", d.genus.genus}, {"torsion_current_zero", d.genus.torsion_current_zero}};
            r.data["torsion_process"] = {{"category", to_string(d.torsion_process.category)},
                                         {"irreversible", d.torsion_process.irreversible},
                                         {"reversible", d.irreversibility.reversible}};
            r.flag("parity = 2 E.B (time-first: -2 E.B)", d.parity_matches);
            r.flag("gamma = E.B", d.gamma_matches);
            r.flag("torsion current = E x A + phi B, helicity = A.B", d.current_matches);
            r.flag("div T + dh/dt = -2 E.B", d.divergence_law);
            r.flag("L(T)A = gamma A", d.lie_identity);
            if (d.irreversibility.torsion_cross_check)
                r.flag("Q^dQ = gamma^2 A^dA", *d.irreversibility.torsion_cross_check);
        }
    }

    void topology(Recorder& r) {
        json tops = json::object();
        for (const auto& [name, t] : cc_.topologies) {
            json opens = json::array();
            for (auto s : t.opens()) opens.push_back(t.format(s));
            tops[name] = {{"points", t.points()}, {"opens", opens}};
        }
        r.data["topologies"] = std::move(tops);
        json maps = json::object();
        for (const auto& m : cc_.maps) {
            const auto& from = cc_.topologies[m.from].second;
            const auto& to = cc_.topologies[m.to].second;
            auto open_def = is_continuous(m.map, from, to);
            auto closure_def = is_continuous_via_closure(m.map, from, to);
            auto inverse = is_open_map(m.map, from, to);
            json d{{"from", cc_.topologies[m.from].first},
                   {"to", cc_.topologies[m.to].first},
                   {"continuous", open_def.continuous},
                   {"continuous_via_closure", closure_def.continuous},
                   {"inverse_continuous", inverse.continuous},
                   {"bijective", m.map.bijective(to.size())}};
            if (open_def.witness) d["witness"] = {{"open_set", to.format(*open_def.witness)},
                                                  {"preimage", from.format(m.map.preimage(*open_def.witness))}};
            if (closure_def.witness) d["closure_witness"] = from.format(*closure_def.witness);
            if (inverse.witness) d["inverse_witness"] = {{"open_set", from.format(*inverse.witness)},
                                                         {"image", to.format(m.map.apply(*inverse.witness))}};
            maps[m.name] = std::move(d);
            r.flag(m.name + ": open-set and closure continuity agree", open_def.continuous == closure_def.continuous);
            if (m.expect_continuous) r.flag(m.name + ": continuous", open_def.continuous, *m.expect_continuous);
            if (m.expect_inverse_continuous)
                r.flag(m.name + ": inverse continuous", inverse.continuous, *m.expect_inverse_continuous);
        }
        r.data["maps"] = std::move(maps);
    }
};

}  // namespace

RunOutcome run(const RunConfig& config) {
    auto compiled = detail::compile(config);
    return Runner(config, std::move(compiled)).run();
}

std::string render_report(const json& report) { return report.dump(2) + "\n"; }

std::string render_summary(const json& report) {
    std::string out;
    const auto& sys = report["system"];
    out += "system: " + sys["kind"].get<std::string>();
    if (sys.contains("name")) out += " " + sys["name"].get<std::string>();
    out += "\n";
    char line[256];
    for (const auto& [name, b] : report["batteries"].items()) {
        int passed = b["passed"].get<int>(), failed = b["failed"].get<int>();
        std::snprintf(line, sizeof line, "%-9s %-5s %d/%d checks", name.c_str(),
                      b.contains("error") ? "ERROR" : b["pass"].get<bool>() ? "PASS" : "FAIL", passed, passed + failed);
        out += line;
        if (b.contains("error")) out += "  (" + b["error"].get<std::string>() + ")";
        out += "\n";
        for (const auto& c : b["checks"])
            if (!c["pass"].get<bool>()) out += "    failed: " + c["name"].get<std::string>() + "\n";
        if (name == "thermo")
            for (const auto& [pname, p] : b["processes"].items())
                out += "    " + pname + ": " + p["category"].get<std::string>() +
                       (p["flags"]["irreversible"].get<bool>() ? ", irreversible" : ", reversible") + "\n";
        if (name == "topology")
            for (const auto& [mname, m] : b["maps"].items())
                out += "    " + mname + ": " + (m["continuous"].get<bool>() ? "continuous" : "not continuous") +
                       ", inverse " + (m["inverse_continuous"].get<bool>() ? "continuous" : "not continuous") + "\n";
    }
    const auto& s = report["summary"];
    std::snprintf(line, sizeof line, "overall %s: %d/%d checks passed, %d errors (exit %d)\n",
                  s["pass"].get<bool>() ? "PASS" : "FAIL", s["passed"].get<int>(), s["checks"].get<int>(),
                  s["errors"].get<int>(), s["exit_code"].get<int>());
    out += line;
    return out;
}

}  // namespace cartan
