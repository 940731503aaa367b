#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "cartan/errors.hpp"
#include "cartan/expr.hpp"

namespace cartan {

Program::Program(std::span<const Expr> outputs, const ParamMap& params,
                 std::vector<std::string> coordinate_names)
    : coord_names_(std::move(coordinate_names)) {
    std::unordered_map<const Node*, int> slot_of;
    std::map<std::string, int, std::less<>> free_index;

    // Iterative post-order so deep trees cannot overflow the stack.
    auto emit = [&](const Expr& root) -> int {
        struct Frame {
            const Expr* e;
            bool expanded;
        };
        std::vector<Frame> stack{{&root, false}};
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            const Node* n = f.e->node();
            if (slot_of.count(n)) continue;
            if (!f.expanded && !n->args.empty()) {
                stack.push_back({f.e, true});
                for (const auto& a : n->args) {
                    if (!slot_of.count(a.node())) stack.push_back({&a, false});
                }
                continue;
            }
            Instr in;
            in.op = n->op;
            in.source = *f.e;
            switch (n->op) {
                case Op::Constant: in.value = n->value; break;
                case Op::Coordinate:
                    in.a = n->index;
                    arity_ = std::max(arity_, n->index + 1);
                    break;
                case Op::Parameter: {
                    if (auto it = params.find(n->name); it != params.end()) {
                        in.op = Op::Constant;
                        in.value = it->second;
                    } else {
                        auto [it2, inserted] =
                            free_index.emplace(n->name, static_cast<int>(free_params_.size()));
                        if (inserted) free_params_.push_back(n->name);
                        in.free_param = true;
                        in.a = it2->second;
                    }
                    break;
                }
                default:
                    in.a = static_cast<int>(arg_slots_.size());
                    in.count = static_cast<int>(n->args.size());
                    for (const auto& a : n->args) arg_slots_.push_back(slot_of.at(a.node()));
                    in.exponent = n->index;
                    break;
            }
            slot_of.emplace(n, static_cast<int>(tape_.size()));
            tape_.push_back(in);
        }
        return slot_of.at(root.node());
    };
    for (const auto& e : outputs) outputs_.push_back(emit(e));
}

void Program::fail(const std::string& what, const Expr& source) const {
    throw SingularityError(what, to_string(source, coord_names_));
}

void Program::run(std::span<const double> point, std::span<const double> free_values,
                  std::vector<double>& slots, std::vector<double>* mags) const {
    if (static_cast<int>(point.size()) < arity_) {
        throw UsageError("evaluation point has " + std::to_string(point.size()) +
                         " coordinates, expression needs " + std::to_string(arity_));
    }
    if (free_values.size() < free_params_.size()) throw UnboundParameterError(free_params_[free_values.size()]);
    slots.resize(tape_.size());
    if (mags) mags->resize(tape_.size());
    for (std::size_t i = 0; i < tape_.size(); ++i) {
        const Instr& in = tape_[i];
        double v = 0.0;
        double m = 0.0;
        auto arg = [&](int j) { return slots[static_cast<std::size_t>(arg_slots_[static_cast<std::size_t>(in.a + j)])]; };
        auto argm = [&](int j) { return (*mags)[static_cast<std::size_t>(arg_slots_[static_cast<std::size_t>(in.a + j)])]; };
        switch (in.op) {
            case Op::Constant: v = in.value; break;
            case Op::Coordinate: v = point[static_cast<std::size_t>(in.a)]; break;
            case Op::Parameter: v = free_values[static_cast<std::size_t>(in.a)]; break;
            case Op::Add:
                for (int j = 0; j < in.count; ++j) {
                    v += arg(j);
                    if (mags) m += argm(j);
                }
                break;
            case Op::Mul:
                v = 1.0;
                m = 1.0;
                for (int j = 0; j < in.count; ++j) {
                    v *= arg(j);
                    if (mags) m *= argm(j);
                }
                break;
            case Op::Pow: {
                double b = arg(0);
                if (in.exponent < 0 && b == 0.0) fail("division by zero", in.source);
                v = std::pow(b, in.exponent);
                if (mags) m = in.exponent > 0 ? std::pow(argm(0), in.exponent) : std::fabs(v);
                break;
            }
            case Op::Sin: v = std::sin(arg(0)); break;
            case Op::Cos: v = std::cos(arg(0)); break;
            case Op::Exp: v = std::exp(arg(0)); break;
            case Op::Ln:
                if (!(arg(0) > 0.0)) fail("logarithm of a non-positive value", in.source);
                v = std::log(arg(0));
                break;
            case Op::Sqrt:
                if (arg(0) < 0.0) fail("square root of a negative value", in.source);
                v = std::sqrt(arg(0));
                break;
            case Op::Atan2:
                if (arg(0) == 0.0 && arg(1) == 0.0) fail("angle undefined at the origin", in.source);
                v = std::atan2(arg(0), arg(1));
                break;
        }
        if (!std::isfinite(v)) fail("non-finite value", in.source);
        slots[i] = v;
        if (mags) {
            switch (in.op) {
                case Op::Add:
                case Op::Mul:
                case Op::Pow: break;
                case Op::Sin:
                case Op::Cos:
                    // |f(u)| can vanish at roots where the argument's error still propagates
                    m = std::max(std::fabs(v), std::min(1.0, argm(0)));
                    break;
                case Op::Exp: m = v * std::max(1.0, argm(0)); break;
                default: m = std::fabs(v); break;
            }
            (*mags)[i] = std::fabs(m);
        }
    }
}

void Program::evaluate(std::span<const double> point, std::span<double> out,
                       std::span<const double> free_values) const {
    std::vector<double> work;
    evaluate(point, out, free_values, work);
}

void Program::evaluate(std::span<const double> point, std::span<double> out,
                       std::span<const double> free_values, std::vector<double>& workspace) const {
    run(point, free_values, workspace, nullptr);
    for (std::size_t k = 0; k < outputs_.size() && k < out.size(); ++k) {
        out[k] = workspace[static_cast<std::size_t>(outputs_[k])];
    }
}

void Program::evaluate_with_magnitude(std::span<const double> point, std::span<double> out,
                                      std::span<double> magnitude,
                                      std::span<const double> free_values) const {
    std::vector<double> slots, mags;
    run(point, free_values, slots, &mags);
    for (std::size_t k = 0; k < outputs_.size(); ++k) {
        auto s = static_cast<std::size_t>(outputs_[k]);
        if (k < out.size()) out[k] = slots[s];
        if (k < magnitude.size()) magnitude[k] = mags[s];
    }
}

double eval(const Expr& e, std::span<const double> point, const ParamMap& params) {
    const Expr outs[] = {e};
    Program p(outs, params);
    if (!p.free_parameters().empty()) throw UnboundParameterError(p.free_parameters().front());
    double v = 0.0;
    p.evaluate(point, std::span<double>(&v, 1));
    return v;
}

// ---------------------------------------------------------------------------
// Probabilistic zero test

SamplingBox SamplingBox::cube(int dimension, double lo, double hi) {
    SamplingBox b;
    b.ranges.assign(static_cast<std::size_t>(dimension), {lo, hi});
    return b;
}

ZeroVerdict is_zero(const Expr& e, const SamplingBox& box) {
    const Expr one[] = {e};
    return is_zero(std::span<const Expr>(one), box);
}

ZeroVerdict is_zero(std::span<const Expr> exprs, const SamplingBox& box) {
    ZeroVerdict verdict;
    std::vector<Expr> live;
    std::vector<std::size_t> live_index;
    for (std::size_t i = 0; i < exprs.size(); ++i) {
        Expr s = simplify(exprs[i]);
        if (s.is_zero_literal()) continue;
        live.push_back(s);
        live_index.push_back(i);
    }
    if (live.empty()) {
        verdict.syntactic = true;
        return verdict;
    }

    Program program(live, box.params);
    if (program.arity() > box.dimension()) {
        throw UsageError("sampling box has " + std::to_string(box.dimension()) +
                         " coordinates, expression needs " + std::to_string(program.arity()));
    }
    std::vector<Program> exclusion_programs;
    for (const auto& ex : box.exclusions) {
        const Expr ind[] = {ex.indicator};
        exclusion_programs.emplace_back(ind, box.params);
    }

    std::mt19937_64 rng(box.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto& free = program.free_parameters();
    std::vector<double> point(static_cast<std::size_t>(box.dimension()));
    std::vector<double> free_values(free.size());
    std::vector<double> values(live.size()), mags(live.size());

    auto excluded = [&]() {
        for (std::size_t j = 0; j < exclusion_programs.size(); ++j) {
            double v = 0.0;
            try {
                std::vector<double> fv(exclusion_programs[j].free_parameters().size(), 1.0);
                exclusion_programs[j].evaluate(point, std::span<double>(&v, 1), fv);
            } catch (const SingularityError&) {
                return true;
            }
            if (std::fabs(v) < box.exclusions[j].threshold) return true;
        }
        return false;
    };

    for (int s = 0; s < box.samples; ++s) {
        int attempts = 0;
        do {
            for (std::size_t k = 0; k < point.size(); ++k) {
                auto [lo, hi] = box.ranges[k];
                point[k] = lo + (hi - lo) * unit(rng);
            }
            for (auto& f : free_values) {
                f = box.free_parameter_range.first +
                    (box.free_parameter_range.second - box.free_parameter_range.first) * unit(rng);
            }
        } while (excluded() && ++attempts < 100);

        try {
            program.evaluate_with_magnitude(point, values, mags, free_values);
        } catch (const SingularityError&) {
            ++verdict.singular;
            continue;
        }
        ++verdict.evaluated;
        for (std::size_t k = 0; k < live.size(); ++k) {
            if (std::fabs(values[k]) >= box.tolerance * (1.0 + mags[k])) {
                verdict.zero = false;
                verdict.witness = point;
                for (std::size_t f = 0; f < free.size(); ++f) verdict.witness_params[free[f]] = free_values[f];
                verdict.witness_output = live_index[k];
                verdict.witness_value = values[k];
                return verdict;
            }
        }
    }
    if (verdict.evaluated == 0) {
        throw InconclusiveError("zero test inconclusive: all " + std::to_string(box.samples) +
                                " samples were singular");
    }
    return verdict;
}

}  // namespace cartan
