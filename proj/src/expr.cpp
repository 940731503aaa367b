#include "cartan/expr.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "cartan/errors.hpp"

namespace cartan {

Expr make_node(Op op, double value, int index, std::string name, std::vector<Expr> args);

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
    // 64-bit variant of boost::hash_combine
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 12) + (h >> 4));
}

std::size_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
}

const Expr& zero_expr() {
    static const Expr z = make_node(Op::Constant, 0.0, 0, {}, {});
    return z;
}

const Expr& one_expr() {
    static const Expr o = make_node(Op::Constant, 1.0, 0, {}, {});
    return o;
}

}  // namespace

Expr make_node(Op op, double value, int index, std::string name, std::vector<Expr> args) {
    auto n = std::make_shared<Node>();
    n->op = op;
    if (value == 0.0) value = 0.0;  // fold -0.0
    n->value = value;
    n->index = index;
    n->name = std::move(name);
    n->args = std::move(args);
    std::size_t h = mix(0x51ed27, static_cast<std::size_t>(op));
    switch (op) {
        case Op::Constant: h = mix(h, std::bit_cast<std::uint64_t>(n->value)); break;
        case Op::Coordinate: h = mix(h, static_cast<std::size_t>(index)); break;
        case Op::Parameter: h = mix(h, fnv1a(n->name)); break;
        case Op::Pow: h = mix(h, static_cast<std::size_t>(static_cast<std::int64_t>(index))); break;
        default: break;
    }
    for (const auto& a : n->args) h = mix(h, a.hash());
    n->hash = h;
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr::Expr() : Expr(zero_expr()) {}

Expr::Expr(double value) : Expr(constant(value)) {}

Expr Expr::constant(double value) {
    if (value == 0.0) return zero_expr();
    if (value == 1.0) return one_expr();
    return make_node(Op::Constant, value, 0, {}, {});
}

Expr Expr::parameter(std::string name) {
    if (name.empty()) throw UsageError("parameter name must not be empty");
    return make_node(Op::Parameter, 0.0, 0, std::move(name), {});
}

Expr Expr::coordinate(int index) {
    if (index < 0) throw UsageError("coordinate index must be non-negative");
    return make_node(Op::Coordinate, 0.0, index, {}, {});
}

Op Expr::op() const { return node_->op; }
bool Expr::is_zero_literal() const { return node_->op == Op::Constant && node_->value == 0.0; }
bool Expr::is_one_literal() const { return node_->op == Op::Constant && node_->value == 1.0; }
double Expr::constant_value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
int Expr::index() const { return node_->index; }
int Expr::exponent() const { return node_->index; }
std::span<const Expr> Expr::args() const { return node_->args; }
std::size_t Expr::hash() const { return node_->hash; }

int compare(const Expr& a, const Expr& b) {
    if (a.node() == b.node()) return 0;
    if (a.op() != b.op()) return a.op() < b.op() ? -1 : 1;
    switch (a.op()) {
        case Op::Constant:
            if (a.constant_value() == b.constant_value()) return 0;
            return a.constant_value() < b.constant_value() ? -1 : 1;
        case Op::Coordinate:
            return a.index() == b.index() ? 0 : (a.index() < b.index() ? -1 : 1);
        case Op::Parameter: {
            int c = a.name().compare(b.name());
            return c == 0 ? 0 : (c < 0 ? -1 : 1);
        }
        case Op::Pow: {
            int c = compare(a.args()[0], b.args()[0]);
            if (c != 0) return c;
            return a.exponent() == b.exponent() ? 0 : (a.exponent() < b.exponent() ? -1 : 1);
        }
        default: {
            auto aa = a.args();
            auto bb = b.args();
            std::size_t n = std::min(aa.size(), bb.size());
            for (std::size_t i = 0; i < n; ++i) {
                int c = compare(aa[i], bb[i]);
                if (c != 0) return c;
            }
            if (aa.size() == bb.size()) return 0;
            return aa.size() < bb.size() ? -1 : 1;
        }
    }
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node() == b.node()) return true;
    if (a.hash() != b.hash()) return false;
    return compare(a, b) == 0;
}

namespace {

struct ExprHash {
    std::size_t operator()(const Expr& e) const { return e.hash(); }
};

// Group key/value collector preserving first-seen order.
template <typename V>
class Collector {
public:
    V& at(const Expr& key, V init) {
        auto it = index_.find(key);
        if (it != index_.end()) return entries_[it->second].second;
        index_.emplace(key, entries_.size());
        entries_.emplace_back(key, init);
        return entries_.back().second;
    }
    std::vector<std::pair<Expr, V>>& entries() { return entries_; }

private:
    std::unordered_map<Expr, std::size_t, ExprHash> index_;
    std::vector<std::pair<Expr, V>> entries_;
};

std::pair<double, Expr> split_coefficient(const Expr& term) {
    if (term.op() == Op::Constant) return {term.constant_value(), one_expr()};
    if (term.op() == Op::Mul && term.args()[0].is_constant()) {
        auto args = term.args();
        if (args.size() == 2) return {args[0].constant_value(), args[1]};
        std::vector<Expr> rest(args.begin() + 1, args.end());
        return {args[0].constant_value(), make_node(Op::Mul, 0.0, 0, {}, std::move(rest))};
    }
    return {1.0, term};
}

Expr scale_term(double coef, const Expr& rest) {
    if (coef == 1.0) return rest;
    std::vector<Expr> f;
    f.push_back(Expr::constant(coef));
    if (rest.op() == Op::Mul) {
        f.insert(f.end(), rest.args().begin(), rest.args().end());
    } else {
        f.push_back(rest);
    }
    return make_node(Op::Mul, 0.0, 0, {}, std::move(f));
}

void flatten_into(const Expr& e, Op op, std::vector<Expr>& out) {
    if (e.op() == op) {
        for (const auto& a : e.args()) out.push_back(a);
    } else {
        out.push_back(e);
    }
}

Expr base_of(const Expr& f) { return f.op() == Op::Pow ? f.args()[0] : f; }
int exponent_of(const Expr& f) { return f.op() == Op::Pow ? f.exponent() : 1; }

bool finite(double v) { return std::isfinite(v); }

}  // namespace

Expr sum(std::span<const Expr> terms) {
    std::vector<Expr> flat;
    flat.reserve(terms.size());
    for (const auto& t : terms) flatten_into(t, Op::Add, flat);

    double constant = 0.0;
    Collector<double> groups;
    for (const auto& t : flat) {
        if (t.is_constant()) {
            constant += t.constant_value();
            continue;
        }
        auto [c, rest] = split_coefficient(t);
        groups.at(rest, 0.0) += c;
    }
    std::vector<Expr> out;
    for (auto& [rest, c] : groups.entries()) {
        if (c == 0.0) continue;
        out.push_back(scale_term(c, rest));
    }
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) {
        auto [ca, ra] = split_coefficient(a);
        auto [cb, rb] = split_coefficient(b);
        int c = compare(ra, rb);
        if (c != 0) return c < 0;
        return ca < cb;
    });
    if (constant != 0.0) out.insert(out.begin(), Expr::constant(constant));
    if (out.empty()) return zero_expr();
    if (out.size() == 1) return out.front();
    return make_node(Op::Add, 0.0, 0, {}, std::move(out));
}

Expr product(std::span<const Expr> factors) {
    std::vector<Expr> flat;
    flat.reserve(factors.size());
    for (const auto& f : factors) flatten_into(f, Op::Mul, flat);

    double constant = 1.0;
    Collector<int> groups;
    for (const auto& f : flat) {
        if (f.is_constant()) {
            constant *= f.constant_value();
            continue;
        }
        groups.at(base_of(f), 0) += exponent_of(f);
    }
    if (constant == 0.0) return zero_expr();

    std::vector<Expr> out;
    for (auto& [base, n] : groups.entries()) {
        if (n == 0) continue;
        Expr p = pow(base, n);
        if (p.is_constant()) {
            constant *= p.constant_value();
        } else if (p.op() == Op::Mul) {
            // pow may fold (x^n with constant base pieces); merge back
            for (const auto& a : p.args()) {
                if (a.is_constant()) constant *= a.constant_value();
                else out.push_back(a);
            }
        } else {
            out.push_back(p);
        }
    }
    if (constant == 0.0) return zero_expr();
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) {
        int c = compare(base_of(a), base_of(b));
        if (c != 0) return c < 0;
        return exponent_of(a) < exponent_of(b);
    });
    if (out.empty()) return Expr::constant(constant);
    if (constant == 1.0 && out.size() == 1) return out.front();
    if (out.size() == 1 && out.front().op() == Op::Add) {
        // c*(a + b) -> c*a + c*b, so that negated sums cancel term by term
        std::vector<Expr> terms;
        for (const auto& a : out.front().args()) terms.push_back(constant * a);
        return sum(terms);
    }
    if (constant != 1.0) out.insert(out.begin(), Expr::constant(constant));
    return make_node(Op::Mul, 0.0, 0, {}, std::move(out));
}

Expr pow(const Expr& base, int exponent) {
    if (exponent == 0) return one_expr();
    if (exponent == 1) return base;
    if (base.is_constant()) {
        double b = base.constant_value();
        if (!(b == 0.0 && exponent < 0)) {
            double v = std::pow(b, exponent);
            if (finite(v)) return Expr::constant(v);
        }
        return make_node(Op::Pow, 0.0, exponent, {}, {base});
    }
    if (base.op() == Op::Pow) {
        long long n = static_cast<long long>(base.exponent()) * exponent;
        if (n > INT32_MAX || n < INT32_MIN) throw UsageError("integer exponent overflow");
        return pow(base.args()[0], static_cast<int>(n));
    }
    if (base.op() == Op::Mul) {
        std::vector<Expr> f;
        for (const auto& a : base.args()) f.push_back(pow(a, exponent));
        return product(f);
    }
    return make_node(Op::Pow, 0.0, exponent, {}, {base});
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_zero_literal()) return b;
    if (b.is_zero_literal()) return a;
    const Expr t[] = {a, b};
    return sum(t);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_zero_literal() || b.is_zero_literal()) return zero_expr();
    if (a.is_one_literal()) return b;
    if (b.is_one_literal()) return a;
    const Expr f[] = {a, b};
    return product(f);
}

Expr operator-(const Expr& a) { return Expr::constant(-1.0) * a; }
Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }
Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_one_literal()) return a;
    return a * pow(b, -1);
}
Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

namespace {

Expr unary(Op op, const Expr& e, double (*fn)(double), bool fold) {
    if (fold && e.is_constant()) {
        double v = fn(e.constant_value());
        if (finite(v)) return Expr::constant(v);
    }
    return make_node(op, 0.0, 0, {}, {e});
}

}  // namespace

Expr sin(const Expr& e) { return unary(Op::Sin, e, [](double v) { return std::sin(v); }, true); }
Expr cos(const Expr& e) { return unary(Op::Cos, e, [](double v) { return std::cos(v); }, true); }
Expr exp(const Expr& e) { return unary(Op::Exp, e, [](double v) { return std::exp(v); }, true); }
Expr ln(const Expr& e) {
    bool fold = e.is_constant() && e.constant_value() > 0.0;
    return unary(Op::Ln, e, [](double v) { return std::log(v); }, fold);
}
Expr sqrt(const Expr& e) {
    bool fold = e.is_constant() && e.constant_value() >= 0.0;
    return unary(Op::Sqrt, e, [](double v) { return std::sqrt(v); }, fold);
}
Expr atan2(const Expr& y, const Expr& x) {
    if (y.is_constant() && x.is_constant() && !(y.constant_value() == 0.0 && x.constant_value() == 0.0)) {
        return Expr::constant(std::atan2(y.constant_value(), x.constant_value()));
    }
    return make_node(Op::Atan2, 0.0, 0, {}, {y, x});
}

// ---------------------------------------------------------------------------
// Chart

Chart::Chart(std::vector<std::string> names) {
    if (names.empty()) throw UsageError("chart dimension must be at least 1");
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw UsageError("empty coordinate name");
        if (!seen.insert(n).second) throw UsageError("duplicate coordinate name '" + n + "'");
    }
    names_ = std::make_shared<const std::vector<std::string>>(std::move(names));
}

Chart Chart::spacetime() {
    static const Chart c(std::vector<std::string>{"x", "y", "z", "t"});
    return c;
}

std::optional<int> Chart::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_->size(); ++i) {
        if ((*names_)[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

Expr Chart::coordinate(std::string_view name) const {
    auto i = index_of(name);
    if (!i) throw UsageError("unknown coordinate '" + std::string(name) + "'");
    return Expr::coordinate(*i);
}

// ---------------------------------------------------------------------------
// Rewriting

namespace {

template <typename Leaf>
Expr rebuild(const Expr& e, Leaf&& leaf, std::unordered_map<const Node*, Expr>& memo) {
    if (auto it = memo.find(e.node()); it != memo.end()) return it->second;
    Expr result;
    switch (e.op()) {
        case Op::Constant:
        case Op::Coordinate:
        case Op::Parameter:
            result = leaf(e);
            break;
        default: {
            std::vector<Expr> args;
            args.reserve(e.args().size());
            for (const auto& a : e.args()) args.push_back(rebuild(a, leaf, memo));
            switch (e.op()) {
                case Op::Add: result = sum(args); break;
                case Op::Mul: result = product(args); break;
                case Op::Pow: result = pow(args[0], e.exponent()); break;
                case Op::Sin: result = sin(args[0]); break;
                case Op::Cos: result = cos(args[0]); break;
                case Op::Exp: result = exp(args[0]); break;
                case Op::Ln: result = ln(args[0]); break;
                case Op::Sqrt: result = sqrt(args[0]); break;
                case Op::Atan2: result = atan2(args[0], args[1]); break;
                default: break;
            }
        }
    }
    memo.emplace(e.node(), result);
    return result;
}

Expr diff(const Expr& e, int k, std::unordered_map<const Node*, Expr>& memo) {
    if (auto it = memo.find(e.node()); it != memo.end()) return it->second;
    Expr r;
    auto args = e.args();
    switch (e.op()) {
        case Op::Constant:
        case Op::Parameter:
            r = Expr();
            break;
        case Op::Coordinate:
            r = e.index() == k ? Expr(1.0) : Expr();
            break;
        case Op::Add: {
            std::vector<Expr> t;
            for (const auto& a : args) t.push_back(diff(a, k, memo));
            r = sum(t);
            break;
        }
        case Op::Mul: {
            std::vector<Expr> t;
            for (std::size_t i = 0; i < args.size(); ++i) {
                Expr di = diff(args[i], k, memo);
                if (di.is_zero_literal()) continue;
                std::vector<Expr> f;
                for (std::size_t j = 0; j < args.size(); ++j) f.push_back(j == i ? di : args[j]);
                t.push_back(product(f));
            }
            r = sum(t);
            break;
        }
        case Op::Pow: {
            Expr db = diff(args[0], k, memo);
            r = db.is_zero_literal() ? Expr() : Expr(e.exponent()) * pow(args[0], e.exponent() - 1) * db;
            break;
        }
        case Op::Sin: r = cos(args[0]) * diff(args[0], k, memo); break;
        case Op::Cos: r = -sin(args[0]) * diff(args[0], k, memo); break;
        case Op::Exp: r = e * diff(args[0], k, memo); break;
        case Op::Ln: r = diff(args[0], k, memo) / args[0]; break;
        case Op::Sqrt: r = diff(args[0], k, memo) / (Expr(2.0) * e); break;
        case Op::Atan2: {
            const Expr& y = args[0];
            const Expr& x = args[1];
            Expr num = x * diff(y, k, memo) - y * diff(x, k, memo);
            r = num.is_zero_literal() ? Expr() : num / (x * x + y * y);
            break;
        }
    }
    memo.emplace(e.node(), r);
    return r;
}

void visit(const Expr& e, std::set<const Node*>& seen, auto&& fn) {
    if (!seen.insert(e.node()).second) return;
    fn(e);
    for (const auto& a : e.args()) visit(a, seen, fn);
}

}  // namespace

Expr differentiate(const Expr& e, int k) {
    if (k < 0) throw UsageError("coordinate index must be non-negative");
    std::unordered_map<const Node*, Expr> memo;
    return diff(e, k, memo);
}

Expr differentiate(const Expr& e, int k, const Chart& chart) {
    if (k < 0 || k >= chart.dimension()) {
        throw UsageError("coordinate index " + std::to_string(k) + " outside chart of dimension " +
                         std::to_string(chart.dimension()));
    }
    return differentiate(e, k);
}

Expr simplify(const Expr& e) {
    std::unordered_map<const Node*, Expr> memo;
    return rebuild(e, [](const Expr& leaf) { return leaf; }, memo);
}

Expr substitute(const Expr& e, std::span<const Expr> values) {
    std::unordered_map<const Node*, Expr> memo;
    return rebuild(
        e,
        [&](const Expr& leaf) {
            if (leaf.op() == Op::Coordinate && static_cast<std::size_t>(leaf.index()) < values.size()) {
                return values[static_cast<std::size_t>(leaf.index())];
            }
            return leaf;
        },
        memo);
}

Expr substitute(const Expr& e, std::string_view parameter, const Expr& value) {
    std::unordered_map<const Node*, Expr> memo;
    return rebuild(
        e,
        [&](const Expr& leaf) {
            if (leaf.op() == Op::Parameter && leaf.name() == parameter) return value;
            return leaf;
        },
        memo);
}

std::set<std::string> parameters(const Expr& e) {
    std::set<std::string> out;
    std::set<const Node*> seen;
    visit(e, seen, [&](const Expr& n) {
        if (n.op() == Op::Parameter) out.insert(n.name());
    });
    return out;
}

int max_coordinate(const Expr& e) {
    int m = -1;
    std::set<const Node*> seen;
    visit(e, seen, [&](const Expr& n) {
        if (n.op() == Op::Coordinate) m = std::max(m, n.index());
    });
    return m;
}

std::size_t node_count(const Expr& e) {
    std::set<const Node*> seen;
    std::size_t count = 0;
    visit(e, seen, [&](const Expr&) { ++count; });
    return count;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return std::to_string(v);
    return std::string(buf, ptr);
}

enum Prec { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4, kAtom = 5 };

struct Printer {
    std::span<const std::string> names;

    std::string coord(int i) const {
        if (static_cast<std::size_t>(i) < names.size()) return names[static_cast<std::size_t>(i)];
        return "x" + std::to_string(i);
    }

    std::string wrap(const Expr& e, int min_prec) const {
        auto [s, p] = render(e);
        if (p < min_prec) return "(" + s + ")";
        return s;
    }

    // Product of factors with positive exponents over factors with negative ones.
    std::pair<std::string, int> render_product(double coef, std::vector<Expr> num,
                                               std::vector<Expr> den) const {
        std::string out;
        bool negative = coef < 0;
        double mag = std::fabs(coef);
        std::vector<std::string> parts;
        if (mag != 1.0 || num.empty()) parts.push_back(format_number(mag));
        for (const auto& f : num) parts.push_back(wrap(f, kPower));
        for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "*" : "") + parts[i];
        if (!den.empty()) {
            std::string d;
            if (den.size() == 1) {
                d = wrap(den[0], kPower);
            } else {
                for (std::size_t i = 0; i < den.size(); ++i) d += (i ? "*" : "") + wrap(den[i], kPower);
                d = "(" + d + ")";
            }
            out += "/" + d;
        }
        if (negative) return {"-" + out, kUnary};
        return {out, kProduct};
    }

    std::pair<std::string, int> render(const Expr& e) const {
        switch (e.op()) {
            case Op::Constant: {
                double v = e.constant_value();
                if (v < 0) return {"-" + format_number(-v), kUnary};
                return {format_number(v), kAtom};
            }
            case Op::Coordinate: return {coord(e.index()), kAtom};
            case Op::Parameter: return {e.name(), kAtom};
            case Op::Add: {
                std::string out;
                bool first = true;
                for (const auto& t : e.args()) {
                    auto [s, p] = render(t);
                    if (first) {
                        out = s;
                        first = false;
                    } else if (!s.empty() && s[0] == '-' && p == kUnary) {
                        out += " - " + s.substr(1);
                    } else {
                        out += " + " + s;
                    }
                }
                return {out, kSum};
            }
            case Op::Mul: {
                double coef = 1.0;
                std::vector<Expr> num, den;
                for (const auto& f : e.args()) {
                    if (f.is_constant()) coef *= f.constant_value();
                    else if (f.op() == Op::Pow && f.exponent() < 0) den.push_back(pow(f.args()[0], -f.exponent()));
                    else num.push_back(f);
                }
                return render_product(coef, std::move(num), std::move(den));
            }
            case Op::Pow: {
                if (e.exponent() < 0) return render_product(1.0, {}, {pow(e.args()[0], -e.exponent())});
                return {wrap(e.args()[0], kAtom) + "^" + std::to_string(e.exponent()), kPower};
            }
            case Op::Sin: return {"sin(" + render(e.args()[0]).first + ")", kAtom};
            case Op::Cos: return {"cos(" + render(e.args()[0]).first + ")", kAtom};
            case Op::Exp: return {"exp(" + render(e.args()[0]).first + ")", kAtom};
            case Op::Ln: return {"ln(" + render(e.args()[0]).first + ")", kAtom};
            case Op::Sqrt: return {"sqrt(" + render(e.args()[0]).first + ")", kAtom};
            case Op::Atan2:
                return {"atan2(" + render(e.args()[0]).first + ", " + render(e.args()[1]).first + ")", kAtom};
        }
        return {"?", kAtom};
    }
};

}  // namespace

std::string to_string(const Expr& e, std::span<const std::string> coordinate_names) {
    return Printer{coordinate_names}.render(e).first;
}

}  // namespace cartan
