#include "cartan/forms.hpp"

#include <bit>

#include "cartan/errors.hpp"

namespace cartan {

std::vector<int> mask_indices(IndexMask mask) {
    std::vector<int> out;
    for (int k = 0; mask; ++k, mask >>= 1) {
        if (mask & 1u) out.push_back(k);
    }
    return out;
}

IndexMask indices_mask(std::span<const int> indices) {
    IndexMask m = 0;
    for (int k : indices) m |= IndexMask{1} << k;
    return m;
}

namespace {

// Sign of moving dx^k (k not in m) from the front to its ascending slot in m.
int insertion_sign(IndexMask m, int k) {
    IndexMask below = m & ((IndexMask{1} << k) - 1);
    return (std::popcount(below) & 1) ? -1 : 1;
}

// Sign of the shuffle that sorts (a-indices, b-indices) into ascending order.
int shuffle_sign(IndexMask a, IndexMask b) {
    int inversions = 0;
    for (int j : mask_indices(b)) {
        inversions += std::popcount(a >> (j + 1));
    }
    return (inversions & 1) ? -1 : 1;
}

void require_same_chart(const Chart& a, const Chart& b, const char* op) {
    if (!(a == b)) throw UsageError(std::string(op) + ": operands live on different charts");
}

}  // namespace

DifferentialForm::DifferentialForm(Chart chart, int degree) : chart_(std::move(chart)), degree_(degree) {
    if (degree < 0) throw UsageError("negative form degree");
    if (chart_.dimension() > 31) throw UsageError("charts are limited to 31 coordinates");
}

DifferentialForm DifferentialForm::scalar(Chart chart, Expr f) {
    DifferentialForm w(std::move(chart), 0);
    w.set(0, f);
    return w;
}

DifferentialForm DifferentialForm::one_form(Chart chart, std::span<const Expr> components) {
    if (static_cast<int>(components.size()) != chart.dimension()) {
        throw UsageError("one_form: expected " + std::to_string(chart.dimension()) + " components");
    }
    DifferentialForm w(std::move(chart), 1);
    for (std::size_t k = 0; k < components.size(); ++k) w.set(IndexMask{1} << k, components[k]);
    return w;
}

DifferentialForm DifferentialForm::basis(Chart chart, std::initializer_list<int> indices) {
    DifferentialForm w(chart, static_cast<int>(indices.size()));
    IndexMask m = 0;
    int sign = 1;
    for (int k : indices) {
        if (k < 0 || k >= chart.dimension()) throw UsageError("basis: coordinate index out of range");
        if (m & (IndexMask{1} << k)) return w;  // repeated factor
        // appending dx^k at the back: count elements of m above k
        if (std::popcount(m >> (k + 1)) & 1) sign = -sign;
        m |= IndexMask{1} << k;
    }
    w.set(m, sign);
    return w;
}

DifferentialForm DifferentialForm::volume(Chart chart) {
    int n = chart.dimension();
    DifferentialForm w(std::move(chart), n);
    w.set((n == 32 ? ~IndexMask{0} : (IndexMask{1} << n) - 1), 1);
    return w;
}

Expr DifferentialForm::coefficient(IndexMask mask) const {
    auto it = terms_.find(mask);
    return it == terms_.end() ? Expr(0) : it->second;
}

Expr DifferentialForm::coefficient(std::initializer_list<int> indices) const {
    DifferentialForm b = basis(chart_, indices);
    if (b.terms_.empty()) return 0;
    auto [m, s] = *b.terms_.begin();
    return s * coefficient(m);
}

Expr DifferentialForm::scalar_part() const {
    if (degree_ == 0) return coefficient(0);
    if (degree_ == chart_.dimension()) return coefficient((IndexMask{1} << degree_) - 1);
    throw UsageError("scalar_part: form of degree " + std::to_string(degree_) + " on a " +
                     std::to_string(chart_.dimension()) + "-chart has no single coefficient");
}

void DifferentialForm::add(IndexMask mask, const Expr& c) {
    if (c.is_zero_literal()) return;
    auto it = terms_.find(mask);
    if (it == terms_.end()) {
        set(mask, c);
        return;
    }
    it->second = it->second + c;
    if (it->second.is_zero_literal()) terms_.erase(it);
}

void DifferentialForm::set(IndexMask mask, const Expr& c) {
    if (std::popcount(mask) != degree_) throw UsageError("coefficient index has the wrong degree");
    if (chart_.dimension() < 32 && (mask >> chart_.dimension())) {
        throw UsageError("coefficient index outside the chart");
    }
    if (c.is_zero_literal()) {
        terms_.erase(mask);
    } else {
        terms_[mask] = c;
    }
}

std::vector<IndexMask> DifferentialForm::basis_masks() const {
    std::vector<IndexMask> out;
    int n = chart_.dimension();
    if (degree_ > n) return out;
    for (IndexMask m = 0; m < (IndexMask{1} << n); ++m) {
        if (std::popcount(m) == degree_) out.push_back(m);
    }
    return out;
}

std::vector<Expr> DifferentialForm::dense() const {
    std::vector<Expr> out;
    for (IndexMask m : basis_masks()) out.push_back(coefficient(m));
    return out;
}

DifferentialForm DifferentialForm::simplified() const {
    DifferentialForm w(chart_, degree_);
    for (const auto& [m, c] : terms_) w.set(m, simplify(c));
    return w;
}

DifferentialForm DifferentialForm::substituted(std::string_view parameter, const Expr& value) const {
    DifferentialForm w(chart_, degree_);
    for (const auto& [m, c] : terms_) w.set(m, substitute(c, parameter, value));
    return w;
}

DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
    require_same_chart(a.chart_, b.chart_, "sum");
    if (a.degree_ != b.degree_) throw UsageError("sum of forms of different degree");
    DifferentialForm out = a;
    for (const auto& [m, c] : b.terms_) out.add(m, c);
    return out;
}

DifferentialForm operator-(const DifferentialForm& a) {
    DifferentialForm out(a.chart_, a.degree_);
    for (const auto& [m, c] : a.terms_) out.set(m, -c);
    return out;
}

DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) { return a + (-b); }

DifferentialForm operator*(const Expr& f, const DifferentialForm& a) {
    DifferentialForm out(a.chart_, a.degree_);
    for (const auto& [m, c] : a.terms_) out.set(m, f * c);
    return out;
}

std::string to_string(const DifferentialForm& w) {
    if (w.terms().empty()) return "0";
    std::string out;
    const auto& names = w.chart().names();
    for (const auto& [m, c] : w.terms()) {
        std::string basis;
        for (int k : mask_indices(m)) basis += (basis.empty() ? "d" : "^d") + names[static_cast<std::size_t>(k)];
        std::string coef = to_string(c, names);
        std::string piece;
        bool negative = false;
        if (basis.empty()) {
            piece = coef;
        } else if (c.is_one_literal()) {
            piece = basis;
        } else if (c.is_constant() && c.constant_value() == -1.0) {
            piece = basis;
            negative = true;
        } else if (c.op() == Op::Add) {
            piece = "(" + coef + ")*" + basis;
        } else {
            if (coef.starts_with("-")) {
                negative = true;
                coef.erase(0, 1);
            }
            piece = coef + "*" + basis;
        }
        if (out.empty()) out = negative ? "-" + piece : piece;
        else out += (negative ? " - " : " + ") + piece;
    }
    return out;
}

VectorField::VectorField(Chart c, std::vector<Expr> comps, Expr rho)
    : chart(std::move(c)), components(std::move(comps)), support(std::move(rho)) {
    if (static_cast<int>(components.size()) != chart.dimension()) {
        throw UsageError("vector field has " + std::to_string(components.size()) +
                         " components on a " + std::to_string(chart.dimension()) + "-chart");
    }
}

VectorField VectorField::basis(Chart c, int k) {
    std::vector<Expr> comps(static_cast<std::size_t>(c.dimension()), Expr(0));
    comps.at(static_cast<std::size_t>(k)) = 1;
    return VectorField(std::move(c), std::move(comps));
}

Expr VectorField::effective(int k) const { return support * components[static_cast<std::size_t>(k)]; }

std::vector<Expr> VectorField::effective() const {
    std::vector<Expr> out;
    for (int k = 0; k < chart.dimension(); ++k) out.push_back(effective(k));
    return out;
}

VectorField VectorField::rescaled(const Expr& f) const { return VectorField(chart, components, support * f); }

DifferentialForm exterior_derivative(const DifferentialForm& w) {
    const int n = w.chart().dimension();
    DifferentialForm out(w.chart(), w.degree() + 1);
    if (w.degree() + 1 > n) return out;
    for (const auto& [m, c] : w.terms()) {
        for (int k = 0; k < n; ++k) {
            IndexMask bit = IndexMask{1} << k;
            if (m & bit) continue;
            Expr dc = differentiate(c, k);
            if (dc.is_zero_literal()) continue;
            out.add(m | bit, insertion_sign(m, k) * dc);
        }
    }
    return out;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
    require_same_chart(a.chart(), b.chart(), "wedge");
    DifferentialForm out(a.chart(), a.degree() + b.degree());
    if (out.degree() > a.chart().dimension()) return out;
    for (const auto& [ma, ca] : a.terms()) {
        for (const auto& [mb, cb] : b.terms()) {
            if (ma & mb) continue;
            out.add(ma | mb, shuffle_sign(ma, mb) * (ca * cb));
        }
    }
    return out;
}

DifferentialForm interior(const VectorField& v, const DifferentialForm& w) {
    require_same_chart(v.chart, w.chart(), "interior");
    if (w.degree() == 0) throw UsageError("interior product of a 0-form");
    DifferentialForm out(w.chart(), w.degree() - 1);
    std::vector<Expr> comp = v.effective();
    for (const auto& [m, c] : w.terms()) {
        int position = 0;
        for (int k : mask_indices(m)) {
            if (!comp[static_cast<std::size_t>(k)].is_zero_literal()) {
                Expr term = comp[static_cast<std::size_t>(k)] * c;
                out.add(m & ~(IndexMask{1} << k), (position & 1) ? -term : term);
            }
            ++position;
        }
    }
    return out;
}

DifferentialForm lie_derivative(const VectorField& j, const DifferentialForm& w) {
    require_same_chart(j.chart, w.chart(), "lie_derivative");
    DifferentialForm out(w.chart(), w.degree());
    if (w.degree() < w.chart().dimension()) out = interior(j, exterior_derivative(w));
    if (w.degree() > 0) out = out + exterior_derivative(interior(j, w));
    return out;
}

Excess excess_function(const Expr& rho, const VectorField& v, const DifferentialForm& sigma) {
    VectorField direction(v.chart, v.effective());
    DifferentialForm drho = exterior_derivative(DifferentialForm::scalar(sigma.chart(), rho));
    DifferentialForm contracted = sigma.degree() > 0 ? interior(direction, sigma)
                                                     : DifferentialForm(sigma.chart(), 0);
    DifferentialForm rescaling = sigma.degree() > 0 ? wedge(drho, contracted)
                                                    : DifferentialForm(sigma.chart(), 0);
    DifferentialForm residual = rho * exterior_derivative(exterior_derivative(contracted));
    if (residual.degree() != sigma.degree() + 1) residual = DifferentialForm(sigma.chart(), sigma.degree() + 1);
    return {rescaling, residual};
}

ZeroVerdict is_zero(const DifferentialForm& w, const SamplingBox& box) {
    std::vector<Expr> coeffs;
    for (const auto& [m, c] : w.terms()) coeffs.push_back(c);
    return is_zero(std::span<const Expr>(coeffs), box);
}

std::vector<double> evaluate(const DifferentialForm& w, std::span<const IndexMask> masks,
                             std::span<const double> point, const ParamMap& params) {
    std::vector<Expr> coeffs;
    for (IndexMask m : masks) coeffs.push_back(w.coefficient(m));
    Program p(coeffs, params, w.chart().names());
    if (!p.free_parameters().empty()) throw UnboundParameterError(p.free_parameters().front());
    std::vector<double> out(coeffs.size());
    p.evaluate(point, out);
    return out;
}

}  // namespace cartan
