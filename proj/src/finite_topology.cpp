#include "cartan/finite_topology.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "cartan/errors.hpp"

namespace cartan {

namespace {

bool by_size(Subset a, Subset b) {
    int ca = std::popcount(a), cb = std::popcount(b);
    return ca != cb ? ca < cb : a < b;
}

std::vector<Subset> normalized(std::vector<Subset> sets) {
    std::sort(sets.begin(), sets.end(), by_size);
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    return sets;
}

std::string hex(Subset s) {
    std::string out = "{";
    bool first = true;
    for (int i = 0; i < 32; ++i) {
        if (s & (Subset{1} << i)) {
            out += (first ? "" : ",") + std::to_string(i);
            first = false;
        }
    }
    return out + "}";
}

}  // namespace

TopologyVerdict is_topology(const std::vector<Subset>& sets, int ground_size) {
    if (ground_size < 0 || ground_size > kMaxGroundSize)
        throw UsageError("ground set size must be between 0 and " + std::to_string(kMaxGroundSize));
    Subset g = FiniteTopology::ground_mask(ground_size);
    TopologyVerdict v;
    std::set<Subset> present;
    for (Subset s : sets) {
        if (s & ~g) {
            v.valid = false;
            v.reason = "set " + hex(s) + " is not a subset of the ground set";
            v.missing = s;
            return v;
        }
        present.insert(s);
    }
    for (Subset must : {Subset{0}, g}) {
        if (!present.count(must)) {
            v.valid = false;
            v.reason = must == 0 ? "missing the empty set" : "missing the ground set";
            v.missing = must;
            return v;
        }
    }
    std::vector<Subset> list(present.begin(), present.end());
    std::sort(list.begin(), list.end(), by_size);
    for (std::size_t i = 0; i < list.size(); ++i) {
        for (std::size_t j = i + 1; j < list.size(); ++j) {
            Subset u = list[i] | list[j], n = list[i] & list[j];
            for (auto [result, op] : {std::pair{u, "union"}, std::pair{n, "intersection"}}) {
                if (!present.count(result)) {
                    v.valid = false;
                    v.reason = std::string("not closed under ") + op;
                    v.left = list[i];
                    v.right = list[j];
                    v.missing = result;
                    return v;
                }
            }
        }
    }
    return v;
}

FiniteTopology::FiniteTopology(std::vector<std::string> points, std::vector<Subset> opens)
    : points_(std::move(points)), opens_(normalized(std::move(opens))) {
    int n = size();
    if (n > kMaxGroundSize) throw UsageError("ground set has more than " + std::to_string(kMaxGroundSize) + " points");
    std::set<std::string> seen(points_.begin(), points_.end());
    if (seen.size() != points_.size()) throw UsageError("ground set has repeated point names");
    auto v = is_topology(opens_, n);
    if (!v.valid) {
        std::string msg = "not a topology: " + v.reason;
        if (v.left && v.right)
            msg += " (" + format(*v.left) + ", " + format(*v.right) + " -> missing " + format(*v.missing) + ")";
        else if (v.missing && !(*v.missing & ~ground()))
            msg += " " + format(*v.missing);
        throw UsageError(msg);
    }
    if (n <= 12) {
        closure_table_.resize(std::size_t{1} << n);
        open_table_.assign(std::size_t{1} << n, false);
        for (Subset u : opens_) open_table_[u] = true;
        for (Subset s = 0; s <= ground(); ++s) {
            Subset c = ground();
            for (Subset u : opens_)
                if (!(u & s)) c &= ~u;
            closure_table_[s] = c;
        }
    }
}

FiniteTopology FiniteTopology::from_names(std::vector<std::string> points,
                                          const std::vector<std::vector<std::string>>& opens) {
    std::vector<Subset> masks;
    for (const auto& names : opens) {
        Subset s = 0;
        for (const auto& name : names) {
            auto it = std::find(points.begin(), points.end(), name);
            if (it == points.end()) throw UsageError("unknown point '" + name + "'");
            s |= Subset{1} << (it - points.begin());
        }
        masks.push_back(s);
    }
    return FiniteTopology(std::move(points), std::move(masks));
}

FiniteTopology FiniteTopology::discrete(std::vector<std::string> points) {
    if (points.size() > 12) throw UsageError("discrete topology limited to 12 points");
    std::vector<Subset> all;
    for (Subset s = 0; s <= ground_mask(static_cast<int>(points.size())); ++s) all.push_back(s);
    return FiniteTopology(std::move(points), std::move(all));
}

FiniteTopology FiniteTopology::indiscrete(std::vector<std::string> points) {
    Subset g = ground_mask(static_cast<int>(points.size()));
    return FiniteTopology(std::move(points), {0, g});
}

std::vector<Subset> FiniteTopology::closed_sets() const {
    std::vector<Subset> out;
    for (Subset u : opens_) out.push_back(ground() & ~u);
    return normalized(std::move(out));
}

bool FiniteTopology::is_open(Subset s) const {
    if (!open_table_.empty()) return s <= ground() && open_table_[s];
    return std::binary_search(opens_.begin(), opens_.end(), s, by_size);
}

Subset FiniteTopology::closure(Subset s) const {
    if (s & ~ground()) throw UsageError("closure: subset outside the ground set");
    if (!closure_table_.empty()) return closure_table_[s];
    // complement of the union of the open sets missing s
    Subset c = ground();
    for (Subset u : opens_)
        if (!(u & s)) c &= ~u;
    return c;
}

Subset FiniteTopology::subset(const std::vector<std::string>& names) const {
    Subset s = 0;
    for (const auto& name : names) {
        auto it = std::find(points_.begin(), points_.end(), name);
        if (it == points_.end()) throw UsageError("unknown point '" + name + "'");
        s |= Subset{1} << (it - points_.begin());
    }
    return s;
}

std::string FiniteTopology::format(Subset s) const {
    std::string out = "{";
    bool first = true;
    for (int i = 0; i < size(); ++i) {
        if (s & (Subset{1} << i)) {
            out += (first ? "" : ",") + points_[static_cast<std::size_t>(i)];
            first = false;
        }
    }
    return out + "}";
}

Subset PointMap::apply(Subset s) const {
    Subset out = 0;
    for (std::size_t i = 0; i < image.size(); ++i)
        if (s & (Subset{1} << i)) out |= Subset{1} << image[i];
    return out;
}

Subset PointMap::preimage(Subset s) const {
    Subset out = 0;
    for (std::size_t i = 0; i < image.size(); ++i)
        if (s & (Subset{1} << image[i])) out |= Subset{1} << i;
    return out;
}

bool PointMap::bijective(int codomain_size) const {
    if (static_cast<int>(image.size()) != codomain_size) return false;
    return apply(FiniteTopology::ground_mask(static_cast<int>(image.size()))) ==
           FiniteTopology::ground_mask(codomain_size);
}

PointMap PointMap::inverse(int codomain_size) const {
    if (!bijective(codomain_size)) throw UsageError("inverse: map is not bijective");
    PointMap inv{std::vector<int>(image.size())};
    for (std::size_t i = 0; i < image.size(); ++i) inv.image[static_cast<std::size_t>(image[i])] = static_cast<int>(i);
    return inv;
}

PointMap make_point_map(const FiniteTopology& from, const FiniteTopology& to,
                        const std::vector<std::pair<std::string, std::string>>& pairs) {
    PointMap f{std::vector<int>(static_cast<std::size_t>(from.size()), -1)};
    for (const auto& [a, b] : pairs) {
        Subset sa = from.subset({a}), sb = to.subset({b});
        auto i = static_cast<std::size_t>(std::countr_zero(sa));
        if (f.image[i] != -1) throw UsageError("point '" + a + "' is mapped twice");
        f.image[i] = std::countr_zero(sb);
    }
    for (std::size_t i = 0; i < f.image.size(); ++i)
        if (f.image[i] == -1) throw UsageError("point '" + from.points()[i] + "' has no image");
    return f;
}

namespace {

void check_map(const PointMap& f, const FiniteTopology& from, const FiniteTopology& to) {
    if (static_cast<int>(f.image.size()) != from.size()) throw UsageError("map domain does not match the ground set");
    for (int j : f.image)
        if (j < 0 || j >= to.size()) throw UsageError("map image outside the target ground set");
}

}  // namespace

ContinuityVerdict is_continuous(const PointMap& f, const FiniteTopology& from, const FiniteTopology& to) {
    check_map(f, from, to);
    for (Subset u : to.opens()) {
        if (!from.is_open(f.preimage(u))) return {false, u};
    }
    return {};
}

ContinuityVerdict is_continuous_via_closure(const PointMap& f, const FiniteTopology& from,
                                            const FiniteTopology& to) {
    check_map(f, from, to);
    for (Subset s = 0; s <= from.ground(); ++s) {
        Subset lhs = f.apply(from.closure(s));
        Subset rhs = to.closure(f.apply(s));
        if (lhs & ~rhs) return {false, s};
    }
    return {};
}

ContinuityVerdict is_open_map(const PointMap& f, const FiniteTopology& from, const FiniteTopology& to) {
    check_map(f, from, to);
    for (Subset u : from.opens()) {
        if (!to.is_open(f.apply(u))) return {false, u};
    }
    return {};
}

bool is_homeomorphism(const PointMap& f, const FiniteTopology& from, const FiniteTopology& to) {
    if (!f.bijective(to.size())) return false;
    return is_continuous(f, from, to).continuous && is_continuous(f.inverse(to.size()), to, from).continuous;
}

FiniteTopology image_topology(const PointMap& f, const FiniteTopology& from, std::vector<std::string> points) {
    if (!f.bijective(static_cast<int>(points.size()))) throw UsageError("image_topology: map is not bijective");
    std::vector<Subset> opens;
    for (Subset u : from.opens()) opens.push_back(f.apply(u));
    return FiniteTopology(std::move(points), std::move(opens));
}

std::vector<std::vector<Subset>> all_topologies(int n) {
    if (n < 0 || n > 5) throw UsageError("all_topologies: n must be between 0 and 5");
    Subset g = FiniteTopology::ground_mask(n);
    std::vector<Subset> middle;
    for (Subset s = 1; s < g; ++s) middle.push_back(s);
    std::vector<std::vector<Subset>> out;
    // grow families in increasing mask order, pruning as soon as a pair's union or
    // intersection falls below the current candidate without being present
    std::vector<Subset> family;
    std::vector<bool> in(std::size_t{1} << n, false);
    auto closed_against = [&](Subset s) {
        for (Subset u : family) {
            Subset a = u | s, b = u & s;
            if (a < s && a != 0 && a != g && !in[a]) return false;
            if (b < s && b != 0 && !in[b]) return false;
        }
        return true;
    };
    auto finish = [&]() {
        std::vector<Subset> sets{0};
        if (g != 0) sets.push_back(g);
        sets.insert(sets.end(), family.begin(), family.end());
        if (is_topology(sets, n).valid) out.push_back(normalized(sets));
    };
    auto rec = [&](auto&& self, std::size_t next) -> void {
        if (next == middle.size()) {
            finish();
            return;
        }
        Subset s = middle[next];
        self(self, next + 1);
        if (closed_against(s)) {
            family.push_back(s);
            in[s] = true;
            self(self, next + 1);
            in[s] = false;
            family.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

FigureOne figure_one(const std::string& d_image) {
    auto initial = FiniteTopology::from_names({"a", "b", "c", "d"}, {{"a", "b", "c", "d"}, {}, {"a"}, {"a", "b"}, {"a", "b", "c"}});
    auto final_state =
        FiniteTopology::from_names({"x", "y", "z", "t"}, {{"x", "y", "z", "t"}, {}, {"x"}, {"y"}, {"x", "y"}, {"y", "z", "t"}});
    auto map = make_point_map(initial, final_state, {{"a", "y"}, {"b", "z"}, {"c", "t"}, {"d", d_image}});
    return {std::move(initial), std::move(final_state), std::move(map)};
}

}  // namespace cartan
