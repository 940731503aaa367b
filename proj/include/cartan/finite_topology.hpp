#pragma once

// Topologies on finite ground sets (at most 16 points), Kuratowski closure, and the two
// continuity tests: inverse images of open sets, and f(cl S) ⊆ cl f(S).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cartan {

/// Bit i set <=> point i of the ground set is a member.
using Subset = std::uint32_t;

inline constexpr int kMaxGroundSize = 16;

struct TopologyVerdict {
    bool valid = true;
    std::string reason;            // empty when valid
    std::optional<Subset> left;    // offending pair, when a union or intersection is missing
    std::optional<Subset> right;
    std::optional<Subset> missing;
};

/// Exhaustive check that `sets` contains ∅ and the ground set and is closed under pairwise
/// union and intersection.
TopologyVerdict is_topology(const std::vector<Subset>& sets, int ground_size);

class FiniteTopology {
public:
    /// Throws UsageError (with the counterexample) if `opens` is not a topology.
    FiniteTopology(std::vector<std::string> points, std::vector<Subset> opens);
    static FiniteTopology from_names(std::vector<std::string> points,
                                     const std::vector<std::vector<std::string>>& opens);
    static FiniteTopology discrete(std::vector<std::string> points);
    static FiniteTopology indiscrete(std::vector<std::string> points);

    int size() const { return static_cast<int>(points_.size()); }
    Subset ground() const { return ground_mask(size()); }
    const std::vector<std::string>& points() const { return points_; }
    /// Sorted by (cardinality, value); no duplicates.
    const std::vector<Subset>& opens() const { return opens_; }
    std::vector<Subset> closed_sets() const;
    bool is_open(Subset s) const;
    bool is_closed(Subset s) const { return is_open(ground() & ~s); }

    /// Smallest closed set containing s.
    Subset closure(Subset s) const;

    Subset subset(const std::vector<std::string>& names) const;
    /// "{a,b}" in ground order; "{}" for the empty set.
    std::string format(Subset s) const;

    static Subset ground_mask(int n) { return n >= 32 ? ~Subset{0} : (Subset{1} << n) - 1; }

    friend bool operator==(const FiniteTopology& a, const FiniteTopology& b) {
        return a.points_ == b.points_ && a.opens_ == b.opens_;
    }

private:
    std::vector<std::string> points_;
    std::vector<Subset> opens_;
    // lookup tables, filled for ground sets of at most 12 points
    std::vector<Subset> closure_table_;
    std::vector<bool> open_table_;
};

/// Total function between ground sets: image[i] is the index of the image of point i.
struct PointMap {
    std::vector<int> image;

    Subset apply(Subset s) const;
    Subset preimage(Subset s) const;
    bool bijective(int codomain_size) const;
    /// Throws UsageError unless bijective.
    PointMap inverse(int codomain_size) const;
};

/// Builds a map from point names; every domain point must be listed exactly once.
PointMap make_point_map(const FiniteTopology& from, const FiniteTopology& to,
                        const std::vector<std::pair<std::string, std::string>>& pairs);

struct ContinuityVerdict {
    bool continuous = true;
    std::optional<Subset> witness;
};

/// Inverse images of open sets are open. Witness: first open set of `to` (in opens()
/// order) whose preimage is not open.
ContinuityVerdict is_continuous(const PointMap& f, const FiniteTopology& from, const FiniteTopology& to);

/// f(closure(S)) ⊆ closure(f(S)) for every S ⊆ ground(from). Witness: first failing S.
ContinuityVerdict is_continuous_via_closure(const PointMap& f, const FiniteTopology& from,
                                            const FiniteTopology& to);

/// Images of open sets are open (continuity of the inverse correspondence).
/// Witness: first open set of `from` whose image is not open.
ContinuityVerdict is_open_map(const PointMap& f, const FiniteTopology& from, const FiniteTopology& to);

/// Bijective, continuous, and with a continuous inverse.
bool is_homeomorphism(const PointMap& f, const FiniteTopology& from, const FiniteTopology& to);

/// Push-forward {f(U)} of a topology along a bijection onto `points`.
FiniteTopology image_topology(const PointMap& f, const FiniteTopology& from, std::vector<std::string> points);

/// Every topology on n points (n ≤ 5), each as a sorted open-set list.
std::vector<std::vector<Subset>> all_topologies(int n);

/// The two-state example: T1 = [X, ∅, a, ab, abc] on {a,b,c,d} and
/// T2 = [Y, ∅, x, y, xy, yzt] on {x,y,z,t}, with a↦y, b↦z, c↦t and d↦`d_image`.
struct FigureOne {
    FiniteTopology initial;
    FiniteTopology final_state;
    PointMap map;
};
FigureOne figure_one(const std::string& d_image = "t");

}  // namespace cartan
