#pragma once

// Immutable symbolic scalar expressions over chart coordinates and named parameters.
//
// Expressions are built through canonicalizing constructors: sums and products are
// flattened and sorted, constants are folded, like terms and like factors are
// collected, integer powers of products are distributed. Nothing else is rewritten
// (no trig identities, no expansion of products of sums), so canonicalization never
// changes the value of an expression; deciding equality is left to `is_zero`.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cartan {

enum class Op : std::uint8_t {
    Constant,
    Coordinate,
    Parameter,
    Add,
    Mul,
    Pow,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Atan2,
};

struct Node;

class Expr {
public:
    Expr();
    Expr(double value);  // NOLINT: implicit so that `2 * x` reads naturally
    Expr(int value) : Expr(static_cast<double>(value)) {}  // NOLINT

    static Expr constant(double value);
    static Expr parameter(std::string name);
    static Expr coordinate(int index);

    Op op() const;
    bool is_constant() const { return op() == Op::Constant; }
    bool is_zero_literal() const;
    bool is_one_literal() const;
    double constant_value() const;
    const std::string& name() const;
    int index() const;
    int exponent() const;
    std::span<const Expr> args() const;
    std::size_t hash() const;
    const Node* node() const { return node_.get(); }

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    friend Expr make_node(Op, double, int, std::string, std::vector<Expr>);

    std::shared_ptr<const Node> node_;
};

struct Node {
    Op op = Op::Constant;
    double value = 0.0;   // Constant
    int index = 0;        // Coordinate index, or Pow exponent
    std::string name;     // Parameter
    std::vector<Expr> args;
    std::size_t hash = 0;
};

/// Total structural order used to canonicalize sums and products. Negative, zero or
/// positive like strcmp.
int compare(const Expr& a, const Expr& b);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator-=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

Expr sum(std::span<const Expr> terms);
Expr product(std::span<const Expr> factors);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr exp(const Expr& e);
Expr ln(const Expr& e);
Expr sqrt(const Expr& e);
Expr atan2(const Expr& y, const Expr& x);

/// Coordinate system of a chart: n >= 1 unique coordinate names.
class Chart {
public:
    explicit Chart(std::vector<std::string> names);

    /// The default 4-chart (x, y, z, t).
    static Chart spacetime();

    int dimension() const { return static_cast<int>(names_->size()); }
    const std::string& name(int index) const { return names_->at(static_cast<std::size_t>(index)); }
    const std::vector<std::string>& names() const { return *names_; }
    std::optional<int> index_of(std::string_view name) const;
    Expr coordinate(std::string_view name) const;

    friend bool operator==(const Chart& a, const Chart& b) {
        return a.names_ == b.names_ || *a.names_ == *b.names_;
    }

private:
    std::shared_ptr<const std::vector<std::string>> names_;
};

/// Exact partial derivative with respect to coordinate `k`.
Expr differentiate(const Expr& e, int k);
/// As above, but rejects coordinates outside `chart`.
Expr differentiate(const Expr& e, int k, const Chart& chart);

/// Rebuilds `e` through the canonicalizing constructors. Idempotent.
Expr simplify(const Expr& e);

/// Replaces coordinate i with `values[i]` (coordinates beyond the span are kept).
Expr substitute(const Expr& e, std::span<const Expr> values);
/// Replaces a named parameter with an expression.
Expr substitute(const Expr& e, std::string_view parameter, const Expr& value);

std::set<std::string> parameters(const Expr& e);
/// Largest coordinate index referenced, or -1.
int max_coordinate(const Expr& e);
std::size_t node_count(const Expr& e);

/// Infix rendering that the expression parser reads back. Coordinates print as the
/// given names, or as x0, x1, ... when none are given.
std::string to_string(const Expr& e, std::span<const std::string> coordinate_names = {});

using ParamMap = std::map<std::string, double, std::less<>>;

/// Straight-line program evaluating several expressions at once, with shared
/// subexpressions computed a single time. Parameters present in `params` are bound at
/// compile time; any other parameter becomes a free input (see free_parameters()).
/// Evaluation is pure and safe to run concurrently with separate workspaces.
class Program {
public:
    Program() = default;
    explicit Program(std::span<const Expr> outputs, const ParamMap& params = {},
                     std::vector<std::string> coordinate_names = {});

    std::size_t output_count() const { return outputs_.size(); }
    const std::vector<std::string>& free_parameters() const { return free_params_; }
    /// Number of point coordinates the program reads.
    int arity() const { return arity_; }

    /// Throws SingularityError on poles, invalid ln/sqrt arguments or non-finite results,
    /// and UnboundParameterError if free parameters exist but no values are given.
    void evaluate(std::span<const double> point, std::span<double> out,
                  std::span<const double> free_values = {}) const;
    void evaluate(std::span<const double> point, std::span<double> out,
                  std::span<const double> free_values, std::vector<double>& workspace) const;

    /// Also returns, per output, a running magnitude bound: the value the expression would
    /// take with every sum replaced by the sum of absolute values. Rounding error in the
    /// output scales with it.
    void evaluate_with_magnitude(std::span<const double> point, std::span<double> out,
                                 std::span<double> magnitude,
                                 std::span<const double> free_values = {}) const;

private:
    struct Instr {
        Op op = Op::Constant;
        int a = 0;       // coordinate index, free-param index, first arg position
        int count = 0;   // number of args
        int exponent = 0;
        double value = 0.0;
        bool free_param = false;
        Expr source;
    };

    void run(std::span<const double> point, std::span<const double> free_values,
             std::vector<double>& slots, std::vector<double>* mags) const;
    [[noreturn]] void fail(const std::string& what, const Expr& source) const;

    std::vector<Instr> tape_;
    std::vector<int> arg_slots_;
    std::vector<int> outputs_;
    std::vector<std::string> free_params_;
    std::vector<std::string> coord_names_;
    int arity_ = 0;
};

/// Single expression evaluation; every parameter must be bound.
double eval(const Expr& e, std::span<const double> point, const ParamMap& params = {});

/// Region removed from zero-test sampling: points where |indicator| < threshold.
struct Exclusion {
    Expr indicator;
    double threshold = 0.0;
};

/// Sampling domain for the probabilistic zero test.
struct SamplingBox {
    std::vector<std::pair<double, double>> ranges;  // one per coordinate
    ParamMap params;                                // fixed parameter values
    std::pair<double, double> free_parameter_range{0.5, 1.5};
    std::vector<Exclusion> exclusions;
    int samples = 64;
    double tolerance = 1e-9;
    std::uint64_t seed = 0x5eed5eedULL;

    static SamplingBox cube(int dimension, double lo = -1.0, double hi = 1.0);
    int dimension() const { return static_cast<int>(ranges.size()); }
};

struct ZeroVerdict {
    bool zero = true;
    bool syntactic = false;        // decided without sampling
    std::vector<double> witness;   // coordinates of a nonzero sample
    ParamMap witness_params;       // free parameter values at the witness
    std::size_t witness_output = 0;
    double witness_value = 0.0;
    int evaluated = 0;
    int singular = 0;
};

/// Simplify, then sample `box.samples` seeded points. Zero iff every sample satisfies
/// |value| < tolerance * (1 + magnitude). Throws InconclusiveError if every sample was
/// singular.
ZeroVerdict is_zero(const Expr& e, const SamplingBox& box);
/// Joint test: zero iff every expression is zero at every sample.
ZeroVerdict is_zero(std::span<const Expr> exprs, const SamplingBox& box);

/// Expression text grammar: + - * / ^ (integer exponents), sin cos exp ln sqrt atan2,
/// `pi`, numbers, coordinate names and parameter identifiers.
struct ParseOptions {
    std::vector<std::string> coordinates;
    /// When set, identifiers that are neither coordinates nor listed here are errors.
    std::optional<std::set<std::string>> parameters;
    int line = 1;
    int column = 1;  // column of the first character of the text
};

Expr parse_expression(std::string_view text, const ParseOptions& options = {});

}  // namespace cartan
