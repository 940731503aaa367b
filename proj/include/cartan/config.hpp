#pragma once

// Run configuration for the `cartan` tool: a line-oriented file of [sections] holding
// `key = value` lines. Expressions are double-quoted strings in the expression grammar;
// 1-forms are written with the differentials of the chart, e.g. "-y*dx + x*dy - z*dt".
//
//   [chart]        coordinates = x, y, z, t
//   [params]       Omega = 0.7          (or `name = free` for a sampled parameter)
//   [system]       preset = euler.rigid_rotation
//   [action]       A = "..."
//   [fluid]        v = "vx", "vy", "vz"   pressure = "..."   nu = "..."
//   [em]           a = "ax", "ay", "az"   phi = "..."
//   [process N]    components = "..", .. | torsion | flow     support = "..."
//   [chain N]      param u = 0 .. 2*pi    map = "..", ..   closed = true   order = 16
//                  panels = 4   orientation = 1
//   [form N]       w = "..."              (closed 1-form for the period battery)
//   [topology N]   points = a, b, c       opens = {}, {a}, {a,b,c}
//   [map N]        from = T1   to = T2   pairs = a -> x, b -> y
//                  expect_continuous = true   expect_inverse_continuous = false
//   [run]          battery = pfaff, torsion   seed = 1   tolerance = 1e-9   samples = 64
//                  theorem_tolerance = 1e-6   out = "report.json"
//                  exclude = "x^2 + y^2", 1e-4
//
// Comments start with `#` outside quotes.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cartan {

inline constexpr const char* kVersion = "0.1.0";

/// Source position; ignored by equality so that parse(serialize(c)) == c.
struct Location {
    int line = 0;
    int column = 0;
    friend bool operator==(const Location&, const Location&) { return true; }
};

struct Text {
    std::string value;
    Location at{};
    friend bool operator==(const Text& a, const Text& b) { return a.value == b.value; }
};

struct FluidSpec {
    std::array<Text, 3> v;
    Text pressure{"0"};
    Text nu{"0"};
    Location at{};
    bool operator==(const FluidSpec&) const = default;
};

struct EMSpec {
    std::array<Text, 3> a;
    Text phi{"0"};
    Location at{};
    bool operator==(const EMSpec&) const = default;
};

enum class ProcessKind { Components, Torsion, Flow };

struct ProcessSpec {
    std::string name;
    ProcessKind kind = ProcessKind::Components;
    std::vector<Text> components;
    Text support{"1"};
    Location at{};
    bool operator==(const ProcessSpec&) const = default;
};

struct ChainParam {
    std::string name;
    Text lo, hi;
    bool operator==(const ChainParam&) const = default;
};

struct ChainSpec {
    std::string name;
    std::vector<ChainParam> params;
    std::vector<Text> map;
    bool closed = false;
    int order = 16;
    std::vector<int> panels;
    int orientation = 1;
    Location at{};
    bool operator==(const ChainSpec&) const = default;
};

struct FormSpec {
    std::string name;
    Text w;
    bool operator==(const FormSpec&) const = default;
};

struct TopologySpec {
    std::string name;
    std::vector<std::string> points;
    std::vector<std::vector<std::string>> opens;
    Location at{};
    bool operator==(const TopologySpec&) const = default;
};

struct MapSpec {
    std::string name;
    std::string from, to;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::optional<bool> expect_continuous;
    std::optional<bool> expect_inverse_continuous;
    Location at{};
    bool operator==(const MapSpec&) const = default;
};

struct ExclusionSpec {
    Text indicator;
    double threshold = 0.0;
    bool operator==(const ExclusionSpec&) const = default;
};

struct RunConfig {
    std::vector<std::string> coordinates{"x", "y", "z", "t"};
    std::map<std::string, std::optional<double>> params;  // nullopt: free (sampled)

    // At most one system source.
    std::optional<Text> preset;
    std::optional<Text> action;
    std::optional<FluidSpec> fluid;
    std::optional<EMSpec> em;

    std::vector<ProcessSpec> processes;
    std::vector<ChainSpec> chains;
    std::vector<FormSpec> forms;
    std::vector<TopologySpec> topologies;
    std::vector<MapSpec> maps;

    std::vector<std::string> batteries;  // empty: every applicable battery
    std::uint64_t seed = 0x5eed5eedULL;
    double tolerance = 1e-9;
    int samples = 64;
    double theorem_tolerance = 1e-6;
    std::string out;
    std::vector<ExclusionSpec> exclusions;

    bool operator==(const RunConfig&) const = default;
};

/// Battery names in report order.
const std::vector<std::string>& battery_names();

/// Parses and validates (expressions against the chart, preset names, topologies, battery
/// applicability). Throws ParseError with the line/column of the offending text.
RunConfig parse_config(std::string_view text);

/// Canonical text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& c);

/// Semantic validation only (run after command-line overrides). Throws ParseError.
void validate_config(const RunConfig& c);

/// Config selecting a bundled preset with default settings.
RunConfig preset_config(const std::string& name);

}  // namespace cartan
