#pragma once

// Turns a RunConfig into library objects. Shared by config validation and the runner.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cartan/config.hpp"
#include "cartan/finite_topology.hpp"
#include "cartan/systems.hpp"

namespace cartan::detail {

struct NamedChain {
    std::string name;
    Chain chain;
};

struct NamedForm {
    std::string name;
    DifferentialForm form;
};

struct CompiledProcess {
    std::string name;
    ProcessKind kind = ProcessKind::Components;
    std::optional<VectorField> field;  // absent for the torsion process until resolved
};

struct CompiledMap {
    std::string name;
    std::size_t from = 0, to = 0;
    PointMap map;
    std::optional<bool> expect_continuous;
    std::optional<bool> expect_inverse_continuous;
};

struct Compiled {
    Chart chart = Chart::spacetime();
    ParamMap params;
    SamplingBox box;
    std::string system_kind = "none";  // preset, action, fluid, em, none
    std::string system_name;
    std::optional<FluidSystem> fluid;
    std::optional<EMSystem> em;
    std::optional<DifferentialForm> action;
    std::vector<CompiledProcess> processes;
    std::vector<NamedChain> chains;  // config chains
    std::vector<NamedChain> cycles;  // closed 1-chains: preset cycles, then config chains
    std::vector<NamedForm> forms;
    std::vector<std::pair<std::string, FiniteTopology>> topologies;
    std::vector<CompiledMap> maps;
    std::vector<std::string> batteries;
};

/// Throws ParseError for text-level problems and UsageError for battery selection.
Compiled compile(const RunConfig& c);

/// Parses "a*dx + b*dy ..." against the chart; the differentials are d<coordinate>.
DifferentialForm parse_one_form(const Text& text, const Chart& chart, const std::set<std::string>& parameters,
                                const ParamMap& params);

}  // namespace cartan::detail
