#include <doctest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "../src/compile.hpp"
#include "cartan/config.hpp"
#include "cartan/errors.hpp"
#include "cartan/report.hpp"
#include "corpus.hpp"

using namespace cartan;
using cartan::testing::Corpus;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string config_path(const std::string& name) { return std::string(CARTAN_SOURCE_DIR) + "/configs/" + name; }

/// Location of the ParseError thrown by parse_config, or {-1, -1}.
std::pair<int, int> error_at(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ParseError& e) {
        return {e.line(), e.column()};
    }
    return {-1, -1};
}

const std::vector<std::string> kConfigs{
    "em_plane_wave.cfg",        "em_torsion_nonzero.cfg", "euler_rigid_rotation.cfg", "fluid_beltrami_abc.cfg",
    "ns_decaying_abc.cfg",      "ns_decaying_shear.cfg",  "figure1_topology.cfg",     "harmonic_periods.cfg",
    "contact_action.cfg",
};

/// Random valid configuration; the expressions come from the corpus.
RunConfig random_config(Corpus& c) {
    RunConfig cfg;
    const std::vector<std::string> names{"x", "y", "z", "t"};
    auto text = [&](int depth) { return Text{to_string(c.expr(depth), names), {}}; };
    int np = c.pick(0, 3);
    for (int i = 0; i < np; ++i) {
        std::string name = "p" + std::to_string(i);
        if (c.pick(0, 4) == 0) cfg.params[name] = std::nullopt;
        else cfg.params[name] = c.uniform(-1e3, 1e3) * std::pow(10.0, c.pick(-12, 12));
    }
    switch (c.pick(0, 3)) {
    case 0: cfg.preset = Text{preset_names()[static_cast<std::size_t>(c.pick(0, 5))], {}}; break;
    case 1: {
        std::string a;
        for (const auto& n : names) a += (a.empty() ? "" : " + ") + std::string("(") + text(1).value + ")*d" + n;
        cfg.action = Text{a, {}};
        break;
    }
    case 2: cfg.fluid = FluidSpec{{text(2), text(2), text(2)}, text(1), Text{"0.1"}, {}}; break;
    default: cfg.em = EMSpec{{text(2), text(2), text(2)}, text(2), {}}; break;
    }
    if (cfg.action && c.pick(0, 1)) {
        ProcessSpec p;
        p.name = "proc";
        for (int k = 0; k < 4; ++k) p.components.push_back(text(1));
        if (c.pick(0, 1)) p.support = Text{"1 + x^2"};
        cfg.processes.push_back(p);
        ProcessSpec t;
        t.name = "tors";
        t.kind = ProcessKind::Torsion;
        cfg.processes.push_back(t);
    }
    if (c.pick(0, 1)) {
        ChainSpec ch;
        ch.name = "loop";
        ch.params.push_back({"u", Text{"0"}, Text{c.pick(0, 1) ? "2*pi" : "6.25"}});
        ch.map = {Text{"0.5*cos(u)"}, Text{"0.5*sin(u)"}, Text{"0.25"}, Text{"0"}};
        ch.closed = true;
        ch.order = c.pick(4, 24);
        ch.panels = {c.pick(1, 6)};
        ch.orientation = c.pick(0, 1) ? 1 : -1;
        cfg.chains.push_back(ch);
    }
    if (c.pick(0, 1)) cfg.forms.push_back({"gamma", Text{"(y*dx - x*dy)/(x^2 + y^2)"}});
    if (c.pick(0, 1)) {
        cfg.topologies.push_back({"T", {"a", "b", "c"}, {{}, {"a"}, {"a", "b"}, {"a", "b", "c"}}, {}});
        cfg.topologies.push_back({"S", {"p", "q"}, {{}, {"p", "q"}}, {}});
        MapSpec m;
        m.name = "m";
        m.from = "T";
        m.to = "S";
        m.pairs = {{"a", "p"}, {"b", "q"}, {"c", "p"}};
        if (c.pick(0, 1)) m.expect_continuous = c.pick(0, 1) == 1;
        if (c.pick(0, 1)) m.expect_inverse_continuous = c.pick(0, 1) == 1;
        cfg.maps.push_back(m);
    }
    cfg.seed = c.rng()();
    cfg.tolerance = c.uniform(1e-12, 1e-6);
    cfg.samples = c.pick(1, 200);
    cfg.theorem_tolerance = c.uniform(1e-9, 1e-3);
    if (c.pick(0, 1)) cfg.out = c.pick(0, 1) ? "out dir/report \"v1\".json" : "C:\\reports\\r.json";
    if (c.pick(0, 1)) cfg.exclusions.push_back({Text{"x^2 + y^2"}, 1e-4});
    return cfg;
}

}  // namespace

TEST_CASE("minimal preset config") {
    auto c = parse_config("[system]\npreset = em.plane_wave\n[run]\nbattery = pfaff\n");
    REQUIRE(c.preset.has_value());
    CHECK(c.preset->value == "em.plane_wave");
    CHECK(c.batteries == std::vector<std::string>{"pfaff"});
    CHECK(c.coordinates == std::vector<std::string>{"x", "y", "z", "t"});
}

TEST_CASE("syntax errors carry their location") {
    // unterminated string: the column of the opening quote
    CHECK(error_at("[action]\nA = \"z\n") == std::pair{2, 5});
    CHECK(error_at("[action]\n  A = \"dz  # never closed\n") == std::pair{2, 7});
    CHECK(error_at("[system]\npreset em.plane_wave\n") == std::pair{2, 1});
    CHECK(error_at("[sytem]\npreset = em.plane_wave\n") == std::pair{1, 1});
    CHECK(error_at("[system\n") == std::pair{1, 8});
    CHECK(error_at("preset = x\n") == std::pair{1, 1});
    CHECK(error_at("[run]\nseed = 12x\n") == std::pair{2, 8});
    CHECK(error_at("[run]\nseed = 1\nseed = 2\n") == std::pair{3, 1});
    CHECK(error_at("[action]\nA = dz\n") == std::pair{2, 5});
    CHECK(error_at("[action]\nA = \"dz\" junk\n") == std::pair{2, 10});
    CHECK(error_at("[run]\nbattery = pfaff, nonsense\n") == std::pair{2, 18});
    // expression syntax inside the quotes: position of the stray token
    CHECK(error_at("[action]\nA = \"x*dy + * dz\"\n") == std::pair{2, 13});
}

TEST_CASE("semantic errors") {
    // coordinate w is not on the (x, y, z, t) chart
    CHECK(error_at("[action]\nA = \"w*dx + dy\"\n") == std::pair{2, 6});
    CHECK(error_at("[fluid]\nv = \"y\", \"w\", \"0\"\n") == std::pair{2, 11});
    // the same text is fine once w is a coordinate
    auto ok = parse_config("[chart]\ncoordinates = x, y, w\n[action]\nA = \"w*dx + dy\"\n[run]\nbattery = pfaff\n");
    CHECK(ok.coordinates.size() == 3);
    // unknown preset, at the value
    CHECK(error_at("[system]\npreset = em.nothing\n") == std::pair{2, 10});
    // presets need the spacetime chart
    CHECK(error_at("[chart]\ncoordinates = x, y, z, s\n[system]\npreset = em.plane_wave\n").first == 4);
    // declared parameters only
    CHECK(error_at("[action]\nA = \"k*dx\"\n") == std::pair{2, 6});
    CHECK_NOTHROW(parse_config("[params]\nk = 2\n[action]\nA = \"k*dx\"\n"));
    // not a 1-form
    CHECK(error_at("[action]\nA = \"dx*dy\"\n").first == 2);
    CHECK(error_at("[action]\nA = \"x + dy\"\n").first == 2);
    // not a topology: {a} and {b} without {a,b}
    CHECK(error_at("[topology T]\npoints = a, b\nopens = {}, {a}, {b}, {a,b}\n\n[topology S]\npoints = a, b\n"
                   "opens = {}, {a}, {b}\n")
              .first == 5);
    // battery that cannot run on the system
    CHECK_THROWS_AS(parse_config("[topology T]\npoints = a\nopens = {}, {a}\n[run]\nbattery = torsion\n"), UsageError);
    CHECK_THROWS_AS(parse_config("# nothing\n"), UsageError);
}

TEST_CASE("1-form text") {
    Chart chart = Chart::spacetime();
    ParamMap params{{"k", 2.0}};
    auto w = detail::parse_one_form(Text{"(y*dx - x*dy)/(x^2 + 1) + k*t*dt"}, chart, {"k"}, params);
    Expr x = chart.coordinate("x"), y = chart.coordinate("y"), t = chart.coordinate("t");
    SamplingBox box = SamplingBox::cube(4);
    box.params = params;
    CHECK(is_zero(w.coefficient({0}) - y / (pow(x, 2) + 1), box).zero);
    CHECK(is_zero(w.coefficient({1}) + x / (pow(x, 2) + 1), box).zero);
    CHECK(is_zero(w.coefficient({3}) - Expr::parameter("k") * t, box).zero);
    CHECK(w.coefficient({2}).is_zero_literal());
    CHECK_THROWS_AS(detail::parse_one_form(Text{"sin(dx)"}, chart, {}, {}), ParseError);
}

TEST_CASE("round trip: bundled configs") {
    for (const auto& name : kConfigs) {
        CAPTURE(name);
        auto c = parse_config(slurp(config_path(name)));
        auto text = serialize_config(c);
        auto again = parse_config(text);
        CHECK(again == c);
        CHECK(serialize_config(again) == text);
    }
}

TEST_CASE("round trip: generated configs") {
    Corpus c(91);
    for (int i = 0; i < 60; ++i) {
        auto cfg = random_config(c);
        std::string text;
        try {
            validate_config(cfg);
        } catch (const std::exception& e) {
            FAIL("generated config invalid: " << e.what());
        }
        text = serialize_config(cfg);
        CAPTURE(text);
        auto back = parse_config(text);
        CHECK(back == cfg);
        CHECK(serialize_config(back) == text);
    }
}

TEST_CASE("run: determinism and seed sensitivity") {
    auto cfg = parse_config(slurp(config_path("contact_action.cfg")));
    auto a = render_report(run(cfg).report);
    auto b = render_report(run(cfg).report);
    CHECK(a == b);
    cfg.seed += 1;
    auto c = run(cfg);
    CHECK(render_report(c.report) != a);
    CHECK(c.exit_code == kExitPass);
    CHECK(c.report["provenance"]["seed"].get<std::uint64_t>() == cfg.seed);
}

TEST_CASE("run: report structure") {
    auto out = run(preset_config("em.torsion_nonzero"));
    const auto& r = out.report;
    CHECK(out.exit_code == kExitPass);
    CHECK(r["schema"] == kReportSchema);
    CHECK(r["provenance"]["version"] == kVersion);
    // irreversible verdict for the torsion process
    CHECK(r["batteries"]["thermo"]["processes"]["torsion"]["flags"]["irreversible"] == true);
    CHECK(r["batteries"]["thermo"]["processes"]["torsion"]["irreversibility"]["reversible"] == false);
    // every check and every measurement carries tolerance or an explicit expectation, plus pass
    std::function<void(const nlohmann::json&)> walk = [&](const nlohmann::json& j) {
        if (j.is_object()) {
            if (j.contains("value") && j["value"].is_number_float()) {
                CHECK(j.contains("tolerance"));
                CHECK(j.contains("pass"));
            }
            for (const auto& [k, v] : j.items()) walk(v);
        } else if (j.is_array()) {
            for (const auto& v : j) walk(v);
        }
    };
    walk(r);
    for (const auto& [name, b] : r["batteries"].items())
        for (const auto& c : b["checks"]) {
            CHECK(c.contains("pass"));
            CHECK((c.contains("tolerance") || c["kind"] == "flag"));
        }
    CHECK_FALSE(render_summary(r).empty());
}

TEST_CASE("run: theorem battery on rigid rotation") {
    auto cfg = preset_config("euler.rigid_rotation");
    cfg.batteries = {"theorems"};
    auto out = run(cfg);
    CHECK(out.exit_code == kExitPass);
    const auto& flow = out.report["batteries"]["theorems"]["processes"]["flow"];
    CHECK(flow["F_relative"]["pass"] == true);
    CHECK(flow["A_relative"]["pass"] == true);
    CHECK(flow["H_relative"]["pass"] == true);
}

TEST_CASE("run: figure-1 topology verdicts") {
    auto out = run(parse_config(slurp(config_path("figure1_topology.cfg"))));
    CHECK(out.exit_code == kExitPass);
    for (const char* m : {"f", "f_dz"}) {
        const auto& j = out.report["batteries"]["topology"]["maps"][m];
        CHECK(j["continuous"] == true);
        CHECK(j["continuous_via_closure"] == true);
        CHECK(j["inverse_continuous"] == false);
    }
}

TEST_CASE("exit codes") {
    // a failing expectation: d -> y is not continuous
    auto cfg = parse_config(slurp(config_path("figure1_topology.cfg")));
    cfg.maps[0].pairs[3].second = "y";
    auto fail = run(cfg);
    CHECK(fail.exit_code == kExitFail);
    CHECK(fail.report["batteries"]["topology"]["maps"]["f"]["witness"]["open_set"] == "{y}");
    // a module error inside a battery: the square root is singular on the loop; the error is
    // recorded with its battery and the other results are kept
    auto bad = parse_config(
        "[action]\nA = \"sqrt(2 - x^2 - y^2)*dy + dz\"\n[chain loop]\nparam u = 0 .. 2*pi\n"
        "map = \"2*cos(u)\", \"2*sin(u)\", \"0\", \"0\"\nclosed = true\n[run]\nbattery = periods, pfaff\n");
    auto err = run(bad);
    CHECK(err.exit_code == kExitInternal);
    REQUIRE(err.report["errors"].size() == 1);
    CHECK(err.report["errors"][0]["battery"] == "periods");
    CHECK(err.report["batteries"]["pfaff"]["pass"] == true);
    CHECK(err.report["batteries"]["periods"].contains("error"));
}
