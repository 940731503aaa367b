#include "cartan/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "cartan/errors.hpp"
#include "compile.hpp"

namespace cartan {

const std::vector<std::string>& battery_names() {
    static const std::vector<std::string> names{"pfaff", "torsion", "thermo", "theorems", "periods", "systems", "topology"};
    return names;
}

namespace {

struct Item {
    std::string text;
    bool quoted = false;
    Location at;
};

[[noreturn]] void fail(const std::string& message, Location at) { throw ParseError(message, at.line, at.column); }

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

/// Index of the first `#` outside a quoted string, or npos. Throws on an unterminated quote.
std::size_t comment_start(std::string_view line, int number) {
    bool quoted = false;
    std::size_t open = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '\\') ++i;
            else if (c == '"') quoted = false;
        } else if (c == '"') {
            quoted = true;
            open = i;
        } else if (c == '#') {
            return i;
        }
    }
    if (quoted) fail("unterminated string", {number, static_cast<int>(open) + 1});
    return std::string_view::npos;
}

/// Splits the text after `=` into comma-separated items (quoted strings or bare text;
/// bare text may contain commas inside braces).
std::vector<Item> split_value(std::string_view line, std::size_t begin, int number) {
    std::vector<Item> items;
    std::size_t i = begin;
    auto col = [](std::size_t k) { return static_cast<int>(k) + 1; };
    auto skip_ws = [&] {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    while (true) {
        skip_ws();
        if (i >= line.size()) fail(items.empty() ? "missing value" : "expected a value after ','", {number, col(i)});
        Item item;
        if (line[i] == '"') {
            item.quoted = true;
            item.at = {number, col(i + 1)};
            ++i;
            while (i < line.size() && line[i] != '"') {
                if (line[i] == '\\' && i + 1 < line.size()) ++i;
                item.text += line[i++];
            }
            ++i;  // closing quote (presence checked by comment_start)
            skip_ws();
            if (i < line.size() && line[i] != ',') fail("unexpected text after string", {number, col(i)});
        } else {
            std::size_t start = i;
            int depth = 0;
            while (i < line.size() && !(line[i] == ',' && depth == 0)) {
                if (line[i] == '{') ++depth;
                if (line[i] == '}') --depth;
                if (line[i] == '"') fail("unexpected quote", {number, col(i)});
                ++i;
            }
            if (depth != 0) fail("unbalanced braces", {number, col(start)});
            item.text = std::string(trim(line.substr(start, i - start)));
            item.at = {number, col(start)};
            if (item.text.empty()) fail("empty value", {number, col(start)});
        }
        items.push_back(std::move(item));
        if (i >= line.size()) break;
        ++i;  // ','
    }
    return items;
}

const Item& single(const std::vector<Item>& items, std::string_view key) {
    if (items.size() != 1) fail("'" + std::string(key) + "' takes a single value", items[1].at);
    return items[0];
}

Text quoted(const Item& item) {
    if (!item.quoted) fail("expected a quoted expression", item.at);
    return {item.text, item.at};
}

std::vector<Text> quoted_list(const std::vector<Item>& items) {
    std::vector<Text> out;
    for (const auto& it : items) out.push_back(quoted(it));
    return out;
}

std::string bare(const Item& item) {
    if (item.quoted) fail("expected an unquoted value", item.at);
    return item.text;
}

std::string identifier(const Item& item) {
    std::string s = bare(item);
    if (!is_identifier(s)) fail("expected an identifier, got '" + s + "'", item.at);
    return s;
}

double number(const Item& item) {
    std::string s = bare(item);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("expected a number, got '" + s + "'", item.at);
    return v;
}

double positive(const Item& item) {
    double v = number(item);
    if (!(v > 0.0)) fail("expected a positive number", item.at);
    return v;
}

template <class Int>
Int integer(const Item& item) {
    std::string s = bare(item);
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("expected an integer, got '" + s + "'", item.at);
    return v;
}

bool boolean(const Item& item) {
    std::string s = bare(item);
    if (s == "true") return true;
    if (s == "false") return false;
    fail("expected true or false", item.at);
}

std::vector<std::string> braced_set(const Item& item) {
    std::string s = bare(item);
    if (s.size() < 2 || s.front() != '{' || s.back() != '}') fail("expected a set such as {a,b}", item.at);
    std::vector<std::string> out;
    std::string_view inner = trim(std::string_view(s).substr(1, s.size() - 2));
    while (!inner.empty()) {
        auto comma = inner.find(',');
        std::string_view name = trim(inner.substr(0, comma));
        if (!is_identifier(name)) fail("bad point name '" + std::string(name) + "'", item.at);
        out.emplace_back(name);
        if (comma == std::string_view::npos) break;
        inner = inner.substr(comma + 1);
        if (trim(inner).empty()) fail("expected a point after ','", item.at);
    }
    return out;
}

class Parser {
public:
    RunConfig parse(std::string_view text) {
        int number = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            std::string_view line = text.substr(pos, end - pos);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            ++number;
            parse_line(line, number);
            if (end == text.size()) break;
            pos = end + 1;
        }
        finish();
        return std::move(config_);
    }

private:
    enum class Section { None, Chart, Params, System, Action, Fluid, EM, Process, Chain, Form, Topology, Map, Run };

    RunConfig config_;
    Section section_ = Section::None;
    Location section_at_;
    std::set<std::string> section_keys_;
    std::set<std::string> seen_sections_;
    std::set<std::pair<std::string, std::string>> seen_named_;

    void parse_line(std::string_view line, int number) {
        line = line.substr(0, std::min(line.size(), comment_start(line, number)));
        std::size_t indent = 0;
        while (indent < line.size() && std::isspace(static_cast<unsigned char>(line[indent]))) ++indent;
        if (trim(line).empty()) return;
        if (line[indent] == '[') {
            header(line, indent, number);
            return;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) fail("expected 'key = value'", {number, static_cast<int>(indent) + 1});
        std::string_view key_text = trim(line.substr(0, eq));
        Location key_at{number, static_cast<int>(indent) + 1};
        std::vector<std::string> words;
        for (std::size_t i = 0; i < key_text.size();) {
            while (i < key_text.size() && std::isspace(static_cast<unsigned char>(key_text[i]))) ++i;
            std::size_t s = i;
            while (i < key_text.size() && !std::isspace(static_cast<unsigned char>(key_text[i]))) ++i;
            if (i > s) words.emplace_back(key_text.substr(s, i - s));
        }
        if (words.empty()) fail("missing key", key_at);
        for (const auto& w : words)
            if (!is_identifier(w)) fail("bad key '" + w + "'", key_at);
        auto items = split_value(line, eq + 1, number);
        if (section_ == Section::None) fail("key outside of a section", key_at);
        entry(words, items, key_at);
    }

    void header(std::string_view line, std::size_t open, int number) {
        std::string_view rest = trim(line.substr(open));
        Location at{number, static_cast<int>(open) + 1};
        if (rest.back() != ']') fail("expected ']'", {number, static_cast<int>(line.size()) + 1});
        std::string_view inner = trim(rest.substr(1, rest.size() - 2));
        std::vector<std::string> words;
        for (std::size_t i = 0; i < inner.size();) {
            while (i < inner.size() && std::isspace(static_cast<unsigned char>(inner[i]))) ++i;
            std::size_t s = i;
            while (i < inner.size() && !std::isspace(static_cast<unsigned char>(inner[i]))) ++i;
            if (i > s) words.emplace_back(inner.substr(s, i - s));
        }
        if (words.empty() || words.size() > 2) fail("expected [section] or [section name]", at);
        static const std::map<std::string, std::pair<Section, bool>> kinds{
            {"chart", {Section::Chart, false}},   {"params", {Section::Params, false}},
            {"system", {Section::System, false}}, {"action", {Section::Action, false}},
            {"fluid", {Section::Fluid, false}},   {"em", {Section::EM, false}},
            {"process", {Section::Process, true}}, {"chain", {Section::Chain, true}},
            {"form", {Section::Form, true}},       {"topology", {Section::Topology, true}},
            {"map", {Section::Map, true}},         {"run", {Section::Run, false}},
        };
        auto kind = kinds.find(words[0]);
        if (kind == kinds.end()) fail("unknown section '" + words[0] + "'", at);
        auto [sec, named] = kind->second;
        if (named != (words.size() == 2))
            fail(named ? "section [" + words[0] + "] needs a name" : "section [" + words[0] + "] takes no name", at);
        if (named) {
            if (!is_identifier(words[1])) fail("bad section name '" + words[1] + "'", at);
            if (!seen_named_.insert({words[0], words[1]}).second) fail("duplicate section [" + words[0] + " " + words[1] + "]", at);
        } else if (!seen_sections_.insert(words[0]).second) {
            fail("duplicate section [" + words[0] + "]", at);
        }
        finish_section();
        section_ = sec;
        section_at_ = at;
        section_keys_.clear();
        const std::string name = named ? words[1] : "";
        switch (sec) {
        case Section::System:
        case Section::Action:
        case Section::Fluid:
        case Section::EM:
            if (config_.preset || config_.action || config_.fluid || config_.em)
                fail("only one of [system], [action], [fluid], [em] may appear", at);
            if (sec == Section::Fluid) {
                config_.fluid.emplace();
                config_.fluid->at = at;
            }
            if (sec == Section::EM) {
                config_.em.emplace();
                config_.em->at = at;
            }
            break;
        case Section::Process: named_entry(config_.processes, name, at); break;
        case Section::Chain: named_entry(config_.chains, name, at); break;
        case Section::Form: config_.forms.emplace_back().name = name; break;
        case Section::Topology: named_entry(config_.topologies, name, at); break;
        case Section::Map: named_entry(config_.maps, name, at); break;
        default: break;
        }
    }

    void entry(const std::vector<std::string>& words, const std::vector<Item>& items, Location at) {
        const std::string& key = words[0];
        bool repeatable = (section_ == Section::Run && key == "exclude") || (section_ == Section::Chain && key == "param");
        if (section_ == Section::Chain && key == "param") {
            if (words.size() != 2) fail("expected 'param <name> = lo .. hi'", at);
            if (!section_keys_.insert("param " + words[1]).second) fail("duplicate parameter '" + words[1] + "'", at);
        } else if (words.size() != 1) {
            fail("bad key '" + key + " " + words[1] + "'", at);
        }
        if (!repeatable && !section_keys_.insert(key).second) fail("duplicate key '" + key + "'", at);
        auto unknown = [&] { fail("unknown key '" + key + "' in this section", at); };

        switch (section_) {
        case Section::Chart:
            if (key != "coordinates") unknown();
            config_.coordinates.clear();
            for (const auto& it : items) {
                auto name = identifier(it);
                if (std::find(config_.coordinates.begin(), config_.coordinates.end(), name) != config_.coordinates.end())
                    fail("duplicate coordinate '" + name + "'", it.at);
                config_.coordinates.push_back(name);
            }
            break;
        case Section::Params: {
            const Item& v = single(items, key);
            if (!v.quoted && v.text == "free") config_.params[key] = std::nullopt;
            else config_.params[key] = number(v);
            break;
        }
        case Section::System: {
            if (key != "preset") unknown();
            const Item& v = single(items, key);
            config_.preset = Text{v.text, v.at};
            break;
        }
        case Section::Action:
            if (key != "A") unknown();
            config_.action = quoted(single(items, key));
            break;
        case Section::Fluid: {
            auto& f = *config_.fluid;
            if (key == "v") f.v = three(items, at);
            else if (key == "pressure") f.pressure = quoted(single(items, key));
            else if (key == "nu") f.nu = quoted(single(items, key));
            else unknown();
            break;
        }
        case Section::EM: {
            auto& e = *config_.em;
            if (key == "a") e.a = three(items, at);
            else if (key == "phi") e.phi = quoted(single(items, key));
            else unknown();
            break;
        }
        case Section::Process: {
            auto& p = config_.processes.back();
            if (key == "components") {
                if (items.size() == 1 && !items[0].quoted) {
                    if (items[0].text == "torsion") p.kind = ProcessKind::Torsion;
                    else if (items[0].text == "flow") p.kind = ProcessKind::Flow;
                    else fail("expected quoted components, 'torsion' or 'flow'", items[0].at);
                } else {
                    p.components = quoted_list(items);
                }
            } else if (key == "support") {
                p.support = quoted(single(items, key));
            } else {
                unknown();
            }
            break;
        }
        case Section::Chain: {
            auto& c = config_.chains.back();
            if (key == "param") {
                const Item& v = single(items, key);
                std::string s = bare(v);
                auto dots = s.find("..");
                if (dots == std::string::npos) fail("expected a range 'lo .. hi'", v.at);
                std::string lo(trim(std::string_view(s).substr(0, dots)));
                std::string hi(trim(std::string_view(s).substr(dots + 2)));
                if (lo.empty() || hi.empty()) fail("expected a range 'lo .. hi'", v.at);
                c.params.push_back({words[1], Text{lo, v.at}, Text{hi, v.at}});
            } else if (key == "map") {
                c.map = quoted_list(items);
            } else if (key == "closed") {
                c.closed = boolean(single(items, key));
            } else if (key == "order") {
                c.order = integer<int>(single(items, key));
                if (c.order < 1 || c.order > 64) fail("order must lie in 1..64", items[0].at);
            } else if (key == "panels") {
                for (const auto& it : items) {
                    int n = integer<int>(it);
                    if (n < 1) fail("panel counts must be positive", it.at);
                    c.panels.push_back(n);
                }
            } else if (key == "orientation") {
                c.orientation = integer<int>(single(items, key));
                if (c.orientation != 1 && c.orientation != -1) fail("orientation must be 1 or -1", items[0].at);
            } else {
                unknown();
            }
            break;
        }
        case Section::Form:
            if (key != "w") unknown();
            config_.forms.back().w = quoted(single(items, key));
            break;
        case Section::Topology: {
            auto& t = config_.topologies.back();
            if (key == "points") {
                for (const auto& it : items) t.points.push_back(identifier(it));
            } else if (key == "opens") {
                for (const auto& it : items) t.opens.push_back(braced_set(it));
            } else {
                unknown();
            }
            break;
        }
        case Section::Map: {
            auto& m = config_.maps.back();
            if (key == "from") m.from = identifier(single(items, key));
            else if (key == "to") m.to = identifier(single(items, key));
            else if (key == "pairs") {
                for (const auto& it : items) {
                    std::string s = bare(it);
                    auto arrow = s.find("->");
                    if (arrow == std::string::npos) fail("expected 'point -> image'", it.at);
                    std::string a(trim(std::string_view(s).substr(0, arrow)));
                    std::string b(trim(std::string_view(s).substr(arrow + 2)));
                    if (!is_identifier(a) || !is_identifier(b)) fail("expected 'point -> image'", it.at);
                    m.pairs.emplace_back(a, b);
                }
            } else if (key == "expect_continuous") {
                m.expect_continuous = boolean(single(items, key));
            } else if (key == "expect_inverse_continuous") {
                m.expect_inverse_continuous = boolean(single(items, key));
            } else {
                unknown();
            }
            break;
        }
        case Section::Run:
            if (key == "battery") {
                config_.batteries.clear();
                for (const auto& it : items) {
                    std::string b = bare(it);
                    if (b == "all" && items.size() == 1) break;
                    const auto& names = battery_names();
                    if (std::find(names.begin(), names.end(), b) == names.end()) fail("unknown battery '" + b + "'", it.at);
                    if (std::find(config_.batteries.begin(), config_.batteries.end(), b) != config_.batteries.end())
                        fail("battery '" + b + "' listed twice", it.at);
                    config_.batteries.push_back(b);
                }
            } else if (key == "seed") {
                config_.seed = integer<std::uint64_t>(single(items, key));
            } else if (key == "tolerance") {
                config_.tolerance = positive(single(items, key));
            } else if (key == "samples") {
                config_.samples = integer<int>(single(items, key));
                if (config_.samples < 1) fail("samples must be positive", items[0].at);
            } else if (key == "theorem_tolerance") {
                config_.theorem_tolerance = positive(single(items, key));
            } else if (key == "out") {
                config_.out = single(items, key).text;
            } else if (key == "exclude") {
                if (items.size() != 2) fail("expected 'exclude = \"indicator\", threshold'", at);
                config_.exclusions.push_back({quoted(items[0]), positive(items[1])});
            } else {
                unknown();
            }
            break;
        case Section::None: break;
        }
    }

    template <class Spec>
    static void named_entry(std::vector<Spec>& list, const std::string& name, Location at) {
        auto& s = list.emplace_back();
        s.name = name;
        s.at = at;
    }

    static std::array<Text, 3> three(const std::vector<Item>& items, Location at) {
        if (items.size() != 3) fail("expected three quoted components", at);
        auto l = quoted_list(items);
        return {l[0], l[1], l[2]};
    }

    void require(bool ok, const std::string& what) {
        if (!ok) fail("missing " + what, section_at_);
    }

    void finish_section() {
        switch (section_) {
        case Section::System: require(config_.preset.has_value(), "'preset'"); break;
        case Section::Action: require(config_.action.has_value(), "'A'"); break;
        case Section::Fluid: require(section_keys_.count("v"), "'v'"); break;
        case Section::EM: require(section_keys_.count("a"), "'a'"); break;
        case Section::Process: require(section_keys_.count("components"), "'components'"); break;
        case Section::Chain:
            require(!config_.chains.back().params.empty(), "'param'");
            require(section_keys_.count("map"), "'map'");
            break;
        case Section::Form: require(section_keys_.count("w"), "'w'"); break;
        case Section::Topology:
            require(section_keys_.count("points"), "'points'");
            require(section_keys_.count("opens"), "'opens'");
            break;
        case Section::Map:
            require(section_keys_.count("from") && section_keys_.count("to"), "'from' or 'to'");
            require(section_keys_.count("pairs"), "'pairs'");
            break;
        default: break;
        }
    }

    void finish() {
        finish_section();
        validate_config(config_);
    }
};

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string format_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& f) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += f(items[i]);
    }
    return out;
}

std::string quoted_join(const std::vector<Text>& items) {
    return join(items, [](const Text& t) { return quote(t.value); });
}

}  // namespace

RunConfig parse_config(std::string_view text) { return Parser().parse(text); }

void validate_config(const RunConfig& c) { detail::compile(c); }

std::string serialize_config(const RunConfig& c) {
    std::string out;
    auto section = [&](const std::string& header) {
        if (!out.empty()) out += "\n";
        out += "[" + header + "]\n";
    };
    auto line = [&](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };

    section("chart");
    line("coordinates", join(c.coordinates, [](const std::string& s) { return s; }));
    if (!c.params.empty()) {
        section("params");
        for (const auto& [name, value] : c.params) line(name, value ? format_number(*value) : "free");
    }
    if (c.preset) {
        section("system");
        line("preset", c.preset->value);
    }
    if (c.action) {
        section("action");
        line("A", quote(c.action->value));
    }
    if (c.fluid) {
        section("fluid");
        line("v", quoted_join({c.fluid->v.begin(), c.fluid->v.end()}));
        line("pressure", quote(c.fluid->pressure.value));
        line("nu", quote(c.fluid->nu.value));
    }
    if (c.em) {
        section("em");
        line("a", quoted_join({c.em->a.begin(), c.em->a.end()}));
        line("phi", quote(c.em->phi.value));
    }
    for (const auto& p : c.processes) {
        section("process " + p.name);
        if (p.kind == ProcessKind::Torsion) line("components", "torsion");
        else if (p.kind == ProcessKind::Flow) line("components", "flow");
        else line("components", quoted_join(p.components));
        line("support", quote(p.support.value));
    }
    for (const auto& ch : c.chains) {
        section("chain " + ch.name);
        for (const auto& p : ch.params) line("param " + p.name, p.lo.value + " .. " + p.hi.value);
        line("map", quoted_join(ch.map));
        line("closed", ch.closed ? "true" : "false");
        line("order", std::to_string(ch.order));
        if (!ch.panels.empty()) line("panels", join(ch.panels, [](int n) { return std::to_string(n); }));
        line("orientation", std::to_string(ch.orientation));
    }
    for (const auto& f : c.forms) {
        section("form " + f.name);
        line("w", quote(f.w.value));
    }
    for (const auto& t : c.topologies) {
        section("topology " + t.name);
        line("points", join(t.points, [](const std::string& s) { return s; }));
        line("opens", join(t.opens, [](const std::vector<std::string>& s) {
                 return "{" + join(s, [](const std::string& p) { return p; }) + "}";
             }));
    }
    for (const auto& m : c.maps) {
        section("map " + m.name);
        line("from", m.from);
        line("to", m.to);
        line("pairs", join(m.pairs, [](const auto& p) { return p.first + " -> " + p.second; }));
        if (m.expect_continuous) line("expect_continuous", *m.expect_continuous ? "true" : "false");
        if (m.expect_inverse_continuous)
            line("expect_inverse_continuous", *m.expect_inverse_continuous ? "true" : "false");
    }
    section("run");
    if (!c.batteries.empty()) line("battery", join(c.batteries, [](const std::string& s) { return s; }));
    line("seed", std::to_string(c.seed));
    line("tolerance", format_number(c.tolerance));
    line("samples", std::to_string(c.samples));
    line("theorem_tolerance", format_number(c.theorem_tolerance));
    if (!c.out.empty()) line("out", quote(c.out));
    for (const auto& e : c.exclusions) line("exclude", quote(e.indicator.value) + ", " + format_number(e.threshold));
    return out;
}

RunConfig preset_config(const std::string& name) {
    RunConfig c;
    c.preset = Text{name, {}};
    validate_config(c);
    return c;
}

}  // namespace cartan
