#include "cmf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace cmf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::string unquote(const std::string& v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("setting '" + key + "' expects a number, got '" + v + "'");
    }
}

long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("setting '" + key + "' expects an integer, got '" + v + "'");
    }
}

std::vector<double> number_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    for (const auto& item : split(v, ',')) out.push_back(to_double(key, item));
    return out;
}

std::string fmt(double v) {
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
}

// Arguments of "name(a, b, c)".
std::pair<std::string, std::vector<double>> call_form(const std::string& s, const std::string& what) {
    const auto open = s.find('(');
    const auto close = s.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ConfigError("malformed " + what + " '" + s + "'");
    return {trim(s.substr(0, open)), number_list(what, s.substr(open + 1, close - open - 1))};
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "preset",          "grid.nx",          "grid.ny",        "solver.tau",        "solver.lambda_tilde",
        "solver.samples",  "solver.epsilon",   "solver.max_iterations", "solver.filter", "solver.mask",
        "solver.truncation", "model",          "lif.sigma",      "image.shapes",      "image.contrast",
        "image.noise_sigma", "image.bias", "image.range",     "image.seed",     "init",              "init.params",
        "flow.eta",        "flow.alpha_bar",   "flow.beta",      "flow.openings",     "seed",
        "pinning.taus",    "output.snapshots", "output.every",   "output.dir",        "threads"};
    return keys;
}

} // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        map[key] = unquote(trim(line.substr(eq + 1)));
    }
    return map;
}

ConfigMap read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(ConfigMap& map, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string key = trim(assignment.substr(0, eq));
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
    map[key] = unquote(trim(assignment.substr(eq + 1)));
}

std::string to_string(Preset p) {
    switch (p) {
    case Preset::pinning_compare: return "pinning_compare";
    case Preset::sharpness: return "sharpness";
    case Preset::quadratic_demo: return "quadratic_demo";
    case Preset::lif_demo: return "lif_demo";
    case Preset::stokes_contraction: return "stokes_contraction";
    case Preset::stokes_double_pipe: return "stokes_double_pipe";
    case Preset::custom: return "custom";
    }
    return "?";
}

std::vector<std::string> preset_names() {
    return {"pinning_compare", "sharpness", "quadratic_demo", "lif_demo", "stokes_contraction", "stokes_double_pipe",
            "custom"};
}

Preset parse_preset(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(Preset::custom); ++i)
        if (to_string(static_cast<Preset>(i)) == s) return static_cast<Preset>(i);
    throw ConfigError("unknown preset '" + s + "'");
}

bool ShapeSpec::contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    switch (kind) {
    case Kind::disk: return dx * dx + dy * dy <= a * a;
    case Kind::rectangle: return std::abs(dx) <= a && std::abs(dy) <= b;
    case Kind::annulus: {
        const double r2 = dx * dx + dy * dy;
        return r2 <= a * a && r2 >= b * b;
    }
    }
    return false;
}

std::string ShapeSpec::describe() const {
    std::ostringstream o;
    switch (kind) {
    case Kind::disk: o << "disk(" << cx << "," << cy << "," << a << ")"; break;
    case Kind::rectangle: o << "rect(" << cx << "," << cy << "," << a << "," << b << ")"; break;
    case Kind::annulus: o << "annulus(" << cx << "," << cy << "," << a << "," << b << ")"; break;
    }
    return o.str();
}

std::vector<ShapeSpec> parse_shapes(const std::string& s) {
    std::vector<ShapeSpec> out;
    for (const auto& item : split(s, ';')) {
        if (item.empty()) continue;
        auto [name, args] = call_form(item, "shape");
        ShapeSpec sh;
        if (name == "disk" && args.size() == 3) {
            sh = {ShapeSpec::Kind::disk, args[0], args[1], args[2], 0.0};
        } else if ((name == "rect" || name == "rectangle") && args.size() == 4) {
            sh = {ShapeSpec::Kind::rectangle, args[0], args[1], args[2], args[3]};
        } else if (name == "annulus" && args.size() == 4) {
            sh = {ShapeSpec::Kind::annulus, args[0], args[1], args[2], args[3]};
            if (!(sh.b < sh.a)) throw ConfigError("annulus inner radius must be below the outer radius");
        } else {
            throw ConfigError("malformed shape '" + item + "'");
        }
        if (!(sh.a > 0.0) || sh.b < 0.0) throw ConfigError("shape sizes must be positive in '" + item + "'");
        out.push_back(sh);
    }
    return out;
}

std::string format_shapes(const std::vector<ShapeSpec>& shapes) {
    std::string s;
    for (std::size_t i = 0; i < shapes.size(); ++i) s += (i ? "; " : "") + shapes[i].describe();
    return s;
}

std::vector<Opening> parse_openings(const std::string& s) {
    std::vector<Opening> out;
    for (const auto& item : split(s, ';')) {
        if (item.empty()) continue;
        const auto parts = split(item, ':');
        if (parts.size() != 5) throw ConfigError("opening '" + item + "' is not edge:kind:center:height:peak");
        Opening o;
        o.edge = parse_edge(parts[0]);
        if (parts[1] == "inlet") o.kind = OpeningKind::inlet;
        else if (parts[1] == "outlet") o.kind = OpeningKind::outlet;
        else throw ConfigError("opening kind must be inlet or outlet, got '" + parts[1] + "'");
        o.center = to_double("flow.openings", parts[2]);
        o.height = to_double("flow.openings", parts[3]);
        o.peak = to_double("flow.openings", parts[4]);
        out.push_back(o);
    }
    return out;
}

std::string format_openings(const std::vector<Opening>& openings) {
    std::string s;
    for (std::size_t i = 0; i < openings.size(); ++i) {
        const auto& o = openings[i];
        s += (i ? "; " : "") + to_string(o.edge) + ":" + (o.kind == OpeningKind::inlet ? "inlet" : "outlet") + ":" +
             fmt(o.center) + ":" + fmt(o.height) + ":" + fmt(o.peak);
    }
    return s;
}

ConfigMap preset_defaults(Preset p) {
    ConfigMap m = {
        {"preset", to_string(p)},
        {"grid.nx", "128"},
        {"grid.ny", "128"},
        {"solver.tau", "1e-3"},
        {"solver.lambda_tilde", "0.6"},
        {"solver.samples", "8"},
        {"solver.epsilon", "1e-7"},
        {"solver.max_iterations", "200"},
        {"solver.filter", "weighted_quantile"},
        {"solver.mask", "gaussian"},
        {"solver.truncation", "4"},
        {"model", "chan_vese"},
        {"lif.sigma", "0"},
        {"image.shapes", "disk(0.5,0.5,0.25)"},
        {"image.contrast", "1"},
        {"image.noise_sigma", "0"},
        {"image.bias", "0"},
        {"image.range", "1"},
        {"init", "cone"},
        {"init.params", ""},
        {"flow.eta", "1"},
        {"flow.alpha_bar", "0"},
        {"flow.beta", "0.5"},
        {"flow.openings", ""},
        {"seed", "1"},
        {"pinning.taus", ""},
        {"output.snapshots", ""},
        {"output.every", "0"},
        {"output.dir", "out/" + to_string(p)},
        {"threads", "0"},
    };
    switch (p) {
    case Preset::pinning_compare:
        m["image.shapes"] = "disk(0.5,0.5,0.45)";
        m["image.contrast"] = "0.3";
        m["image.noise_sigma"] = "0.05";
        m["solver.mask"] = "circle";
        m["solver.samples"] = "32";
        m["init"] = "square";
        m["init.params"] = "0.5,0.5,0.3,0.1";
        m["pinning.taus"] = "9e-4,7e-4,5e-4,3e-4,1e-4";
        break;
    case Preset::sharpness:
        m["image.shapes"] = "disk(0.5,0.5,0.4)";
        m["image.noise_sigma"] = "0.05";
        m["output.snapshots"] = "0,2,5";
        break;
    case Preset::quadratic_demo:
        m["solver.filter"] = "quadratic";
        m["solver.tau"] = "5e-4";
        m["solver.max_iterations"] = "90";
        m["image.shapes"] = "disk(0.3,0.32,0.17); rect(0.7,0.3,0.14,0.12); disk(0.5,0.74,0.14)";
        m["image.noise_sigma"] = "0.1";
        m["output.snapshots"] = "20,40,60,90";
        break;
    case Preset::lif_demo:
        m["model"] = "lif";
        m["solver.lambda_tilde"] = "0.02";
        m["image.shapes"] = "disk(0.33,0.38,0.16); rect(0.68,0.64,0.13,0.15)";
        m["image.contrast"] = "0.5";
        m["image.bias"] = "0.4";
        m["image.noise_sigma"] = "0.02";
        break;
    case Preset::stokes_contraction:
        m["grid.nx"] = "96";
        m["grid.ny"] = "96";
        m["solver.tau"] = "5e-4";
        m["solver.lambda_tilde"] = "2e4";
        m["solver.max_iterations"] = "150";
        m["flow.beta"] = "0.45";
        m["flow.openings"] = "left:inlet:0.5:1:1; right:outlet:0.5:0.33333333333333331:3";
        m["init"] = "random";
        m["output.every"] = "10";
        break;
    case Preset::stokes_double_pipe:
        m["grid.nx"] = "96";
        m["grid.ny"] = "96";
        m["solver.tau"] = "5e-4";
        m["solver.lambda_tilde"] = "1e4";
        m["solver.max_iterations"] = "150";
        m["flow.beta"] = "0.35";
        m["flow.openings"] = "left:inlet:0.25:0.16666666666666666:1; left:inlet:0.75:0.16666666666666666:1; "
                             "right:outlet:0.25:0.16666666666666666:1; right:outlet:0.75:0.16666666666666666:1";
        m["init"] = "random_symmetric";
        m["output.every"] = "10";
        break;
    case Preset::custom: break;
    }
    return m;
}

ExperimentConfig resolve_config(const ConfigMap& settings) {
    const auto it = settings.find("preset");
    const Preset preset = parse_preset(it == settings.end() ? "custom" : it->second);
    ConfigMap m = preset_defaults(preset);
    for (const auto& [k, v] : settings) {
        if (!known_keys().count(k)) throw ConfigError("unknown setting '" + k + "'");
        m[k] = v;
    }
    if (m["image.seed"].empty() && settings.count("image.seed") == 0) m["image.seed"] = m["seed"];

    ExperimentConfig c;
    c.preset = preset;
    c.nx = static_cast<int>(to_int("grid.nx", m["grid.nx"]));
    c.ny = static_cast<int>(to_int("grid.ny", m["grid.ny"]));
    if (c.nx < 2 || c.ny < 2) throw ConfigError("grid must be at least 2x2");
    if (c.nx != c.ny) throw ConfigError("grid must be square so that the domain is the unit square");

    c.solver.tau = to_double("solver.tau", m["solver.tau"]);
    c.solver.lambda_tilde = to_double("solver.lambda_tilde", m["solver.lambda_tilde"]);
    c.solver.samples = static_cast<int>(to_int("solver.samples", m["solver.samples"]));
    c.solver.epsilon = to_double("solver.epsilon", m["solver.epsilon"]);
    c.solver.max_iterations = static_cast<int>(to_int("solver.max_iterations", m["solver.max_iterations"]));
    c.solver.filter = parse_filter_kind(m["solver.filter"]);
    c.solver.mask = parse_mask_kind(m["solver.mask"]);
    c.solver.truncation = to_double("solver.truncation", m["solver.truncation"]);
    c.solver.validate();

    c.model = parse_segmentation_model(m["model"]);
    c.lif_sigma = to_double("lif.sigma", m["lif.sigma"]);
    if (c.lif_sigma < 0.0) throw ConfigError("lif.sigma must be nonnegative");

    c.image.shapes = parse_shapes(m["image.shapes"]);
    c.image.contrast = to_double("image.contrast", m["image.contrast"]);
    c.image.noise_sigma = to_double("image.noise_sigma", m["image.noise_sigma"]);
    c.image.bias = to_double("image.bias", m["image.bias"]);
    c.image.range = to_double("image.range", m["image.range"]);
    if (!m["image.seed"].empty()) c.image.seed = static_cast<std::uint64_t>(to_int("image.seed", m["image.seed"]));

    c.init = m["init"];
    c.init_params = number_list("init.params", m["init.params"]);

    c.flow.eta = to_double("flow.eta", m["flow.eta"]);
    c.flow.alpha_bar = to_double("flow.alpha_bar", m["flow.alpha_bar"]);
    c.flow.beta = to_double("flow.beta", m["flow.beta"]);
    c.flow.openings = parse_openings(m["flow.openings"]);

    c.seed = static_cast<std::uint64_t>(to_int("seed", m["seed"]));
    c.tau_ladder = number_list("pinning.taus", m["pinning.taus"]);
    for (double s : number_list("output.snapshots", m["output.snapshots"])) c.snapshots.push_back(static_cast<int>(s));
    c.snapshot_every = static_cast<int>(to_int("output.every", m["output.every"]));
    c.output_dir = m["output.dir"];
    c.threads = static_cast<int>(to_int("threads", m["threads"]));
    if (c.threads < 0) throw ConfigError("threads must be nonnegative");

    const bool stokes = preset == Preset::stokes_contraction || preset == Preset::stokes_double_pipe;
    if (stokes || !c.flow.openings.empty()) c.flow.validate();
    if (!stokes && c.image.noise_sigma > 0.0 && !c.image.seed) throw ConfigError("noisy images need image.seed");
    if (preset == Preset::pinning_compare && c.tau_ladder.empty()) throw ConfigError("pinning_compare needs pinning.taus");

    c.resolved = m;
    return c;
}

} // namespace cmf
