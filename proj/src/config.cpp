#include "erds/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace erds {

namespace {

std::string describe(const std::vector<ConfigIssue>& issues) {
    std::ostringstream os;
    os << issues.size() << (issues.size() == 1 ? " config error" : " config errors");
    for (const auto& i : issues) {
        os << "\n  ";
        if (i.line > 0) os << "line " << i.line << ", column " << i.column << ": ";
        os << i.message;
    }
    return os.str();
}

using Section = std::map<std::string, YAML::Node>;

class Reader {
public:
    std::vector<ConfigIssue> issues;
    std::map<std::string, std::pair<int, int>> where;

    void add(const YAML::Node& n, const std::string& msg) {
        const YAML::Mark m = n.Mark();
        issues.push_back({m.line + 1, m.column + 1, msg});
    }

    void add(const std::string& path, const std::string& msg) {
        const auto it = where.find(path);
        if (it == where.end()) {
            issues.push_back({0, 0, path + ": " + msg});
        } else {
            issues.push_back({it->second.first, it->second.second, path + ": " + msg});
        }
    }

    // Mapping entries, with unknown and repeated keys reported.
    Section section(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
        Section out;
        if (!node.IsMap()) {
            add(node, (path.empty() ? std::string("document") : path) + " must be a mapping");
            return out;
        }
        for (const auto& kv : node) {
            const std::string key = kv.first.Scalar();
            const std::string full = path.empty() ? key : path + "." + key;
            if (!allowed.empty() && !allowed.count(key)) {
                add(kv.first, "unknown key '" + full + "'");
                continue;
            }
            if (out.count(key)) {
                add(kv.first, "duplicate key '" + full + "'");
                continue;
            }
            out.emplace(key, kv.second);
            const YAML::Mark m = kv.first.Mark();
            where[full] = {m.line + 1, m.column + 1};
        }
        return out;
    }

    template <class T>
    void scalar(const Section& s, const std::string& key, const std::string& path, T& out) {
        const auto it = s.find(key);
        if (it == s.end()) return;
        const YAML::Node& n = it->second;
        if (!n.IsScalar()) {
            add(n, path + "." + key + " must be a scalar");
            return;
        }
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            add(n, path + "." + key + ": cannot read '" + n.Scalar() + "' as " + type_name<T>());
        }
    }

    template <class T>
    void list(const Section& s, const std::string& key, const std::string& path, std::vector<T>& out) {
        const auto it = s.find(key);
        if (it == s.end()) return;
        const YAML::Node& n = it->second;
        if (!n.IsSequence()) {
            add(n, path + "." + key + " must be a list");
            return;
        }
        out.clear();
        for (const auto& item : n) {
            try {
                out.push_back(item.as<T>());
            } catch (const YAML::Exception&) {
                add(item, path + "." + key + ": cannot read list entry as " + type_name<T>());
            }
        }
    }

private:
    template <class T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, bool>) {
            return "a boolean";
        } else if constexpr (std::is_integral_v<T>) {
            return "an integer";
        } else if constexpr (std::is_floating_point_v<T>) {
            return "a number";
        } else {
            return "a string";
        }
    }
};

ProfileConfig read_profile(Reader& r, const YAML::Node& node, const std::string& path) {
    ProfileConfig p;
    const Section s = r.section(node, path, {"shape", "mean", "amp", "mode"});
    r.scalar(s, "shape", path, p.shape);
    r.scalar(s, "mean", path, p.mean);
    r.scalar(s, "amp", path, p.amp);
    r.scalar(s, "mode", path, p.mode);
    return p;
}

void read_document(Reader& r, const YAML::Node& root, Config& c) {
    const Section top = r.section(root, "", {"scenario", "grid", "model", "network", "initial", "run", "diagnostics",
                                             "output", "sweep"});
    r.scalar(top, "scenario", "", c.scenario);

    if (auto it = top.find("grid"); it != top.end()) {
        const Section s = r.section(it->second, "grid", {"dim", "n_cells", "half_width"});
        r.scalar(s, "dim", "grid", c.grid.dim);
        r.scalar(s, "n_cells", "grid", c.grid.n_cells);
        r.scalar(s, "half_width", "grid", c.grid.half_width);
    }
    if (auto it = top.find("model"); it != top.end()) {
        const Section s = r.section(it->second, "model",
                                    {"kappa", "c", "potential_strength", "potential_offset", "preset", "entropy", "heat",
                                     "sigma", "b", "C"});
        r.scalar(s, "kappa", "model", c.model.kappa);
        r.scalar(s, "c", "model", c.model.c);
        r.scalar(s, "potential_strength", "model", c.model.potential_strength);
        r.scalar(s, "potential_offset", "model", c.model.potential_offset);
        r.scalar(s, "preset", "model", c.model.preset);
        r.scalar(s, "entropy", "model", c.model.entropy);
        r.scalar(s, "heat", "model", c.model.heat);
        r.scalar(s, "sigma", "model", c.model.sigma);
        r.list(s, "b", "model", c.model.b);
        r.list(s, "C", "model", c.model.C);
    }
    if (auto it = top.find("network"); it != top.end()) {
        const Section s =
            r.section(it->second, "network", {"law", "k", "k0", "c_n", "c_p", "energy_exponent", "reactions"});
        r.scalar(s, "law", "network", c.network.law);
        r.scalar(s, "k", "network", c.network.k);
        r.scalar(s, "k0", "network", c.network.k0);
        r.scalar(s, "c_n", "network", c.network.c_n);
        r.scalar(s, "c_p", "network", c.network.c_p);
        r.scalar(s, "energy_exponent", "network", c.network.energy_exponent);
        if (auto rt = s.find("reactions"); rt != s.end()) {
            if (!rt->second.IsSequence()) {
                r.add(rt->second, "network.reactions must be a list");
            } else {
                std::size_t k = 0;
                for (const auto& item : rt->second) {
                    const std::string path = "network.reactions." + std::to_string(k++);
                    const Section rs = r.section(item, path, {"alpha", "beta"});
                    ReactionConfig rc;
                    r.list(rs, "alpha", path, rc.alpha);
                    r.list(rs, "beta", path, rc.beta);
                    c.network.reactions.push_back(rc);
                }
            }
        }
    }
    if (auto it = top.find("initial"); it != top.end()) {
        const Section s = r.section(it->second, "initial", {"species", "energy"});
        if (auto sp = s.find("species"); sp != s.end()) {
            if (!sp->second.IsSequence()) {
                r.add(sp->second, "initial.species must be a list of profiles");
            } else {
                std::size_t k = 0;
                for (const auto& item : sp->second) {
                    c.initial.species.push_back(read_profile(r, item, "initial.species." + std::to_string(k++)));
                }
            }
        }
        if (auto en = s.find("energy"); en != s.end()) c.initial.energy = read_profile(r, en->second, "initial.energy");
    }
    if (auto it = top.find("run"); it != top.end()) {
        const Section s = r.section(it->second, "run", {"dt", "t_end", "cadence", "seed", "snapshots"});
        r.scalar(s, "dt", "run", c.run.dt);
        r.scalar(s, "t_end", "run", c.run.t_end);
        r.scalar(s, "cadence", "run", c.run.cadence);
        r.scalar(s, "seed", "run", c.run.seed);
        r.list(s, "snapshots", "run", c.run.snapshots);
    }
    if (auto it = top.find("diagnostics"); it != top.end()) {
        const Section s = r.section(it->second, "diagnostics",
                                    {"eep", "per_record_log_sobolev", "constant_trials", "search_rounds", "constants"});
        r.scalar(s, "eep", "diagnostics", c.diagnostics.eep);
        r.scalar(s, "per_record_log_sobolev", "diagnostics", c.diagnostics.per_record_log_sobolev);
        r.scalar(s, "constant_trials", "diagnostics", c.diagnostics.constant_trials);
        r.scalar(s, "search_rounds", "diagnostics", c.diagnostics.search_rounds);
        r.list(s, "constants", "diagnostics", c.diagnostics.constants);
    }
    if (auto it = top.find("output"); it != top.end()) {
        const Section s = r.section(it->second, "output", {"directory", "formats"});
        r.scalar(s, "directory", "output", c.output.directory);
        r.list(s, "formats", "output", c.output.formats);
    }
    if (auto it = top.find("sweep"); it != top.end()) {
        const Section s = r.section(it->second, "sweep", {});
        for (const auto& [key, node] : s) {
            if (!node.IsSequence() || node.size() == 0) {
                r.add(node, "sweep." + key + " must be a non-empty list of values");
                continue;
            }
            std::vector<std::string> values;
            for (const auto& v : node) {
                if (!v.IsScalar()) {
                    r.add(v, "sweep." + key + " values must be scalars");
                    continue;
                }
                values.push_back(v.Scalar());
            }
            c.sweep[key] = values;
        }
    }
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
    for (const char* o : options) {
        if (v == o) return true;
    }
    return false;
}

void check_profile(Reader& r, const ProfileConfig& p, const std::string& path, bool energy) {
    if (!one_of(p.shape, {"constant", "cos", "sin", "step", "tanh"})) {
        r.add(path + ".shape", "unknown shape '" + p.shape + "' (constant, cos, sin, step or tanh)");
    }
    if (!std::isfinite(p.mean) || !std::isfinite(p.amp)) r.add(path, "mean and amp must be finite");
    if (p.mode < 1) r.add(path + ".mode", "mode must be at least 1");
    if (!(p.mean - std::abs(p.amp) > 0.0) && (energy || p.mean - std::abs(p.amp) < 0.0)) {
        r.add(path, energy ? "energy profile must stay positive (mean > |amp|)"
                           : "density profile must stay non-negative (mean >= |amp|)");
    }
}

void check_semantics(Reader& r, const Config& c) {
    if (!one_of(c.scenario, {"torus", "confined", "general"})) {
        r.add("scenario", "unknown scenario '" + c.scenario + "' (torus, confined or general)");
    }
    if (c.grid.dim != 1 && c.grid.dim != 2) r.add("grid.dim", "dim must be 1 or 2");
    if (c.grid.n_cells < 8) r.add("grid.n_cells", "need at least 8 cells per axis");
    if (!(c.grid.half_width > 0.0)) r.add("grid.half_width", "half_width must be positive");
    if (!(c.model.kappa > 0.0) || !std::isfinite(c.model.kappa)) r.add("model.kappa", "kappa must be positive");
    if (!(c.model.c >= 0.0) || !std::isfinite(c.model.c)) r.add("model.c", "c must be non-negative");
    if (c.model.c == 0.0 && c.diagnostics.eep) {
        r.add("model.c", "c = 0 is incompatible with diagnostics.eep: the entropy/entropy-production constant "
                         "requires c > 0 (its Sobolev step divides by c); set c > 0 or diagnostics.eep: false");
    }
    if (!one_of(c.model.preset, {"torus", "confined", "custom"})) {
        r.add("model.preset", "unknown preset '" + c.model.preset + "' (torus, confined or custom)");
    }
    if (!one_of(c.model.entropy, {"example1", "example2"})) r.add("model.entropy", "entropy must be example1 or example2");
    if (!one_of(c.model.heat, {"power", "log"})) r.add("model.heat", "heat must be power or log");

    std::size_t species = 2;
    const bool custom = c.scenario == "general" && c.model.preset == "custom";
    if (custom) {
        species = c.model.b.size();
        if (species == 0) r.add("model.b", "a custom model lists one exponent b per species");
        if (c.model.C.size() != species) r.add("model.C", "model.C needs one entry per species");
    }
    if (!one_of(c.network.law, {"constant", "read_shockley_hall"})) {
        r.add("network.law", "unknown rate law '" + c.network.law + "' (constant or read_shockley_hall)");
    }
    if (c.network.law == "constant" && !(c.network.k > 0.0)) r.add("network.k", "k must be positive");
    if (c.network.law == "read_shockley_hall") {
        if (!(c.network.k0 > 0.0)) r.add("network.k0", "k0 must be positive");
        if (c.network.c_n < 0.0 || c.network.c_p < 0.0) r.add("network", "c_n and c_p must be non-negative");
    }
    if (!c.network.reactions.empty() && c.scenario != "general") {
        r.add("network.reactions", "explicit reactions are only used by general scenarios");
    }
    if (c.network.energy_exponent != 1.0 && c.scenario != "general") {
        r.add("network.energy_exponent", "the bipolar steppers use k (e - np); energy_exponent other than 1 needs a general scenario");
    }
    for (std::size_t k = 0; k < c.network.reactions.size(); ++k) {
        const auto& rc = c.network.reactions[k];
        const std::string path = "network.reactions." + std::to_string(k);
        if (rc.alpha.size() != species || rc.beta.size() != species) {
            r.add(path, "alpha and beta need one coefficient per species");
        }
        for (int a : rc.alpha) {
            if (a < 0) r.add(path, "stoichiometric coefficients must be non-negative");
        }
        for (int b : rc.beta) {
            if (b < 0) r.add(path, "stoichiometric coefficients must be non-negative");
        }
    }
    if (c.network.reactions.empty() && species != 2) {
        r.add("network.reactions", "the default n + p <-> 0 reaction needs two species");
    }
    if (c.initial.species.size() != species) {
        r.add("initial.species", "expected " + std::to_string(species) + " species profiles, got " +
                                     std::to_string(c.initial.species.size()));
    }
    for (std::size_t k = 0; k < c.initial.species.size(); ++k) {
        check_profile(r, c.initial.species[k], "initial.species." + std::to_string(k), false);
    }
    check_profile(r, c.initial.energy, "initial.energy", true);
    if (!(c.run.t_end > 0.0) || !std::isfinite(c.run.t_end)) r.add("run.t_end", "t_end must be positive");
    if (!(c.run.dt >= 0.0) || !std::isfinite(c.run.dt)) r.add("run.dt", "dt must be non-negative");
    if (c.run.cadence < 1) r.add("run.cadence", "cadence must be at least 1");
    for (double t : c.run.snapshots) {
        if (!(t >= 0.0 && t <= c.run.t_end)) {
            r.add("run.snapshots", "snapshot times must lie in [0, t_end]");
            break;
        }
    }
    if (c.diagnostics.constant_trials < 0 || c.diagnostics.search_rounds < 0) {
        r.add("diagnostics", "constant_trials and search_rounds must be non-negative");
    }
    const auto& fc = c.diagnostics.constants;
    if (!fc.empty() && (fc.size() != 3 || !std::all_of(fc.begin(), fc.end(), [](double v) { return v > 0.0; }))) {
        r.add("diagnostics.constants", "constants must be three positive numbers [C_P, C_LS, C_S]");
    }
    for (const auto& f : c.output.formats) {
        if (!one_of(f, {"csv", "json"})) r.add("output.formats", "unknown format '" + f + "' (csv or json)");
    }
}

std::string number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s = buf;
    if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
    return s;
}

void emit_profile(YAML::Emitter& out, const ProfileConfig& p) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "shape" << YAML::Value << p.shape;
    out << YAML::Key << "mean" << YAML::Value << number(p.mean);
    out << YAML::Key << "amp" << YAML::Value << number(p.amp);
    out << YAML::Key << "mode" << YAML::Value << p.mode;
    out << YAML::EndMap;
}

void emit_numbers(YAML::Emitter& out, const std::vector<double>& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double x : v) out << number(x);
    out << YAML::EndSeq;
}

void emit_ints(YAML::Emitter& out, const std::vector<int>& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (int x : v) out << x;
    out << YAML::EndSeq;
}

}  // namespace

ConfigParseError::ConfigParseError(std::vector<ConfigIssue> list) : ConfigError(describe(list)), issues(std::move(list)) {}

Config parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigParseError({{e.mark.line + 1, e.mark.column + 1, "syntax error: " + e.msg}});
    }
    Reader r;
    Config c;
    if (!root || root.IsNull()) throw ConfigParseError({{0, 0, "empty config"}});
    read_document(r, root, c);
    check_semantics(r, c);
    if (!r.issues.empty()) throw ConfigParseError(r.issues);
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError({{0, 0, "cannot open config file '" + path + "'"}});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const Config& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "scenario" << YAML::Value << c.scenario;

    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dim" << YAML::Value << c.grid.dim;
    out << YAML::Key << "n_cells" << YAML::Value << c.grid.n_cells;
    out << YAML::Key << "half_width" << YAML::Value << number(c.grid.half_width);
    out << YAML::EndMap;

    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kappa" << YAML::Value << number(c.model.kappa);
    out << YAML::Key << "c" << YAML::Value << number(c.model.c);
    out << YAML::Key << "potential_strength" << YAML::Value << number(c.model.potential_strength);
    out << YAML::Key << "potential_offset" << YAML::Value << number(c.model.potential_offset);
    out << YAML::Key << "preset" << YAML::Value << c.model.preset;
    out << YAML::Key << "entropy" << YAML::Value << c.model.entropy;
    out << YAML::Key << "heat" << YAML::Value << c.model.heat;
    out << YAML::Key << "sigma" << YAML::Value << number(c.model.sigma);
    out << YAML::Key << "b" << YAML::Value;
    emit_numbers(out, c.model.b);
    out << YAML::Key << "C" << YAML::Value;
    emit_numbers(out, c.model.C);
    out << YAML::EndMap;

    out << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "law" << YAML::Value << c.network.law;
    out << YAML::Key << "k" << YAML::Value << number(c.network.k);
    out << YAML::Key << "k0" << YAML::Value << number(c.network.k0);
    out << YAML::Key << "c_n" << YAML::Value << number(c.network.c_n);
    out << YAML::Key << "c_p" << YAML::Value << number(c.network.c_p);
    out << YAML::Key << "energy_exponent" << YAML::Value << number(c.network.energy_exponent);
    out << YAML::Key << "reactions" << YAML::Value << YAML::BeginSeq;
    for (const auto& rc : c.network.reactions) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "alpha" << YAML::Value;
        emit_ints(out, rc.alpha);
        out << YAML::Key << "beta" << YAML::Value;
        emit_ints(out, rc.beta);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;

    out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "species" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : c.initial.species) emit_profile(out, p);
    out << YAML::EndSeq;
    out << YAML::Key << "energy" << YAML::Value;
    emit_profile(out, c.initial.energy);
    out << YAML::EndMap;

    out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dt" << YAML::Value << number(c.run.dt);
    out << YAML::Key << "t_end" << YAML::Value << number(c.run.t_end);
    out << YAML::Key << "cadence" << YAML::Value << c.run.cadence;
    out << YAML::Key << "seed" << YAML::Value << c.run.seed;
    out << YAML::Key << "snapshots" << YAML::Value;
    emit_numbers(out, c.run.snapshots);
    out << YAML::EndMap;

    out << YAML::Key << "diagnostics" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "eep" << YAML::Value << c.diagnostics.eep;
    out << YAML::Key << "per_record_log_sobolev" << YAML::Value << c.diagnostics.per_record_log_sobolev;
    out << YAML::Key << "constant_trials" << YAML::Value << c.diagnostics.constant_trials;
    out << YAML::Key << "search_rounds" << YAML::Value << c.diagnostics.search_rounds;
    if (!c.diagnostics.constants.empty()) {
        out << YAML::Key << "constants" << YAML::Value;
        emit_numbers(out, c.diagnostics.constants);
    }
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << c.output.directory;
    out << YAML::Key << "formats" << YAML::Value << YAML::Flow << c.output.formats;
    out << YAML::EndMap;

    if (!c.sweep.empty()) {
        out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
        for (const auto& [key, values] : c.sweep) {
            out << YAML::Key << key << YAML::Value << YAML::Flow << values;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::vector<Config> expand_sweep(const Config& config) {
    Config base = config;
    base.sweep.clear();
    if (config.sweep.empty()) return {base};
    const YAML::Node root = YAML::Load(emit_config(base));

    std::vector<ConfigIssue> issues;
    std::vector<std::vector<std::string>> paths;
    for (const auto& [key, values] : config.sweep) {
        std::vector<std::string> segs;
        std::stringstream ss(key);
        for (std::string seg; std::getline(ss, seg, '.');) segs.push_back(seg);
        YAML::Node cur = YAML::Clone(root);
        bool ok = true;
        for (const auto& seg : segs) {
            YAML::Node next;
            if (cur.IsMap() && cur[seg]) {
                next = cur[seg];
            } else if (cur.IsSequence() && !seg.empty() && seg.find_first_not_of("0123456789") == std::string::npos &&
                       std::stoul(seg) < cur.size()) {
                next = cur[std::stoul(seg)];
            } else {
                ok = false;
                break;
            }
            cur.reset(next);
        }
        if (!ok || !cur.IsScalar()) issues.push_back({0, 0, "sweep key '" + key + "' does not name a scalar setting"});
        paths.push_back(segs);
    }
    if (!issues.empty()) throw ConfigParseError(issues);

    std::vector<Config> out;
    std::vector<std::size_t> index(config.sweep.size(), 0);
    std::vector<const std::vector<std::string>*> lists;
    for (const auto& kv : config.sweep) lists.push_back(&kv.second);
    for (;;) {
        YAML::Node doc = YAML::Clone(root);
        for (std::size_t k = 0; k < paths.size(); ++k) {
            YAML::Node cur = doc;
            for (std::size_t s = 0; s + 1 < paths[k].size(); ++s) {
                const std::string& seg = paths[k][s];
                YAML::Node next = cur.IsSequence() ? cur[std::stoul(seg)] : cur[seg];
                cur.reset(next);
            }
            const std::string& last = paths[k].back();
            if (cur.IsSequence()) {
                cur[std::stoul(last)] = (*lists[k])[index[k]];
            } else {
                cur[last] = (*lists[k])[index[k]];
            }
        }
        YAML::Emitter em;
        em << doc;
        out.push_back(parse_config(em.c_str()));

        std::size_t k = 0;
        while (k < index.size() && ++index[k] == lists[k]->size()) index[k++] = 0;
        if (k == index.size()) break;
    }
    return out;
}

std::string config_hash(const Config& config) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : emit_config(config)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

ProfileSpec to_spec(const ProfileConfig& p) {
    ProfileSpec s;
    using Shape = ProfileSpec::Shape;
    static const std::map<std::string, Shape> shapes{
        {"constant", Shape::constant}, {"cos", Shape::cos}, {"sin", Shape::sin}, {"step", Shape::step}, {"tanh", Shape::tanh}};
    s.shape = shapes.at(p.shape);
    s.mean = p.mean;
    s.amp = p.amp;
    s.mode = p.mode;
    return s;
}

}  // namespace

Scenario build_scenario(const Config& c) {
    Scenario s;
    s.kind = c.scenario == "torus" ? ScenarioKind::torus
             : c.scenario == "confined" ? ScenarioKind::confined
                                        : ScenarioKind::general;
    const bool boxed = s.kind == ScenarioKind::confined || (s.kind == ScenarioKind::general && c.model.preset == "confined");
    s.grid = boxed ? Grid::box(c.grid.dim, c.grid.n_cells, c.grid.half_width) : Grid::torus(c.grid.dim, c.grid.n_cells);
    s.kappa = c.model.kappa;

    s.rate.kind = c.network.law == "constant" ? RateLaw::Kind::constant : RateLaw::Kind::read_shockley_hall;
    s.rate.k = c.network.k;
    s.rate.k0 = c.network.k0;
    s.rate.c_n = c.network.c_n;
    s.rate.c_p = c.network.c_p;
    s.rate.energy_exponent = c.network.energy_exponent;

    SpatialFunctionPtr V;
    if (boxed) V = harmonic_potential(c.model.potential_strength, c.model.potential_offset);

    if (s.kind == ScenarioKind::general && c.model.preset == "custom") {
        EntropyModel m;
        m.kind = c.model.entropy == "example1" ? EntropyKind::example1 : EntropyKind::example2;
        m.heat = c.model.heat == "log" ? HeatForm::log : HeatForm::power;
        m.c = c.model.c;
        m.sigma = c.model.sigma;
        m.b = c.model.b;
        m.C = c.model.C;
        s.model = m;
    } else if (boxed) {
        s.model = confined_model(c.model.c, V);
    } else {
        s.model = torus_model(c.model.c);
    }
    s.potential = s.kind == ScenarioKind::confined ? V : nullptr;

    if (c.network.reactions.empty()) {
        s.network = bipolar_network(s.rate);
    } else {
        std::vector<Reaction> reactions;
        for (const auto& rc : c.network.reactions) reactions.push_back({rc.alpha, rc.beta, s.rate.rate_fn()});
        s.network = ReactionNetwork(c.model.b.empty() ? 2 : c.model.b.size(), std::move(reactions));
    }

    std::vector<ProfileSpec> densities;
    for (const auto& p : c.initial.species) densities.push_back(to_spec(p));
    s.initial = initial_state(boxed ? ScenarioKind::confined : s.kind, s.grid, V, densities, to_spec(c.initial.energy));
    s.dt = c.run.dt;
    s.t_end = c.run.t_end;
    s.cadence = c.run.cadence;
    s.snapshot_times = c.run.snapshots;
    finalize_scenario(s);
    return s;
}

RunOptions run_options(const Config& c) {
    RunOptions o;
    o.diagnostics.eep = c.diagnostics.eep;
    o.diagnostics.per_record_log_sobolev = c.diagnostics.per_record_log_sobolev;
    o.diagnostics.constant_options.random_trials = c.diagnostics.constant_trials;
    o.diagnostics.constant_options.search_rounds = c.diagnostics.search_rounds;
    o.diagnostics.constant_options.seed = c.run.seed;
    if (c.diagnostics.constants.size() == 3) {
        o.diagnostics.constants_given = true;
        o.diagnostics.given = {c.diagnostics.constants[0], c.diagnostics.constants[1], c.diagnostics.constants[2], false};
    }
    return o;
}

}  // namespace erds
