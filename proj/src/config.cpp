#include "qmaflow/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qmaflow/error.hpp"
#include "qmaflow/json_format.hpp"
#include "qmaflow/oracles.hpp"
#include "qmaflow/snapshot.hpp"

namespace qmaflow {

using nlohmann::json;

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::solve: return "solve";
        case Mode::cr_flow: return "cr-flow";
        case Mode::verify: return "verify";
        case Mode::oracle: return "oracle";
    }
    return "?";
}

std::optional<Mode> mode_from_string(const std::string& name) {
    if (name == "solve") return Mode::solve;
    if (name == "cr-flow") return Mode::cr_flow;
    if (name == "verify") return Mode::verify;
    if (name == "oracle") return Mode::oracle;
    return std::nullopt;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"zero", "cos1", "cos13", "sum-modes"};
    return names;
}

namespace {

void check_keys(const json& obj, const std::string& ptr, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(ptr + "/" + it.key(), "unknown field");
}

const json& require_object(const json& v, const std::string& ptr) {
    if (!v.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
    return v;
}

double get_number(const json& v, const std::string& ptr) {
    if (!v.is_number()) throw ConfigError(ptr, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(ptr, "expected a finite number");
    return x;
}

double get_positive(const json& v, const std::string& ptr) {
    const double x = get_number(v, ptr);
    if (!(x > 0.0)) throw ConfigError(ptr, "must be positive");
    return x;
}

long long get_integer(const json& v, const std::string& ptr) {
    if (!v.is_number_integer()) throw ConfigError(ptr, "expected an integer");
    return v.get<long long>();
}

std::string get_string(const json& v, const std::string& ptr) {
    if (!v.is_string()) throw ConfigError(ptr, "expected a string");
    return v.get<std::string>();
}

DatumSpec parse_datum(const json& v, const std::string& ptr, const json* sibling_amp, const std::string& amp_ptr,
                      const std::filesystem::path& base_dir) {
    DatumSpec d;
    d.pointer = ptr;
    if (v.is_string()) {
        d.kind = DatumSpec::Kind::preset;
        d.preset = v.get<std::string>();
        if (sibling_amp) d.amp = get_number(*sibling_amp, amp_ptr);
    } else {
        require_object(v, ptr);
        check_keys(v, ptr, {"preset", "amp", "snapshot", "seed"});
        const int kinds = int(v.contains("preset")) + int(v.contains("snapshot")) + int(v.contains("seed"));
        if (kinds != 1) throw ConfigError(ptr, "expected exactly one of preset, snapshot, seed");
        if (v.contains("amp")) d.amp = get_number(v["amp"], ptr + "/amp");
        if (v.contains("preset")) {
            d.kind = DatumSpec::Kind::preset;
            d.preset = get_string(v["preset"], ptr + "/preset");
        } else if (v.contains("snapshot")) {
            d.kind = DatumSpec::Kind::snapshot;
            if (v.contains("amp")) throw ConfigError(ptr + "/amp", "not allowed with a snapshot");
            d.snapshot = get_string(v["snapshot"], ptr + "/snapshot");
            if (d.snapshot.is_relative()) d.snapshot = base_dir / d.snapshot;
        } else {
            d.kind = DatumSpec::Kind::random;
            const long long s = get_integer(v["seed"], ptr + "/seed");
            if (s < 0) throw ConfigError(ptr + "/seed", "must be non-negative");
            d.seed = static_cast<std::uint64_t>(s);
        }
    }
    if (d.kind == DatumSpec::Kind::preset) {
        bool known = false;
        for (const auto& name : preset_names()) known = known || name == d.preset;
        if (!known) throw ConfigError(v.is_string() ? ptr : ptr + "/preset", "unknown preset '" + d.preset + "'");
    }
    return d;
}

json datum_json(const DatumSpec& d) {
    switch (d.kind) {
        case DatumSpec::Kind::preset: return {{"preset", d.preset}, {"amp", d.amp}};
        case DatumSpec::Kind::snapshot: return {{"snapshot", d.snapshot.string()}};
        case DatumSpec::Kind::random:
            return {{"seed", d.seed ? json(*d.seed) : json("run")}, {"amp", d.amp}};
    }
    return nullptr;
}

void check_snapshot(const DatumSpec& d, const GeometryPtr& geom) {
    if (d.kind != DatumSpec::Kind::snapshot) return;
    const std::string ptr = d.pointer + "/snapshot";
    if (!std::filesystem::exists(d.snapshot)) throw ConfigError(ptr, "file not found: " + d.snapshot.string());
    Snapshot snap;
    try {
        snap = read_snapshot(d.snapshot);
    } catch (const std::exception& e) {
        throw ConfigError(ptr, e.what());
    }
    try {
        field_from_snapshot(snap, geom);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ptr, e.what());
    }
}

void resolve(RunConfig& cfg) {
    json r = {{"mode", to_string(cfg.mode)},
              {"geometry", {{"n", cfg.n}, {"grid", cfg.grid}, {"periods", cfg.periods}}},
              {"solver",
               {{"scheme", to_string(cfg.scheme)},
                {"dt", cfg.dt ? json(*cfg.dt) : json(nullptr)},
                {"dt_safety", cfg.dt_safety},
                {"tol", cfg.tol},
                {"t_max", cfg.t_max},
                {"max_steps", cfg.max_steps}}},
              {"seed", cfg.seed},
              {"verify", {{"samples", cfg.samples}}},
              {"output", {{"snapshot_every", cfg.snapshot_every}, {"csv", cfg.csv}}}};
    json datum = json::object();
    if (cfg.f) datum["f"] = datum_json(*cfg.f);
    if (cfg.u) datum["u"] = datum_json(*cfg.u);
    r["datum"] = datum;
    cfg.resolved = r;
    cfg.hash = fnv1a_hex(dump17(r));
}

}  // namespace

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir, std::optional<Mode> cli_mode) {
    require_object(doc, "");
    check_keys(doc, "", {"mode", "geometry", "n", "grid", "periods", "datum", "f", "u", "amp", "solver", "verify",
                         "seed", "output"});
    RunConfig cfg;

    if (doc.contains("mode")) {
        const auto m = mode_from_string(get_string(doc["mode"], "/mode"));
        if (!m) throw ConfigError("/mode", "expected one of solve, cr-flow, verify, oracle");
        if (cli_mode && *cli_mode != *m)
            throw ConfigError("/mode", "config says '" + to_string(*m) + "' but '" + to_string(*cli_mode) +
                                           "' was requested");
        cfg.mode = *m;
    } else if (cli_mode) {
        cfg.mode = *cli_mode;
    } else {
        throw ConfigError("/mode", "missing required field");
    }

    // Geometry, either as a block or inline at the top level.
    const bool block = doc.contains("geometry");
    if (block && (doc.contains("n") || doc.contains("grid") || doc.contains("periods")))
        throw ConfigError("/geometry", "give geometry either as a block or inline, not both");
    const json& geo = block ? require_object(doc["geometry"], "/geometry") : doc;
    const std::string gp = block ? "/geometry" : "";
    if (block) check_keys(geo, gp, {"n", "grid", "periods"});
    if (!geo.contains("n")) throw ConfigError(gp + "/n", "missing required field");
    const long long n = get_integer(geo["n"], gp + "/n");
    if (n < 1 || n > 4) throw ConfigError(gp + "/n", "must lie in 1..4");
    cfg.n = static_cast<int>(n);
    if (!geo.contains("grid")) throw ConfigError(gp + "/grid", "missing required field");
    if (!geo["grid"].is_array()) throw ConfigError(gp + "/grid", "expected an array");
    if (geo["grid"].size() != static_cast<std::size_t>(4 * n))
        throw ConfigError(gp + "/grid", "expected 4n = " + std::to_string(4 * n) + " entries, got " +
                                            std::to_string(geo["grid"].size()));
    for (std::size_t d = 0; d < geo["grid"].size(); ++d) {
        const std::string ptr = gp + "/grid/" + std::to_string(d);
        const long long v = get_integer(geo["grid"][d], ptr);
        if (v < 1) throw ConfigError(ptr, "grid sizes must be at least 1");
        cfg.grid.push_back(static_cast<int>(v));
    }
    if (geo.contains("periods")) {
        if (!geo["periods"].is_array()) throw ConfigError(gp + "/periods", "expected an array");
        if (geo["periods"].size() != static_cast<std::size_t>(4 * n))
            throw ConfigError(gp + "/periods", "expected 4n = " + std::to_string(4 * n) + " entries, got " +
                                                   std::to_string(geo["periods"].size()));
        for (std::size_t d = 0; d < geo["periods"].size(); ++d)
            cfg.periods.push_back(get_positive(geo["periods"][d], gp + "/periods/" + std::to_string(d)));
    } else {
        cfg.periods.assign(4 * n, 2.0 * M_PI);
    }

    // Datum, either in a "datum" block or inline.
    const bool dblock = doc.contains("datum");
    if (dblock && (doc.contains("f") || doc.contains("u")))
        throw ConfigError("/datum", "give the datum either as a block or inline, not both");
    const json& dat = dblock ? require_object(doc["datum"], "/datum") : doc;
    const std::string dp = dblock ? "/datum" : "";
    if (dblock) check_keys(dat, dp, {"f", "u", "amp"});
    const json* amp = dat.contains("amp") ? &dat["amp"] : (doc.contains("amp") ? &doc["amp"] : nullptr);
    const std::string amp_ptr = dat.contains("amp") ? dp + "/amp" : "/amp";
    if (dat.contains("f")) cfg.f = parse_datum(dat["f"], dp + "/f", amp, amp_ptr, base_dir);
    if (dat.contains("u")) cfg.u = parse_datum(dat["u"], dp + "/u", amp, amp_ptr, base_dir);

    if (cfg.mode == Mode::solve) {
        if (!cfg.f) throw ConfigError(dp + "/f", "solve mode requires a datum f");
        if (cfg.u) throw ConfigError(dp + "/u", "solve mode takes f, not u");
    }
    if (cfg.mode == Mode::cr_flow) {
        if (!cfg.u) throw ConfigError(dp + "/u", "cr-flow mode requires a conformal factor u");
        if (cfg.f) throw ConfigError(dp + "/f", "cr-flow mode takes u, not f");
    }

    if (doc.contains("solver")) {
        const json& s = require_object(doc["solver"], "/solver");
        check_keys(s, "/solver", {"scheme", "dt", "dt_safety", "tol", "t_max", "max_steps"});
        if (s.contains("scheme")) {
            const std::string name = get_string(s["scheme"], "/solver/scheme");
            try {
                cfg.scheme = scheme_from_string(name);
            } catch (const std::invalid_argument&) {
                throw ConfigError("/solver/scheme", "expected explicit or imex, got '" + name + "'");
            }
        }
        if (s.contains("dt") && !s["dt"].is_null()) cfg.dt = get_positive(s["dt"], "/solver/dt");
        if (s.contains("dt_safety")) {
            cfg.dt_safety = get_positive(s["dt_safety"], "/solver/dt_safety");
            if (cfg.dt_safety > 1.0) throw ConfigError("/solver/dt_safety", "must lie in (0, 1]");
        }
        if (s.contains("tol")) cfg.tol = get_positive(s["tol"], "/solver/tol");
        if (s.contains("t_max")) cfg.t_max = get_positive(s["t_max"], "/solver/t_max");
        if (s.contains("max_steps")) {
            cfg.max_steps = static_cast<long>(get_integer(s["max_steps"], "/solver/max_steps"));
            if (cfg.max_steps < 0) throw ConfigError("/solver/max_steps", "must be non-negative");
        }
    }

    if (doc.contains("verify")) {
        const json& v = require_object(doc["verify"], "/verify");
        check_keys(v, "/verify", {"samples"});
        if (v.contains("samples")) {
            const long long s = get_integer(v["samples"], "/verify/samples");
            if (s < 1) throw ConfigError("/verify/samples", "must be at least 1");
            cfg.samples = static_cast<int>(s);
        }
    }

    if (doc.contains("seed")) {
        const long long s = get_integer(doc["seed"], "/seed");
        if (s < 0) throw ConfigError("/seed", "must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }

    cfg.out_dir = base_dir / "out";
    if (doc.contains("output")) {
        const json& o = require_object(doc["output"], "/output");
        check_keys(o, "/output", {"directory", "snapshot_every", "csv"});
        if (o.contains("directory")) {
            cfg.out_dir = get_string(o["directory"], "/output/directory");
            if (cfg.out_dir.is_relative()) cfg.out_dir = base_dir / cfg.out_dir;
        }
        if (o.contains("snapshot_every")) {
            cfg.snapshot_every = static_cast<long>(get_integer(o["snapshot_every"], "/output/snapshot_every"));
            if (cfg.snapshot_every < 0) throw ConfigError("/output/snapshot_every", "must be non-negative");
        }
        if (o.contains("csv")) {
            cfg.csv = get_string(o["csv"], "/output/csv");
            if (cfg.csv.empty() || cfg.csv.find('/') != std::string::npos)
                throw ConfigError("/output/csv", "expected a plain file name");
        }
    }

    GeometryPtr geom = make_geometry(cfg);
    if (cfg.f) check_snapshot(*cfg.f, geom);
    if (cfg.u) check_snapshot(*cfg.u, geom);
    resolve(cfg);
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path, std::optional<Mode> mode) {
    std::ifstream in(path);
    if (!in) throw ConfigError("/", "cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("/", std::string("invalid JSON: ") + e.what());
    }
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return parse_config(doc, base, mode);
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    resolve(cfg);
}

GeometryPtr make_geometry(const RunConfig& cfg) { return build_flat_torus(cfg.n, cfg.grid, cfg.periods); }

ScalarField materialize(const DatumSpec& d, const GeometryPtr& geom, std::uint64_t default_seed) {
    switch (d.kind) {
        case DatumSpec::Kind::snapshot: return field_from_snapshot(read_snapshot(d.snapshot), geom);
        case DatumSpec::Kind::random: return oracle::random_band_limited_field(geom, d.seed.value_or(default_seed), d.amp);
        case DatumSpec::Kind::preset: break;
    }
    const double amp = d.amp;
    const std::vector<double>& L = geom->periods();
    auto wave = [&L](double x, int dim, int k) { return 2.0 * M_PI * k * x / L[dim]; };
    if (d.preset == "zero") return ScalarField(geom);
    if (d.preset == "cos1") return sample(geom, [&](auto x) { return amp * std::cos(wave(x[0], 0, 1)); });
    if (d.preset == "cos13")
        return sample(geom, [&](auto x) { return amp * (std::cos(wave(x[0], 0, 1)) + std::cos(wave(x[2], 2, 1))); });
    if (d.preset == "sum-modes") {
        std::vector<int> active;
        for (int dim = 0; dim < geom->real_dim(); ++dim)
            if (geom->grid_shape()[dim] > 1) active.push_back(dim);
        return sample(geom, [&](auto x) {
            double s = 0.0;
            for (int dim : active) s += std::cos(wave(x[dim], dim, 1)) + 0.5 * std::sin(wave(x[dim], dim, 2));
            return amp * s;
        });
    }
    throw ConfigError(d.pointer, "unknown preset '" + d.preset + "'");
}

}  // namespace qmaflow
