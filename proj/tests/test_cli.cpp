#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qmaflow/config.hpp"
#include "qmaflow/error.hpp"
#include "qmaflow/harness.hpp"
#include "qmaflow/quadrature.hpp"
#include "qmaflow/snapshot.hpp"

using namespace qmaflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qmaflow_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error_pointer(const json& doc, const fs::path& base = fs::temp_directory_path()) {
    try {
        parse_config(doc, base);
    } catch (const ConfigError& e) {
        return e.pointer();
    }
    return "<accepted>";
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QMAFLOW_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& doc) {
    const fs::path p = dir / name;
    std::ofstream(p) << doc.dump(2);
    return p;
}

}  // namespace

TEST_CASE("minimal solve config gets defaults") {
    const json doc = {{"mode", "solve"}, {"n", 1}, {"grid", {16, 16, 16, 16}}, {"f", "cos1"}, {"amp", 0.2}};
    const RunConfig cfg = parse_config(doc, "/tmp");
    CHECK(cfg.mode == Mode::solve);
    CHECK(cfg.dt_safety == 0.5);
    CHECK(cfg.tol == 1e-9);
    CHECK(cfg.t_max == 500.0);
    CHECK_FALSE(cfg.dt.has_value());
    REQUIRE(cfg.periods.size() == 4);
    for (double L : cfg.periods) CHECK(L == doctest::Approx(2 * M_PI));
    REQUIRE(cfg.f.has_value());
    CHECK(cfg.f->preset == "cos1");
    CHECK(cfg.f->amp == 0.2);
    CHECK(cfg.hash.size() == 16);
    CHECK(cfg.resolved["solver"]["tol"] == 1e-9);

    // The block form is equivalent.
    const json block = {{"mode", "solve"},
                        {"geometry", {{"n", 1}, {"grid", {16, 16, 16, 16}}}},
                        {"datum", {{"f", {{"preset", "cos1"}, {"amp", 0.2}}}}}};
    CHECK(parse_config(block, "/tmp").hash == cfg.hash);
}

TEST_CASE("config errors name the offending field") {
    const json base = {{"mode", "solve"}, {"n", 1}, {"grid", {16, 1, 16, 1}}, {"f", "cos1"}};
    json bad = base;
    bad["grid"] = {16, 1, 16};
    CHECK(config_error_pointer(bad) == "/grid");
    try {
        parse_config(bad, "/tmp");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("4n = 4") != std::string::npos);
    }

    bad = base;
    bad["grid"] = {16, 0, 16, 1};
    CHECK(config_error_pointer(bad) == "/grid/1");
    bad = base;
    bad["periods"] = {1.0, 1.0, -1.0, 1.0};
    CHECK(config_error_pointer(bad) == "/periods/2");
    bad = base;
    bad["n"] = 0;
    CHECK(config_error_pointer(bad) == "/n");
    bad = base;
    bad.erase("f");
    CHECK(config_error_pointer(bad) == "/f");
    bad = base;
    bad["f"] = "cos2";
    CHECK(config_error_pointer(bad) == "/f");
    bad = base;
    bad["solver"] = {{"scheme", "rk4"}};
    CHECK(config_error_pointer(bad) == "/solver/scheme");
    bad = base;
    bad["solver"] = {{"dt", -1.0}};
    CHECK(config_error_pointer(bad) == "/solver/dt");
    bad = base;
    bad["solver"] = {{"dt_safety", 2.0}};
    CHECK(config_error_pointer(bad) == "/solver/dt_safety");
    bad = base;
    bad["solver"] = {{"tolerance", 1e-9}};
    CHECK(config_error_pointer(bad) == "/solver/tolerance");
    bad = base;
    bad["mode"] = "sovle";
    CHECK(config_error_pointer(bad) == "/mode");
    bad = base;
    bad["geometry"] = {{"n", 1}};
    CHECK(config_error_pointer(bad) == "/geometry");
    bad = base;
    bad["mode"] = "cr-flow";
    CHECK(config_error_pointer(bad) == "/u");
    bad = base;
    bad["f"] = {{"preset", "cos1"}, {"seed", 3}};
    CHECK(config_error_pointer(bad) == "/f");

    json no_mode = base;
    no_mode.erase("mode");
    CHECK(config_error_pointer(no_mode) == "/mode");
    CHECK(parse_config(no_mode, "/tmp", Mode::solve).mode == Mode::solve);
    CHECK_THROWS_AS(parse_config(base, "/tmp", Mode::verify), ConfigError);
}

TEST_CASE("snapshot datum is checked against the geometry") {
    const fs::path dir = scratch("snapshot");
    auto g2 = build_flat_torus(2, {4, 1, 4, 1, 1, 1, 1, 1});
    write_snapshot(dir / "f2.qmf", sample(g2, [](auto x) { return std::sin(x[0]); }), "f");
    auto g1 = build_flat_torus(1, {4, 1, 4, 1});
    write_snapshot(dir / "f1.qmf", sample(g1, [](auto x) { return 0.1 * std::sin(x[0]); }), "f");

    const json doc = {{"mode", "solve"}, {"n", 1}, {"grid", {4, 1, 4, 1}}, {"f", {{"snapshot", "f2.qmf"}}}};
    try {
        parse_config(doc, dir);
        FAIL("mismatched snapshot accepted");
    } catch (const ConfigError& e) {
        CHECK(e.pointer() == "/f/snapshot");
        const std::string msg = e.what();
        CHECK(msg.find("n = 2") != std::string::npos);
        CHECK(msg.find("n = 1") != std::string::npos);
    }

    json missing = doc;
    missing["f"]["snapshot"] = "nope.qmf";
    CHECK(config_error_pointer(missing, dir) == "/f/snapshot");

    json grid_mismatch = doc;
    grid_mismatch["grid"] = {8, 1, 4, 1};
    grid_mismatch["f"]["snapshot"] = "f1.qmf";
    CHECK(config_error_pointer(grid_mismatch, dir) == "/f/snapshot");

    json good = doc;
    good["f"]["snapshot"] = "f1.qmf";
    const RunConfig cfg = parse_config(good, dir);
    const ScalarField f = materialize(*cfg.f, make_geometry(cfg), cfg.seed);
    CHECK(f[4] == doctest::Approx(0.1 * std::sin(M_PI / 2)));
    fs::remove_all(dir);
}

TEST_CASE("datum presets") {
    auto geom = build_flat_torus(2, {8, 1, 8, 1, 1, 1, 1, 1});
    DatumSpec d;
    d.amp = 0.1;
    d.preset = "cos13";
    const ScalarField f = materialize(d, geom, 1);
    for (std::size_t p = 0; p < f.size(); ++p)
        CHECK(f[p] == doctest::Approx(0.1 * (std::cos(geom->coordinate(p, 0)) + std::cos(geom->coordinate(p, 2)))));
    d.preset = "sum-modes";
    const ScalarField s = materialize(d, geom, 1);
    const double x = geom->coordinate(9, 0), y = geom->coordinate(9, 2);
    CHECK(s[9] == doctest::Approx(0.1 * (std::cos(x) + 0.5 * std::sin(2 * x) + std::cos(y) + 0.5 * std::sin(2 * y))));
    d.preset = "zero";
    CHECK(sup_abs(materialize(d, geom, 1).values()) == 0.0);

    d.kind = DatumSpec::Kind::random;
    const ScalarField r1 = materialize(d, geom, 5);
    const ScalarField r2 = materialize(d, geom, 6);
    CHECK(sup_difference(r1, r2) > 0.0);
}

TEST_CASE("seed override changes the hash") {
    const json doc = {{"mode", "verify"}, {"n", 1}, {"grid", {8, 1, 8, 1}}};
    RunConfig cfg = parse_config(doc, "/tmp");
    const std::string before = cfg.hash;
    override_seed(cfg, 99);
    CHECK(cfg.seed == 99);
    CHECK(cfg.hash != before);
}

TEST_CASE("solve with zero datum exits cleanly after no steps") {
    const fs::path dir = scratch("zero");
    const auto cfg = write_config(dir, "zero.json",
                                  {{"mode", "solve"}, {"n", 1}, {"grid", {16, 16, 16, 16}}, {"f", "zero"}});
    CHECK(run_cli("solve --config " + cfg.string() + " --out " + (dir / "out").string() + " --quiet") == 0);
    const json summary = json::parse(read_all(dir / "out" / "summary.json"));
    CHECK(summary["steps"] == 0);
    CHECK(summary["b"] == 0.0);
    CHECK(summary["converged"] == true);
    CHECK(summary["residual"] == 0.0);
    CHECK_FALSE(fs::exists(dir / "out" / "error.json"));
    fs::remove_all(dir);
}

TEST_CASE("absurd explicit step reports a structured blow-up") {
    const fs::path dir = scratch("blowup");
    const auto cfg = write_config(dir, "blow.json",
                                  {{"mode", "solve"},
                                   {"n", 1},
                                   {"grid", {16, 1, 16, 1}},
                                   {"f", "cos1"},
                                   {"solver", {{"scheme", "explicit"}, {"dt", 50.0}}}});
    CHECK(run_cli("solve --config " + cfg.string() + " --out " + (dir / "out").string() + " --quiet") == exit_blowup);
    const json err = json::parse(read_all(dir / "out" / "error.json"));
    CHECK(err["error"] == "blowup");
    CHECK(err["margin"].get<double>() <= 0.0);
    CHECK(err.contains("point"));
    CHECK(err.contains("last_diagnostics"));
    fs::remove_all(dir);
}

TEST_CASE("non-convergence and bad configs exit non-zero") {
    const fs::path dir = scratch("budget");
    const auto cfg = write_config(dir, "short.json",
                                  {{"mode", "solve"},
                                   {"n", 1},
                                   {"grid", {16, 1, 16, 1}},
                                   {"f", "cos1"},
                                   {"solver", {{"max_steps", 2}}}});
    CHECK(run_cli("solve --config " + cfg.string() + " --out " + (dir / "out").string() + " --quiet") ==
          exit_not_converged);
    CHECK(json::parse(read_all(dir / "out" / "error.json"))["error"] == "not_converged");

    const auto bad = write_config(dir, "bad.json", {{"mode", "solve"}, {"n", 1}, {"grid", {16, 1, 16}}, {"f", "cos1"}});
    CHECK(run_cli("solve --config " + bad.string() + " --quiet") == exit_config);
    CHECK(run_cli("solve --quiet") != 0);
    CHECK(run_cli("frobnicate --config " + bad.string()) != 0);
    fs::remove_all(dir);
}

TEST_CASE("verify and oracle modes pass on n = 1 defaults") {
    const fs::path dir = scratch("verify");
    const json body = {{"n", 1}, {"grid", {16, 1, 16, 1}}};
    const auto cfg = write_config(dir, "v.json", body);
    CHECK(run_cli("verify --config " + cfg.string() + " --out " + (dir / "v").string() + " --quiet") == 0);
    CHECK(run_cli("oracle --config " + cfg.string() + " --out " + (dir / "o").string() + " --quiet") == 0);
    std::ifstream in(dir / "v" / "oracle_reports.jsonl");
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        const json r = json::parse(line);
        CHECK(r["pass"] == true);
        ++lines;
    }
    CHECK(lines >= 8);
    fs::remove_all(dir);
}

TEST_CASE("repeated runs produce identical artifacts") {
    const fs::path dir = scratch("determinism");
    const auto cfg = write_config(dir, "s.json",
                                  {{"mode", "solve"},
                                   {"n", 2},
                                   {"grid", {16, 1, 16, 1, 1, 1, 1, 1}},
                                   {"f", "cos13"},
                                   {"amp", 0.1},
                                   {"solver", {{"scheme", "imex"}}},
                                   {"output", {{"snapshot_every", 10}}}});
    for (const char* sub : {"a", "b"})
        CHECK(run_cli("solve --config " + cfg.string() + " --out " + (dir / sub).string() + " --quiet") == 0);
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
        const fs::path other = dir / "b" / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK_MESSAGE(read_all(entry.path()) == read_all(other), entry.path().filename().string());
        ++compared;
    }
    CHECK(compared >= 5);

    std::ifstream csv(dir / "a" / "diagnostics.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "step,t,dt,sup_phidot,inf_phidot,osc_phi,b_t,min_pos_margin,max_tr_ghat_gphi,elliptic_residual");
    const Snapshot snap = read_snapshot(dir / "a" / "phi_tilde.qmf");
    CHECK(snap.header["config_hash"] == parse_config(cfg).hash);
    CHECK(snap.header["n"] == 2);
    fs::remove_all(dir);
}

TEST_CASE("cr-flow mode") {
    const fs::path dir = scratch("cr");
    const auto cfg = write_config(dir, "cr.json",
                                  {{"mode", "cr-flow"},
                                   {"geometry", {{"n", 1}, {"grid", {16, 1, 16, 1}}}},
                                   {"datum", {{"u", {{"preset", "cos1"}, {"amp", 0.1}}}}},
                                   {"solver", {{"t_max", 1.0}}}});
    CHECK(run_cli("cr-flow --config " + cfg.string() + " --out " + (dir / "out").string() + " --quiet") == 0);
    const json summary = json::parse(read_all(dir / "out" / "summary.json"));
    CHECK(summary["t_hat_infinite"] == true);
    CHECK(summary["reconstruction_error"].get<double>() < 1e-7);
    CHECK(summary["upper_bound_holds"] == true);
    CHECK(fs::exists(dir / "out" / "phi_final.qmf"));
    fs::remove_all(dir);
}
