#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dpg/parallel.hpp"
#include "dpg/run.hpp"

using namespace dpg;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_key_values(in);
}

std::string error_of(const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

fs::path scratch() {
    const fs::path d = fs::temp_directory_path() / "dpg_cli_tests";
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

int run_cli(const std::string& args, const fs::path& stderr_file = {}) {
    std::string cmd = std::string(DPG_CLI_PATH) + " " + args;
    if (!stderr_file.empty()) cmd += " 2>" + stderr_file.string();
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string csv_text(const Table& t) {
    std::ostringstream s;
    write_csv(s, t);
    return s.str();
}

}  // namespace

TEST_CASE("config text parsing") {
    const auto kv = parse("# study\nmode = study\n\n formulation=primal_poisson  # trailing comment\np=1\n");
    CHECK(kv.size() == 3);
    CHECK(kv.at("mode") == "study");
    CHECK(kv.at("formulation") == "primal_poisson");
    CHECK_THROWS(parse("mode=study\nmode=verify\n"));
    CHECK(error_of([] { parse("mode=study\njunk\n"); }).find("line 2") != std::string::npos);
}

TEST_CASE("strict keys") {
    const std::string e = error_of([] { config_from_map(parse("mode=verify\nfoo=1\n")); });
    CHECK(e.find("'foo'") != std::string::npos);
    const std::string m = error_of([] { config_from_map(parse("mode=study\n")); });
    for (const char* k : {"'formulation'", "'p'", "'levels'"}) CHECK(m.find(k) != std::string::npos);
    CHECK(error_of([] { config_from_map(parse("p=1\n")); }).find("'mode'") != std::string::npos);
}

TEST_CASE("config validation") {
    const std::string base = "mode=adaptive\nformulation=primal_poisson\np=1\niterations=3\n";
    CHECK_NOTHROW(config_from_map(parse(base)));
    CHECK_THROWS(config_from_map(parse(base + "theta=0\n")));
    CHECK_THROWS(config_from_map(parse(base + "theta=1.5\n")));
    CHECK_THROWS(config_from_map(parse(base + "rate_fit=median\n")));
    CHECK_THROWS(config_from_map(parse(base + "p=x\n")));
    CHECK_THROWS(config_from_map(parse("mode=describe\nformulation=nope\n")));
    CHECK_THROWS(config_from_map(parse("mode=verify\nsuite=nope\n")));
    CHECK_THROWS(config_from_map(parse("mode=describe\nformulation=primal_poisson\ncase=nope\n")));
    CHECK_THROWS(config_from_map(parse("mode=sideways\n")));
    const StudyConfig c = config_from_map(parse(base + "space=economy\ndomain=l-shape\nseed=42\nrate_fit=all\n"));
    CHECK(c.space_mode == SpaceMode::Economy);
    CHECK(c.domain == Domain::LShape);
    CHECK(c.seed == 42);
    CHECK(c.rate_all);
}

TEST_CASE("fitted rates") {
    CHECK(fitted_rate({0.5, 0.25, 0.125}, {0.25, 0.0625, 0.015625}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fitted_rate({0.5, 0.25}, {1.0, 0.5}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::isnan(fitted_rate({0.5}, {1.0})));
    CHECK(std::isnan(fitted_rate({0.5, 0.25}, {1.0, std::nan("")})));
}

TEST_CASE("report writers") {
    Table empty({"level", "eta"});
    CHECK(csv_text(empty) == "level,eta\n");
    std::ostringstream j0;
    write_jsonl(j0, empty);
    CHECK(j0.str().empty());

    Table t({"name", "eta", "ok", "n"});
    const double etas[] = {0.1, 1.0 / 3.0, 2.718281828459045e-7, 6.02214076e23, -1e-300};
    for (double e : etas) t.add({std::string("a,\"b\""), e, e > 0, std::int64_t(7)});
    t.add({std::string("x"), std::nan(""), false, std::int64_t(-1)});
    const auto rows = lines(csv_text(t));
    REQUIRE(rows.size() == 7);
    CHECK(rows[0] == "name,eta,ok,n");
    CHECK(rows[1].rfind("\"a,\"\"b\"\"\",", 0) == 0);
    CHECK(rows[6] == "x,nan,false,-1");
    for (double e : etas) CHECK(parse_number(format_number(e)) == e);
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(csv_text(t).find('\r') == std::string::npos);

    std::ostringstream js;
    write_jsonl(js, t);
    const auto jl = lines(js.str());
    CHECK(jl.size() == t.rows.size());
    const auto first = nlohmann::json::parse(jl[0]);
    CHECK(first["name"] == "a,\"b\"");
    CHECK(first["eta"].get<double>() == 0.1);
    CHECK(first["ok"] == true);
    CHECK(nlohmann::json::parse(jl[5])["eta"].is_null());

    CHECK_THROWS(t.add({1.0}));
    CHECK_THROWS(write_report(t, "/nonexistent-dir/x.csv", ReportFormat::Csv));
    const fs::path out = scratch() / "report.jsonl";
    write_report(t, out.string(), ReportFormat::Jsonl);
    CHECK(lines(slurp(out)).size() == t.rows.size());
}

TEST_CASE("study mode") {
    const StudyConfig c =
        config_from_map(parse("mode=study\nformulation=primal_poisson\np=1\nlevels=3\nn0=1\n"));
    const Table t = run_study(c);
    CHECK(t.rows.size() == 3);
    const auto& cols = t.columns;
    for (const char* k : {"level", "h", "dofs", "err_u", "err_sigma_n", "eta", "rate"})
        CHECK(std::find(cols.begin(), cols.end(), k) != cols.end());
    const auto col = [&](const char* k) { return std::find(cols.begin(), cols.end(), k) - cols.begin(); };
    CHECK(std::isnan(std::get<double>(t.rows[0][col("rate")])));
    const double r2 = std::get<double>(t.rows[2][col("rate")]);
    const double e1 = std::get<double>(t.rows[1][col("error")]), e2 = std::get<double>(t.rows[2][col("error")]);
    const double h1 = std::get<double>(t.rows[1][col("h")]), h2 = std::get<double>(t.rows[2][col("h")]);
    CHECK(r2 == doctest::Approx(std::log(e2 / e1) / std::log(h2 / h1)).epsilon(1e-12));
    CHECK(csv_text(t) == csv_text(run_study(c)));

    StudyConfig all = c;
    all.rate_all = true;
    const Table ta = run_study(all);
    CHECK(std::get<double>(ta.rows[2][col("rate")]) ==
          doctest::Approx(fitted_rate({std::get<double>(ta.rows[0][col("h")]), h1, h2},
                                      {std::get<double>(ta.rows[0][col("error")]), e1, e2}))
              .epsilon(1e-12));
}

TEST_CASE("adaptive mode with dumps") {
    const fs::path d = scratch();
    StudyConfig c = config_from_map(parse("mode=adaptive\nformulation=primal_poisson\ncase=poisson_lshape_singular\n"
                                          "p=1\niterations=3\n"));
    c.dump_solution = (d / "sol.csv").string();
    c.dump_estimator = (d / "est.csv").string();
    const Table t = run_adaptive(c);
    CHECK(t.columns == std::vector<std::string>{"iteration", "dofs", "eta", "error", "cells"});
    CHECK(t.rows.size() == 3);
    CHECK(std::isnan(std::get<double>(t.rows[0][3])));
    const auto sol = lines(slurp(c.dump_solution));
    const auto est = lines(slurp(c.dump_estimator));
    CHECK(sol[0] == "dof,real,imag");
    CHECK(est[0] == "cell,eta");
    CHECK(static_cast<std::int64_t>(est.size()) == std::get<std::int64_t>(t.rows[2][4]) + 1);
    CHECK(static_cast<std::int64_t>(sol.size()) == std::get<std::int64_t>(t.rows[2][1]) + 1);
}

TEST_CASE("describe mode") {
    const StudyConfig c = config_from_map(parse("mode=describe\nformulation=maxwell_primal_E\nspace=economy\n"));
    const auto j = nlohmann::json::parse(describe(c));
    CHECK(j["formulation"] == "maxwell_primal_E");
    CHECK(j["dim"] == 3);
    CHECK(j["delta"] == 2);
    CHECK(j["trial"].size() == 2);
    CHECK(j["trial"][0]["family"] == family_name(Family::Hcurl));
    CHECK(j["cells"] == 5);
}

TEST_CASE("verify mode exit status and determinism") {
    const StudyConfig c = config_from_map(parse("mode=verify\nsuite=annihilation\n"));
    const auto recs = run_verify(c);
    CHECK(recs.size() == 4);
    for (const auto& r : recs) CHECK(r.pass);

    const fs::path d = scratch();
    const fs::path cfg = write_config("verify.cfg", "mode=verify\nsuite=duality\nseed=5\n");
    const fs::path a = d / "a.jsonl", b = d / "b.jsonl", other = d / "c.jsonl";
    const int sa = run_cli(cfg.string() + " --out " + a.string());
    const int sb = run_cli(cfg.string() + " --out " + b.string());
    const int sc = run_cli(cfg.string() + " --seed 6 --out " + other.string());
    CHECK(sa == sb);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(other));
    bool all_pass = true;
    const auto jl = lines(slurp(a));
    CHECK(jl.size() == 40);
    for (const auto& l : jl) {
        const auto j = nlohmann::json::parse(l);
        for (const char* k : {"suite", "case", "value", "tolerance", "pass"}) CHECK(j.contains(k));
        all_pass = all_pass && j["pass"].get<bool>();
    }
    CHECK(sa == (all_pass ? 0 : 1));
    CHECK(sc <= 1);
}

TEST_CASE("command line") {
    const fs::path d = scratch();
    const fs::path err = d / "stderr.txt";
    CHECK(run_cli(write_config("foo.cfg", "mode=verify\nfoo=3\n").string(), err) == 2);
    CHECK(slurp(err).find("foo") != std::string::npos);
    CHECK(run_cli((d / "missing.cfg").string(), err) == 2);
    CHECK(run_cli(write_config("miss.cfg", "mode=study\nformulation=primal_poisson\n").string(), err) == 2);
    CHECK(slurp(err).find("'levels'") != std::string::npos);

    // --mode and --out override the file
    const fs::path cfg = write_config("study.cfg", "mode=describe\nformulation=primal_poisson\np=1\nlevels=2\nout=-\n");
    const fs::path out = d / "study.csv";
    CHECK(run_cli(cfg.string() + " --mode study --out " + out.string()) == 0);
    const auto rows = lines(slurp(out));
    CHECK(rows.size() == 3);
    CHECK(rows[0].rfind("level,h,dofs,cells,", 0) == 0);
}

TEST_CASE("DPG_THREADS caps the worker count") {
    const char* old = std::getenv("DPG_THREADS");
    const std::string saved = old ? old : "";
    setenv("DPG_THREADS", "1", 1);
    CHECK(worker_count() == 1);
    setenv("DPG_THREADS", "0", 1);
    CHECK(worker_count() >= 1);
    if (old)
        setenv("DPG_THREADS", saved.c_str(), 1);
    else
        unsetenv("DPG_THREADS");
}
