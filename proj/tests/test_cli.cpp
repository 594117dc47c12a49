#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "ltsi/cli.hpp"

using namespace ltsi;

namespace {

std::filesystem::path scratch(const std::string& leaf) {
  auto p = std::filesystem::temp_directory_path() / "ltsi_cli_scratch" / leaf;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

ordered_json load_json(const std::filesystem::path& p) {
  return ordered_json::parse(read_text_file(p));
}

}  // namespace

TEST_CASE("analyze certifies the naive beam and pins the report schema") {
  auto dir = scratch("analyze");
  int rc = run_cli({"analyze", "--model", "timoshenko-naive", "--grid",
                    "-10:0.05:10", "--out", dir.string()});
  CHECK(rc == 0);

  ordered_json r = load_json(dir / "report.json");
  std::vector<std::string> keys;
  for (auto it = r.begin(); it != r.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{
                    "reciprocal", "rank_drops", "sup_S", "sup_S_inv",
                    "weakly_passive", "sup_Q", "impedance_passive", "generator",
                    "per_omega"});

  CHECK(r["reciprocal"] == true);
  CHECK(r["rank_drops"] == ordered_json::array({0.0}));
  CHECK(r["weakly_passive"] == true);
  CHECK(r["impedance_passive"] == false);
  CHECK(r["generator"]["t"] == 1.0);
  CHECK(r["generator"]["verdict"] == "suspected-unbounded");
  CHECK(r["per_omega"].size() == 401);
  CHECK(std::filesystem::exists(dir / "plots" / "sup_norms.svg"));
}

TEST_CASE("identical invocations produce identical artifacts") {
  auto d1 = scratch("det1"), d2 = scratch("det2");
  std::vector<std::string> args{"analyze", "--model", "heat",
                                "--grid",  "-5:0.1:5"};
  auto with_out = [&](const std::filesystem::path& d) {
    auto a = args;
    a.push_back("--out");
    a.push_back(d.string());
    return a;
  };
  CHECK(run_cli(with_out(d1)) == 0);
  CHECK(run_cli(with_out(d2)) == 0);
  CHECK(read_text_file(d1 / "report.json") == read_text_file(d2 / "report.json"));

  auto s1 = scratch("dets1"), s2 = scratch("dets2");
  std::vector<std::string> sim{"simulate", "--model", "heat",  "--points", "64",
                               "--dt",     "0.01",    "--t-final", "0.2"};
  auto sim_out = [&](const std::filesystem::path& d) {
    auto a = sim;
    a.push_back("--out");
    a.push_back(d.string());
    return a;
  };
  CHECK(run_cli(sim_out(s1)) == 0);
  CHECK(run_cli(sim_out(s2)) == 0);
  CHECK(read_text_file(s1 / "trace.csv") == read_text_file(s2 / "trace.csv"));
}

TEST_CASE("realize emits a certified self-dual realization") {
  auto dir = scratch("realize");
  int rc = run_cli({"realize", "--model", "timoshenko-naive", "--storage",
                    "lossless", "--out", dir.string()});
  CHECK(rc == 0);

  ordered_json r = load_json(dir / "realization.json");
  CHECK(r["n1"] == 2);
  CHECK(r["n2"] == 2);
  CHECK(std::abs(r["sup_CSQB"].get<double>() - 1.0) <= 1e-8);
  CHECK(r["residuals"]["worst_io"].get<double>() <= 1e-10);
  CHECK(r["residuals"]["worst_duality"].get<double>() <= 1e-9);
  CHECK(r["residuals"]["worst_b_bottom"].get<double>() <= 1e-10);

  Matrix D = matrix_from_json(r["D"]);
  Matrix want = Matrix::Identity(4, 4);
  want(2, 2) = -1.0;
  want(3, 3) = -1.0;
  CHECK((D - want).norm() <= 1e-15);

  MatrixSymbol Abar = symbol_from_json(r["Abar"]);
  CHECK(Abar.is_sampled());
  CHECK(Abar.rows() == 4);
  CHECK(std::filesystem::exists(dir / "plots" / "residuals.svg"));
}

TEST_CASE("simulate writes trace, fields, plots, and audits the balance") {
  auto dir = scratch("simulate");
  int rc = run_cli({"simulate", "--model", "heat", "--points", "128", "--dt",
                    "0.01", "--t-final", "0.2", "--out", dir.string()});
  CHECK(rc == 0);

  ordered_json s = load_json(dir / "simulation.json");
  CHECK(s["audit_passive"].get<double>() <= 1e-9);
  CHECK(s["boundary_flagged"] == false);
  CHECK(s["final_energy"].get<double>() > 0.0);

  auto trace = read_text_file(dir / "trace.csv");
  CHECK(trace.rfind("t,E,supply,balance\n", 0) == 0);
  CHECK(std::filesystem::exists(dir / "fields" / "state_0000.csv"));
  CHECK(std::filesystem::exists(dir / "fields" / "output_0000.csv"));
  auto svg = read_text_file(dir / "plots" / "energy.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
}

TEST_CASE("the naive beam fails the internal passivity audit") {
  auto dir = scratch("naive_sim");
  int rc = run_cli({"simulate", "--model", "timoshenko-naive", "--points", "64",
                    "--dt", "0.01", "--t-final", "0.5", "--out", dir.string()});
  CHECK(rc == 1);
  ordered_json s = load_json(dir / "simulation.json");
  CHECK(s["audit_passive"].get<double>() > 1e-6);
}

TEST_CASE("custom model files load by path") {
  auto dir = scratch("custom");
  auto bundle = model("heat", FrequencyGrid(-2.0, 0.5, 9));
  ordered_json j{{"name", "custom-heat"},
                 {"A", symbol_to_json(bundle.sys.A_sym)},
                 {"B", symbol_to_json(bundle.sys.B_sym)},
                 {"C", symbol_to_json(bundle.sys.C_sym)},
                 {"grid", grid_to_json(bundle.sys.grid)}};
  auto file = dir / "custom_heat.json";
  write_text_file(file, j.dump(2) + "\n");

  int rc = run_cli({"analyze", "--model", file.string(), "--out",
                    (dir / "out").string()});
  CHECK(rc == 0);
  ordered_json r = load_json(dir / "out" / "report.json");
  CHECK(r["reciprocal"] == true);
  CHECK(r["per_omega"].size() == 9);

  int rc2 = run_cli({"analyze", "--model", file.string(), "--grid", "-1:0.5:1",
                     "--out", (dir / "out2").string()});
  CHECK(rc2 == 0);
  CHECK(load_json(dir / "out2" / "report.json")["per_omega"].size() == 5);
}

TEST_CASE("bad invocations exit with code 2") {
  auto dir = scratch("bad");
  std::string out = dir.string();
  CHECK(run_cli({"analyze", "--model", "bogus", "--out", out}) == 2);
  CHECK(run_cli({"analyze", "--grid", "0:bad:3", "--out", out}) == 2);
  CHECK(run_cli({"analyze", "--storage", "sometimes", "--out", out}) == 2);
  CHECK(run_cli({"simulate", "--input", "kick", "--out", out}) == 2);
  CHECK(run_cli({"simulate", "--dt", "0", "--out", out}) == 2);
  CHECK(run_cli({"simulate", "--points", "100", "--out", out}) == 2);
  CHECK(run_cli({"analyze", "--frobnicate"}) == 2);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("report bundles analysis and realization artifacts") {
  auto dir = scratch("report");
  int rc = run_cli({"report", "--model", "reaction-diffusion", "--grid",
                    "-3:0.1:3", "--out", dir.string()});
  CHECK(rc == 0);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "realization.json"));
  CHECK(std::filesystem::exists(dir / "plots" / "sup_norms.svg"));
  CHECK(std::filesystem::exists(dir / "plots" / "residuals.svg"));
  ordered_json r = load_json(dir / "realization.json");
  CHECK(r["residuals"]["worst_io"].get<double>() <= 1e-8);
}

TEST_CASE("worker thread resolution falls back to the environment") {
  setenv("LTSI_LAB_THREADS", "2", 1);
  auto dir = scratch("threads");
  CHECK(run_cli({"analyze", "--model", "heat", "--grid", "-1:0.5:1", "--out",
                 dir.string()}) == 0);
  unsetenv("LTSI_LAB_THREADS");
}
