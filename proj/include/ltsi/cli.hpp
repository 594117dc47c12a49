#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ltsi/analysis.hpp"
#include "ltsi/errors.hpp"
#include "ltsi/grid.hpp"
#include "ltsi/io.hpp"
#include "ltsi/models.hpp"
#include "ltsi/plot.hpp"
#include "ltsi/realization.hpp"
#include "ltsi/sim.hpp"

namespace ltsi {

namespace cli_detail {

// Exit 2 marks bad input/config; every other toolkit error is a failed
// property or certificate (exit 1), with reports written where possible.
inline int classify_exit(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr ||
      dynamic_cast<const UnknownModel*>(&e) != nullptr ||
      dynamic_cast<const BinEvaluationFailure*>(&e) != nullptr)
    return 2;
  return 1;
}

inline void emit_error(const std::string& code, const std::string& message) {
  ordered_json j{{"code", code}, {"message", message}};
  std::cerr << "ERROR " << j.dump() << "\n";
}

inline int resolve_threads(int cli_value) {
  if (cli_value > 0) return cli_value;
  if (const char* env = std::getenv("LTSI_LAB_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != nullptr && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 0;
}

struct LoadedModel {
  std::string name;
  LtsiRealization sys;
};

inline LoadedModel load_model(const std::string& spec,
                              const std::string& grid_spec) {
  std::optional<FrequencyGrid> grid;
  if (!grid_spec.empty()) grid = FrequencyGrid::parse(grid_spec);
  auto names = model_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) {
    auto bundle = grid ? model(spec, *grid) : model(spec);
    return {spec, bundle.sys};
  }
  if (std::filesystem::exists(spec)) {
    ordered_json j = ordered_json::parse(read_text_file(spec));
    LtsiRealization sys = realization_from_json(j);
    if (grid) sys = LtsiRealization(sys.A_sym, sys.B_sym, sys.C_sym, *grid);
    return {j.value("name", std::filesystem::path(spec).stem().string()),
            std::move(sys)};
  }
  throw UnknownModel(spec);
}

inline FamilyStorageStrategy pick_storage(const std::string& mode,
                                          const ReciprocityCertificate& cert) {
  if (mode == "lossless") return FamilyLossless{};
  if (mode == "relaxation") return FamilyRelaxation{};
  if (mode != "auto")
    throw ConfigError("--storage must be auto, lossless, or relaxation");
  // relaxation only makes sense when the recovered S-field is positive
  const auto& grid = cert.S_sym.sampled_grid();
  for (int k : grid.active_indices())
    if (lambda_min_hermitian(cert.S_sym.sampled_values()[k]) <= 0.0)
      return FamilyLossless{};
  return FamilyRelaxation{};
}

struct AnalysisArtifacts {
  ordered_json report;
  int exit_code = 1;
  std::optional<ReciprocityCertificate> s_cert;
  std::optional<StorageCertificate> q_cert;
  GeneratorDiagnostic diag;
};

inline AnalysisArtifacts run_analysis(const LtsiRealization& sys,
                                      const std::string& storage_mode,
                                      double tol, double bound, int threads) {
  AnalysisArtifacts art;
  auto mfs = minimal_frequency_set(sys, defaults::rank_rel_threshold, threads);

  bool reciprocal = false;
  try {
    art.s_cert = s_field(sys, tol, defaults::extension_gap_tol, threads);
    reciprocal = true;
  } catch (const Error&) {
  }

  bool weakly = false;
  if (art.s_cert) {
    try {
      auto strategy = pick_storage(storage_mode, *art.s_cert);
      art.q_cert = weak_impedance_passivity(sys, strategy, 1e-8, threads);
      weakly = art.q_cert->weakly_passive;
    } catch (const Error&) {
    }
  }
  art.diag = generator_diagnostic(sys, 1.0, 1e-9, bound, threads);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> prop(sys.grid.count(), nan);
  for (std::size_t i = 0; i < art.diag.indices.size(); ++i)
    prop[art.diag.indices[i]] = art.diag.norms[i];

  ordered_json drops = ordered_json::array();
  std::vector<char> is_drop(sys.grid.count(), 0);
  for (const auto& d : mfs.drops) {
    drops.push_back(d.omega);
    is_drop[d.index] = 1;
  }

  ordered_json per_omega = ordered_json::array();
  for (int k = 0; k < sys.grid.count(); ++k) {
    if (sys.grid.is_excluded(k)) continue;
    ordered_json row{{"index", k}, {"omega", sys.grid.sample(k)}};
    bool have_s = art.s_cert && !is_drop[k];
    row["norm_S"] = have_s ? ordered_json(spectral_norm(
                                 art.s_cert->S_sym.sampled_values()[k]))
                           : ordered_json(nullptr);
    row["residual_S"] =
        art.s_cert ? ordered_json(art.s_cert->residual_reciprocity[k])
                   : ordered_json(nullptr);
    row["lmi_margin"] = art.q_cert ? ordered_json(art.q_cert->lmi_margin[k])
                                   : ordered_json(nullptr);
    row["norm_Q"] = (art.q_cert && !is_drop[k])
                        ? ordered_json(spectral_norm(
                              art.q_cert->Q_sym.sampled_values()[k]))
                        : ordered_json(nullptr);
    row["propagator_norm"] = prop[k];
    per_omega.push_back(std::move(row));
  }

  bool impedance = art.q_cert && impedance_passivity(*art.q_cert, bound).certified;
  art.report = ordered_json{
      {"reciprocal", reciprocal},
      {"rank_drops", std::move(drops)},
      {"sup_S", art.s_cert ? ordered_json(art.s_cert->sup_S) : ordered_json(nullptr)},
      {"sup_S_inv",
       art.s_cert ? ordered_json(art.s_cert->sup_S_inv) : ordered_json(nullptr)},
      {"weakly_passive", weakly},
      {"sup_Q", art.q_cert ? ordered_json(art.q_cert->sup_Q) : ordered_json(nullptr)},
      {"impedance_passive", impedance},
      {"generator",
       ordered_json{{"t", art.diag.t},
                    {"max_norm", art.diag.max_norm},
                    {"verdict", to_string(art.diag.verdict)}}},
      {"per_omega", std::move(per_omega)}};
  art.exit_code = (reciprocal && weakly) ? 0 : 1;
  return art;
}

inline void write_analysis_outputs(const AnalysisArtifacts& art,
                                   const std::filesystem::path& out) {
  write_text_file(out / "report.json", art.report.dump(2) + "\n");

  std::vector<PlotSeries> series;
  auto collect = [&](const char* label) {
    PlotSeries s{label, {}, {}};
    for (const auto& row : art.report["per_omega"]) {
      const auto& v = row[label];
      if (v.is_null()) continue;
      double y = v.get<double>();
      if (!std::isfinite(y)) continue;
      s.x.push_back(row["omega"].get<double>());
      s.y.push_back(y);
    }
    if (!s.x.empty()) series.push_back(std::move(s));
  };
  collect("norm_S");
  collect("norm_Q");
  collect("propagator_norm");
  write_text_file(out / "plots" / "sup_norms.svg",
                  svg_line_chart("per-sample norms", "omega", "spectral norm",
                                 series));
}

inline ordered_json realization_to_json(const PassiveReciprocalRealization& real) {
  ordered_json per_sample = ordered_json::array();
  for (std::size_t i = 0; i < real.active_indices.size(); ++i) {
    int k = real.active_indices[i];
    per_sample.push_back(ordered_json{{"index", k},
                                      {"omega", real.working_grid.sample(k)},
                                      {"passivity", real.passivity_margin[i]},
                                      {"io", real.io_residual[i]},
                                      {"duality", real.duality_residual[i]},
                                      {"b_bottom", real.b_bottom_norm[i]},
                                      {"csqb", real.csqb[i]}});
  }
  return ordered_json{
      {"n1", real.n1},
      {"n2", real.n2},
      {"D", matrix_to_json(real.D)},
      {"Abar", symbol_to_json(real.Abar_sym)},
      {"Bbar", symbol_to_json(real.Bbar_sym)},
      {"Cbar", symbol_to_json(real.Cbar_sym)},
      {"T", symbol_to_json(real.T_sym)},
      {"Tinv", symbol_to_json(real.Tinv_sym)},
      {"residuals",
       ordered_json{{"worst_passivity", real.worst_passivity},
                    {"worst_io", real.worst_io},
                    {"worst_duality", real.worst_duality},
                    {"worst_b_bottom", real.worst_b_bottom},
                    {"per_sample", std::move(per_sample)}}},
      {"sup_CSQB", real.sup_CSQB},
      {"csqb_argmax_omega", real.scan_CSQB.argmax_omega},
      {"alignment",
       ordered_json{{"worst_eigenvalue_deviation", real.worst_eigenvalue_deviation},
                    {"compat_applied", real.compat_applied}}}};
}

inline void write_realization_outputs(const PassiveReciprocalRealization& real,
                                      const std::filesystem::path& out) {
  write_text_file(out / "realization.json",
                  realization_to_json(real).dump(2) + "\n");
  std::vector<PlotSeries> series(3);
  series[0].label = "io residual";
  series[1].label = "duality residual";
  series[2].label = "passivity margin";
  for (std::size_t i = 0; i < real.active_indices.size(); ++i) {
    double omega = real.working_grid.sample(real.active_indices[i]);
    series[0].x.push_back(omega);
    series[0].y.push_back(real.io_residual[i]);
    series[1].x.push_back(omega);
    series[1].y.push_back(real.duality_residual[i]);
    series[2].x.push_back(omega);
    series[2].y.push_back(real.passivity_margin[i]);
  }
  write_text_file(out / "plots" / "residuals.svg",
                  svg_line_chart("per-sample transform residuals", "omega",
                                 "residual", series));
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args) {
  using namespace cli_detail;

  CLI::App app{"ltsi-lab: certificates, canonical realizations, and spectral "
               "simulation for frequency-indexed state-space families"};
  app.require_subcommand(1);

  struct {
    std::string model = "timoshenko-naive";
    std::string grid;
    std::string storage = "auto";
    std::string out = "out";
    std::string input = "pulse";
    double tol = 1e-6;
    double bound = defaults::sup_bound;
    double length = 50.0;
    double dt = 1e-3;
    double t_final = 2.0;
    int points = 256;
    int stride = 0;
    int threads = 0;
  } o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--model", o.model,
                  "built-in model name or path to a model JSON file");
    c->add_option("--grid", o.grid, "frequency grid spec min:step:max");
    c->add_option("--tol", o.tol, "certification tolerance");
    c->add_option("--bound", o.bound, "ceiling for sup-boundedness verdicts");
    c->add_option("--threads", o.threads,
                  "worker threads (fallback: LTSI_LAB_THREADS, then hardware)");
    c->add_option("--out", o.out, "output directory");
  };

  CLI::App* analyze = app.add_subcommand(
      "analyze", "reciprocity, passivity, and generator certificates");
  add_common(analyze);
  analyze->add_option("--storage", o.storage, "auto|lossless|relaxation");

  CLI::App* realize = app.add_subcommand(
      "realize", "canonical passive self-dual realization");
  add_common(realize);
  realize->add_option("--storage", o.storage, "auto|lossless|relaxation");

  CLI::App* simulate_cmd = app.add_subcommand(
      "simulate", "spectral time-domain run with energy/supply audit");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--length", o.length, "spatial domain length");
  simulate_cmd->add_option("--points", o.points, "spatial points (power of two)");
  simulate_cmd->add_option("--dt", o.dt, "time step");
  simulate_cmd->add_option("--t-final", o.t_final, "final time");
  simulate_cmd->add_option("--input", o.input,
                           "input preset: pulse|decay|none");
  simulate_cmd->add_option("--stride", o.stride,
                           "snapshot stride in steps (0 = auto)");

  CLI::App* report = app.add_subcommand(
      "report", "analyze + realize with all artifacts");
  add_common(report);
  report->add_option("--storage", o.storage, "auto|lossless|relaxation");

  try {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("ltsi-lab");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error("config_error", e.what());
    return 2;
  }

  int threads = resolve_threads(o.threads);
  std::filesystem::path out(o.out);

  try {
    if (o.storage != "auto" && o.storage != "lossless" &&
        o.storage != "relaxation")
      throw ConfigError("--storage must be auto, lossless, or relaxation");
    auto lm = load_model(o.model, o.grid);

    if (app.got_subcommand("analyze")) {
      auto art = run_analysis(lm.sys, o.storage, o.tol, o.bound, threads);
      write_analysis_outputs(art, out);
      return art.exit_code;
    }

    if (app.got_subcommand("realize") || app.got_subcommand("report")) {
      auto art = run_analysis(lm.sys, o.storage, o.tol, o.bound, threads);
      if (app.got_subcommand("report")) write_analysis_outputs(art, out);
      if (!art.s_cert || !art.q_cert) {
        ordered_json j{{"error",
                        ordered_json{{"code", "certificates_unavailable"},
                                     {"message",
                                      "analysis could not certify the family"}}}};
        write_text_file(out / "realization.json", j.dump(2) + "\n");
        emit_error("certificates_unavailable",
                   "analysis could not certify the family");
        return 1;
      }
      try {
        auto real = canonical_transform(lm.sys, *art.s_cert, *art.q_cert, o.tol);
        write_realization_outputs(real, out);
      } catch (const Error& e) {
        ordered_json j{{"error", ordered_json{{"code", e.code()},
                                              {"message", e.what()}}}};
        write_text_file(out / "realization.json", j.dump(2) + "\n");
        throw;
      }
      return art.exit_code;
    }

    // simulate
    SpatialGrid sgrid(o.length, o.points);
    SpaceTimeField u;
    SpaceField z0;
    int m = lm.sys.m, n = lm.sys.n;
    if (o.input == "pulse") {
      u = [m](double t, double x) {
        Vector v = Vector::Zero(m);
        if (t < 1.0) v(0) = std::exp(-x * x);
        return v;
      };
    } else if (o.input == "decay") {
      z0 = [n](double x) {
        Vector v = Vector::Zero(n);
        v(0) = std::exp(-x * x);
        return v;
      };
    } else if (o.input != "none") {
      throw ConfigError("--input must be pulse, decay, or none");
    }

    auto tr = simulate(lm.sys, u, sgrid, o.t_final, o.dt, z0, o.stride);
    double audit_passive = energy_audit(tr, false);
    double audit_lossless = energy_audit(tr, true);

    write_text_file(out / "trace.csv", trace_csv(tr));
    for (std::size_t s = 0; s < tr.snapshot_steps.size(); ++s) {
      char tag[16];
      std::snprintf(tag, sizeof tag, "%04zu", s);
      write_text_file(out / "fields" / ("state_" + std::string(tag) + ".csv"),
                      field_csv(sgrid, tr.state_field[s]));
      write_text_file(out / "fields" / ("input_" + std::string(tag) + ".csv"),
                      field_csv(sgrid, tr.input_field[s]));
      write_text_file(out / "fields" / ("output_" + std::string(tag) + ".csv"),
                      field_csv(sgrid, tr.output_field[s]));
    }
    std::vector<PlotSeries> series(2);
    series[0] = {"E(t)", tr.times, tr.energy};
    series[1] = {"supply(t)", tr.times, tr.supply};
    write_text_file(out / "plots" / "energy.svg",
                    svg_line_chart("energy and supply", "t", "value", series));

    ordered_json j{{"model", lm.name},
                   {"length", o.length},
                   {"points", o.points},
                   {"dt", o.dt},
                   {"t_final", o.t_final},
                   {"input", o.input},
                   {"snapshot_steps", tr.snapshot_steps},
                   {"audit_passive", audit_passive},
                   {"audit_lossless", audit_lossless},
                   {"boundary_flagged", tr.boundary_flagged},
                   {"boundary_ratio", tr.boundary_ratio},
                   {"final_energy", tr.energy.back()},
                   {"final_supply", tr.supply.back()}};
    write_text_file(out / "simulation.json", j.dump(2) + "\n");
    return audit_passive <= o.tol ? 0 : 1;
  } catch (const Error& e) {
    emit_error(e.code(), e.what());
    return classify_exit(e);
  } catch (const std::exception& e) {
    emit_error("error", e.what());
    return 2;
  }
}

}  // namespace ltsi
