#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sdmm/cmat.hpp"
#include "sdmm/experiment.hpp"
#include "sdmm/net.hpp"
#include "sdmm/runtime.hpp"
#include "sdmm/security.hpp"

namespace {

using namespace sdmm;

struct SchemeCliOptions {
  std::string scheme = "matdot";
  std::size_t p = 1;
  std::size_t m = 1;
  std::size_t n_split = 1;
  std::size_t x = 1;
  std::size_t n_servers = 0;

  SchemeParams to_params() const {
    if (scheme == "matdot") {
      return MatDotParams{p, x, n_servers};
    }
    if (scheme == "gasp") {
      return GaspParams{m, n_split, x, n_servers};
    }
    throw InvalidArgument("unknown scheme '" + scheme + "' (expected matdot or gasp)");
  }
};

void add_scheme_options(CLI::App* cmd, SchemeCliOptions& opts) {
  cmd->add_option("--scheme", opts.scheme, "matdot or gasp")->required();
  cmd->add_option("--p", opts.p, "MatDot partition count");
  cmd->add_option("--m", opts.m, "GASP row-partition count");
  cmd->add_option("--n-split", opts.n_split, "GASP column-partition count");
  cmd->add_option("--x", opts.x, "collusion tolerance X")->required();
  cmd->add_option("--n", opts.n_servers, "number of servers N")->required();
}

std::uint64_t seed_with_env(std::uint64_t seed) {
  if (const char* env = std::getenv("SDMM_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return seed;
}

std::optional<SearchStrategy> parse_strategy(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text == "exhaustive") return SearchStrategy::kExhaustive;
  if (text == "consecutive") return SearchStrategy::kConsecutive;
  throw InvalidArgument("unknown strategy '" + text + "'");
}

int cmd_multiply(const SchemeCliOptions& scheme_opts, double delta_bits, double delta_rel,
                 double sigma2_override, const std::string& a_path, const std::string& b_path,
                 const std::string& out_path, const std::string& workers, bool simulate,
                 std::uint64_t seed, double input_var, bool complex_inputs,
                 const std::string& strategy_text, bool decode_all) {
  const SchemeParams params = scheme_opts.to_params();
  validate(params);

  const ComplexMatrix a = load_cmat(a_path);
  const ComplexMatrix b = load_cmat(b_path);
  const Dims dims{a.rows(), a.cols(), b.cols()};

  NoiseSpec noise{1.0, input_var, input_var};
  double resolved_delta_bits = delta_bits;
  if (sigma2_override > 0.0) {
    noise.sigma2 = sigma2_override;
  } else {
    if (delta_rel > 0.0) {
      resolved_delta_bits = delta_rel * input_entropy_proxy_bits(dims, complex_inputs, input_var);
    }
    if (!(resolved_delta_bits > 0.0)) {
      throw InvalidArgument("one of --delta-bits, --delta-rel or --sigma2 is required");
    }
    const EvaluationPoints points = EvaluationPoints::roots_of_unity(servers_of(params));
    const auto strategy = parse_strategy(strategy_text)
                              .value_or(default_strategy(servers_of(params),
                                                         collusion_of(params)));
    noise = calibrate_sigma2(resolved_delta_bits, dims, params, points, input_var, input_var,
                             strategy);
  }

  seed = seed_with_env(seed);
  JobResult result;
  if (!workers.empty()) {
    std::vector<Endpoint> endpoints;
    std::stringstream ss(workers);
    std::string item;
    while (std::getline(ss, item, ',')) {
      endpoints.push_back(parse_endpoint(item));
    }
    NetworkJobOptions options;
    options.decode_policy = decode_all ? DecodePolicy::kAllResponses : DecodePolicy::kFirstK;
    result = run_networked_job(a, b, params, noise, endpoints, seed, options);
  } else {
    if (!simulate) {
      std::cerr << "note: no --workers given, running the in-process simulation\n";
    }
    JobOptions options;
    options.decode_policy = decode_all ? DecodePolicy::kAllResponses : DecodePolicy::kFirstK;
    result = run_job(a, b, params, noise, StragglerModel{}, seed, options);
  }

  save_cmat(out_path, result.product);

  nlohmann::json j;
  j["scheme"] = scheme_name(scheme_of(params));
  j["sigma2"] = noise.sigma2;
  if (resolved_delta_bits > 0.0) j["delta_bits"] = resolved_delta_bits;
  j["seed"] = seed;
  j["responders"] = result.record.responders;
  j["abs_error_vs_local"] = result.record.abs_error;
  j["rel_error_vs_local"] = result.record.rel_error;
  j["decode_condition"] = result.record.decode_condition;
  j["out"] = out_path;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_calibrate(const SchemeCliOptions& scheme_opts, const Dims& dims, double delta_bits,
                  double delta_rel, double input_var, bool complex_inputs,
                  const std::string& strategy_text) {
  const SchemeParams params = scheme_opts.to_params();
  validate(params);
  double resolved = delta_bits;
  if (delta_rel > 0.0) {
    resolved = delta_rel * input_entropy_proxy_bits(dims, complex_inputs, input_var);
  }
  if (!(resolved > 0.0)) {
    throw InvalidArgument("one of --delta-bits or --delta-rel is required");
  }
  const EvaluationPoints points = EvaluationPoints::roots_of_unity(servers_of(params));
  const LeakageReport report = make_leakage_report(resolved, dims, params, points, input_var,
                                                   input_var, parse_strategy(strategy_text));
  std::cout << leakage_report_to_json(report) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  std::ifstream in(config_path);
  if (!in) {
    throw IoError("cannot open " + config_path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig config = config_from_json(buffer.str());
  apply_env_overrides(config);

  std::filesystem::create_directories(out_dir);
  const SweepTable table = run_sweep(config);
  emit_csv(table, (std::filesystem::path(out_dir) / "sweep.csv").string());
  emit_json(table, (std::filesystem::path(out_dir) / "sweep.json").string(),
            config.keep_trials);
  std::cout << "wrote " << out_dir << "/sweep.csv and sweep.json (" << table.cells.size()
            << " cells)\n";
  return 0;
}

void write_plot_script(const std::filesystem::path& path, const std::string& data_csv,
                       int figure) {
  std::ofstream gp(path);
  if (!gp) {
    throw IoError("cannot open " + path.string());
  }
  gp << "# gnuplot template; render with: gnuplot " << path.filename().string() << "\n"
     << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set xlabel 'relative leakage'\n"
     << "set ylabel 'mean Frobenius error'\n"
     << "set key left top\n"
     << "set grid\n";
  if (figure == 1) {
    gp << "# one curve per (scheme, partition, X); column 4 selects the curve\n"
       << "plot for [series in system(\"cut -d, -f1 " << data_csv
       << " | tail -n +2 | sort -u\")] \\\n"
       << "  '" << data_csv
       << "' using 5:6 every ::0 with linespoints title series\n";
  } else {
    gp << "# one curve per (scheme, stragglers)\n"
       << "plot for [series in system(\"cut -d, -f1 " << data_csv
       << " | tail -n +2 | sort -u\")] \\\n"
       << "  '" << data_csv
       << "' using 5:6 every ::0 with linespoints title series\n";
  }
}

int cmd_figures(const std::string& results_dir, int figure) {
  const std::filesystem::path csv_path = std::filesystem::path(results_dir) / "sweep.csv";
  std::ifstream in(csv_path);
  if (!in) {
    throw IoError("cannot open " + csv_path.string() + " (run `sdmm sweep` first)");
  }
  const std::vector<CellStats> cells = parse_csv(in);

  const std::string csv_name = "figure" + std::to_string(figure) + ".csv";
  const std::filesystem::path out_csv = std::filesystem::path(results_dir) / csv_name;
  std::ofstream out(out_csv);
  if (!out) {
    throw IoError("cannot open " + out_csv.string());
  }

  out << "series,scheme,partition,X,delta_relative,mean_err,std_err,stragglers,mean_cond\n";
  std::size_t rows = 0;
  for (const CellStats& cs : cells) {
    // Figure 1 compares collusion levels without stragglers; figure 2
    // compares straggler counts.
    if (figure == 1 && cs.stragglers != 0) continue;
    std::string series = scheme_name(cs.scheme) + "-" + std::to_string(cs.p_or_mn) + "-X" +
                         std::to_string(cs.x);
    if (figure == 2) {
      series += "-s" + std::to_string(cs.stragglers);
    }
    out << series << ',' << scheme_name(cs.scheme) << ',' << cs.p_or_mn << ',' << cs.x << ','
        << cs.delta_rel << ',' << cs.mean_err << ',' << cs.std_err << ',' << cs.stragglers
        << ',' << cs.mean_cond << "\n";
    ++rows;
  }
  if (rows == 0) {
    throw InvalidArgument("no cells in " + csv_path.string() + " match figure " +
                          std::to_string(figure));
  }

  const std::filesystem::path gp_path =
      std::filesystem::path(results_dir) / ("figure" + std::to_string(figure) + ".gp");
  write_plot_script(gp_path, csv_name, figure);
  std::cout << "wrote " << out_csv.string() << " and " << gp_path.string() << " (" << rows
            << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analog secure distributed matrix multiplication over the complex numbers"};
  app.require_subcommand(1);

  // multiply
  SchemeCliOptions mul_scheme;
  double mul_delta_bits = 0.0, mul_delta_rel = 0.0, mul_sigma2 = 0.0, mul_input_var = 1.0;
  std::string mul_a, mul_b, mul_out, mul_workers, mul_strategy;
  bool mul_simulate = false, mul_complex = false, mul_decode_all = false;
  std::uint64_t mul_seed = 0;
  auto* multiply = app.add_subcommand("multiply", "encode, distribute, decode one product");
  add_scheme_options(multiply, mul_scheme);
  multiply->add_option("--delta-bits", mul_delta_bits, "leakage budget in bits");
  multiply->add_option("--delta-rel", mul_delta_rel, "leakage budget relative to input entropy");
  multiply->add_option("--sigma2", mul_sigma2, "mask variance override (skips calibration)");
  multiply->add_option("--a", mul_a, "path to A (CMAT)")->required();
  multiply->add_option("--b", mul_b, "path to B (CMAT)")->required();
  multiply->add_option("--out", mul_out, "path for the product (CMAT)")->required();
  multiply->add_option("--workers", mul_workers, "comma-separated host:port list (one per server)");
  multiply->add_flag("--simulate", mul_simulate, "run the in-process simulation");
  multiply->add_option("--seed", mul_seed, "job seed (SDMM_SEED overrides)");
  multiply->add_option("--input-var", mul_input_var, "declared per-entry input variance");
  multiply->add_flag("--complex-inputs", mul_complex, "inputs declared circular complex Gaussian");
  multiply->add_option("--strategy", mul_strategy, "exhaustive or consecutive");
  multiply->add_flag("--decode-all", mul_decode_all,
                     "decode from every response instead of the fastest K");

  // worker
  std::string worker_listen;
  auto* worker = app.add_subcommand("worker", "serve share-multiplication tasks");
  worker->add_option("--listen", worker_listen, "host:port to bind")->required();

  // calibrate
  SchemeCliOptions cal_scheme;
  Dims cal_dims{36, 36, 36};
  double cal_delta_bits = 0.0, cal_delta_rel = 0.0, cal_input_var = 1.0;
  bool cal_complex = false;
  std::string cal_strategy;
  auto* calibrate = app.add_subcommand("calibrate", "print a leakage calibration report");
  add_scheme_options(calibrate, cal_scheme);
  calibrate->add_option("--t", cal_dims.t, "rows of A");
  calibrate->add_option("--s", cal_dims.s, "inner dimension");
  calibrate->add_option("--r", cal_dims.r, "columns of B");
  calibrate->add_option("--delta-bits", cal_delta_bits, "leakage budget in bits");
  calibrate->add_option("--delta-rel", cal_delta_rel, "budget relative to input entropy");
  calibrate->add_option("--input-var", cal_input_var, "declared per-entry input variance");
  calibrate->add_flag("--complex-inputs", cal_complex, "inputs declared circular complex Gaussian");
  calibrate->add_option("--strategy", cal_strategy, "exhaustive or consecutive");

  // sweep
  std::string sweep_config, sweep_out = "results";
  auto* sweep = app.add_subcommand("sweep", "run a trade-off experiment sweep");
  sweep->add_option("--config", sweep_config, "sweep JSON config")->required();
  sweep->add_option("--out-dir", sweep_out, "output directory");

  // figures
  std::string figures_results = "results";
  int figures_figure = 1;
  auto* figures = app.add_subcommand("figures", "emit per-figure CSV + plot script");
  figures->add_option("--results", figures_results, "directory with sweep.csv");
  figures->add_option("--figure", figures_figure, "1 (collusion) or 2 (stragglers)")
      ->check(CLI::Range(1, 2));

  CLI11_PARSE(app, argc, argv);

  try {
    if (multiply->parsed()) {
      return cmd_multiply(mul_scheme, mul_delta_bits, mul_delta_rel, mul_sigma2, mul_a, mul_b,
                          mul_out, mul_workers, mul_simulate, mul_seed, mul_input_var,
                          mul_complex, mul_strategy, mul_decode_all);
    }
    if (worker->parsed()) {
      worker_serve(parse_endpoint(worker_listen));
      return 0;
    }
    if (calibrate->parsed()) {
      return cmd_calibrate(cal_scheme, cal_dims, cal_delta_bits, cal_delta_rel, cal_input_var,
                           cal_complex, cal_strategy);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_config, sweep_out);
    }
    if (figures->parsed()) {
      return cmd_figures(figures_results, figures_figure);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
