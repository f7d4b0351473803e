#include <csignal>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "advisor/bridge.hpp"
#include "advisor/error.hpp"
#include "advisor/harness.hpp"
#include "advisor/io.hpp"
#include "advisor/pipeline.hpp"

namespace fs = std::filesystem;
using namespace advisor;

namespace {

constexpr int kUsage = 2;

std::atomic<bool> g_stop{false};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentConfig read_config(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("config file not found: " + path);
  try {
    return load_config(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("bad number \"" + item + "\" in list \"" + text + "\"");
    }
  }
  return out;
}

void print_stats(const SolveStats& s) {
  std::cout << "lower " << s.lower_bound << " upper " << s.upper_bound << " gap " << s.precision
            << " iterations " << s.iterations << " time " << s.wall_time << "s"
            << (s.converged ? " converged" : " budget exhausted") << "\n";
}

int cmd_solve(const std::string& model_path, double precision, double time, std::uint64_t seed,
              const std::string& out, const std::string& q_out) {
  const MomdpModel model = model_from_json(read_json(model_path));
  const auto violations = validate_model(model);
  if (!violations.empty()) {
    throw Error(ErrorCode::InvalidModel, violations.front().table + ": " + violations.front().message);
  }
  SolveParams params;
  params.target_precision = precision;
  params.time_budget = time;
  params.rng_seed = seed;
  const AlphaPolicy policy = solve(model, params);
  write_json(out, policy_to_json(policy));
  if (!q_out.empty()) write_json(q_out, qtable_to_json(extract_q(model, policy)));
  print_stats(policy.stats);
  return 0;
}

struct AugmentArgs {
  std::string config, artifacts, model, q, types = "0,1,2,5,10", prior, out;
  double t_p = 0.0, ask_cost = -1.0;
  bool ask = false, silent = false;
  long ask_limit = -1;
};

int cmd_augment(const AugmentArgs& a) {
  if (!a.config.empty()) {
    ExperimentConfig cfg = read_config(a.config);
    if (!a.artifacts.empty()) cfg.artifacts = a.artifacts;
    if (cfg.artifacts.empty()) throw UsageError("augment needs an artifacts directory (--artifacts or config.artifacts)");
    if (!cfg.agent.typed()) throw UsageError("the config's agent has no typed model to build");
    const Domain domain = cfg.domain.build();
    AugmentSpec spec;
    spec.spec = cfg.agent.suggester_spec();
    spec.per_step = cfg.mode == SuggestionMode::PerStep;
    spec.ask = cfg.mode == SuggestionMode::Ask;
    spec.c_ask = cfg.ask.cost;
    spec.n_ask = cfg.ask.limit;
    const auto r = bootstrap_pipeline(domain.model, spec,
                                      {cfg.solve.base_precision, cfg.solve.base_time, cfg.solve.seed},
                                      {cfg.solve.precision, cfg.solve.time, cfg.solve.seed}, cfg.artifacts);
    std::cout << "base: ";
    print_stats(r.base.policy.stats);
    std::cout << "augmented: ";
    print_stats(r.policy.stats);
    std::cout << "artifacts: " << r.stage2_dir.string() << "\n";
    return 0;
  }
  if (a.model.empty() || a.q.empty() || a.out.empty()) {
    throw UsageError("augment needs --config, or --model, --q and --out");
  }
  const MomdpModel base = model_from_json(read_json(a.model));
  const QTable q = qtable_from_json(read_json(a.q));
  SuggesterSpec spec;
  spec.types = parse_list(a.types);
  spec.t_p = a.t_p;
  spec.prior = a.prior.empty() ? std::vector<double>(spec.types.size(), 1.0 / static_cast<double>(spec.types.size()))
                               : parse_list(a.prior);
  if (a.prior.empty() && spec.types == SuggesterSpec::standard().types) spec.prior = SuggesterSpec::standard().prior;
  const TypedModel typed = augment_types(base, spec, q, !a.ask && !a.silent);
  if (a.ask) {
    std::optional<std::size_t> limit;
    if (a.ask_limit >= 0) limit = static_cast<std::size_t>(a.ask_limit);
    write_json(a.out, model_to_json(augment_ask(typed, a.ask_cost, limit).model));
  } else {
    write_json(a.out, model_to_json(typed.model));
  }
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

int cmd_run(const std::string& config, const std::string& out, const std::string& artifacts) {
  ExperimentConfig cfg = read_config(config);
  const fs::path dir = out.empty() ? fs::path(cfg.output.empty() ? "runs" : cfg.output) : fs::path(out);
  if (!artifacts.empty()) cfg.artifacts = artifacts;
  if (cfg.artifacts.empty()) cfg.artifacts = (dir / "artifacts").string();
  const auto exp = prepare_experiment(cfg);
  const auto records = run_experiment(exp);
  write_text(dir / "records.jsonl", records_to_jsonl(records));
  write_text(dir / "summary.csv", summary_to_csv(summarize(records)));
  write_json(dir / "config.json", config_to_json(cfg));
  std::cout << "wrote " << records.size() << " records to " << (dir / "records.jsonl").string() << "\n";
  for (const auto& s : summarize(records)) {
    if (!s.trial_index) std::cout << s.metric << " " << s.mean << " +- " << s.ci95_half_width << "\n";
  }
  return 0;
}

int cmd_summarize(const std::string& run, const std::string& out) {
  fs::path path = run;
  if (fs::is_directory(path)) path /= "records.jsonl";
  if (!fs::exists(path)) throw UsageError("records not found: " + path.string());
  const std::string csv = summary_to_csv(summarize(records_from_jsonl(read_text(path))));
  if (out.empty()) std::cout << csv;
  else write_text(out, csv);
  return 0;
}

int cmd_serve(const std::string& config, const std::string& listen, double timeout,
              const std::string& view, std::size_t max_sessions, const std::string& records) {
  const ExperimentConfig cfg = read_config(config);
  ServeOptions opts;
  std::tie(opts.host, opts.port) = parse_listen(listen);
  opts.session.deadline = timeout;
  if (view == "full") opts.session.view = SuggesterView::Full;
  else if (view == "wall-band") opts.session.view = SuggesterView::WallBand;
  else if (view == "none") opts.session.view = SuggesterView::None;
  else throw UsageError("--view must be full, wall-band or none");
  opts.max_sessions = max_sessions;
  opts.records_path = records;
  const auto exp = prepare_experiment(cfg);
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  serve(exp, opts, g_stop, [&](int port) {
    std::cout << "listening on " << opts.host << ":" << port << std::endl;
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planning and simulation with suggesters of unknown reliability"};
  app.require_subcommand(1);

  std::string model, out, q_out;
  double precision = 0.01, time = 300.0;
  std::uint64_t seed = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a model JSON into an alpha-vector policy");
  solve_cmd->add_option("--model", model, "Model JSON")->required();
  solve_cmd->add_option("--precision", precision, "Target bound gap at the initial belief");
  solve_cmd->add_option("--time", time, "Time budget in seconds");
  solve_cmd->add_option("--seed", seed, "Sampler seed");
  solve_cmd->add_option("--out", out, "Policy JSON to write")->required();
  solve_cmd->add_option("--q", q_out, "Also write the extracted Q table");

  AugmentArgs aug;
  auto* aug_cmd = app.add_subcommand("augment", "Build typed or ask models (bootstrap pipeline)");
  aug_cmd->add_option("--config", aug.config, "Experiment config: run the two-stage pipeline");
  aug_cmd->add_option("--artifacts", aug.artifacts, "Artifact directory for --config");
  aug_cmd->add_option("--model", aug.model, "Base model JSON");
  aug_cmd->add_option("--q", aug.q, "Base Q table JSON");
  aug_cmd->add_option("--types", aug.types, "Comma-separated rationality coefficients");
  aug_cmd->add_option("--t-p", aug.t_p, "Type switch probability");
  aug_cmd->add_option("--prior", aug.prior, "Comma-separated prior over types");
  aug_cmd->add_flag("--silent", aug.silent, "No per-step suggestion channel");
  aug_cmd->add_flag("--ask", aug.ask, "Add the ask action");
  aug_cmd->add_option("--ask-cost", aug.ask_cost, "Ask cost (<= 0)");
  aug_cmd->add_option("--ask-limit", aug.ask_limit, "Asks available (omit for unlimited)");
  aug_cmd->add_option("--out", aug.out, "Model JSON to write");

  std::string config, run_out, artifacts;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment");
  run_cmd->add_option("--config", config, "Experiment config JSON")->required();
  run_cmd->add_option("--out", run_out, "Run directory");
  run_cmd->add_option("--artifacts", artifacts, "Artifact directory (default <out>/artifacts)");

  std::string run_dir, summary_out;
  auto* sum_cmd = app.add_subcommand("summarize", "Summarize a run directory as CSV");
  sum_cmd->add_option("run", run_dir, "Run directory or records.jsonl")->required();
  sum_cmd->add_option("--out", summary_out, "CSV path (default stdout)");

  std::string listen = ":8707", view = "full", records_path;
  double timeout = 30.0;
  std::size_t max_sessions = 0;
  auto* serve_cmd = app.add_subcommand("serve", "Serve live sessions with a human suggester");
  serve_cmd->add_option("--config", config, "Experiment config JSON")->required();
  serve_cmd->add_option("--listen", listen, "Address, e.g. :8707 or 127.0.0.1:8707");
  serve_cmd->add_option("--timeout", timeout, "Seconds before an unanswered request becomes Absent");
  serve_cmd->add_option("--view", view, "What the client sees: full, wall-band or none");
  serve_cmd->add_option("--max-sessions", max_sessions, "Exit after this many sessions (0: never)");
  serve_cmd->add_option("--records", records_path, "Append trial records to this JSON-lines file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(model, precision, time, seed, out, q_out);
    if (*aug_cmd) return cmd_augment(aug);
    if (*run_cmd) return cmd_run(config, run_out, artifacts);
    if (*sum_cmd) return cmd_summarize(run_dir, summary_out);
    if (*serve_cmd) return cmd_serve(config, listen, timeout, view, max_sessions, records_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? kUsage : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
