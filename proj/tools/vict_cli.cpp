#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "vict/bench.hpp"
#include "vict/checkpoint.hpp"
#include "vict/digest.hpp"
#include "vict/gradcheck.hpp"
#include "vict/training.hpp"

using namespace vict;

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = std::min(s.find(',', start), s.size());
    if (end > start) out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  if (out.empty()) throw ValueError("empty list '" + s + "'");
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

struct BenchFlags {
  std::string checkpoint;
  std::string task = "denoise";
  std::string corruption = "all";
  std::string severity = "5";
  std::string setting = "both";
  std::string method = "both";
  std::size_t steps = VictConfig::kPaperSteps;
  double lr = VictConfig::kToyLr;
  std::string tune = "encoder";
  bool detach = false;
  std::size_t num_samples = 50;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string out;
  std::string csv;
  std::string dump_canvases;
  std::string trace_loss;

  void add_to(CLI::App& app, bool corrupted) {
    app.add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    app.add_option("--task", task, "denoise|derain|lowlight|segmentation|depth");
    if (corrupted) {
      app.add_option("--corruption", corruption, "Comma list of corruption names or abbreviations, or 'all'");
      app.add_option("--severity", severity, "Comma list of severities in [1,5]");
      app.add_option("--setting", setting, "zero|one|both");
    }
    app.add_option("--method", method, "frozen|vict|both");
    app.add_option("--steps", steps, "Test-time tuning steps K");
    app.add_option("--lr", lr, "Test-time tuning learning rate");
    app.add_option("--tune", tune, "Tuned parameter group: encoder|all");
    app.add_flag("--detach", detach, "Stop gradients at the first-pass prediction");
    app.add_option("--num-samples", num_samples, "Test samples per cell");
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--threads", threads, "Worker count (0: VICT_THREADS or hardware)");
    app.add_option("--out", out, "JSON report path");
    app.add_option("--csv", csv, "CSV report path");
    app.add_option("--dump-canvases", dump_canvases, "Directory for PPM canvas dumps");
    app.add_option("--trace-loss", trace_loss, "CSV path for per-sample loss traces");
  }

  BenchConfig config() const {
    BenchConfig c;
    c.checkpoint = checkpoint;
    c.task = parse_task(task);
    if (corruption != "all") {
      c.corruptions.clear();
      for (const auto& k : split(corruption)) c.corruptions.push_back(parse_corruption(k));
    }
    c.severities.clear();
    for (const auto& s : split(severity)) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size()) throw ValueError("bad severity '" + s + "'");
      c.severities.push_back(v);
    }
    if (setting == "both") {
      c.settings = {Setting::ZeroShot, Setting::OneShot};
    } else {
      c.settings = {parse_setting(setting)};
    }
    if (method == "both") {
      c.methods = {Method::Frozen, Method::Vict};
    } else {
      c.methods = {parse_method(method)};
    }
    c.vict.steps = steps;
    c.vict.lr = lr;
    c.vict.selector = parse_selector(tune);
    c.vict.detach = detach;
    c.num_samples = num_samples;
    c.seed = seed;
    c.threads = threads;
    if (!dump_canvases.empty()) c.dump_canvases = dump_canvases;
    if (!trace_loss.empty()) c.trace_loss = trace_loss;
    c.validate();
    return c;
  }

  template <class Report>
  void emit(const Report& report) const {
    std::cout << report.to_text();
    if (!out.empty()) write_file(out, report.to_json());
    if (!csv.empty()) write_file(csv, report.to_csv());
  }
};

Checkpoint load_for(const BenchConfig& c) {
  if (!std::filesystem::exists(c.checkpoint)) {
    throw Error("checkpoint '" + c.checkpoint.string() + "' does not exist");
  }
  return load_checkpoint(c.checkpoint);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-time visual in-context tuning on a toy inpainting model"};
  app.require_subcommand(1);

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "Masked-cell inpainting pre-training on clean task pairs");
  std::string task_mix = "all";
  std::string exclude_task;
  PretrainConfig pcfg;
  std::string pre_out;
  std::string pre_trace;
  std::size_t log_every = 250;
  pre->add_option("--task-mix", task_mix, "Comma list of tasks, or 'all'");
  pre->add_option("--exclude-task", exclude_task, "Task held out of pre-training");
  pre->add_option("--steps", pcfg.steps, "Optimizer steps");
  pre->add_option("--lr", pcfg.lr, "AdamW learning rate");
  pre->add_option("--batch-size", pcfg.batch_size, "Pairs per step");
  pre->add_option("--flip-fraction", pcfg.flip_fraction, "Share of draws that mask the top-right cell");
  pre->add_option("--seed", pcfg.seed, "Seed for init and sampling");
  pre->add_option("--out", pre_out, "Checkpoint path")->required();
  pre->add_option("--trace", pre_trace, "CSV path for the per-step loss");
  pre->add_option("--log-every", log_every, "Progress interval in steps (0: silent)");

  // bench, clean-eval, fewshot
  auto* bench = app.add_subcommand("bench", "Frozen vs tuned inference over corrupted test samples");
  BenchFlags bflags;
  bflags.add_to(*bench, true);

  auto* clean = app.add_subcommand("clean-eval", "Frozen vs tuned inference on uncorrupted test samples");
  BenchFlags cflags;
  cflags.add_to(*clean, false);

  auto* fewshot = app.add_subcommand("fewshot", "Few-shot fine-tuning baseline over shot counts");
  BenchFlags fflags;
  fflags.method = "frozen";
  fflags.add_to(*fewshot, true);
  std::string shots = "1,2,4,8,16,32,64";
  std::string fs_seeds = "0,1,2";
  std::size_t ft_steps = 200;
  double ft_lr = 1e-4;
  fewshot->add_option("--shots", shots, "Comma list of shot counts");
  fewshot->add_option("--ft-seeds", fs_seeds, "Comma list of fine-tuning seeds");
  fewshot->add_option("--ft-steps", ft_steps, "Fine-tuning steps per model");
  fewshot->add_option("--ft-lr", ft_lr, "Fine-tuning learning rate");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the cycle loss gradient (double precision)");
  GradcheckConfig gcfg;
  std::string gc_tune = "encoder";
  gc->add_option("--seed", gcfg.seed, "Seed for init, jitter, and samples");
  gc->add_option("--tune", gc_tune, "Checked parameter group: encoder|all");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print checkpoint metadata");
  std::string inspect_path;
  inspect->add_option("checkpoint", inspect_path, "Checkpoint file")->required();

  // probe
  auto* probe = app.add_subcommand("probe", "Corruption severity monotonicity probe (CSV)");
  std::string severity_table;
  std::string probe_out;
  probe->add_option("--table", severity_table, "Severity table file (default: built-in)");
  probe->add_option("--out", probe_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*pre) {
      if (task_mix != "all") {
        pcfg.task_mix.clear();
        for (const auto& t : split(task_mix)) pcfg.task_mix.push_back(parse_task(t));
      }
      if (!exclude_task.empty()) {
        const TaskKind held = parse_task(exclude_task);
        pcfg.held_out = held;
        std::erase(pcfg.task_mix, held);
      }
      const ModelConfig model;
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = pretrain(model, pcfg, [&](std::size_t step, double loss) {
        if (log_every && step % log_every == 0) std::fprintf(stderr, "step %zu loss %.6f\n", step, loss);
      });
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      save_checkpoint(result.params, model, pre_out);
      if (!pre_trace.empty()) {
        std::ostringstream os;
        os << "step,loss\n" << std::setprecision(17);
        for (std::size_t s = 0; s < result.loss_trace.size(); ++s) os << s << ',' << result.loss_trace[s] << '\n';
        write_file(pre_trace, os.str());
      }
      const auto& tr = result.loss_trace;
      std::printf("trained %zu steps in %.1f s, digest %s\n", tr.size(), secs, params_digest(result.params).c_str());
      if (tr.size() >= 200) {
        const double lead = window_mean(tr, 0, 100);
        const double trail = window_mean(tr, tr.size() - 100, 100);
        std::printf("leading-100 mean %.6f, trailing-100 mean %.6f, ratio %.3f\n", lead, trail, trail / lead);
      }
      for (auto t : kAllTasks) {
        std::printf("%s draws %zu\n", std::string(task_name(t)).c_str(), result.task_draws[static_cast<std::size_t>(t)]);
      }
    } else if (*bench) {
      const BenchConfig c = bflags.config();
      bflags.emit(run_bench(c, load_for(c)));
    } else if (*clean) {
      const BenchConfig c = cflags.config();
      cflags.emit(run_clean_eval(c, load_for(c)));
    } else if (*fewshot) {
      FewShotSweepConfig f;
      f.bench = fflags.config();
      f.shots.clear();
      for (const auto& s : split(shots)) f.shots.push_back(std::stoul(s));
      f.seeds.clear();
      for (const auto& s : split(fs_seeds)) f.seeds.push_back(std::stoull(s));
      f.steps = ft_steps;
      f.lr = ft_lr;
      fflags.emit(run_fewshot(f, load_for(f.bench)));
    } else if (*gc) {
      gcfg.selector = parse_selector(gc_tune);
      const auto report = gradcheck_cycle_loss(gcfg);
      std::cout << report.to_text();
      if (!report.passed()) {
        std::fprintf(stderr, "error: gradient check failed, max relative error %.3e\n", report.max_rel_error());
        return 2;
      }
    } else if (*inspect) {
      const Checkpoint ck = load_checkpoint(inspect_path);
      std::size_t total = 0;
      for (const auto& e : ck.params.entries()) total += e.value.numel();
      std::cout << "format VICTCKPT version " << kCheckpointVersion << '\n'
                << ck.config.to_kv() << "tensors " << ck.params.size() << '\n'
                << "parameters " << total << '\n'
                << "digest " << params_digest(ck.params) << '\n';
      for (const auto& e : ck.params.entries()) {
        std::cout << "  " << e.name << ' ' << group_name(e.group) << " [";
        for (std::size_t i = 0; i < e.value.rank(); ++i) std::cout << (i ? "," : "") << e.value.shape()[i];
        std::cout << "]\n";
      }
    } else if (*probe) {
      const SeverityTable table = severity_table.empty() ? SeverityTable::defaults() : SeverityTable::load(severity_table);
      const auto csv = probe_csv(probe_monotonicity(table));
      if (probe_out.empty()) {
        std::cout << csv;
      } else {
        write_file(probe_out, csv);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
