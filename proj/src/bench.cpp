#include "vict/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vict/digest.hpp"
#include "vict/rng.hpp"
#include "vict/training.hpp"

namespace vict {

using nlohmann::ordered_json;

std::string_view method_name(Method m) { return m == Method::Frozen ? "frozen" : "vict"; }

Method parse_method(std::string_view s) {
  if (s == "frozen") return Method::Frozen;
  if (s == "vict") return Method::Vict;
  throw ValueError("unknown method '" + std::string(s) + "' (expected frozen|vict)");
}

void BenchConfig::validate() const {
  if (corruptions.empty()) throw ValueError("bench: no corruptions selected");
  if (severities.empty()) throw ValueError("bench: no severities selected");
  if (settings.empty()) throw ValueError("bench: no settings selected");
  if (methods.empty()) throw ValueError("bench: no methods selected");
  if (num_samples == 0) throw ValueError("bench: num_samples must be at least 1");
  for (int s : severities) {
    if (s < 1 || s > kMaxSeverity) throw ValueError("bench: severity must be in [1,5], got " + std::to_string(s));
  }
  vict.validate();
}

std::size_t resolve_threads(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("VICT_THREADS"); env && *env) {
      try {
        n = std::stoul(env);
      } catch (const std::exception&) {
        throw ValueError(std::string("VICT_THREADS is not a number: '") + env + "'");
      }
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

namespace {

// Runs fn(i) for i in [0, count) on `threads` workers. Results must be
// written by index. The first exception stops the pool and is rethrown.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct Cell {
  std::optional<CorruptionKind> corruption;  // empty for clean
  int severity;
  Setting setting;
  Method method;
};

struct Outcome {
  std::optional<double> value;
  std::vector<double> trace;
};

std::string cell_key(const Cell& c) {
  return c.corruption ? std::string(corruption_name(*c.corruption)) : std::string(kCleanKey);
}

std::uint64_t task_id(TaskKind t) { return static_cast<std::uint64_t>(t); }

TaskSample test_sample(const BenchConfig& cfg, std::size_t i, std::size_t size) {
  return generate(cfg.task, hash_key({cfg.seed, 0x7e57ULL, task_id(cfg.task), i}), size);
}

std::uint64_t prompt_seed(const BenchConfig& cfg, std::size_t i) {
  return hash_key({cfg.seed, 0x9209ULL, task_id(cfg.task), i});
}

std::uint64_t corruption_seed(const BenchConfig& cfg, std::size_t i) { return hash_key({cfg.seed, 0xc022ULL, i}); }

void dump_pair(const std::filesystem::path& dir, const std::string& stem, std::size_t step, const Image& canvas,
               const Image& recon) {
  write_ppm(canvas, dir / (stem + "_step" + std::to_string(step) + "_canvas.ppm"));
  write_ppm(recon, dir / (stem + "_step" + std::to_string(step) + "_output.ppm"));
}

Outcome run_one(const BenchConfig& cfg, const Checkpoint& ck, const Cell& cell, std::size_t i) {
  const std::size_t size = ck.config.cell_size;
  const TaskSample sample = test_sample(cfg, i, size);
  std::optional<CorruptionSpec> spec;
  Image x_t = sample.input;
  if (cell.corruption) {
    spec = CorruptionSpec{*cell.corruption, cell.severity, corruption_seed(cfg, i)};
    x_t = apply_corruption(sample.input, *spec);
  }
  const Setting prompt_setting = cell.corruption ? cell.setting : Setting::ZeroShot;
  const PromptSet prompts = select_prompt(cfg.task, prompt_setting, spec, prompt_seed(cfg, i), size);
  const PromptPair& prompt = prompts.first();

  const bool dump = cfg.dump_canvases && i == 0;
  const std::string stem = cell_key(cell) + "_s" + std::to_string(cell.severity) + "_" +
                           std::string(setting_name(cell.setting)) + "_" + std::string(method_name(cell.method));
  Outcome out;
  Image pred;
  if (cell.method == Method::Frozen) {
    pred = frozen_predict(ck.config, ck.params, prompt, x_t);
    if (dump) {
      const auto [canvas, mask] = assemble_inference(prompt.x, prompt.y, x_t);
      dump_pair(*cfg.dump_canvases, stem, 0, canvas.pixels(), reconstruct(ck.config, ck.params, canvas, mask));
    }
  } else {
    AdaptationHooks hooks;
    if (dump) {
      hooks.on_canvas = [&](std::size_t step, const Image& canvas, const Image& recon) {
        dump_pair(*cfg.dump_canvases, stem, step, canvas, recon);
      };
    }
    AdaptationResult r = adapt_and_predict(ck.config, ck.params, prompt, x_t, cfg.vict, hooks);
    pred = std::move(r.y_t_hat);
    out.trace = std::move(r.loss_trace);
  }
  const double v = evaluate(cfg.task, pred, sample.target).value;
  if (!std::isfinite(v)) throw NumericError("non-finite metric");
  out.value = v;
  return out;
}

MetricReport run_cells(const BenchConfig& cfg, const Checkpoint& ck, const std::vector<Cell>& cells) {
  cfg.validate();
  ck.config.validate();
  if (cfg.dump_canvases) std::filesystem::create_directories(*cfg.dump_canvases);

  const std::size_t n = cfg.num_samples;
  std::vector<Outcome> outcomes(cells.size() * n);
  parallel_for(outcomes.size(), resolve_threads(cfg.threads), [&](std::size_t job) {
    try {
      outcomes[job] = run_one(cfg, ck, cells[job / n], job % n);
    } catch (const std::exception&) {
      outcomes[job] = Outcome{};
    }
  });

  MetricReport rep;
  rep.task = cfg.task;
  rep.metric = task_metric(cfg.task);
  rep.seed = cfg.seed;
  rep.num_samples = n;
  rep.vict = cfg.vict;
  rep.checkpoint_digest = params_digest(ck.params);

  for (std::size_t c = 0; c < cells.size(); ++c) {
    ReportRow row{cells[c].method, cells[c].setting, cell_key(cells[c]), cells[c].severity, 0, 0, 0, 0, {}};
    std::vector<double> ok;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& o = outcomes[c * n + i];
      row.samples.push_back(o.value);
      if (o.value) ok.push_back(*o.value);
    }
    row.n = ok.size();
    row.failures = n - ok.size();
    if (!ok.empty()) {
      double s = 0;
      for (double v : ok) s += v;
      row.mean = s / static_cast<double>(ok.size());
      if (ok.size() > 1) {
        double ss = 0;
        for (double v : ok) ss += (v - row.mean) * (v - row.mean);
        row.std = std::sqrt(ss / static_cast<double>(ok.size() - 1));
      }
    }
    rep.rows.push_back(std::move(row));
  }

  // Avg rows over corruptions, per (method, setting, severity).
  const bool clean = !cells.empty() && !cells.front().corruption;
  if (!clean) {
    for (int sev : cfg.severities) {
      for (Setting st : cfg.settings) {
        for (Method m : cfg.methods) {
          std::vector<double> means;
          std::size_t failures = 0;
          for (const auto& r : rep.rows) {
            if (r.method != m || r.setting != st || r.severity != sev) continue;
            failures += r.failures;
            if (r.n > 0) means.push_back(r.mean);
          }
          ReportRow avg{m, st, std::string(kAvgKey), sev, 0, 0, means.size(), failures, {}};
          if (!means.empty()) {
            double s = 0;
            for (double v : means) s += v;
            avg.mean = s / static_cast<double>(means.size());
            if (means.size() > 1) {
              double ss = 0;
              for (double v : means) ss += (v - avg.mean) * (v - avg.mean);
              avg.std = std::sqrt(ss / static_cast<double>(means.size() - 1));
            }
          }
          rep.rows.push_back(std::move(avg));
        }
      }
    }
  }

  if (cfg.trace_loss) {
    std::ofstream csv(*cfg.trace_loss);
    if (!csv) throw Error("cannot write loss trace '" + cfg.trace_loss->string() + "'");
    csv << "method,setting,corruption,severity,sample,step,loss\n" << std::setprecision(17);
    for (std::size_t job = 0; job < outcomes.size(); ++job) {
      const Cell& cell = cells[job / n];
      for (std::size_t s = 0; s < outcomes[job].trace.size(); ++s) {
        csv << method_name(cell.method) << ',' << setting_name(cell.setting) << ',' << cell_key(cell) << ','
            << cell.severity << ',' << job % n << ',' << s << ',' << outcomes[job].trace[s] << '\n';
      }
    }
  }
  return rep;
}

ordered_json vict_json(const VictConfig& v) {
  return ordered_json{{"steps", v.steps},
                      {"lr", v.lr},
                      {"selector", selector_name(v.selector)},
                      {"beta", v.beta},
                      {"detach", v.detach}};
}

std::string fixed(double v, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

int metric_precision(MetricKind m) { return m == MetricKind::PSNR ? 2 : 4; }

}  // namespace

const ReportRow* MetricReport::find(Method method, Setting setting, std::string_view corruption, int severity) const {
  for (const auto& r : rows) {
    if (r.method == method && r.setting == setting && r.corruption == corruption && r.severity == severity) return &r;
  }
  return nullptr;
}

std::size_t MetricReport::total_failures() const {
  std::size_t f = 0;
  for (const auto& r : rows) {
    if (r.corruption != kAvgKey) f += r.failures;
  }
  return f;
}

std::string MetricReport::to_json() const {
  ordered_json j;
  j["task"] = task_name(task);
  j["metric"] = metric_name(metric);
  j["higher_is_better"] = higher_is_better(metric);
  j["seed"] = seed;
  j["num_samples"] = num_samples;
  j["checkpoint_digest"] = checkpoint_digest;
  j["vict"] = vict_json(vict);
  j["failures"] = total_failures();
  ordered_json rows_j = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json rj{{"method", method_name(r.method)},
                    {"setting", setting_name(r.setting)},
                    {"corruption", r.corruption},
                    {"severity", r.severity},
                    {"mean", r.mean},
                    {"std", r.std},
                    {"n", r.n},
                    {"failures", r.failures}};
    if (r.corruption != kAvgKey) {
      ordered_json s = ordered_json::array();
      for (const auto& v : r.samples) s.push_back(v ? ordered_json(*v) : ordered_json(nullptr));
      rj["samples"] = std::move(s);
    }
    rows_j.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows_j);
  if (!clean_gaps.empty()) {
    ordered_json g = ordered_json::array();
    for (const auto& c : clean_gaps) {
      g.push_back({{"setting", setting_name(c.setting)},
                   {"frozen", c.frozen},
                   {"vict", c.vict},
                   {"relative_gap", c.relative_gap},
                   {"flagged", c.flagged}});
    }
    j["clean_gap"] = std::move(g);
  }
  return j.dump(2) + "\n";
}

std::string MetricReport::to_text() const {
  std::vector<std::string> columns;
  for (auto k : report_order()) {
    const std::string name(corruption_name(k));
    if (std::any_of(rows.begin(), rows.end(), [&](const ReportRow& r) { return r.corruption == name; })) {
      columns.push_back(name);
    }
  }
  if (std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.corruption == kCleanKey; })) {
    columns.emplace_back(kCleanKey);
  }
  const bool has_avg = std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.corruption == kAvgKey; });
  if (has_avg) columns.emplace_back(kAvgKey);

  std::vector<int> sevs;
  for (const auto& r : rows) {
    if (std::find(sevs.begin(), sevs.end(), r.severity) == sevs.end()) sevs.push_back(r.severity);
  }
  std::sort(sevs.begin(), sevs.end());

  auto header_of = [](const std::string& c) -> std::string {
    if (c == kCleanKey || c == kAvgKey) return c;
    return std::string(corruption_abbrev(parse_corruption(c)));
  };
  const int prec = metric_precision(metric);
  std::ostringstream os;
  os << task_name(task) << " (" << metric_name(metric) << (higher_is_better(metric) ? " higher" : " lower")
     << " is better), " << num_samples << " samples, seed " << seed << '\n';
  for (int sev : sevs) {
    os << '\n' << (sev == 0 ? std::string("clean inputs") : "severity " + std::to_string(sev)) << '\n'
       << std::left << std::setw(20) << "method";
    for (const auto& c : columns) os << std::right << std::setw(8) << header_of(c);
    os << '\n';
    std::vector<std::pair<Method, Setting>> keys;
    for (const auto& r : rows) {
      if (r.severity != sev) continue;
      const std::pair<Method, Setting> key{r.method, r.setting};
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
      return std::pair{a.second, a.first} < std::pair{b.second, b.first};
    });
    for (const auto& [m, st] : keys) {
      os << std::left << std::setw(20) << (std::string(method_name(m)) + " " + std::string(setting_name(st)));
      for (const auto& c : columns) {
        const ReportRow* r = find(m, st, c, sev);
        os << std::right << std::setw(8) << (r && r->n > 0 ? fixed(r->mean, prec) : std::string("-"));
      }
      os << '\n';
    }
  }
  for (const auto& g : clean_gaps) {
    os << "\nclean gap (" << setting_name(g.setting) << "): frozen " << fixed(g.frozen, prec) << ", vict "
       << fixed(g.vict, prec) << ", relative " << fixed(100.0 * g.relative_gap, 2) << "%"
       << (g.flagged ? "  ** exceeds 5% **" : "") << '\n';
  }
  const auto f = total_failures();
  if (f) os << "\nwarning: " << f << " sample(s) failed and were excluded\n";
  return os.str();
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os << "method,setting,corruption,severity,mean,std,n,failures\n" << std::setprecision(17);
  for (const auto& r : rows) {
    os << method_name(r.method) << ',' << setting_name(r.setting) << ',' << r.corruption << ',' << r.severity << ','
       << r.mean << ',' << r.std << ',' << r.n << ',' << r.failures << '\n';
  }
  return os.str();
}

MetricReport run_bench(const BenchConfig& config, const Checkpoint& checkpoint) {
  std::vector<Cell> cells;
  for (auto k : config.corruptions) {
    for (int sev : config.severities) {
      for (Setting st : config.settings) {
        for (Method m : config.methods) cells.push_back({k, sev, st, m});
      }
    }
  }
  return run_cells(config, checkpoint, cells);
}

MetricReport run_bench(const BenchConfig& config) {
  if (config.checkpoint.empty()) throw ValueError("bench: no checkpoint given");
  if (!std::filesystem::exists(config.checkpoint)) {
    throw Error("bench: checkpoint '" + config.checkpoint.string() + "' does not exist");
  }
  return run_bench(config, load_checkpoint(config.checkpoint));
}

MetricReport run_clean_eval(const BenchConfig& config, const Checkpoint& checkpoint) {
  BenchConfig cfg = config;
  cfg.settings = {Setting::ZeroShot};
  std::vector<Cell> cells;
  for (Method m : cfg.methods) cells.push_back({std::nullopt, 0, Setting::ZeroShot, m});
  MetricReport rep = run_cells(cfg, checkpoint, cells);
  const ReportRow* f = rep.find(Method::Frozen, Setting::ZeroShot, kCleanKey, 0);
  const ReportRow* v = rep.find(Method::Vict, Setting::ZeroShot, kCleanKey, 0);
  if (f && v && f->n > 0 && v->n > 0) {
    const double gap = std::abs(v->mean - f->mean) / std::max(std::abs(f->mean), 1e-12);
    rep.clean_gaps.push_back({Setting::ZeroShot, f->mean, v->mean, gap, gap > kCleanGapTolerance});
  }
  return rep;
}

double FewShotReport::mean_for(std::size_t shots) const {
  double s = 0;
  std::size_t k = 0;
  for (const auto& p : points) {
    if (p.shots == shots && p.n > 0) {
      s += p.mean;
      ++k;
    }
  }
  if (k == 0) throw ValueError("fewshot report has no points for " + std::to_string(shots) + " shots");
  return s / static_cast<double>(k);
}

std::string FewShotReport::to_json() const {
  ordered_json j;
  j["task"] = task_name(task);
  j["metric"] = metric_name(metric);
  j["finetune_steps"] = steps;
  j["finetune_lr"] = lr;
  ordered_json pts = ordered_json::array();
  for (const auto& p : points) {
    pts.push_back({{"shots", p.shots},
                   {"seed", p.seed},
                   {"corruption", corruption_name(p.corruption)},
                   {"severity", p.severity},
                   {"setting", setting_name(p.setting)},
                   {"mean", p.mean},
                   {"n", p.n}});
  }
  j["points"] = std::move(pts);
  ordered_json summary = ordered_json::array();
  std::vector<std::size_t> shots;
  for (const auto& p : points) {
    if (std::find(shots.begin(), shots.end(), p.shots) == shots.end()) shots.push_back(p.shots);
  }
  for (auto s : shots) summary.push_back({{"shots", s}, {"mean", mean_for(s)}});
  j["summary"] = std::move(summary);
  return j.dump(2) + "\n";
}

std::string FewShotReport::to_text() const {
  std::ostringstream os;
  os << "few-shot fine-tuning, " << task_name(task) << " (" << metric_name(metric) << "), " << steps
     << " steps at lr " << lr << '\n'
     << std::left << std::setw(8) << "shots" << std::right << std::setw(10) << "mean" << '\n';
  std::vector<std::size_t> shots;
  for (const auto& p : points) {
    if (std::find(shots.begin(), shots.end(), p.shots) == shots.end()) shots.push_back(p.shots);
  }
  for (auto s : shots) {
    os << std::left << std::setw(8) << s << std::right << std::setw(10) << fixed(mean_for(s), metric_precision(metric))
       << '\n';
  }
  return os.str();
}

std::string FewShotReport::to_csv() const {
  std::ostringstream os;
  os << "shots,seed,corruption,severity,setting,mean,n\n" << std::setprecision(17);
  for (const auto& p : points) {
    os << p.shots << ',' << p.seed << ',' << corruption_name(p.corruption) << ',' << p.severity << ','
       << setting_name(p.setting) << ',' << p.mean << ',' << p.n << '\n';
  }
  return os.str();
}

FewShotReport run_fewshot(const FewShotSweepConfig& config, const Checkpoint& checkpoint) {
  config.bench.validate();
  if (config.shots.empty() || config.seeds.empty()) throw ValueError("fewshot: empty shot or seed list");

  struct Job {
    std::uint64_t seed;
    std::size_t shots;
    CorruptionKind kind;
    int severity;
  };
  std::vector<Job> jobs;
  for (auto seed : config.seeds) {
    for (auto m : config.shots) {
      for (auto k : config.bench.corruptions) {
        for (int sev : config.bench.severities) jobs.push_back({seed, m, k, sev});
      }
    }
  }
  auto finetune_config = [&](const Job& j) {
    FewShotConfig fc;
    fc.shots = j.shots;
    fc.task = config.bench.task;
    fc.corruption = j.kind;
    fc.severity = j.severity;
    fc.steps = config.steps;
    fc.lr = config.lr;
    fc.seed = j.seed;
    return fc;
  };
  for (const auto& j : jobs) finetune_config(j).validate();

  std::vector<std::vector<FewShotPoint>> results(jobs.size());
  parallel_for(jobs.size(), resolve_threads(config.bench.threads), [&](std::size_t i) {
    const Job& j = jobs[i];
    const FewShotConfig fc = finetune_config(j);
    Checkpoint tuned{checkpoint.config, fewshot_finetune(checkpoint.config, checkpoint.params, fc)};
    BenchConfig eval = config.bench;
    eval.corruptions = {j.kind};
    eval.severities = {j.severity};
    eval.methods = {Method::Frozen};
    eval.threads = 1;
    eval.dump_canvases.reset();
    eval.trace_loss.reset();
    const MetricReport rep = run_bench(eval, tuned);
    for (Setting st : eval.settings) {
      const ReportRow* r = rep.find(Method::Frozen, st, corruption_name(j.kind), j.severity);
      results[i].push_back({j.shots, j.seed, j.kind, j.severity, st, r ? r->mean : 0.0, r ? r->n : 0});
    }
  });

  FewShotReport out;
  out.task = config.bench.task;
  out.metric = task_metric(config.bench.task);
  out.steps = config.steps;
  out.lr = config.lr;
  for (auto& r : results) out.points.insert(out.points.end(), r.begin(), r.end());
  return out;
}

}  // namespace vict
