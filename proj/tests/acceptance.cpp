#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vict/bench.hpp"
#include "vict/checkpoint.hpp"
#include "vict/digest.hpp"
#include "vict/gradcheck.hpp"
#include "vict/ops.hpp"
#include "vict/optim.hpp"
#include "vict/training.hpp"

using namespace vict;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradTol = 1e-4;
constexpr double kGradSeconds = 120;
constexpr double kAdamTol = 1e-7;
constexpr double kLossTol = 1e-12;
constexpr double kKneeTol = 1e-8;
constexpr double kPretrainRatio = 0.5;
constexpr double kPretrainSeconds = 30 * 60;
constexpr std::size_t kPretrainSteps = 2000;
constexpr double kOneShotMargin = 0.2;
constexpr std::size_t kEvalSamples = 20;
constexpr int kEvalSeverity = 3;
constexpr std::size_t kEvalSteps = 20;
constexpr std::size_t kTrendSteps = 40;
constexpr double kDecreasingShare = 0.8;
constexpr std::size_t kResetAdaptations = 100;
constexpr std::size_t kFewShotSeeds = 3;

// Denoise model used by the tuning criteria: clean denoise pairs, half of
// the draws in the flipped layout so both cells the cycle inpaints are in
// distribution.
constexpr std::size_t kTunedPretrainSteps = 3000;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::filesystem::path& work_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "vict_acceptance";
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

// Checkpoints are built lazily and shared between criteria.
struct Models {
  std::optional<PretrainResult> defaults;
  double defaults_seconds = 0;
  std::optional<Checkpoint> denoise;

  const PretrainResult& default_run() {
    if (!defaults) {
      PretrainConfig c;
      c.steps = kPretrainSteps;
      const auto t0 = std::chrono::steady_clock::now();
      defaults = pretrain(ModelConfig{}, c);
      defaults_seconds = seconds_since(t0);
    }
    return *defaults;
  }

  const Checkpoint& default_checkpoint() {
    static std::optional<Checkpoint> ck;
    if (!ck) ck = Checkpoint{ModelConfig{}, default_run().params};
    return *ck;
  }

  const Checkpoint& denoise_checkpoint() {
    if (!denoise) {
      PretrainConfig c;
      c.steps = kTunedPretrainSteps;
      c.task_mix = {TaskKind::Denoise};
      c.flip_fraction = 0.5;
      denoise = Checkpoint{ModelConfig{}, pretrain(ModelConfig{}, c).params};
    }
    return *denoise;
  }
};

Models models;

BenchConfig eval_config(std::size_t steps) {
  BenchConfig c;
  c.task = TaskKind::Denoise;
  c.corruptions = {CorruptionKind::GaussianNoise};
  c.severities = {kEvalSeverity};
  c.num_samples = kEvalSamples;
  c.vict.steps = steps;
  c.threads = 1;
  return c;
}

double row_mean(const MetricReport& r, Method m, Setting s) {
  const auto* row = r.find(m, s, "gaussian_noise", kEvalSeverity);
  if (!row) throw Error("missing report row");
  return row->mean;
}

Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = gradcheck_cycle_loss();
  const double secs = seconds_since(t0);
  const double err = report.max_rel_error();
  return {err < kGradTol && secs < kGradSeconds,
          fmt("max rel err %.3e over %zu encoder tensors (< %.0e), %.1f s", err, report.entries.size(), kGradTol, secs)};
}

Outcome optimizer_unit() {
  auto step = [](double theta, double grad, double lr) {
    Tensor<double> p({1}, theta);
    std::vector<Tensor<double>*> ps{&p};
    std::vector<Tensor<double>> gs{Tensor<double>({1}, grad)};
    AdamWState<double> st;
    st.hyper.lr = lr;
    adamw_step<double>(ps, gs, st);
    return p[0];
  };
  const double moved = step(1.0, 1.0, 0.1);
  const bool ok = std::abs(moved - 0.9) < kAdamTol && step(1.0, 0.7, 0.0) == 1.0 && step(1.0, 0.0, 0.1) == 1.0;
  return {ok, fmt("1 -> %.10f (lr 0.1), lr=0 and zero-grad steps are identities", moved)};
}

Outcome loss_unit() {
  const double a = ops::smooth_l1_elem(0.0, 1.0), b = ops::smooth_l1_elem(0.5, 1.0), c = ops::smooth_l1_elem(2.0, 1.0);
  auto slope = [](double d) {
    Tape<double> tape;
    const auto p = tape.leaf(Tensor<double>({1}, d));
    tape.backward(ops::smooth_l1(p, tape.constant(Tensor<double>({1}, 0.0)), 1.0));
    return tape.grad(p)[0];
  };
  const double jump = std::abs(slope(1.0 - 1e-12) - slope(1.0 + 1e-12));
  const bool ok = std::abs(a) < kLossTol && std::abs(b - 0.125) < kLossTol && std::abs(c - 1.5) < kLossTol &&
                  jump < kKneeTol;
  return {ok, fmt("values %.3g / %.3g / %.3g, slope jump at the knee %.1e", a, b, c, jump)};
}

Outcome baseline_reduction() {
  const auto& ck = models.default_checkpoint();
  VictConfig v;
  v.steps = 0;
  std::size_t same = 0, total = 5;
  for (std::size_t i = 0; i < total; ++i) {
    const auto s = generate(TaskKind::Derain, 500 + i);
    const auto prompt = select_prompt(TaskKind::Derain, Setting::ZeroShot, std::nullopt, 600 + i).first();
    same += adapt_and_predict(ck.config, ck.params, prompt, s.input, v).y_t_hat ==
            frozen_predict(ck.config, ck.params, prompt, s.input);
  }
  return {same == total, fmt("%zu/%zu predictions bit-identical with K=0", same, total)};
}

Outcome reset_correctness() {
  const auto& ck = models.default_checkpoint();
  const std::string before = params_digest(ck.params);
  VictConfig v;
  v.steps = 2;
  v.lr = 1e-3;
  const auto a = generate(TaskKind::Denoise, 700), b = generate(TaskKind::Denoise, 701);
  const auto prompt = select_prompt(TaskKind::Denoise, Setting::ZeroShot, std::nullopt, 702).first();
  const auto alone = adapt_and_predict(ck.config, ck.params, prompt, b.input, v);
  (void)adapt_and_predict(ck.config, ck.params, prompt, a.input, v);
  const auto after = adapt_and_predict(ck.config, ck.params, prompt, b.input, v);
  const bool same = alone.y_t_hat == after.y_t_hat && alone.loss_trace == after.loss_trace;
  v.steps = 1;
  for (std::size_t i = 0; i < kResetAdaptations; ++i) {
    (void)adapt_and_predict(ck.config, ck.params, prompt, generate(TaskKind::Denoise, 800 + i).input, v);
  }
  const bool unchanged = params_digest(ck.params) == before;
  return {same && unchanged, fmt("B after A %s B alone; initial digest %s after %zu adaptations",
                                 same ? "matches" : "differs from", unchanged ? "unchanged" : "CHANGED",
                                 kResetAdaptations)};
}

Outcome ablation_wiring() {
  const auto& ck = models.default_checkpoint();
  const auto s = generate(TaskKind::Lowlight, 900);
  const auto prompt = select_prompt(TaskKind::Lowlight, Setting::ZeroShot, std::nullopt, 901).first();
  auto decoder_changes = [&](Selector sel) {
    VictConfig v;
    v.steps = 2;
    v.lr = 1e-3;
    v.selector = sel;
    Params<float> adapted;
    (void)adapt_and_predict(ck.config, ck.params, prompt, s.input, v, &adapted);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < adapted.size(); ++i) {
      if (adapted[i].group == ParamGroup::Decoder && !(adapted[i].value == ck.params[i].value)) ++changed;
    }
    return changed;
  };
  const auto enc = decoder_changes(Selector::Encoder), all = decoder_changes(Selector::All);
  return {enc == 0 && all > 0, fmt("decoder tensors changed: encoder-only %zu, all %zu", enc, all)};
}

Outcome corruption_suite() {
  std::map<CorruptionCategory, int> split;
  bool deterministic = true, in_range = true;
  const Image img = render_scene(1234);
  for (auto k : all_corruptions()) {
    ++split[corruption_category(k)];
    for (int sev = 1; sev <= kMaxSeverity; ++sev) {
      const CorruptionSpec spec{k, sev, 77};
      const Image out = apply_corruption(img, spec);
      deterministic &= out == apply_corruption(img, spec);
      for (float v : out.data()) in_range &= v >= 0.0f && v <= 1.0f;
    }
  }
  std::map<CorruptionKind, std::vector<double>> mses;
  for (const auto& r : probe_monotonicity()) mses[r.kind].push_back(r.mean_mse);
  std::size_t monotone = 0;
  for (const auto& [k, v] : mses) monotone += std::is_sorted(v.begin(), v.end());
  const bool partition = split[CorruptionCategory::Noise] == 3 && split[CorruptionCategory::Blur] == 4 &&
                         split[CorruptionCategory::Weather] == 3 && split[CorruptionCategory::Digital] == 5;
  return {deterministic && in_range && partition && monotone == kNumCorruptions,
          fmt("deterministic %s, in range %s, monotone %zu/15, categories %d/%d/%d/%d",
              deterministic ? "yes" : "no", in_range ? "yes" : "no", monotone, split[CorruptionCategory::Noise],
              split[CorruptionCategory::Blur], split[CorruptionCategory::Weather], split[CorruptionCategory::Digital])};
}

Outcome pretraining_sanity() {
  const auto& r = models.default_run();
  const double lead = window_mean(r.loss_trace, 0, 100);
  const double trail = window_mean(r.loss_trace, r.loss_trace.size() - 100, 100);
  PretrainConfig short_run;
  short_run.steps = 10;
  const auto a = pretrain(ModelConfig{}, short_run), b = pretrain(ModelConfig{}, short_run);
  const bool deterministic = a.params == b.params && a.loss_trace == b.loss_trace;
  return {trail < kPretrainRatio * lead && deterministic && models.defaults_seconds < kPretrainSeconds,
          fmt("trailing/leading loss %.4f/%.4f = %.3f (< %.1f), deterministic %s, %.0f s", trail, lead, trail / lead,
              kPretrainRatio, deterministic ? "yes" : "no", models.defaults_seconds)};
}

Outcome central_claim() {
  const auto r = run_bench(eval_config(kEvalSteps), models.denoise_checkpoint());
  const double f1 = row_mean(r, Method::Frozen, Setting::OneShot), v1 = row_mean(r, Method::Vict, Setting::OneShot);
  const double f0 = row_mean(r, Method::Frozen, Setting::ZeroShot), v0 = row_mean(r, Method::Vict, Setting::ZeroShot);
  return {v1 - f1 > kOneShotMargin && v0 >= f0 && r.total_failures() == 0,
          fmt("one-shot %.3f -> %.3f dB (%+.3f, need > +%.1f); zero-shot %.3f -> %.3f dB (%+.3f, need >= 0); K=%zu, "
              "%zu samples",
              f1, v1, v1 - f1, kOneShotMargin, f0, v0, v0 - f0, kEvalSteps, kEvalSamples)};
}

Outcome steps_trend() {
  auto c = eval_config(kTrendSteps);
  c.trace_loss = work_dir() / "trend_trace.csv";
  const auto r = run_bench(c, models.denoise_checkpoint());
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> traces;
  std::ifstream in(*c.trace_loss);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    traces[{f[1], std::stoul(f[4])}].push_back(std::stod(f[6]));
  }
  std::size_t decreasing = 0;
  for (const auto& [key, t] : traces) decreasing += t.size() == kTrendSteps && t.back() < t.front();
  const double share = traces.empty() ? 0.0 : static_cast<double>(decreasing) / static_cast<double>(traces.size());
  bool improved = true;
  std::string detail;
  for (auto s : c.settings) {
    const double k0 = row_mean(r, Method::Frozen, s), kn = row_mean(r, Method::Vict, s);
    improved &= kn >= k0;
    detail += fmt("%s K=0 %.3f dB, K=%zu %.3f dB; ", std::string(setting_name(s)).c_str(), k0, kTrendSteps, kn);
  }
  return {improved && share >= kDecreasingShare,
          detail + fmt("loss decreased for %zu/%zu adaptations (need >= %.0f%%)", decreasing, traces.size(),
                       100 * kDecreasingShare)};
}

Outcome clean_behavior() {
  const auto r = run_clean_eval(eval_config(kEvalSteps), models.denoise_checkpoint());
  if (r.clean_gaps.empty()) return {false, "no clean gap computed"};
  const auto& g = r.clean_gaps.front();
  return {!g.flagged, fmt("frozen %.3f dB, tuned %.3f dB, relative gap %.3f%% (<= %.0f%%)", g.frozen, g.vict,
                          100 * g.relative_gap, 100 * kCleanGapTolerance)};
}

Outcome fewshot_harness() {
  FewShotSweepConfig f;
  f.bench = eval_config(0);
  f.bench.corruptions = {CorruptionKind::GaussianNoise};
  f.bench.severities = {kEvalSeverity};
  f.bench.settings = {Setting::OneShot};
  f.bench.methods = {Method::Frozen};
  f.seeds.clear();
  for (std::uint64_t s = 0; s < kFewShotSeeds; ++s) f.seeds.push_back(s);
  const auto r = run_fewshot(f, models.denoise_checkpoint());
  std::string curve;
  for (auto m : f.shots) curve += fmt("%s%zu:%.2f", curve.empty() ? "" : " ", m, r.mean_for(m));
  const double m1 = r.mean_for(1), m64 = r.mean_for(64);
  return {m64 >= m1 && r.points.size() == f.shots.size() * kFewShotSeeds,
          fmt("mean over %zu seeds, shots:dB %s (need 64 >= 1)", kFewShotSeeds, curve.c_str())};
}

Outcome persistence() {
  const auto& ck = models.default_checkpoint();
  const auto path = work_dir() / "persist.ckpt";
  save_checkpoint(ck.params, ck.config, path);
  const auto loaded = load_checkpoint(path);
  const bool exact = loaded.params == ck.params && loaded.config == ck.config &&
                     params_digest(loaded.params) == params_digest(ck.params);
  auto c = eval_config(2);
  c.corruptions = {CorruptionKind::Fog, CorruptionKind::JpegCompression};
  c.num_samples = 3;
  c.checkpoint = path;
  const bool same_report = run_bench(c).to_json() == run_bench(c, ck).to_json();
  return {exact && same_report, fmt("round trip %s, report from loaded checkpoint %s", exact ? "bit-exact" : "DIFFERS",
                                    same_report ? "byte-identical" : "DIFFERS")};
}

Outcome parallel_determinism() {
  auto c = eval_config(2);
  c.corruptions = {CorruptionKind::ShotNoise, CorruptionKind::MotionBlur, CorruptionKind::Snow};
  c.num_samples = 4;
  c.threads = 1;
  const std::string one = run_bench(c, models.default_checkpoint()).to_json();
  c.threads = 8;
  const std::string eight = run_bench(c, models.default_checkpoint()).to_json();
  return {one == eight, fmt("JSON reports with 1 and 8 workers %s (%zu bytes)",
                            one == eight ? "byte-identical" : "DIFFER", one.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient fidelity", gradient_fidelity},
      {"optimizer unit", optimizer_unit},
      {"loss unit", loss_unit},
      {"baseline reduction", baseline_reduction},
      {"reset correctness", reset_correctness},
      {"ablation wiring", ablation_wiring},
      {"corruption suite", corruption_suite},
      {"pre-training sanity", pretraining_sanity},
      {"tuning beats frozen on gaussian noise", central_claim},
      {"more tuning steps help", steps_trend},
      {"clean in-domain behavior", clean_behavior},
      {"few-shot baseline harness", fewshot_harness},
      {"persistence", persistence},
      {"determinism under parallelism", parallel_determinism},
  };
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
