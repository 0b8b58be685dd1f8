#include "vict/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vict/rng.hpp"
#include "vict/vict.hpp"

namespace vict {

double GradcheckReport::max_rel_error() const {
  double worst = 0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

std::string GradcheckReport::to_text() const {
  std::ostringstream os;
  char line[160];
  for (const auto& e : entries) {
    std::snprintf(line, sizeof line, "%-28s %6zu  max rel err %.3e  max |grad| %.3e\n", e.name.c_str(), e.numel,
                  e.max_rel_error, e.max_abs_grad);
    os << line;
  }
  std::snprintf(line, sizeof line, "max relative error %.3e (tolerance %.0e)\n", max_rel_error(), kGradcheckTolerance);
  os << line;
  return os.str();
}

GradcheckReport gradcheck_cycle_loss(const GradcheckConfig& config) {
  if (!(config.step > 0) || !(config.floor > 0)) throw ValueError("gradcheck: step and floor must be positive");
  const ModelConfig model = ModelConfig::tiny();
  Params<double> params = init_params<float>(model, config.seed).cast<double>();
  Rng rng{config.seed, 0x96adc4ULL};
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (auto& v : params[i].value.data()) v += config.jitter * rng.normal();
  }
  const TaskSample query = generate(TaskKind::Denoise, hash_key({config.seed, 1}), model.cell_size);
  const TaskSample prompt = generate(TaskKind::Denoise, hash_key({config.seed, 2}), model.cell_size);
  const auto selected = param_group(params, config.selector);

  auto loss_at = [&](const Params<double>& p) {
    Tape<double> tape;
    const auto bound = bind_params(tape, p, {});
    return cycle_loss_on_tape<double>(model, bound, prompt.input, prompt.target, query.input, 1.0).loss.value()[0];
  };

  Tape<double> tape;
  const auto bound = bind_params(tape, params, selected);
  const auto out = cycle_loss_on_tape<double>(model, bound, prompt.input, prompt.target, query.input, 1.0);
  tape.backward(out.loss);

  GradcheckReport report;
  const double h = config.step;
  for (std::size_t i : selected) {
    const Tensor<double> grad = tape.grad(bound.vars[i]);
    GradcheckEntry entry{params[i].name, grad.numel(), 0, 0};
    for (std::size_t j = 0; j < grad.numel(); ++j) {
      const double x0 = params[i].value[j];
      auto at = [&](double d) {
        params[i].value[j] = x0 + d;
        return loss_at(params);
      };
      const double fd = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
      params[i].value[j] = x0;
      const double g = grad[j];
      const double err = std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), config.floor});
      entry.max_rel_error = std::max(entry.max_rel_error, err);
      entry.max_abs_grad = std::max(entry.max_abs_grad, std::abs(g));
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace vict
