#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "vict/bench.hpp"
#include "vict/checkpoint.hpp"
#include "vict/digest.hpp"
#include "vict/gradcheck.hpp"
#include "vict/training.hpp"

namespace py = pybind11;
using namespace vict;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Image& img) {
  Array out(std::vector<py::ssize_t>(img.shape().begin(), img.shape().end()));
  std::memcpy(out.mutable_data(), img.data().data(), img.data().size() * sizeof(float));
  return out;
}

Image from_numpy(const Array& a) {
  if (a.ndim() != 3 || a.shape(0) != 3 || a.shape(1) != a.shape(2)) {
    throw ShapeError("expected a float array of shape (3, C, C)");
  }
  const auto* p = a.data();
  return Image(Shape(a.shape(), a.shape() + 3), std::vector<float>(p, p + a.size()));
}

VictConfig vict_config(std::size_t steps, double lr, const std::string& tune, bool detach) {
  VictConfig v;
  v.steps = steps;
  v.lr = lr;
  v.selector = parse_selector(tune);
  v.detach = detach;
  v.validate();
  return v;
}

}  // namespace

PYBIND11_MODULE(_vict, m) {
  m.doc() = "Test-time visual in-context tuning on a toy canvas transformer";

  auto base = py::register_exception<Error>(m, "VictError", PyExc_RuntimeError);
  py::register_exception<ValueError>(m, "VictValueError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "VictShapeError", base.ptr());
  py::register_exception<NumericError>(m, "VictNumericError", base.ptr());
  py::register_exception<FormatError>(m, "VictFormatError", base.ptr());

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_property_readonly("config", [](const Checkpoint& c) { return c.config.to_kv(); })
      .def_property_readonly("digest", [](const Checkpoint& c) { return params_digest(c.params); })
      .def_property_readonly("num_parameters", [](const Checkpoint& c) { return c.params.scalar_count(); })
      .def("save", [](const Checkpoint& c, const std::string& path) { save_checkpoint(c.params, c.config, path); });

  m.def("load_checkpoint", [](const std::string& path) { return load_checkpoint(path); }, py::arg("path"));

  m.def(
      "pretrain",
      [](std::size_t steps, double lr, std::vector<std::string> tasks, double flip_fraction, std::uint64_t seed) {
        PretrainConfig c;
        c.steps = steps;
        c.lr = lr;
        if (!tasks.empty()) {
          c.task_mix.clear();
          for (const auto& t : tasks) c.task_mix.push_back(parse_task(t));
        }
        c.flip_fraction = flip_fraction;
        c.seed = seed;
        PretrainResult r;
        {
          py::gil_scoped_release nogil;
          r = pretrain(ModelConfig{}, c);
        }
        return py::make_tuple(Checkpoint{ModelConfig{}, std::move(r.params)}, r.loss_trace);
      },
      py::arg("steps"), py::arg("lr") = PretrainConfig{}.lr, py::arg("tasks") = std::vector<std::string>{},
      py::arg("flip_fraction") = 0.0, py::arg("seed") = 0,
      "Pre-trains the default model; returns (checkpoint, loss trace).");

  m.def(
      "generate",
      [](const std::string& task, std::uint64_t seed) {
        const auto s = generate(parse_task(task), seed);
        return py::make_tuple(to_numpy(s.input), to_numpy(s.target));
      },
      py::arg("task"), py::arg("seed"), "Returns (input, target) arrays of shape (3, C, C).");

  m.def(
      "corrupt",
      [](const Array& image, const std::string& kind, int severity, std::uint64_t seed) {
        return to_numpy(apply_corruption(from_numpy(image), {parse_corruption(kind), severity, seed}));
      },
      py::arg("image"), py::arg("kind"), py::arg("severity"), py::arg("seed") = 0);

  m.def(
      "evaluate",
      [](const std::string& task, const Array& pred, const Array& target) {
        return evaluate(parse_task(task), from_numpy(pred), from_numpy(target)).value;
      },
      py::arg("task"), py::arg("pred"), py::arg("target"));

  m.def(
      "frozen_predict",
      [](const Checkpoint& c, const Array& x, const Array& y, const Array& x_t) {
        return to_numpy(frozen_predict(c.config, c.params, {from_numpy(x), from_numpy(y)}, from_numpy(x_t)));
      },
      py::arg("checkpoint"), py::arg("x"), py::arg("y"), py::arg("x_t"));

  m.def(
      "cycle_loss",
      [](const Checkpoint& c, const Array& x, const Array& y, const Array& x_t) {
        return cycle_loss(c.config, c.params, {from_numpy(x), from_numpy(y)}, from_numpy(x_t));
      },
      py::arg("checkpoint"), py::arg("x"), py::arg("y"), py::arg("x_t"));

  m.def(
      "adapt_and_predict",
      [](const Checkpoint& c, const Array& x, const Array& y, const Array& x_t, std::size_t steps, double lr,
         const std::string& tune, bool detach) {
        const auto cfg = vict_config(steps, lr, tune, detach);
        const PromptPair prompt{from_numpy(x), from_numpy(y)};
        const Image query = from_numpy(x_t);
        AdaptationResult r;
        {
          py::gil_scoped_release nogil;
          r = adapt_and_predict(c.config, c.params, prompt, query, cfg);
        }
        return py::make_tuple(to_numpy(r.y_t_hat), r.loss_trace);
      },
      py::arg("checkpoint"), py::arg("x"), py::arg("y"), py::arg("x_t"), py::arg("steps") = VictConfig{}.steps,
      py::arg("lr") = VictConfig{}.lr, py::arg("tune") = "encoder", py::arg("detach") = false,
      "Tunes a private copy of the weights on the cycle loss; returns (prediction, loss trace).");

  m.def(
      "bench",
      [](const Checkpoint& c, const std::string& task, std::vector<std::string> corruptions, std::vector<int> severities,
         std::size_t num_samples, std::size_t steps, double lr, std::uint64_t seed, std::size_t threads) {
        BenchConfig b;
        b.task = parse_task(task);
        b.corruptions.clear();
        for (const auto& k : corruptions) b.corruptions.push_back(parse_corruption(k));
        b.severities = std::move(severities);
        b.num_samples = num_samples;
        b.vict.steps = steps;
        b.vict.lr = lr;
        b.seed = seed;
        b.threads = threads;
        py::gil_scoped_release nogil;
        return run_bench(b, c).to_json();
      },
      py::arg("checkpoint"), py::arg("task") = "denoise", py::arg("corruptions") = std::vector<std::string>{"gaussian_noise"},
      py::arg("severities") = std::vector<int>{5}, py::arg("num_samples") = 8,
      py::arg("steps") = VictConfig::kSweepSteps, py::arg("lr") = VictConfig{}.lr, py::arg("seed") = 0,
      py::arg("threads") = 1, "Runs the frozen-vs-tuned benchmark and returns the JSON report.");

  m.def("gradcheck", [](std::uint64_t seed) {
    GradcheckConfig g;
    g.seed = seed;
    const auto r = gradcheck_cycle_loss(g);
    return py::make_tuple(r.max_rel_error(), r.passed());
  }, py::arg("seed") = 0, "Returns (max relative error, passed).");

  m.attr("GRADCHECK_TOLERANCE") = kGradcheckTolerance;
  m.attr("TASKS") = [] {
    std::vector<std::string> out;
    for (auto t : kAllTasks) out.emplace_back(task_name(t));
    return out;
  }();
  m.attr("CORRUPTIONS") = [] {
    std::vector<std::string> out;
    for (auto k : report_order()) out.emplace_back(corruption_name(k));
    return out;
  }();
}
