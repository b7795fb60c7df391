#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "explorium/harness.hpp"

namespace py = pybind11;
using namespace explorium;

namespace {

QMatrix to_qmatrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw ConfigurationError("expected a [K, N] matrix");
  QMatrix q({static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))});
  std::copy(a.data(), a.data() + a.size(), q.data());
  return q;
}

Frame to_frame(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw ConfigurationError("expected an [H, W] uint8 frame");
  Frame f(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), f.pixels.begin());
  return f;
}

py::array_t<std::uint8_t> from_frame(const Frame& f) {
  py::array_t<std::uint8_t> out({f.height, f.width});
  std::copy(f.pixels.begin(), f.pixels.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Q-ensemble exploration laboratory";

  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ConfigParseError>(m, "ConfigParseError", PyExc_ValueError);

  m.def("uncertainty_per_action", [](const py::array_t<double>& q) { return uncertainty_per_action(to_qmatrix(q)); });
  m.def("uncertainty_value", [](const py::array_t<double>& q) { return uncertainty_value(to_qmatrix(q)); });
  m.def("select_ucb", [](const py::array_t<double>& q, double lambda) { return select_ucb(to_qmatrix(q), lambda); });
  m.def("select_majority_vote", [](const py::array_t<double>& q) { return select_majority_vote(to_qmatrix(q)); });
  m.def("epsilon_schedule", &epsilon_schedule, py::arg("step"), py::arg("initial") = 1.0, py::arg("final") = 0.01,
        py::arg("decay_steps") = 1'000'000);
  m.def("double_q_target",
        [](double r, bool done, double gamma, std::vector<double> online, std::vector<double> target) {
          return double_q_target(r, done, gamma, online, target);
        });

  m.def("frame_kernel",
        [](const py::array_t<std::uint8_t>& x, const py::array_t<std::uint8_t>& y, double delta, double sigma) {
          return frame_kernel(to_frame(x), to_frame(y), delta, sigma);
        },
        py::arg("x"), py::arg("y"), py::arg("delta") = 50.0, py::arg("sigma") = 100.0);

  py::class_<TrajectoryMemory>(m, "TrajectoryMemory")
      .def(py::init<std::size_t, double, double>(), py::arg("capacity") = 20, py::arg("delta") = 50.0,
           py::arg("sigma") = 100.0)
      .def("push", [](TrajectoryMemory& mem, const py::array_t<std::uint8_t>& f) {
        mem.push(std::make_shared<const Frame>(to_frame(f)));
      })
      .def("visit_frequency",
           [](const TrajectoryMemory& mem, const py::array_t<std::uint8_t>& f) {
             return mem.visit_frequency(to_frame(f));
           })
      .def("__len__", &TrajectoryMemory::size);

  py::class_<ActionScore>(m, "ActionScore")
      .def_readonly("mu", &ActionScore::mu)
      .def_readonly("sigma", &ActionScore::sigma)
      .def_readonly("visits", &ActionScore::visits)
      .def_readonly("score", &ActionScore::score);
  py::class_<ScoreBreakdown>(m, "ScoreBreakdown")
      .def_readonly("actions", &ScoreBreakdown::actions)
      .def_readonly("chosen", &ScoreBreakdown::chosen)
      .def_readonly("epsilon", &ScoreBreakdown::epsilon);
  m.def("score_actions",
        [](std::vector<double> mu, std::vector<double> sigma, std::vector<double> visits, double lambda,
           double epsilon) { return score_actions(mu, sigma, visits, lambda, epsilon); });

  py::class_<GridWorld>(m, "GridWorld")
      .def(py::init([](const std::string& map, std::size_t size, std::size_t actions, std::size_t cell_px) {
             RenderConfig render;
             render.cell_px = cell_px;
             return GridWorld(load_level(map, size), actions, render);
           }),
           py::arg("map") = "builtin:open", py::arg("size") = 10, py::arg("actions") = 5, py::arg("cell_px") = 3)
      .def("reset", &GridWorld::reset)
      .def("step",
           [](GridWorld& w, ActionId a) {
             auto r = w.step(a);
             return py::make_tuple(r.reward, r.done, from_frame(r.frame));
           })
      .def("render", [](const GridWorld& w) { return from_frame(w.render()); })
      .def_property_readonly("agent", [](const GridWorld& w) -> py::object {
        if (!w.agent()) return py::none();
        return py::make_tuple(w.agent()->row, w.agent()->col);
      })
      .def_property_readonly("pellets_remaining", &GridWorld::pellets_remaining)
      .def_property_readonly("done", &GridWorld::done);

  m.def("parse_config", [](const std::string& text) { return resolved_config(parse_config(text)); },
        "Parses config text and returns the resolved echo.");

  m.def(
      "train",
      [](const std::string& config_text, const std::filesystem::path& out_dir) {
        const auto cfg = parse_config(config_text);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = out_dir.empty() ? run_training_in_memory(cfg) : run_training(cfg, out_dir);
        }
        py::dict d;
        d["status"] = r.status;
        d["env_steps"] = r.counters.env_steps;
        d["episodes"] = r.counters.episodes;
        d["train_calls"] = r.counters.train_calls;
        d["q_updates"] = r.counters.q_updates;
        d["target_syncs"] = r.counters.target_syncs;
        d["episode_rewards"] = r.episode_rewards;
        d["reward_auc"] = r.reward_auc;
        return d;
      },
      py::arg("config_text"), py::arg("out_dir") = std::filesystem::path());

  m.def("load_checkpoint", [](const std::filesystem::path& path) {
    py::dict out;
    for (const auto& r : load_checkpoint(path)) {
      std::vector<py::ssize_t> shape(r.tensor.shape().begin(), r.tensor.shape().end());
      py::array_t<float> a(shape);
      std::copy(r.tensor.data(), r.tensor.data() + r.tensor.size(), a.mutable_data());
      out[py::str(r.name)] = a;
    }
    return out;
  });
}
