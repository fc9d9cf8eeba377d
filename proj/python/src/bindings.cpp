// Copyright 2026 The difffp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <array>
#include <memory>

#include "difffp/checkpoint.hpp"
#include "difffp/config.hpp"
#include "difffp/critic.hpp"
#include "difffp/diffusion.hpp"
#include "difffp/envs.hpp"
#include "difffp/errors.hpp"
#include "difffp/exploitability.hpp"
#include "difffp/io.hpp"
#include "difffp/mixture.hpp"
#include "difffp/runner.hpp"

namespace py = pybind11;
using namespace difffp;

namespace {

py::dict report_dict(const ExploitabilityReport& r) {
  py::dict d;
  d["oracle"] = oracle_kind_name(r.oracle);
  d["episodes"] = r.episodes;
  d["epsilon"] = std::vector<double>(r.epsilon.begin(), r.epsilon.end());
  d["br_payoff"] = std::vector<double>(r.br_payoff.begin(), r.br_payoff.end());
  d["profile_payoff"] =
      std::vector<double>(r.profile_payoff.begin(), r.profile_payoff.end());
  d["half_width"] =
      std::vector<double>(r.half_width.begin(), r.half_width.end());
  d["total"] = r.total;
  return d;
}

py::dict step_dict(const StepResult& s) {
  py::dict d;
  d["obs"] = s.obs;
  d["rewards"] = s.rewards;
  d["terminated"] = s.terminated;
  d["truncated"] = s.truncated;
  d["outcome"] = std::string(outcome_name(s.outcome));
  return d;
}

}  // namespace

PYBIND11_MODULE(_difffp, m) {
  m.doc() = "Fictitious play with diffusion-policy best responses";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError",
                                       PyExc_ArithmeticError);
  py::register_exception<MissingCheckpointError>(m, "MissingCheckpointError",
                                                 PyExc_FileNotFoundError);
  py::register_exception<CheckpointFormatError>(m, "CheckpointFormatError",
                                                PyExc_ValueError);
  py::register_exception<NotTraceableError>(m, "NotTraceableError",
                                            PyExc_RuntimeError);

  m.def("env_names", &envs::env_names);
  m.def("scalar_duel_step", &envs::scalar_duel_step, py::arg("x"),
        py::arg("y"));

  py::class_<Env, std::unique_ptr<Env>>(m, "Env")
      .def(py::init([](const std::string& name, const envs::EnvOverrides& p) {
             return envs::make_env(name, p);
           }),
           py::arg("name"), py::arg("params") = envs::EnvOverrides{})
      .def_property_readonly("name", [](const Env& e) { return e.spec().name; })
      .def_property_readonly("num_agents",
                             [](const Env& e) { return e.spec().num_agents; })
      .def_property_readonly("sides", [](const Env& e) { return e.spec().side; })
      .def_property_readonly("obs_dim",
                             [](const Env& e) { return e.spec().obs_dim; })
      .def_property_readonly("act_dim",
                             [](const Env& e) { return e.spec().act_dim; })
      .def_property_readonly("horizon",
                             [](const Env& e) { return e.spec().horizon; })
      .def_property_readonly("zero_sum",
                             [](const Env& e) { return e.spec().zero_sum; })
      .def("reset", &Env::reset, py::arg("seed"))
      .def("step",
           [](Env& e, const JointAction& a) { return step_dict(e.step(a)); },
           py::arg("actions"))
      .def_property_readonly("traceable", &Env::traceable)
      .def("position", &Env::position, py::arg("agent"));

  py::class_<NoiseSchedule>(m, "NoiseSchedule")
      .def_static("linear", &NoiseSchedule::linear, py::arg("steps"),
                  py::arg("beta_min"), py::arg("beta_max"))
      .def_static("variance_preserving", &NoiseSchedule::variance_preserving,
                  py::arg("steps"), py::arg("beta_min"), py::arg("beta_max"))
      .def_property_readonly("steps", &NoiseSchedule::steps)
      .def_property_readonly("betas", &NoiseSchedule::betas)
      .def("alpha_bar", &NoiseSchedule::alpha_bar, py::arg("t"));

  m.def(
      "forward_noise",
      [](const NoiseSchedule& s, const std::vector<float>& a0, int t,
         const std::vector<float>& noise) {
        return forward_noise(s, a0, t, noise);
      },
      py::arg("schedule"), py::arg("a0"), py::arg("t"), py::arg("noise"));
  m.def(
      "weight_by_return",
      [](const std::vector<double>& returns, double temperature,
         double clip) {
        return weight_by_return(returns, temperature, clip);
      },
      py::arg("returns"), py::arg("temperature"), py::arg("clip"));
  m.def("td_target", &td_target, py::arg("reward"), py::arg("gamma"),
        py::arg("q1_target"), py::arg("q2_target"), py::arg("terminated"));

  m.def(
      "mixture_weights",
      [](int k) {
        MixturePolicy mix;
        for (int i = 0; i < k; ++i) {
          PolicyCheckpoint c;
          c.fp_iteration = i;
          c.low = {-1.0f};
          c.high = {1.0f};
          c.params = {0.0f};
          mix = mixture_update(mix, std::move(c));
        }
        return mix.weights();
      },
      py::arg("k"), "Mixture weights after k best-response updates.");

  m.def(
      "constant_profile_exploitability",
      [](const std::string& env_name, float ego, float opp, int episodes,
         int grid_n, uint64_t seed) {
        const auto env = envs::make_env(env_name);
        const ConstantPolicy a({ego}), b({opp});
        EvalConfig eval;
        eval.episodes = episodes;
        eval.grid_n = grid_n;
        return report_dict(
            measure_exploitability(*env, {&a, &b}, eval, seed));
      },
      py::arg("env"), py::arg("ego"), py::arg("opp"), py::arg("episodes") = 100,
      py::arg("grid_n") = 41, py::arg("seed") = 0);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static("parse", &ExperimentConfig::parse, py::arg("text"))
      .def("serialize", &ExperimentConfig::serialize)
      .def("hash", &ExperimentConfig::hash)
      .def("validate", &ExperimentConfig::validate)
      .def_readwrite("env_name", &ExperimentConfig::env_name)
      .def_readwrite("iterations", &ExperimentConfig::iterations)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("run_name", &ExperimentConfig::run_name);
  m.def("config_keys", &config_keys);

  m.def(
      "train",
      [](const ExperimentConfig& config, const std::filesystem::path& root) {
        py::gil_scoped_release release;
        return cmd_train(config, root);
      },
      py::arg("config"), py::arg("out_root"));
  m.def(
      "exploit",
      [](const std::filesystem::path& run, std::optional<int> iteration,
         std::optional<std::string> oracle, std::optional<int> episodes,
         const std::filesystem::path& report) {
        ExploitOptions o;
        o.iteration = iteration;
        if (oracle) o.oracle = oracle_kind_from_name(*oracle);
        o.episodes = episodes;
        return report_dict(cmd_exploit(run, o, report));
      },
      py::arg("run_dir"), py::arg("iteration") = py::none(),
      py::arg("oracle") = py::none(), py::arg("episodes") = py::none(),
      py::arg("report_path"));
  m.def(
      "trace",
      [](const std::filesystem::path& run, const std::filesystem::path& out,
         std::optional<int> iteration, int episodes) {
        TraceOptions o;
        o.output = out;
        o.iteration = iteration;
        o.episodes = episodes;
        return cmd_trace(run, o);
      },
      py::arg("run_dir"), py::arg("output"), py::arg("iteration") = py::none(),
      py::arg("episodes") = 1);
  m.def(
      "load_checkpoint",
      [](const std::filesystem::path& path) {
        const PolicyCheckpoint c = load_checkpoint(path);
        py::dict d;
        d["kind"] = policy_kind_name(c.kind);
        d["fp_iteration"] = c.fp_iteration;
        d["side"] = c.side;
        d["env"] = c.env_name;
        d["num_params"] = c.params.size();
        d["content_hash"] = hex64(c.content_hash());
        return d;
      },
      py::arg("path"));
  m.def("exit_code_for_error", [](const std::string& kind) {
    if (kind == "config") return exit_code_for(ConfigError(""));
    if (kind == "numeric") return exit_code_for(NumericError(""));
    if (kind == "missing") return exit_code_for(MissingCheckpointError(""));
    if (kind == "trace") return exit_code_for(NotTraceableError(""));
    return exit_code_for(std::runtime_error(""));
  });
}
