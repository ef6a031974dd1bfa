// Copyright 2026 The lightflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end. All parameters live in the run file; flags only
// override. Exit codes: 0 ok, 2 config, 3 degenerate rig, 4 input/I-O,
// 5 empty reconstruction.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lightflow/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string frame;
  std::string lut;
  std::string depth;
  std::string truth;
  std::string mode;
};

// Overrides given on the command line are relative to the working directory.
std::string absolute(const std::string& p) { return std::filesystem::absolute(p).string(); }

int dispatch(const std::string& name, const Options& o) {
  using namespace lightflow;
  return run_command(
      [&]() -> int {
        RunConfig config = load_run_config(o.config);
        if (o.seed) config.seed = o.seed;
        if (!o.frame.empty()) config.input_frame = absolute(o.frame);
        if (!o.lut.empty()) config.input_lut = absolute(o.lut);
        if (!o.depth.empty()) config.input_depth = absolute(o.depth);
        if (!o.truth.empty()) config.input_truth = absolute(o.truth);
        if (!o.mode.empty()) config.evaluate_mode = o.mode;
        config.validate();
        const std::filesystem::path out = o.out.empty() ? config.resolve(config.output) : std::filesystem::path(o.out);
        if (name == "build-lut") return cmd_build_lut(config, out, std::cout);
        if (name == "simulate") return cmd_simulate(config, out, std::cout);
        if (name == "reconstruct") return cmd_reconstruct(config, out, std::cout);
        if (name == "evaluate") return cmd_evaluate(config, out, std::cout);
        return cmd_sweep(config, out, std::cout);
      },
      std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lightflow: depth from projected-pattern motion blur"};
  app.require_subcommand(1);
  Options o;
  const char* names[] = {"build-lut", "simulate", "reconstruct", "evaluate", "sweep"};
  const char* help[] = {"tabulate the depth ratio LUT and check monotonicity",
                        "render a motion-blurred frame with ground truth",
                        "recover depth from a frame",
                        "score a depth map against a plane fit or ground truth",
                        "render and reconstruct over a range of exposures"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", o.config, "run file")->required();
    sub->add_option("--out", o.out, "output directory (overrides `output`)");
    sub->add_option("--seed", o.seed, "noise seed (overrides the scene seed)");
    const std::string n = names[i];
    if (n == "reconstruct") {
      sub->add_option("--frame", o.frame, "input frame (PPM)");
      sub->add_option("--lut", o.lut, "LUT file; built from the rig when absent");
    }
    if (n == "evaluate") {
      sub->add_option("--depth", o.depth, "depth map (PFM)");
      sub->add_option("--truth", o.truth, "ground-truth depth (PFM)");
      sub->add_option("--mode", o.mode, "plane | truth");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lightflow::kExitConfig;
  }
  for (const char* n : names) {
    if (app.got_subcommand(n)) return dispatch(n, o);
  }
  return lightflow::kExitConfig;
}
