// Copyright 2026 The twistwalk Authors
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


// twistwalk: command-line front end.
//
//   twistwalk <subcommand> [--config FILE] [--set key=value]... [--out DIR]
//             [--print-config]
//
// Exit codes: 0 ok, 2 config error, 3 numeric error, 4 I/O error.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "twistwalk/cli.hpp"

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool print_config = false;
};

int run(twistwalk::Command command, const Options& opt) {
  using namespace twistwalk;
  try {
    const json file = opt.config_path.empty() ? json() : read_config_file(opt.config_path);
    std::vector<std::string> overrides = opt.overrides;
    if (!opt.out_dir.empty()) overrides.push_back("output_dir=" + json(opt.out_dir).dump());
    json merged = merge_config(command, file, overrides);
    if (opt.print_config) {
      std::cout << dump(resolve_config(command, std::move(merged)));
      return kExitOk;
    }
    const RunOutput result = run_command(command, std::move(merged));
    for (const auto& path : write_outputs(result)) std::cout << path.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "twistwalk " << command_name(command) << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace twistwalk;
  CLI::App app{"Spin-orbit photonic quantum walk simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options opt;
  Command selected = Command::Walk;
  for (Command c : kCommands) {
    const std::string name(command_name(c));
    auto* sub = app.add_subcommand(name, "Run the " + name + " simulation");
    sub->add_option("-c,--config", opt.config_path, "JSON config file");
    sub->add_option("-s,--set", opt.overrides, "Override a config key (key=value); repeatable")->allow_extra_args(false);
    sub->add_option("-o,--out", opt.out_dir, "Output directory (overrides output_dir)");
    sub->add_flag("--print-config", opt.print_config, "Print the resolved config and exit");
    sub->callback([&selected, c] { selected = c; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kExitConfig;
  }
  return run(selected, opt);
}
