// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Regenerates the bundled scenario files from the built-in defaults.

#include "rftbd/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "configs";
  std::filesystem::create_directories(dir);
  auto save = [&](const char* name, const rftbd::ScenarioConfig& cfg) {
    std::ofstream(dir / name) << rftbd::config_to_json_text(cfg) << '\n';
    std::printf("wrote %s\n", (dir / name).string().c_str());
  };
  auto four = rftbd::four_object_scenario();
  save("four_objects.json", four);
  four.name = "four_objects_reduced";
  four.duration = 200.0;
  save("four_objects_reduced.json", four);
  save("single_object.json", rftbd::single_object_scenario());
  return 0;
}
