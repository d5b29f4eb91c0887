// config.hpp
//   Flat `key = value` configuration with [section] headers. Sources are
//   layered: built-in defaults, then CASLEARN_* environment overrides, then
//   the config file, then command-line flags (strongest).

#pragma once

#include <map>
#include <string>

#include "caslearn/eval.hpp"

namespace caslearn {

// "section.key" -> raw value
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::string& path);

// CASLEARN_<SECTION>_<KEY>=value; unknown names are ignored
ConfigMap env_overrides();

// Applies entries onto cfg; unknown keys raise a config error.
void apply_config(ExperimentConfig& cfg, const ConfigMap& entries);

// Full round-trip serialization; feeding the output back through
// apply_config reproduces the configuration exactly.
std::string write_config(const ExperimentConfig& cfg);

}  // namespace caslearn
