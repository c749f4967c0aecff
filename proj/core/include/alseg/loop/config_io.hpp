#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "alseg/loop/experiment.hpp"

namespace alseg::loop {

// Experiment file: one JSON document with shared dataset/model/train
// settings and a "strategies" array of {name, strategy, scorer} entries,
// each expanding into one ExperimentConfig. `overrides` are dotted-path
// assignments ("train.epochs=5", "seeds=[1,2]") applied to the document
// before expansion; values parse as JSON when possible, else as strings.
ExperimentSuite load_suite_file(const std::filesystem::path& path,
                                const std::vector<std::string>& overrides = {});

ExperimentSuite parse_suite_json(const std::string& text,
                                 const std::vector<std::string>& overrides = {});

std::string experiment_config_to_json_string(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json_string(const std::string& text);

}  // namespace alseg::loop
