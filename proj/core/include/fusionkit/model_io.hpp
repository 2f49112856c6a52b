#pragma once

#include <filesystem>
#include <string>

#include "fusionkit/classifiers.hpp"

namespace fusionkit {

// Binary little-endian layout beginning with the 8-byte magic "FKMODEL1";
// see docs/model_format.md.
std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(const std::string& bytes);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace fusionkit
