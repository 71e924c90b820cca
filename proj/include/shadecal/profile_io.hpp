#pragma once

#include <filesystem>

#include <json.hpp>

#include "shadecal/calibration.hpp"

namespace shadecal {

// Profile JSON. Matrices are row-major 3x11 arrays; doubles are written in
// shortest round-trip form so a load reproduces the profile bit for bit.
nlohmann::json profile_to_json(const CalibrationProfile& profile);
CalibrationProfile profile_from_json(const nlohmann::json& j);

CalibrationProfile load_profile(const std::filesystem::path& path);

}  // namespace shadecal
