#pragma once

#include <filesystem>
#include <string>

#include "rbl/scenario.hpp"

namespace rbl {

// Scenario files are JSON objects:
//
//   {
//     "n_sensors": 8,
//     "m_anchors": 8,
//     "conformation": [x1..xN, y1..yN, z1..zN],   // 3xN, row-major, meters
//     "anchors":      [x1..xM, y1..yM, z1..zM],   // 3xM, row-major, meters
//     "phi_theta_deg2": 10.0,
//     "phi_t_m2": 5.0,
//     "sigma_w": [0.001, 0.01, ...],              // meters
//     "generator_mode": "exact-rotation"          // or "small-angle-rotation"
//   }
//
// The matrices may also be given as three nested rows. Only `n_sensors`,
// `m_anchors`, `conformation` and `anchors` are required.

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

std::string serialize_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace rbl
