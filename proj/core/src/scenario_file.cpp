#include "rbl/scenario_file.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rbl/error.hpp"

namespace rbl {
namespace {

using json = nlohmann::json;

Points3 read_matrix(const json& node, const char* key, Eigen::Index cols) {
  if (!node.contains(key)) throw Error(ErrorKind::kParse, std::string("missing field '") + key + "'");
  const json& v = node.at(key);
  if (!v.is_array()) throw Error(ErrorKind::kParse, std::string("field '") + key + "' must be a list");

  Points3 out(3, cols);
  if (v.size() == 3 && v.at(0).is_array()) {
    for (Eigen::Index r = 0; r < 3; ++r) {
      const json& row = v.at(r);
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
        throw Error(ErrorKind::kParse, std::string("field '") + key + "' has a row of wrong length");
      }
      for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = row.at(c).get<double>();
    }
    return out;
  }
  if (static_cast<Eigen::Index>(v.size()) != 3 * cols) {
    throw Error(ErrorKind::kParse, std::string("field '") + key + "' must hold 3x" +
                                       std::to_string(cols) + " values");
  }
  for (Eigen::Index r = 0; r < 3; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = v.at(r * cols + c).get<double>();
  }
  return out;
}

json write_matrix(const Points3& m) {
  json flat = json::array();
  for (Eigen::Index r = 0; r < 3; ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return flat;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kParse, "scenario must be a JSON object");

  Scenario s;
  try {
    const auto n = doc.at("n_sensors").get<long>();
    const auto m = doc.at("m_anchors").get<long>();
    if (n < 1 || m < 1) throw Error(ErrorKind::kParse, "n_sensors and m_anchors must be positive");
    s.conformation = read_matrix(doc, "conformation", n);
    s.anchors = read_matrix(doc, "anchors", m);
    s.prior.phi_theta_deg2 = doc.value("phi_theta_deg2", 10.0);
    s.prior.phi_t_m2 = doc.value("phi_t_m2", 5.0);
    s.sigma_w = doc.contains("sigma_w") ? doc.at("sigma_w").get<std::vector<double>>()
                                        : default_sigma_sweep();
    s.generator_mode =
        parse_generator_mode(doc.value("generator_mode", std::string("exact-rotation")));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed scenario: ") + e.what());
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  doc["n_sensors"] = s.conformation.cols();
  doc["m_anchors"] = s.anchors.cols();
  doc["conformation"] = write_matrix(s.conformation);
  doc["anchors"] = write_matrix(s.anchors);
  doc["phi_theta_deg2"] = s.prior.phi_theta_deg2;
  doc["phi_t_m2"] = s.prior.phi_t_m2;
  doc["sigma_w"] = s.sigma_w;
  doc["generator_mode"] = std::string(to_string(s.generator_mode));
  return doc.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write scenario file '" + path.string() + "'");
  out << serialize_scenario(scenario);
  if (!out) throw Error(ErrorKind::kIo, "failed writing scenario file '" + path.string() + "'");
}

}  // namespace rbl
