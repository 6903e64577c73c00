#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rydsim/params.hpp"

namespace rydsim {

// ordered_json keeps insertion order, making dumps (and content hashes)
// reproducible.
using json = nlohmann::ordered_json;

/// Config problems carry the offending key path; the CLI maps them to exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double require_number(const json& j, const std::string& section,
                             const std::string& key) {
  if (!j.contains(key))
    throw ConfigError("config: missing key " + section + "." + key);
  if (!j.at(key).is_number())
    throw ConfigError("config: " + section + "." + key + " must be a number");
  return j.at(key).get<double>();
}

inline const json& require_section(const json& j, const std::string& name) {
  if (!j.contains(name) || !j.at(name).is_object())
    throw ConfigError("config: missing section " + name);
  return j.at(name);
}

}  // namespace detail

inline json to_json(const LaserDrive& d) {
  return json{{"omega_p_mhz", d.omega_p_mhz}, {"omega_c_mhz", d.omega_c_mhz},
              {"delta_p_mhz", d.delta_p_mhz}, {"delta_c_mhz", d.delta_c_mhz},
              {"lambda_p_nm", d.lambda_p_nm}, {"lambda_c_nm", d.lambda_c_nm}};
}

inline json to_json(const AtomSystem& a) {
  return json{{"gamma_eg_mhz", a.gamma_eg_mhz}, {"gamma_re_mhz", a.gamma_re_mhz},
              {"gamma_rg_mhz", a.gamma_rg_mhz}, {"mu_eg_cm", a.mu_eg_cm},
              {"mass_kg", a.mass_kg}};
}

inline json to_json(const VaporParams& v) {
  return json{{"density_cm3", v.density_cm3},
              {"temperature_k", v.temperature_k},
              {"mass_kg", v.mass_kg}};
}

inline json to_json(const InteractionParams& i) {
  return json{{"c6_mhz_um6", i.c6_mhz_um6}, {"principal_n", i.principal_n}};
}

inline json to_json(const SimulationParams& p) {
  return json{{"laser", to_json(p.laser)},
              {"atom", to_json(p.atom)},
              {"vapor", to_json(p.vapor)},
              {"interaction", to_json(p.interaction)}};
}

/// Strict loader: all sections and fields are required (unit suffixes in the
/// key names are part of the contract). The vapor inherits the atomic mass.
inline SimulationParams params_from_json(const json& root) {
  SimulationParams p;
  {
    const json& j = detail::require_section(root, "laser");
    p.laser.omega_p_mhz = detail::require_number(j, "laser", "omega_p_mhz");
    p.laser.omega_c_mhz = detail::require_number(j, "laser", "omega_c_mhz");
    p.laser.delta_p_mhz = detail::require_number(j, "laser", "delta_p_mhz");
    p.laser.delta_c_mhz = detail::require_number(j, "laser", "delta_c_mhz");
    p.laser.lambda_p_nm = detail::require_number(j, "laser", "lambda_p_nm");
    p.laser.lambda_c_nm = detail::require_number(j, "laser", "lambda_c_nm");
  }
  {
    const json& j = detail::require_section(root, "atom");
    p.atom.gamma_eg_mhz = detail::require_number(j, "atom", "gamma_eg_mhz");
    p.atom.gamma_re_mhz = detail::require_number(j, "atom", "gamma_re_mhz");
    p.atom.gamma_rg_mhz = detail::require_number(j, "atom", "gamma_rg_mhz");
    p.atom.mu_eg_cm = detail::require_number(j, "atom", "mu_eg_cm");
    p.atom.mass_kg = detail::require_number(j, "atom", "mass_kg");
  }
  {
    const json& j = detail::require_section(root, "vapor");
    p.vapor.density_cm3 = detail::require_number(j, "vapor", "density_cm3");
    p.vapor.temperature_k = detail::require_number(j, "vapor", "temperature_k");
    p.vapor.mass_kg = p.atom.mass_kg;
  }
  {
    const json& j = detail::require_section(root, "interaction");
    p.interaction.c6_mhz_um6 = detail::require_number(j, "interaction", "c6_mhz_um6");
    p.interaction.principal_n =
        static_cast<int>(detail::require_number(j, "interaction", "principal_n"));
  }
  try {
    p.validate();  // throws std::invalid_argument on hard violations
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return p;
}

inline SimulationParams load_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    throw ConfigError("config: parse error in " + path + ": " + e.what());
  }
  return params_from_json(root);
}

}  // namespace rydsim
