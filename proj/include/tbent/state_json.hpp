#pragma once

#include "tbent/quantum_state.hpp"

#include <json.hpp>

namespace tbent {

inline constexpr const char* kStateSchema = "tbent.state/1";
inline constexpr const char* kDensitySchema = "tbent.density/1";

/// {"schema", "photon_count", "terms": [{"modes": [...], "re", "im"}]}
nlohmann::json state_to_json(const PureState& s);
PureState state_from_json(const nlohmann::json& j);

/// Row-major complex array with the declared qubit order.
nlohmann::json density_to_json(const DensityMatrix& rho, const std::vector<std::string>& qubit_order);
DensityMatrix density_from_json(const nlohmann::json& j);

}  // namespace tbent
