#include "tbent/state_json.hpp"

#include "tbent/errors.hpp"

namespace tbent {

using nlohmann::json;

json state_to_json(const PureState& s) {
  json terms = json::array();
  for (const auto& [modes, amp] : s.terms()) {
    json labels = json::array();
    for (const auto& m : modes) labels.push_back(to_string(m));
    terms.push_back({{"modes", labels}, {"re", amp.real()}, {"im", amp.imag()}});
  }
  return {{"schema", kStateSchema}, {"photon_count", s.photon_count()}, {"terms", terms}};
}

PureState state_from_json(const json& j) {
  if (j.value("schema", std::string{}) != kStateSchema) {
    throw ConfigError(std::string("state document must declare schema ") + kStateSchema);
  }
  std::vector<std::pair<ModeTuple, Complex>> terms;
  for (const auto& t : j.at("terms")) {
    ModeTuple modes;
    for (const auto& label : t.at("modes")) modes.push_back(parse_mode_label(label.get<std::string>()));
    terms.emplace_back(std::move(modes), Complex{t.at("re").get<double>(), t.at("im").get<double>()});
  }
  PureState s = PureState::from_terms(terms);
  if (j.contains("photon_count") && !s.empty() &&
      j.at("photon_count").get<int>() != s.photon_count()) {
    throw ArityError("photon_count does not match the term arity");
  }
  return s;
}

json density_to_json(const DensityMatrix& rho, const std::vector<std::string>& qubit_order) {
  json re = json::array();
  json im = json::array();
  for (int r = 0; r < rho.dim(); ++r) {
    for (int c = 0; c < rho.dim(); ++c) {
      re.push_back(rho.matrix()(r, c).real());
      im.push_back(rho.matrix()(r, c).imag());
    }
  }
  return {{"schema", kDensitySchema}, {"dim", rho.dim()}, {"qubit_order", qubit_order},
          {"re", re}, {"im", im}};
}

DensityMatrix density_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (static_cast<int>(re.size()) != dim * dim || static_cast<int>(im.size()) != dim * dim) {
    throw DimensionError("density matrix arrays do not match dim*dim");
  }
  Eigen::MatrixXcd m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      const auto k = static_cast<std::size_t>(r * dim + c);
      m(r, c) = Complex{re[k].get<double>(), im[k].get<double>()};
    }
  }
  return DensityMatrix::from_matrix(m);
}

}  // namespace tbent
