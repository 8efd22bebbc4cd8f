#include "hyperlq/serialization.hpp"

#include <fstream>
#include <stdexcept>

#include "hyperlq/errors.hpp"

namespace hyperlq {

namespace {

nlohmann::json RowMajor(const Mat& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Mat FromRowMajor(const nlohmann::json& arr, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols) {
    throw DimensionError(std::string(what) + " has the wrong number of entries");
  }
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr.at(i * cols + j).get<double>();
  return m;
}

}  // namespace

nlohmann::json ToJson(const SpectralSystem& system) {
  nlohmann::json j;
  j["kind"] = "spectral_system";
  j["label"] = system.label();
  j["n_modes"] = system.n_modes();
  j["n_controls"] = system.n_controls();
  j["lambdas"] = std::vector<double>(system.lambdas().data(),
                                     system.lambdas().data() + system.n_modes());
  j["B_mod"] = RowMajor(system.B_mod());
  j["Q_obs"] = RowMajor(system.Q_obs());
  return j;
}

SpectralSystem SystemFromJson(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "spectral_system") {
      throw DomainError("not a spectral_system document");
    }
    const int n = j.at("n_modes").get<int>();
    const int m = j.at("n_controls").get<int>();
    const auto lam = j.at("lambdas").get<std::vector<double>>();
    if (static_cast<int>(lam.size()) != n) throw DimensionError("lambdas length differs from n_modes");
    Vec lambdas = Eigen::Map<const Vec>(lam.data(), n);
    return SpectralSystem(std::move(lambdas), FromRowMajor(j.at("B_mod"), n, m, "B_mod"),
                          FromRowMajor(j.at("Q_obs"), n, n, "Q_obs"),
                          j.at("label").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed system document: ") + e.what());
  }
}

nlohmann::json ToJson(const RiccatiSolution& s) {
  nlohmann::json j;
  j["kind"] = "riccati_solution";
  j["dim"] = s.E.rows();
  j["horizon"] = s.infinite_horizon() ? nlohmann::json(nullptr) : nlohmann::json(s.horizon);
  j["residual"] = s.residual;
  j["method"] = s.method;
  j["E"] = RowMajor(s.E);
  return j;
}

RiccatiSolution RiccatiFromJson(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "riccati_solution") {
      throw DomainError("not a riccati_solution document");
    }
    const Eigen::Index d = j.at("dim").get<Eigen::Index>();
    RiccatiSolution s;
    s.E = FromRowMajor(j.at("E"), d, d, "E");
    s.horizon = j.at("horizon").is_null() ? kInfinity : j.at("horizon").get<double>();
    s.residual = j.at("residual").get<double>();
    s.method = j.at("method").get<std::string>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed Riccati document: ") + e.what());
  }
}

void SaveJson(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
}

nlohmann::json LoadJson(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("cannot open " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(path + ": " + e.what());
  }
}

}  // namespace hyperlq
