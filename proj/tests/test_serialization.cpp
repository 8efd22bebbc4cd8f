#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "hyperlq/csv.hpp"
#include "hyperlq/errors.hpp"
#include "hyperlq/models.hpp"
#include "hyperlq/riccati.hpp"
#include "hyperlq/serialization.hpp"

namespace hyperlq {
namespace {

namespace fs = std::filesystem;

TEST(Serialization, SystemRoundTripIsExact) {
  const SpectralSystem sys = build_star_network({1.0, 1.7, 2.2}, 0, 2, 6.0);
  const nlohmann::json j = ToJson(sys);
  EXPECT_EQ(j.at("kind"), "spectral_system");
  const SpectralSystem back = SystemFromJson(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.label(), sys.label());
  EXPECT_EQ((back.lambdas() - sys.lambdas()).norm(), 0.0);
  EXPECT_EQ((back.B_mod() - sys.B_mod()).norm(), 0.0);
  EXPECT_EQ((back.Q_obs() - sys.Q_obs()).norm(), 0.0);
}

TEST(Serialization, RiccatiRoundTripThroughFile) {
  const SpectralSystem sys = build_synthetic(2.0, 2.0, 5);
  const RiccatiSolution e = solve_are(sys);
  const fs::path dir = fs::temp_directory_path() / "hyperlq_serialization_test";
  fs::create_directories(dir);
  const std::string path = (dir / "e.json").string();
  SaveJson(path, ToJson(e));
  const RiccatiSolution back = RiccatiFromJson(LoadJson(path));
  EXPECT_TRUE(back.infinite_horizon());
  EXPECT_EQ(back.method, e.method);
  EXPECT_EQ(back.residual, e.residual);
  EXPECT_EQ((back.E - e.E).norm(), 0.0);
  const RiccatiSolution snap = integrate_dre(sys, 2.0, {2.0}).back();
  const RiccatiSolution snap_back = RiccatiFromJson(ToJson(snap));
  EXPECT_EQ(snap_back.horizon, 2.0);
  fs::remove_all(dir);
}

TEST(Serialization, MalformedInputIsRejected) {
  nlohmann::json j = ToJson(build_synthetic(2.0, 2.0, 3));
  nlohmann::json wrong_kind = j;
  wrong_kind["kind"] = "riccati_solution";
  EXPECT_THROW(SystemFromJson(wrong_kind), DomainError);
  nlohmann::json short_b = j;
  short_b["B_mod"].erase(0);
  EXPECT_THROW(SystemFromJson(short_b), DimensionError);
  nlohmann::json missing = j;
  missing.erase("lambdas");
  EXPECT_THROW(SystemFromJson(missing), DomainError);
  EXPECT_THROW(LoadJson("/nonexistent/path/system.json"), DomainError);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(FormatDouble(x)), x);
  }
  EXPECT_EQ(FormatDouble(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(FormatDouble(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(FormatDouble(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(CsvString({"a", "b"}, {{1.0, 2.0}, {0.5, 0.25}}), "a,b\n1,0.5\n2,0.25\n");
  EXPECT_THROW(CsvString({"a", "b"}, {{1.0, 2.0}, {0.5}}), DimensionError);
  EXPECT_THROW(CsvString({"a"}, {{1.0}, {2.0}}), DimensionError);
}

}  // namespace
}  // namespace hyperlq
