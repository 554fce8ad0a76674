#include <doctest.h>

#include <filesystem>
#include <string>

#include "fbmdrift/error.hpp"
#include "fbmdrift/io.hpp"
#include "fbmdrift/sde.hpp"

using namespace fbmdrift;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t hits = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++hits;
  return hits;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fbmdrift_io_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("numbers use 17 significant digits") {
  CHECK(io::format_number(0.1) == "0.10000000000000001");
  CHECK(io::format_number(2.0) == "2");
}

TEST_CASE("fbm path serializers") {
  const auto path = sample_fbm(4, 0.5, HurstIndex(0.7), 3);
  const std::string csv = io::fbm_path_csv(path);
  CHECK(csv.rfind("t,value\n", 0) == 0);
  CHECK(count(csv, "\n") == 6);
  const auto j = io::fbm_path_json(path);
  CHECK(j.at("hurst").get<double>() == 0.7);
  CHECK(j.at("dt").get<double>() == 0.5);
  CHECK(j.at("seed").get<std::uint64_t>() == 3);
  CHECK(j.at("values").size() == 5);
}

TEST_CASE("sample path csv round trip") {
  const auto model = builtin_drift("linear", {{"theta", 1.0}});
  const auto grid = make_grid(64, 2.5);
  const auto path = simulate(model, 0.5, 0.0, HurstIndex(0.7), grid, 4, 8, 5.0);
  const auto dir = scratch("roundtrip");
  io::write_text(dir / "path.csv", io::sample_path_csv(path));
  const auto back = io::read_sample_path_csv(dir / "path.csv", HurstIndex(0.7));
  CHECK(back.grid.n == 64);
  CHECK(back.grid.alpha_n == doctest::Approx(grid.alpha_n).epsilon(1e-12));
  REQUIRE(back.obs.size() == path.obs.size());
  for (std::size_t i = 0; i < back.obs.size(); ++i) CHECK(back.obs[i] == path.obs[i]);
  CHECK_FALSE(back.has_fine());

  const auto meta = io::sample_path_metadata(path);
  for (const char* key : {"model", "sigma", "hurst", "n", "gamma", "alpha_n", "seed", "refine", "burn_in"}) {
    CHECK(meta.contains(key));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("reading a non-uniform or missing csv fails with IoError") {
  const auto dir = scratch("bad");
  io::write_text(dir / "bad.csv", "t,X\n0,1\n0.1,2\n0.3,3\n");
  CHECK_THROWS_AS(io::read_sample_path_csv(dir / "bad.csv", HurstIndex(0.7)), Error);
  try {
    io::read_sample_path_csv(dir / "missing.csv", HurstIndex(0.7));
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("writing below a regular file fails with IoError") {
  const auto dir = scratch("blocked");
  io::write_text(dir / "file", "x");
  try {
    io::write_text(dir / "file" / "child.csv", "y");
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("curve serializers include terms when present") {
  EstimateCurve curve;
  curve.x = {0.0, 1.0};
  curve.b_hat = {0.5, std::nan("")};
  curve.mass = {1.0, 0.0};
  curve.defined = {1, 0};
  std::string csv = io::curve_csv(curve);
  CHECK(csv.rfind("x,b_hat,mass,defined\n", 0) == 0);
  CHECK(count(csv, "\n") == 3);
  curve.terms = std::vector<EstimateTerms>{{0.1, 0.2, 0.3, 1.0}, {0.0, 0.0, 0.0, 0.0}};
  csv = io::curve_csv(curve);
  CHECK(csv.rfind("x,b_hat,mass,defined,I,II,III,S\n", 0) == 0);
  const auto j = io::curve_json(curve);
  CHECK(j.at("b_hat")[1].is_null());
  CHECK(j.at("terms").size() == 2);
}

TEST_CASE("svg plot has one polyline per series and power-of-two ticks") {
  std::vector<io::SvgSeries> series{{"a", {1024, 4096, 16384}, {0.5, 0.25, 0.125}},
                                    {"b", {1024, 4096, 16384}, {0.4, 0.3, 0.2}}};
  const std::string svg = io::svg_line_plot({"title", "n", "err", true, true}, series);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<polyline") == 2);
  CHECK(svg.find("2^10") != std::string::npos);
  CHECK(svg.find("2^14") != std::string::npos);
  CHECK(svg.find("class=\"ytick\"") != std::string::npos);
}
