#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "seqchan/error.hpp"
#include "seqchan/io.hpp"

using namespace seqchan;
using io::Json;

namespace {

QuantumChannel bernoulliReplacer(double p) {
  const double d[] = {1.0 - p, p};
  return zoo::replacer(DensityMatrix(ComplexMatrix::diagonal(std::span<const double>(d))), 2);
}

Json reparse(const Json& j) { return Json::parse(j.dump()); }

}  // namespace

TEST_CASE("real formatting is shortest round-trip and names non-finite values") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 0.8317766166719343, 1e22}) {
    CHECK(std::stod(io::formatReal(x)) == x);
    CHECK(io::realFromJson(reparse(io::realToJson(x))) == x);
  }
  CHECK(io::formatReal(kInfinity) == "inf");
  CHECK(io::formatReal(-kInfinity) == "-inf");
  CHECK(io::formatReal(std::nan("")) == "nan");
  CHECK(io::realFromJson(reparse(io::realToJson(kInfinity))) == kInfinity);
  CHECK(std::isnan(io::realFromJson(reparse(io::realToJson(std::nan(""))))));
  CHECK_THROWS_AS(io::realFromJson(Json("pi")), Error);
}

TEST_CASE("matrix, state, channel and povm round-trip exactly") {
  random::Engine rng(4);
  const auto rho = random::densityMatrix(3, rng);
  CHECK(io::stateFromJson(reparse(io::toJson(rho))).matrix() == rho.matrix());
  const auto ch = random::channel(2, 3, rng);
  const auto back = io::channelFromJson(reparse(io::toJson(ch)));
  REQUIRE(back.kraus().size() == ch.kraus().size());
  for (std::size_t k = 0; k < ch.kraus().size(); ++k) CHECK(back.kraus()[k] == ch.kraus()[k]);
  CHECK(back.inDim() == 2);
  CHECK(back.outDim() == 3);
  const auto m = random::rankOnePvm(4, rng);
  const auto mb = io::povmFromJson(reparse(io::toJson(m)));
  REQUIRE(mb.effects().size() == m.effects().size());
  for (std::size_t k = 0; k < m.effects().size(); ++k) CHECK(mb.effects()[k] == m.effects()[k]);
}

TEST_CASE("strategy and region round-trip exactly") {
  SprtStrategy s;
  s.armZero = makeArm(bernoulliReplacer(0.2), bernoulliReplacer(0.8), DensityMatrix::pure(ComplexVector{1.0, 0.0}), 1,
                      Povm::fromBasis(ComplexMatrix::identity(2)));
  s.armOne = makeArm(zoo::identity(2), zoo::amplitudeDamping(1.0), DensityMatrix::pure(ComplexVector{0.0, 1.0}), 1,
                     Povm::fromBasis(ComplexMatrix::identity(2)));
  s.rateZeroOverOne = 0.83;
  s.rateOneOverZero = 0.61;
  setThresholds(s, 123, 0.07);
  CHECK(io::strategyFromJson(reparse(io::toJson(s))) == s);  // includes infinite llr entries

  auto r = hullRegion({{0.1, 0.9}, {0.5, 0.5}, {0.8, 0.05}});
  r.label = "nonAdaptive";
  CHECK(io::regionFromJson(reparse(io::toJson(r))) == r);
  const auto fromCsv = io::regionFromCsv(io::regionCsv(r));
  CHECK(fromCsv.frontier == r.frontier);
  CHECK(fromCsv.kind == r.kind);
  CHECK(fromCsv.label == r.label);

  auto c = rectangle({kInfinity, 0.47}, RegionKind::ConverseRectangle);
  c.alphaGrid = {1.05, 1.5};
  c.blockSize = 2;
  c.bound = BoundDirection::OuterEstimate;
  CHECK(io::regionFromJson(reparse(io::toJson(c))) == c);
  CHECK(io::regionFromCsv(io::regionCsv(c)) == c);
}

TEST_CASE("malformed documents raise ParseError") {
  const auto expectParse = [](auto&& f) {
    try {
      f();
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  };
  expectParse([] { io::matrixFromJson(Json{{"rows", 2}, {"cols", 2}, {"data", Json::array()}}); });
  expectParse([] { io::channelFromJson(Json{{"type", "state"}}); });
  expectParse([] { io::regionFromCsv("vertex,r0,r1\n0,abc,1\n"); });
  expectParse([] { io::readJsonFile("/nonexistent/file.json"); });
}

TEST_CASE("invalid payloads keep their domain error") {
  // parses fine but is not trace preserving
  Json ch = io::toJson(zoo::identity(2));
  ch["kraus"][0]["data"][0][0] = 2.0;
  CHECK_THROWS_AS(io::channelFromJson(ch), Error);
}

TEST_CASE("text file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "seqchan_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "x.json").string();
  io::writeTextFile(path, "{\"a\": 1}\n");
  CHECK(io::readTextFile(path) == "{\"a\": 1}\n");
  CHECK(io::readJsonFile(path)["a"] == 1);
  std::filesystem::remove_all(dir);
}
