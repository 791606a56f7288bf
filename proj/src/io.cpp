#include "seqchan/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "seqchan/error.hpp"

namespace seqchan::io {

namespace {

[[noreturn]] void parseFail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) parseFail(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::size_t count(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    parseFail(std::string("field '") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

RealVector realsFromJson(const Json& j) {
  if (!j.is_array()) parseFail("expected an array of reals");
  RealVector v;
  for (const auto& x : j) v.push_back(realFromJson(x));
  return v;
}

Json realsToJson(const RealVector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(realToJson(x));
  return a;
}

}  // namespace

std::string formatReal(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json realToJson(double x) {
  if (std::isfinite(x)) return x;
  return formatReal(x);
}

double realFromJson(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  parseFail("expected a real number or \"inf\"");
}

Json toJson(const ComplexMatrix& m) {
  Json data = Json::array();
  for (const auto& z : m.data()) data.push_back(Json::array({z.real(), z.imag()}));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

ComplexMatrix matrixFromJson(const Json& j) {
  const std::size_t rows = count(j, "rows"), cols = count(j, "cols");
  const Json& data = field(j, "data");
  if (!data.is_array() || data.size() != rows * cols)
    parseFail("matrix data must hold rows*cols [re, im] pairs");
  std::vector<Complex> entries;
  entries.reserve(data.size());
  for (const auto& e : data) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      parseFail("matrix entry must be [re, im]");
    entries.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return ComplexMatrix(rows, cols, std::move(entries));
}

Json toJson(const DensityMatrix& s) {
  Json j{{"type", "state"}, {"matrix", toJson(s.matrix())}};
  if (s.label()) j["label"] = *s.label();
  return j;
}

DensityMatrix stateFromJson(const Json& j) {
  std::optional<std::string> label;
  if (j.contains("label")) label = j.at("label").get<std::string>();
  return DensityMatrix(matrixFromJson(field(j, "matrix")), label);
}

Json toJson(const QuantumChannel& ch) {
  Json kraus = Json::array();
  for (const auto& k : ch.kraus()) kraus.push_back(toJson(k));
  Json j{{"type", "channel"}, {"inDim", ch.inDim()}, {"outDim", ch.outDim()}, {"kraus", kraus}};
  if (ch.label()) j["label"] = *ch.label();
  return j;
}

QuantumChannel channelFromJson(const Json& j) {
  const Json& kraus = field(j, "kraus");
  if (!kraus.is_array() || kraus.empty()) parseFail("channel needs a nonempty 'kraus' list");
  std::vector<ComplexMatrix> ks;
  for (const auto& k : kraus) ks.push_back(matrixFromJson(k));
  std::optional<std::string> label;
  if (j.contains("label")) label = j.at("label").get<std::string>();
  QuantumChannel ch(std::move(ks), label);
  if (j.contains("inDim") && count(j, "inDim") != ch.inDim()) parseFail("inDim does not match Kraus shape");
  if (j.contains("outDim") && count(j, "outDim") != ch.outDim()) parseFail("outDim does not match Kraus shape");
  return ch;
}

Json toJson(const Povm& m) {
  Json effects = Json::array();
  for (const auto& e : m.effects()) effects.push_back(toJson(e));
  return Json{{"type", "povm"}, {"dim", m.dim()}, {"isPvm", m.isPvm()}, {"effects", effects}};
}

Povm povmFromJson(const Json& j) {
  const Json& effects = field(j, "effects");
  if (!effects.is_array() || effects.empty()) parseFail("povm needs a nonempty 'effects' list");
  std::vector<ComplexMatrix> es;
  for (const auto& e : effects) es.push_back(matrixFromJson(e));
  return Povm(std::move(es));
}

Json toJson(const Arm& a) {
  return Json{{"input", toJson(a.input)},
              {"ancillaDim", a.ancillaDim},
              {"measurement", toJson(a.measurement)},
              {"p0", realsToJson(a.p0)},
              {"p1", realsToJson(a.p1)},
              {"llr", realsToJson(a.llr)}};
}

Arm armFromJson(const Json& j) {
  Arm a;
  a.input = stateFromJson(field(j, "input"));
  a.ancillaDim = count(j, "ancillaDim");
  a.measurement = povmFromJson(field(j, "measurement"));
  a.p0 = realsFromJson(field(j, "p0"));
  a.p1 = realsFromJson(field(j, "p1"));
  a.llr = realsFromJson(field(j, "llr"));
  const std::size_t k = a.measurement.outcomeCount();
  if (a.p0.size() != k || a.p1.size() != k || a.llr.size() != k)
    parseFail("arm outcome tables do not match the measurement");
  return a;
}

Json toJson(const SprtStrategy& s) {
  return Json{{"type", "sprt"},
              {"adaptive", s.adaptive},
              {"armZero", toJson(s.armZero)},
              {"armOne", toJson(s.armOne)},
              {"rateZeroOverOne", realToJson(s.rateZeroOverOne)},
              {"rateOneOverZero", realToJson(s.rateOneOverZero)},
              {"tau", realToJson(s.tau)},
              {"thresholdA", realToJson(s.thresholdA)},
              {"thresholdB", realToJson(s.thresholdB)},
              {"n", s.n},
              {"blockSize", s.blockSize}};
}

SprtStrategy strategyFromJson(const Json& j) {
  SprtStrategy s;
  s.adaptive = field(j, "adaptive").get<bool>();
  s.armZero = armFromJson(field(j, "armZero"));
  s.armOne = armFromJson(field(j, "armOne"));
  s.rateZeroOverOne = realFromJson(field(j, "rateZeroOverOne"));
  s.rateOneOverZero = realFromJson(field(j, "rateOneOverZero"));
  s.tau = realFromJson(field(j, "tau"));
  s.thresholdA = realFromJson(field(j, "thresholdA"));
  s.thresholdB = realFromJson(field(j, "thresholdB"));
  s.n = count(j, "n");
  s.blockSize = count(j, "blockSize");
  if (s.blockSize == 0) parseFail("blockSize must be >= 1");
  return s;
}

namespace {

RegionKind parseRegionKind(const std::string& s) {
  if (s == "rectangle") return RegionKind::Rectangle;
  if (s == "hull") return RegionKind::Hull;
  if (s == "converseRectangle") return RegionKind::ConverseRectangle;
  parseFail("unknown region kind '" + s + "'");
}

std::string boundName(BoundDirection b) { return b == BoundDirection::Inner ? "inner" : "outerEstimate"; }

BoundDirection parseBound(const std::string& s) {
  if (s == "inner") return BoundDirection::Inner;
  if (s == "outerEstimate") return BoundDirection::OuterEstimate;
  parseFail("unknown bound direction '" + s + "'");
}

}  // namespace

Json toJson(const ExponentRegion& r) {
  Json frontier = Json::array();
  for (const auto& p : r.frontier) frontier.push_back(Json::array({realToJson(p.r0), realToJson(p.r1)}));
  return Json{{"type", "region"},
              {"kind", regionKindName(r.kind)},
              {"label", r.label},
              {"blockSize", r.blockSize},
              {"alphaGrid", realsToJson(r.alphaGrid)},
              {"bound", boundName(r.bound)},
              {"frontier", frontier}};
}

ExponentRegion regionFromJson(const Json& j) {
  ExponentRegion r;
  r.kind = parseRegionKind(field(j, "kind").get<std::string>());
  r.label = field(j, "label").get<std::string>();
  r.blockSize = count(j, "blockSize");
  r.alphaGrid = realsFromJson(field(j, "alphaGrid"));
  r.bound = parseBound(field(j, "bound").get<std::string>());
  for (const auto& p : field(j, "frontier")) {
    if (!p.is_array() || p.size() != 2) parseFail("frontier vertex must be [r0, r1]");
    r.frontier.push_back({realFromJson(p[0]), realFromJson(p[1])});
  }
  return r;
}

Json toJson(const DivergenceValue& v) {
  Json j{{"value", realToJson(v.value)}, {"isLowerBound", v.isLowerBound}, {"isFinite", v.isFinite}};
  if (v.variationalEstimate) j["variationalEstimate"] = realToJson(*v.variationalEstimate);
  if (v.pvmEstimate) j["pvmEstimate"] = realToJson(*v.pvmEstimate);
  if (v.warning) j["warning"] = *v.warning;
  if (v.witness) {
    Json w{{"ancillaDim", v.witness->ancillaDim}};
    if (v.witness->input) w["input"] = toJson(*v.witness->input);
    if (v.witness->measurement) w["measurement"] = toJson(*v.witness->measurement);
    j["witness"] = w;
  }
  return j;
}

namespace {

Json statsJson(const HypothesisStats& h) {
  return Json{{"trials", h.trials},
              {"decidedZero", h.decidedZero},
              {"decidedOne", h.decidedOne},
              {"censored", h.censored},
              {"meanStopTime", realToJson(h.meanStopTime)},
              {"seStopTime", realToJson(h.seStopTime)},
              {"overshootProb", realToJson(h.overshootProb)},
              {"seOvershoot", realToJson(h.seOvershoot)},
              {"crossErrorEstimate", realToJson(h.crossErrorEstimate)}};
}

}  // namespace

Json toJson(const SimulationSummary& s) {
  return Json{{"n", s.n},
              {"thresholdA", realToJson(s.thresholdA)},
              {"thresholdB", realToJson(s.thresholdB)},
              {"h0", statsJson(s.h0)},
              {"h1", statsJson(s.h1)},
              {"alphaHat", realToJson(s.alphaHat)},
              {"betaHat", realToJson(s.betaHat)},
              {"seAlpha", realToJson(s.seAlpha)},
              {"seBeta", realToJson(s.seBeta)},
              {"exponentAlpha", realToJson(s.exponentAlpha)},
              {"exponentBeta", realToJson(s.exponentBeta)},
              {"censoredCount", s.censoredCount},
              {"waldAlphaHolds", s.waldAlphaHolds},
              {"waldBetaHolds", s.waldBetaHolds}};
}

Json toJson(const ConstraintReport& r) {
  return Json{{"type", r.type == ConstraintType::Expectation ? "expectation" : "probabilistic"},
              {"pass", r.pass},
              {"worstValue", realToJson(r.worstValue)},
              {"worstSe", realToJson(r.worstSe)},
              {"limit", realToJson(r.limit)},
              {"margin", realToJson(r.margin)}};
}

std::string decisionName(Decision d) {
  switch (d) {
    case Decision::Continue: return "continue";
    case Decision::Zero: return "0";
    case Decision::One: return "1";
    case Decision::Censored: return "censored";
  }
  return "?";
}

std::string regionCsv(const ExponentRegion& r, const std::map<std::string, std::string>& metadata) {
  std::ostringstream os;
  os << "# kind: " << regionKindName(r.kind) << "\n";
  os << "# label: " << r.label << "\n";
  os << "# blockSize: " << r.blockSize << "\n";
  os << "# bound: " << boundName(r.bound) << "\n";
  os << "# alphaGrid:";
  for (double a : r.alphaGrid) os << " " << formatReal(a);
  os << "\n";
  for (const auto& [k, v] : metadata) os << "# " << k << ": " << v << "\n";
  os << "vertex,r0,r1\n";
  for (std::size_t i = 0; i < r.frontier.size(); ++i)
    os << i << "," << formatReal(r.frontier[i].r0) << "," << formatReal(r.frontier[i].r1) << "\n";
  return os.str();
}

namespace {

double parseReal(const std::string& s) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) parseFail("bad number '" + s + "'");
  return v;
}

}  // namespace

ExponentRegion regionFromCsv(const std::string& text) {
  ExponentRegion r;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2);
      std::string value = colon + 2 <= line.size() ? line.substr(colon + 2) : "";
      if (key == "kind") r.kind = parseRegionKind(value);
      else if (key == "label") r.label = value;
      else if (key == "blockSize") r.blockSize = static_cast<std::size_t>(parseReal(value));
      else if (key == "bound") r.bound = parseBound(value);
      else if (key == "alphaGrid") {
        std::istringstream vs(line.substr(colon + 1));
        std::string tok;
        while (vs >> tok) r.alphaGrid.push_back(parseReal(tok));
      }
      continue;
    }
    if (!header) {
      if (line != "vertex,r0,r1") parseFail("region CSV header missing");
      header = true;
      continue;
    }
    const auto c1 = line.find(','), c2 = line.rfind(',');
    if (c1 == std::string::npos || c1 == c2) parseFail("bad region CSV row");
    r.frontier.push_back({parseReal(line.substr(c1 + 1, c2 - c1 - 1)), parseReal(line.substr(c2 + 1))});
  }
  if (!header) parseFail("region CSV header missing");
  return r;
}

std::string readTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parseFail("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json readJsonFile(const std::string& path) {
  try {
    return Json::parse(readTextFile(path));
  } catch (const Json::parse_error& e) {
    parseFail("'" + path + "': " + e.what());
  }
}

void writeTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << text;
}

}  // namespace seqchan::io
