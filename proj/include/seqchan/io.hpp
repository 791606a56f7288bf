#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "seqchan/regions.hpp"
#include "seqchan/sim.hpp"
#include "seqchan/strategies.hpp"

namespace seqchan::io {

using Json = nlohmann::json;

/// Shortest decimal that parses back to the same double; "inf" / "-inf" / "nan".
std::string formatReal(double x);
/// Finite reals as JSON numbers, non-finite ones as the strings above.
Json realToJson(double x);
double realFromJson(const Json& j);

Json toJson(const ComplexMatrix& m);
ComplexMatrix matrixFromJson(const Json& j);

Json toJson(const DensityMatrix& s);
DensityMatrix stateFromJson(const Json& j);

Json toJson(const QuantumChannel& ch);
QuantumChannel channelFromJson(const Json& j);

Json toJson(const Povm& m);
Povm povmFromJson(const Json& j);

Json toJson(const Arm& a);
Arm armFromJson(const Json& j);

Json toJson(const SprtStrategy& s);
SprtStrategy strategyFromJson(const Json& j);

Json toJson(const ExponentRegion& r);
ExponentRegion regionFromJson(const Json& j);

Json toJson(const DivergenceValue& v);
Json toJson(const SimulationSummary& s);
Json toJson(const ConstraintReport& r);

std::string decisionName(Decision d);

/// Frontier CSV: "# key: value" metadata lines, then "vertex,r0,r1".
std::string regionCsv(const ExponentRegion& r, const std::map<std::string, std::string>& metadata = {});
ExponentRegion regionFromCsv(const std::string& text);

Json readJsonFile(const std::string& path);
std::string readTextFile(const std::string& path);
void writeTextFile(const std::string& path, const std::string& text);

}  // namespace seqchan::io
