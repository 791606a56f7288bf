#include "seqchan/app.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "seqchan/error.hpp"
#include "seqchan/io.hpp"

namespace seqchan::app {

namespace {

using io::Json;
namespace fs = std::filesystem;

// Raised for anything wrong with the configuration itself (exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const char* kConfigHelp = R"(Config file (JSON). Unknown keys are rejected.
  task            divergence | simulate | sweep | regions (optional; must match the command)
  seed            base seed for optimizer restarts, sampling and simulation streams
  logBase         "e" (nats) or "2" (bits) for reported information quantities
  output          output directory (overridden by --out)
  channels.n0     channel under hypothesis 0; channels.n1 under hypothesis 1. Each is
                  {"zoo": identity|depolarizing|amplitudeDamping|dephasing|replacer|classical|random, ...},
                  {"file": path to a channel document}, or an inline channel document
  optimizer       restarts, blockRestarts, maxIters, innerMaxIters, pvmRestarts,
                  tolerance, crossCheckTol, includeMaximallyEntangled
  divergence      kinds [relEntropy|measured|maxDiv|sandwiched], alphas (for sandwiched), blockSize
  simulate        strategy sprt|block|nonAdaptive, n (budget in channel uses), tau (slack per use,
                  default 0.1 * smaller rate), trials (per hypothesis), constraint expectation|probabilistic,
                  epsilon, blockSize, recordTrials, input/ancillaDim/measurement (nonAdaptive)
  sweep           budgets (ascending), tau, trials, epsilon, blockSize
  regions         include [nonAdaptive|adaptive|converse], blockSizes, alphas, converseBlockSize,
                  samples, slack
Exit codes: 0 success, 2 configuration error, 3 numerical failure.)";

void checkKeys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
T get(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

double getReal(const Json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return io::realFromJson(j.at(key));
  } catch (const Error&) {
    throw ConfigError(where + "." + key + " must be a number");
  }
}

std::size_t getCount(const Json& j, const char* key, std::size_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(where + "." + key + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> getReals(const Json& j, const char* key, std::vector<double> fallback,
                             const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + "." + key + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::string> getStrings(const Json& j, const char* key, std::vector<std::string> fallback,
                                    const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) throw ConfigError(where + "." + key + " must hold strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

DensityMatrix stateSpec(const Json& j, const std::string& where) {
  if (j.is_object() && j.contains("diag")) {
    checkKeys(j, {"diag", "label"}, where);
    const auto d = getReals(j, "diag", {}, where);
    return DensityMatrix(ComplexMatrix::diagonal(std::span<const double>(d)));
  }
  if (j.is_object() && j.contains("file")) {
    checkKeys(j, {"file"}, where);
    return io::stateFromJson(io::readJsonFile(j.at("file").get<std::string>()));
  }
  if (j.is_object() && j.contains("matrix")) return io::stateFromJson(j);
  return DensityMatrix(io::matrixFromJson(j));
}

QuantumChannel channelSpec(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  if (j.contains("file")) {
    checkKeys(j, {"file"}, where);
    return io::channelFromJson(io::readJsonFile(j.at("file").get<std::string>()));
  }
  if (j.contains("kraus")) {
    checkKeys(j, {"type", "kraus", "inDim", "outDim", "label"}, where);
    return io::channelFromJson(j);
  }
  if (!j.contains("zoo")) throw ConfigError(where + " needs 'zoo', 'file' or 'kraus'");
  const auto name = get<std::string>(j, "zoo", "", where);
  if (name == "identity") {
    checkKeys(j, {"zoo", "dim"}, where);
    return zoo::identity(getCount(j, "dim", 2, where));
  }
  if (name == "depolarizing") {
    checkKeys(j, {"zoo", "p", "dim"}, where);
    return zoo::depolarizing(getReal(j, "p", 0.5, where), getCount(j, "dim", 2, where));
  }
  if (name == "amplitudeDamping") {
    checkKeys(j, {"zoo", "gamma"}, where);
    return zoo::amplitudeDamping(getReal(j, "gamma", 0.5, where));
  }
  if (name == "dephasing") {
    checkKeys(j, {"zoo", "p"}, where);
    return zoo::dephasing(getReal(j, "p", 0.5, where));
  }
  if (name == "replacer") {
    checkKeys(j, {"zoo", "state", "inDim"}, where);
    if (!j.contains("state")) throw ConfigError(where + ".state is required");
    return zoo::replacer(stateSpec(j.at("state"), where + ".state"), getCount(j, "inDim", 2, where));
  }
  if (name == "classical") {
    checkKeys(j, {"zoo", "stochastic"}, where);
    if (!j.contains("stochastic") || !j.at("stochastic").is_array())
      throw ConfigError(where + ".stochastic must be a matrix of rows");
    std::vector<RealVector> rows;
    for (const auto& row : j.at("stochastic")) {
      RealVector r;
      for (const auto& x : row) r.push_back(x.get<double>());
      rows.push_back(r);
    }
    return zoo::classical(rows);
  }
  if (name == "random") {
    checkKeys(j, {"zoo", "inDim", "outDim", "envDim", "seed"}, where);
    random::Engine rng(get<std::uint64_t>(j, "seed", 1, where));
    return random::channel(getCount(j, "inDim", 2, where), getCount(j, "outDim", 2, where), rng,
                           getCount(j, "envDim", 0, where));
  }
  throw ConfigError(where + ": unknown zoo channel '" + name + "'");
}

struct Config {
  Json snapshot;
  std::string task;
  std::uint64_t seed = 1;
  std::string logBase = "e";
  std::string output = "out";
  QuantumChannel n0, n1;
  OptimizerConfig optimizer;
  Json divergence = Json::object();
  Json simulate = Json::object();
  Json sweep = Json::object();
  Json regions = Json::object();
};

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> logBase;
  bool noTimestamp = false;
};

Config loadConfig(const std::string& command, const GlobalFlags& flags) {
  if (flags.config.empty()) throw ConfigError("--config is required");
  Json raw;
  try {
    raw = io::readJsonFile(flags.config);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  checkKeys(raw, {"task", "seed", "logBase", "output", "channels", "optimizer", "divergence", "simulate",
                  "sweep", "regions"},
            "config");
  Config c;
  c.task = get<std::string>(raw, "task", command, "config");
  if (command != "validate" && c.task != command)
    throw ConfigError("config task '" + c.task + "' does not match command '" + command + "'");
  if (flags.seed) raw["seed"] = *flags.seed;
  if (flags.logBase) raw["logBase"] = *flags.logBase;
  c.seed = get<std::uint64_t>(raw, "seed", 1, "config");
  c.logBase = get<std::string>(raw, "logBase", "e", "config");
  if (c.logBase != "e" && c.logBase != "2") throw ConfigError("logBase must be \"e\" or \"2\"");
  c.output = flags.out ? *flags.out : get<std::string>(raw, "output", "out", "config");

  if (!raw.contains("channels")) throw ConfigError("config.channels is required");
  const Json& ch = raw.at("channels");
  checkKeys(ch, {"n0", "n1"}, "channels");
  if (!ch.contains("n0") || !ch.contains("n1")) throw ConfigError("channels.n0 and channels.n1 are required");
  try {
    c.n0 = channelSpec(ch.at("n0"), "channels.n0");
    c.n1 = channelSpec(ch.at("n1"), "channels.n1");
  } catch (const Error& e) {
    throw ConfigError(std::string("channels: ") + e.what());
  }
  if (c.n0.inDim() != c.n1.inDim() || c.n0.outDim() != c.n1.outDim())
    throw ConfigError("channels.n0 and channels.n1 have different shapes");

  const Json opt = raw.value("optimizer", Json::object());
  checkKeys(opt, {"restarts", "blockRestarts", "maxIters", "innerMaxIters", "pvmRestarts", "tolerance",
                  "crossCheckTol", "includeMaximallyEntangled"},
            "optimizer");
  auto& o = c.optimizer;
  o.restarts = static_cast<int>(getCount(opt, "restarts", static_cast<std::size_t>(o.restarts), "optimizer"));
  o.blockRestarts =
      static_cast<int>(getCount(opt, "blockRestarts", static_cast<std::size_t>(o.blockRestarts), "optimizer"));
  o.maxIters = static_cast<int>(getCount(opt, "maxIters", static_cast<std::size_t>(o.maxIters), "optimizer"));
  o.innerMaxIters =
      static_cast<int>(getCount(opt, "innerMaxIters", static_cast<std::size_t>(o.innerMaxIters), "optimizer"));
  o.pvmRestarts =
      static_cast<int>(getCount(opt, "pvmRestarts", static_cast<std::size_t>(o.pvmRestarts), "optimizer"));
  o.tolerance = getReal(opt, "tolerance", o.tolerance, "optimizer");
  o.crossCheckTol = getReal(opt, "crossCheckTol", o.crossCheckTol, "optimizer");
  o.includeMaximallyEntangled = get<bool>(opt, "includeMaximallyEntangled", o.includeMaximallyEntangled, "optimizer");
  o.seed = c.seed;

  c.divergence = raw.value("divergence", Json::object());
  checkKeys(c.divergence, {"kinds", "alphas", "blockSize"}, "divergence");
  c.simulate = raw.value("simulate", Json::object());
  checkKeys(c.simulate, {"strategy", "n", "tau", "trials", "constraint", "epsilon", "blockSize",
                         "recordTrials", "input", "ancillaDim", "measurement"},
            "simulate");
  c.sweep = raw.value("sweep", Json::object());
  checkKeys(c.sweep, {"budgets", "tau", "trials", "epsilon", "blockSize"}, "sweep");
  c.regions = raw.value("regions", Json::object());
  checkKeys(c.regions, {"include", "blockSizes", "alphas", "converseBlockSize", "samples", "slack"}, "regions");

  raw["task"] = c.task;
  raw.erase("output");  // keeps snapshots comparable across output directories
  c.snapshot = raw;
  return c;
}

struct Units {
  double scale = 1.0;
  std::string name = "nats";
};

Units unitsFor(const Config& c) {
  if (c.logBase == "2") return {1.0 / std::numbers::ln2, "bits"};
  return {};
}

std::string csvReal(double x) { return io::formatReal(x); }

class OutputDir {
 public:
  OutputDir(const Config& c, const std::string& command, bool noTimestamp)
      : dir_(c.output), command_(command), seed_(c.seed), noTimestamp_(noTimestamp) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "'");
    write("config.json", c.snapshot.dump(2) + "\n");
  }

  void write(const std::string& name, const std::string& text) {
    io::writeTextFile((dir_ / name).string(), text);
    files_.push_back(name);
  }

  void finish() {
    Json m{{"library", "seqchan"}, {"version", kVersion}, {"command", command_}, {"seed", seed_}};
    if (!noTimestamp_) {
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      std::ostringstream ts;
      ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
      m["timestamp"] = ts.str();
    }
    files_.push_back("manifest.json");
    m["files"] = files_;
    io::writeTextFile((dir_ / "manifest.json").string(), m.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::string command_;
  std::uint64_t seed_;
  bool noTimestamp_;
  std::vector<std::string> files_;
};

// divergence ---------------------------------------------------------------

int cmdDivergence(const Config& c, bool noTimestamp, std::ostream& out) {
  const auto kinds = getStrings(c.divergence, "kinds", {"relEntropy", "measured", "maxDiv"}, "divergence");
  const auto alphas = getReals(c.divergence, "alphas", {1.5, 2.0}, "divergence");
  const std::size_t l = getCount(c.divergence, "blockSize", 1, "divergence");
  if (l == 0) throw ConfigError("divergence.blockSize must be >= 1");
  std::vector<DivergenceSpec> specs;
  for (const auto& k : kinds) {
    if (k == "sandwiched") {
      for (double a : alphas) {
        if (!(a > 1.0)) throw ConfigError("divergence.alphas must exceed 1");
        specs.push_back(DivergenceSpec::sandwiched(a));
      }
      continue;
    }
    try {
      specs.push_back(parseKind(k));
    } catch (const Error&) {
      throw ConfigError("unknown divergence kind '" + k + "'");
    }
  }
  const Units u = unitsFor(c);
  OutputDir dir(c, "divergence", noTimestamp);
  std::ostringstream csv;
  csv << "direction,kind,alpha,block_size,value,unit,is_finite,bound,variational_estimate,pvm_estimate,warning\n";
  Json report = Json::array();
  for (const auto& [name, a, b] :
       {std::tuple{"N0||N1", &c.n0, &c.n1}, std::tuple{"N1||N0", &c.n1, &c.n0}}) {
    for (const auto& spec : specs) {
      const auto est = blockDivergence(*a, *b, l, spec, c.optimizer);
      DivergenceValue v = est.total;
      v.value = est.valuePerUse * u.scale;
      if (v.variationalEstimate) *v.variationalEstimate *= u.scale / static_cast<double>(l);
      if (v.pvmEstimate) *v.pvmEstimate *= u.scale / static_cast<double>(l);
      const std::string kind = spec.kind == DivergenceKind::SandwichedRenyi ? "sandwiched" : kindName(spec);
      const std::string bound = v.isLowerBound ? "lower" : "exact";
      csv << name << "," << kind << "," << (spec.kind == DivergenceKind::SandwichedRenyi ? csvReal(spec.alpha) : "")
          << "," << l << "," << csvReal(v.value) << "," << u.name << "," << (v.isFinite ? "true" : "false") << ","
          << bound << "," << (v.variationalEstimate ? csvReal(*v.variationalEstimate) : "") << ","
          << (v.pvmEstimate ? csvReal(*v.pvmEstimate) : "") << "," << (v.warning ? "\"" + *v.warning + "\"" : "")
          << "\n";
      Json entry = io::toJson(v);
      entry["direction"] = name;
      entry["kind"] = kind;
      if (spec.kind == DivergenceKind::SandwichedRenyi) entry["alpha"] = spec.alpha;
      entry["blockSize"] = l;
      entry["unit"] = u.name;
      report.push_back(entry);
      out << name << " " << kindName(spec) << " = " << io::formatReal(v.value) << " " << u.name << " (" << bound
          << (v.isFinite ? "" : ", infinite") << ")\n";
    }
  }
  dir.write("divergences.csv", csv.str());
  dir.write("divergences.json", report.dump(2) + "\n");
  dir.finish();
  return kOk;
}

// simulate / sweep ------------------------------------------------------------

SprtStrategy buildStrategy(const Config& c, const Json& task, const std::string& where, std::size_t n,
                           std::optional<double> tau) {
  const auto kind = get<std::string>(task, "strategy", "sprt", where);
  const std::size_t l = getCount(task, "blockSize", kind == "block" ? 2 : 1, where);
  if (l == 0) throw ConfigError(where + ".blockSize must be >= 1");
  if (kind == "sprt") return liftToBlocks(c.n0, c.n1, l, n, tau, c.optimizer);
  if (kind == "block") return liftToBlocks(c.n0, c.n1, l, n, tau, c.optimizer);
  if (kind == "nonAdaptive") {
    if (!task.contains("input") || !task.contains("measurement"))
      throw ConfigError(where + ": nonAdaptive needs 'input' and 'measurement'");
    DensityMatrix input;
    Povm m;
    try {
      input = stateSpec(task.at("input"), where + ".input");
      m = task.at("measurement").is_string() && task.at("measurement").get<std::string>() == "computational"
              ? Povm::fromBasis(ComplexMatrix::identity(input.dim() / c.n0.inDim() * c.n0.outDim()))
              : io::povmFromJson(task.at("measurement"));
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
    const std::size_t anc = getCount(task, "ancillaDim", input.dim() / c.n0.inDim(), where);
    return buildNonAdaptive(c.n0, c.n1, input, anc, m, n, tau).asSprt();
  }
  throw ConfigError(where + ".strategy must be sprt, block or nonAdaptive");
}

const char* kSummaryHeader =
    "n,block_size,tau,threshold_A,threshold_B,rate_A_per_use,rate_B_per_use,trials,alpha_hat,se_alpha,beta_hat,"
    "se_beta,wald_alpha_bound,wald_beta_bound,wald_alpha_holds,wald_beta_holds,exponent_alpha,exponent_beta,"
    "target_exponent_alpha,target_exponent_beta,mean_T0,se_T0,mean_T1,se_T1,overshoot0,se_overshoot0,overshoot1,"
    "se_overshoot1,censored,alpha_lr,beta_lr,expectation_pass,expectation_margin,probabilistic_pass,"
    "probabilistic_margin,epsilon,unit\n";

std::string summaryRow(const SprtStrategy& s, const SimulationSummary& m, const ConstraintReport& e,
                       const ConstraintReport& p, double epsilon, std::size_t trials, const Units& u) {
  const double nd = static_cast<double>(m.n);
  std::ostringstream os;
  auto b = [](bool v) { return v ? "true" : "false"; };
  os << m.n << "," << s.blockSize << "," << csvReal(s.tau * u.scale) << "," << csvReal(m.thresholdA) << ","
     << csvReal(m.thresholdB) << "," << csvReal(s.rateOneOverZero * u.scale) << ","
     << csvReal(s.rateZeroOverOne * u.scale) << "," << trials << "," << csvReal(m.alphaHat) << ","
     << csvReal(m.seAlpha) << "," << csvReal(m.betaHat) << "," << csvReal(m.seBeta) << ","
     << csvReal(std::exp(-m.thresholdA)) << "," << csvReal(std::exp(-m.thresholdB)) << "," << b(m.waldAlphaHolds)
     << "," << b(m.waldBetaHolds) << "," << csvReal(m.exponentAlpha * u.scale) << ","
     << csvReal(m.exponentBeta * u.scale) << "," << csvReal(m.thresholdA / nd * u.scale) << ","
     << csvReal(m.thresholdB / nd * u.scale) << "," << csvReal(m.h0.meanStopTime) << ","
     << csvReal(m.h0.seStopTime) << "," << csvReal(m.h1.meanStopTime) << "," << csvReal(m.h1.seStopTime) << ","
     << csvReal(m.h0.overshootProb) << "," << csvReal(m.h0.seOvershoot) << "," << csvReal(m.h1.overshootProb)
     << "," << csvReal(m.h1.seOvershoot) << "," << m.censoredCount << "," << csvReal(m.h1.crossErrorEstimate)
     << "," << csvReal(m.h0.crossErrorEstimate) << "," << b(e.pass) << "," << csvReal(e.margin) << ","
     << b(p.pass) << "," << csvReal(p.margin) << "," << csvReal(epsilon) << "," << u.name << "\n";
  return os.str();
}

std::optional<double> tauFrom(const Json& task, const std::string& where) {
  if (!task.contains("tau")) return std::nullopt;
  return getReal(task, "tau", 0.0, where);
}

int cmdSimulate(const Config& c, bool noTimestamp, std::ostream& out) {
  const Json& t = c.simulate;
  const std::size_t n = getCount(t, "n", 400, "simulate");
  const std::size_t trials = getCount(t, "trials", 1000, "simulate");
  if (n == 0 || trials == 0) throw ConfigError("simulate.n and simulate.trials must be >= 1");
  const auto constraint = get<std::string>(t, "constraint", "expectation", "simulate");
  if (constraint != "expectation" && constraint != "probabilistic")
    throw ConfigError("simulate.constraint must be expectation or probabilistic");
  const double epsilon = getReal(t, "epsilon", 0.05, "simulate");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("simulate.epsilon must lie in (0, 1)");
  const bool record = get<bool>(t, "recordTrials", false, "simulate");
  const Units u = unitsFor(c);

  SimulationPlan plan;
  plan.strategy = buildStrategy(c, t, "simulate", n, tauFrom(t, "simulate"));
  plan.trials = trials;
  plan.baseSeed = c.seed;
  plan.constraint = constraint == "expectation" ? ConstraintType::Expectation : ConstraintType::Probabilistic;
  plan.epsilon = epsilon;
  std::vector<TrialRecord> records;
  const auto summary = runTrials(plan, record ? &records : nullptr);
  const auto e = checkConstraint(summary, ConstraintType::Expectation, epsilon);
  const auto p = checkConstraint(summary, ConstraintType::Probabilistic, epsilon);

  OutputDir dir(c, "simulate", noTimestamp);
  dir.write("strategy.json", io::toJson(plan.strategy).dump(2) + "\n");
  dir.write("summary.csv", std::string(kSummaryHeader) + summaryRow(plan.strategy, summary, e, p, epsilon, trials, u));
  Json js = io::toJson(summary);
  js["expectation"] = io::toJson(e);
  js["probabilistic"] = io::toJson(p);
  js["requestedConstraint"] = constraint;
  if (trials == 1) js["note"] = "single trial per hypothesis: binomial SE bounded by 0.5";
  dir.write("summary.json", js.dump(2) + "\n");
  if (record) {
    std::ostringstream csv;
    csv << "hypothesis,trial,stopping_time,decision,final_sum\n";
    for (const auto& r : records)
      csv << r.hypothesis << "," << r.trial << "," << r.stoppingTime << "," << io::decisionName(r.decision) << ","
          << csvReal(r.finalSum) << "\n";
    dir.write("trials.csv", csv.str());
  }
  dir.finish();
  out << "n=" << n << " alphaHat=" << io::formatReal(summary.alphaHat) << " betaHat=" << io::formatReal(summary.betaHat)
      << " meanT=(" << io::formatReal(summary.h0.meanStopTime) << ", " << io::formatReal(summary.h1.meanStopTime)
      << ") " << constraint << "=" << ((plan.constraint == ConstraintType::Expectation ? e : p).pass ? "pass" : "fail")
      << "\n";
  return kOk;
}

int cmdSweep(const Config& c, bool noTimestamp, std::ostream& out, std::ostream& err) {
  const Json& t = c.sweep;
  std::vector<std::size_t> budgets;
  if (t.contains("budgets")) {
    if (!t.at("budgets").is_array()) throw ConfigError("sweep.budgets must be an array");
    for (const auto& b : t.at("budgets")) {
      if (!b.is_number_integer() || b.get<long long>() <= 0) throw ConfigError("sweep.budgets must be positive integers");
      budgets.push_back(b.get<std::size_t>());
    }
  } else {
    budgets = {100, 200, 400, 800};
  }
  if (budgets.empty() || !std::is_sorted(budgets.begin(), budgets.end()))
    throw ConfigError("sweep.budgets must be nonempty and ascending");
  const std::size_t trials = getCount(t, "trials", 1000, "sweep");
  if (trials == 0) throw ConfigError("sweep.trials must be >= 1");
  const double epsilon = getReal(t, "epsilon", 0.05, "sweep");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("sweep.epsilon must lie in (0, 1)");
  const Units u = unitsFor(c);

  Json task = t;
  task.erase("budgets");
  const auto strategy = buildStrategy(c, Json{{"blockSize", getCount(t, "blockSize", 1, "sweep")}}, "sweep",
                                      budgets.front(), tauFrom(t, "sweep"));
  const auto result = sweepBudgets(strategy, budgets, trials, c.seed, epsilon);

  OutputDir dir(c, "sweep", noTimestamp);
  dir.write("strategy.json", io::toJson(strategy).dump(2) + "\n");
  std::ostringstream csv;
  csv << kSummaryHeader;
  Json js = Json::array();
  for (const auto& r : result.records) {
    SprtStrategy s = strategy;
    setThresholds(s, r.n, strategy.tau);
    csv << summaryRow(s, r.summary, r.expectation, r.probabilistic, epsilon, trials, u);
    Json e = io::toJson(r.summary);
    e["expectation"] = io::toJson(r.expectation);
    e["probabilistic"] = io::toJson(r.probabilistic);
    js.push_back(e);
    out << "n=" << r.n << " exponents=(" << io::formatReal(r.summary.exponentAlpha * u.scale) << ", "
        << io::formatReal(r.summary.exponentBeta * u.scale) << ") " << u.name << "\n";
  }
  dir.write("sweep.csv", csv.str());
  Json sj{{"records", js},
          {"spearmanAlpha", io::realToJson(result.spearmanAlpha)},
          {"spearmanBeta", io::realToJson(result.spearmanBeta)}};
  // Direct estimates saturate near log(trials)/n once errors stop being observed.
  if (result.records.size() > 1 && (result.spearmanAlpha <= 0.0 || result.spearmanBeta <= 0.0)) {
    const std::string w = "exponents do not increase with n; direct estimates are limited by the trial count";
    sj["trendWarning"] = w;
    err << "warning: sweep: " << w << "\n";
  }
  dir.write("sweep.json", sj.dump(2) + "\n");
  dir.finish();
  return kOk;
}

// regions -------------------------------------------------------------------

ExponentRegion scaled(ExponentRegion r, double s) {
  for (auto& p : r.frontier) {
    p.r0 *= s;
    p.r1 *= s;
  }
  return r;
}

std::string fileLabel(const std::string& label) {
  std::string s;
  for (char ch : label) {
    if (std::isalnum(static_cast<unsigned char>(ch))) s += ch;
    else if (!s.empty() && s.back() != '_') s += '_';
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

int cmdRegions(const Config& c, bool noTimestamp, std::ostream& out) {
  const Json& t = c.regions;
  const auto include = getStrings(t, "include", {"nonAdaptive", "adaptive", "converse"}, "regions");
  std::vector<std::size_t> blockSizes;
  if (t.contains("blockSizes")) {
    for (const auto& b : t.at("blockSizes")) {
      if (!b.is_number_integer() || b.get<long long>() <= 0) throw ConfigError("regions.blockSizes must be positive");
      blockSizes.push_back(b.get<std::size_t>());
    }
  } else {
    blockSizes = {1, 2};
  }
  const auto alphas = getReals(t, "alphas", {1.05, 1.1, 1.5}, "regions");
  for (double a : alphas)
    if (!(a > 1.0)) throw ConfigError("regions.alphas must exceed 1");
  const std::size_t converseL = getCount(t, "converseBlockSize", blockSizes.back(), "regions");
  const double slack = getReal(t, "slack", 1e-3, "regions");
  SamplingConfig sampling;
  sampling.samples = getCount(t, "samples", sampling.samples, "regions");
  sampling.seed = c.seed;
  for (const auto& k : include)
    if (k != "nonAdaptive" && k != "adaptive" && k != "converse")
      throw ConfigError("regions.include: unknown region '" + k + "'");
  auto wants = [&](const char* k) { return std::find(include.begin(), include.end(), k) != include.end(); };

  std::vector<ExponentRegion> regions;
  if (wants("nonAdaptive")) regions.push_back(nonAdaptiveRegion(c.n0, c.n1, sampling, c.optimizer));
  AdaptiveWitnesses witnesses;
  bool haveWitnesses = false;
  if (wants("adaptive"))
    for (std::size_t l : blockSizes) {
      AdaptiveWitnesses w;
      regions.push_back(adaptiveRegion(c.n0, c.n1, l, c.optimizer, &w));
      if (l == converseL) {
        witnesses = w;
        haveWitnesses = true;
      }
    }
  if (wants("converse"))
    regions.push_back(converseRegion(c.n0, c.n1, alphas, converseL, c.optimizer, haveWitnesses ? &witnesses : nullptr));

  const Units u = unitsFor(c);
  OutputDir dir(c, "regions", noTimestamp);
  std::ostringstream longCsv, contCsv;
  longCsv << "region,kind,bound,block_size,vertex,r0,r1,unit\n";
  contCsv << "a,b,contained,slack,violations\n";
  Json js = Json::array();
  for (const auto& r : regions) {
    const ExponentRegion shown = scaled(r, u.scale);
    dir.write("region_" + fileLabel(r.label) + ".csv", io::regionCsv(shown, {{"unit", u.name}}));
    Json e = io::toJson(shown);
    e["unit"] = u.name;
    js.push_back(e);
    for (std::size_t i = 0; i < shown.frontier.size(); ++i)
      longCsv << r.label << "," << regionKindName(r.kind) << ","
              << (r.bound == BoundDirection::Inner ? "inner" : "outerEstimate") << "," << r.blockSize << "," << i
              << "," << csvReal(shown.frontier[i].r0) << "," << csvReal(shown.frontier[i].r1) << "," << u.name
              << "\n";
    out << r.label << ":";
    for (const auto& p : shown.frontier) out << " (" << io::formatReal(p.r0) << ", " << io::formatReal(p.r1) << ")";
    out << " " << u.name << "\n";
  }
  for (const auto& a : regions)
    for (const auto& b : regions) {
      if (&a == &b) continue;
      const auto rep = containment(a, b, slack);
      contCsv << a.label << "," << b.label << "," << (rep.contained ? "true" : "false") << "," << csvReal(slack) << ","
              << rep.violations.size() << "\n";
    }
  dir.write("regions.json", js.dump(2) + "\n");
  dir.write("regions_long.csv", longCsv.str());
  dir.write("containment.csv", contCsv.str());
  dir.finish();
  return kOk;
}

int cmdValidate(const Config& c, std::ostream& out) {
  const auto rep = validateChannelPair(c.n0, c.n1);
  auto line = [&](const char* name, const DirectionReport& d) {
    out << name << ": " << (d.supportIncluded ? "finite" : "infinite");
    if (d.maxDivergence) out << " Dmax=" << io::formatReal(*d.maxDivergence) << " nats";
    out << "\n";
  };
  out << "config ok: task=" << c.task << " inDim=" << c.n0.inDim() << " outDim=" << c.n0.outDim() << "\n";
  line("N0||N1", rep.zeroOverOne);
  line("N1||N0", rep.oneOverZero);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Sequential discrimination of quantum channels: divergences, SPRT simulation, exponent regions",
               "seqchan"};
  cli.footer(kConfigHelp);
  cli.require_subcommand(1);
  cli.fallthrough();
  GlobalFlags flags;
  cli.add_option("--config", flags.config, "experiment config file (JSON)");
  cli.add_option("--seed", flags.seed, "override the config seed");
  cli.add_option("--out", flags.out, "output directory");
  cli.add_option("--log-base", flags.logBase, "report information quantities in base e or 2")
      ->check(CLI::IsMember({"e", "2"}));
  cli.add_flag("--no-timestamp", flags.noTimestamp, "omit the timestamp from manifest.json");
  cli.set_version_flag("--version", kVersion);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"divergence", "state/channel divergences of the configured pair, both directions"},
      {"simulate", "build a strategy and estimate its error probabilities and stopping times"},
      {"sweep", "simulate the SPRT over ascending budgets and report exponent convergence"},
      {"regions", "exponent regions and their containment matrix"},
      {"validate", "check the config and report the finiteness of the channel pair"}};
  for (const auto& [name, desc] : commands) cli.add_subcommand(name, desc);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    cli.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  const std::string command = cli.get_subcommands().front()->get_name();
  try {
    const Config c = loadConfig(command, flags);
    if (command == "divergence") return cmdDivergence(c, flags.noTimestamp, out);
    if (command == "simulate") return cmdSimulate(c, flags.noTimestamp, out);
    if (command == "sweep") return cmdSweep(c, flags.noTimestamp, out, err);
    if (command == "regions") return cmdRegions(c, flags.noTimestamp, out);
    return cmdValidate(c, out);
  } catch (const ConfigError& e) {
    err << "error: " << command << ": config: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << command << ": " << e.what() << "\n";
    return e.code() == ErrorCode::ParseError ? kConfigError : kNumericalError;
  }
}

}  // namespace seqchan::app
