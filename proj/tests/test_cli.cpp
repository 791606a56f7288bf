#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "seqchan/app.hpp"
#include "seqchan/io.hpp"

namespace fs = std::filesystem;
using seqchan::io::Json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = seqchan::app::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Scratch {
 public:
  explicit Scratch(const std::string& name) : dir_(fs::temp_directory_path() / ("seqchan_cli_" + name)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string path(const std::string& f) const { return (dir_ / f).string(); }
  std::string config(const std::string& name, const Json& j) const {
    seqchan::io::writeTextFile(path(name), j.dump());
    return path(name);
  }

 private:
  fs::path dir_;
};

Json classicalPair() {
  return {{"n0", {{"zoo", "replacer"}, {"state", {{"diag", {0.8, 0.2}}}}}},
          {"n1", {{"zoo", "replacer"}, {"state", {{"diag", {0.2, 0.8}}}}}}};
}

Json quickOptimizer() { return {{"restarts", 2}, {"blockRestarts", 1}}; }

std::string slurp(const std::string& p) { return seqchan::io::readTextFile(p); }

}  // namespace

TEST_CASE("help and version exit cleanly") {
  const auto h = cli({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("channels.n0") != std::string::npos);
  CHECK(h.out.find("simulate") != std::string::npos);
  CHECK(cli({"--version"}).code == 0);
}

TEST_CASE("configuration problems exit with code 2") {
  Scratch s("config");
  CHECK(cli({}).code == 2);
  CHECK(cli({"simulate"}).code == 2);  // no --config
  CHECK(cli({"simulate", "--config", s.path("missing.json")}).code == 2);
  seqchan::io::writeTextFile(s.path("broken.json"), "{ not json");
  CHECK(cli({"simulate", "--config", s.path("broken.json")}).code == 2);

  const auto unknown = cli({"simulate", "--config", s.config("u.json", {{"channels", classicalPair()}, {"extra", 1}})});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("extra") != std::string::npos);
  CHECK(unknown.err.find("simulate") != std::string::npos);

  Json nested{{"channels", classicalPair()}, {"simulate", {{"n", 100}, {"nn", 3}}}};
  CHECK(cli({"simulate", "--config", s.config("n.json", nested)}).code == 2);
  Json mismatch{{"task", "regions"}, {"channels", classicalPair()}};
  CHECK(cli({"simulate", "--config", s.config("m.json", mismatch)}).code == 2);
  CHECK(cli({"simulate", "--config", s.config("ok.json", {{"channels", classicalPair()}}), "--log-base", "10"}).code ==
        2);
  Json badZoo{{"channels", {{"n0", {{"zoo", "teleporter"}}}, {"n1", {{"zoo", "identity"}}}}}};
  CHECK(cli({"validate", "--config", s.config("z.json", badZoo)}).code == 2);
}

TEST_CASE("numerical failures exit with code 3") {
  Scratch s("numerical");
  Json c{{"channels", {{"n0", {{"zoo", "identity"}}}, {"n1", {{"zoo", "depolarizing"}, {"p", 0.5}}}}},
         {"optimizer", quickOptimizer()},
         {"simulate", {{"n", 100}, {"trials", 10}}}};
  const auto r = cli({"simulate", "--config", s.config("c.json", c), "--out", s.path("o")});
  CHECK(r.code == 3);
  CHECK(r.err.find("InfiniteDivergence") != std::string::npos);
  Json tau{{"channels", classicalPair()}, {"optimizer", quickOptimizer()}, {"simulate", {{"tau", 5.0}}}};
  CHECK(cli({"simulate", "--config", s.config("t.json", tau), "--out", s.path("t")}).code == 3);
}

TEST_CASE("simulate writes the documented files and repeats byte for byte") {
  Scratch s("simulate");
  Json c{{"channels", classicalPair()},
         {"seed", 11},
         {"optimizer", quickOptimizer()},
         {"simulate", {{"n", 100}, {"tau", 0.08}, {"trials", 300}, {"recordTrials", true}}}};
  const auto cfg = s.config("c.json", c);
  REQUIRE(cli({"simulate", "--config", cfg, "--out", s.path("a"), "--no-timestamp"}).code == 0);
  REQUIRE(cli({"simulate", "--config", cfg, "--out", s.path("b"), "--no-timestamp"}).code == 0);
  for (const char* f : {"config.json", "manifest.json", "strategy.json", "summary.csv", "summary.json", "trials.csv"})
    CHECK_MESSAGE(slurp(s.path("a/") + f) == slurp(s.path("b/") + f), f);
  const auto header = slurp(s.path("a/summary.csv")).substr(0, 400);
  CHECK(header.find("wald_alpha_bound") != std::string::npos);
  CHECK(header.find("wald_beta_holds") != std::string::npos);
  CHECK(seqchan::io::readJsonFile(s.path("a/manifest.json")).count("timestamp") == 0);

  REQUIRE(cli({"simulate", "--config", cfg, "--out", s.path("c")}).code == 0);
  CHECK(seqchan::io::readJsonFile(s.path("c/manifest.json")).count("timestamp") == 1);
  REQUIRE(cli({"simulate", "--config", cfg, "--out", s.path("d"), "--seed", "12", "--no-timestamp"}).code == 0);
  CHECK(slurp(s.path("a/trials.csv")) != slurp(s.path("d/trials.csv")));
  CHECK(seqchan::io::readJsonFile(s.path("d/config.json"))["seed"] == 12);
}

TEST_CASE("strategy file replays to the same strategy") {
  Scratch s("replay");
  Json c{{"channels", classicalPair()}, {"optimizer", quickOptimizer()}, {"simulate", {{"n", 50}, {"trials", 20}}}};
  REQUIRE(cli({"simulate", "--config", s.config("c.json", c), "--out", s.path("o")}).code == 0);
  const auto st = seqchan::io::strategyFromJson(seqchan::io::readJsonFile(s.path("o/strategy.json")));
  CHECK(st.n == 50);
  CHECK(st.rateZeroOverOne == doctest::Approx(0.8317766166719343).epsilon(1e-6));
}

TEST_CASE("divergence log base 2 scales every reported value by 1/ln 2") {
  Scratch s("logbase");
  Json c{{"channels", {{"n0", {{"zoo", "amplitudeDamping"}, {"gamma", 0.3}}}, {"n1", {{"zoo", "depolarizing"}, {"p", 0.4}}}}},
         {"optimizer", quickOptimizer()},
         {"divergence", {{"kinds", {"relEntropy", "maxDiv"}}}}};
  const auto cfg = s.config("c.json", c);
  REQUIRE(cli({"divergence", "--config", cfg, "--out", s.path("e"), "--no-timestamp"}).code == 0);
  REQUIRE(cli({"divergence", "--config", cfg, "--out", s.path("b"), "--log-base", "2", "--no-timestamp"}).code == 0);
  const auto e = seqchan::io::readJsonFile(s.path("e/divergences.json"));
  const auto b = seqchan::io::readJsonFile(s.path("b/divergences.json"));
  REQUIRE(e.size() == 4);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double ve = seqchan::io::realFromJson(e[i]["value"]);
    const double vb = seqchan::io::realFromJson(b[i]["value"]);
    if (std::isfinite(ve)) CHECK(vb == doctest::Approx(ve / std::numbers::ln2).epsilon(1e-12));
    else CHECK(vb == ve);
    CHECK(b[i]["unit"] == "bits");
  }
  CHECK(slurp(s.path("e/divergences.csv")).find("N1||N0") != std::string::npos);
}

TEST_CASE("regions command writes containment for the classical pair") {
  Scratch s("regions");
  Json c{{"channels", classicalPair()},
         {"optimizer", quickOptimizer()},
         {"regions", {{"blockSizes", {1}}, {"alphas", {1.1}}, {"converseBlockSize", 1}, {"samples", 16}}}};
  const auto cfg = s.config("c.json", c);
  REQUIRE(cli({"regions", "--config", cfg, "--out", s.path("a"), "--no-timestamp"}).code == 0);
  REQUIRE(cli({"regions", "--config", cfg, "--out", s.path("b"), "--no-timestamp"}).code == 0);
  for (const auto& entry : fs::directory_iterator(s.path("a")))
    CHECK(slurp(entry.path().string()) == slurp(s.path("b/") + entry.path().filename().string()));
  const auto cont = slurp(s.path("a/containment.csv"));
  CHECK(cont.find("nonAdaptive,adaptive(l=1),true") != std::string::npos);
  CHECK(cont.find("adaptive(l=1),converse estimate(l=1),true") != std::string::npos);
  CHECK(fs::exists(s.path("a/regions_long.csv")));
  CHECK(fs::exists(s.path("a/region_nonAdaptive.csv")));
}

TEST_CASE("sweep writes one row per budget") {
  Scratch s("sweep");
  Json c{{"channels", classicalPair()},
         {"optimizer", quickOptimizer()},
         {"sweep", {{"budgets", {20, 40}}, {"tau", 0.08}, {"trials", 200}}}};
  REQUIRE(cli({"sweep", "--config", s.config("c.json", c), "--out", s.path("o")}).code == 0);
  const auto csv = slurp(s.path("o/sweep.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const auto j = seqchan::io::readJsonFile(s.path("o/sweep.json"));
  CHECK(j["records"].size() == 2);
  Json bad = c;
  bad["sweep"]["budgets"] = {40, 20};
  CHECK(cli({"sweep", "--config", s.config("b.json", bad), "--out", s.path("p")}).code == 2);
}

TEST_CASE("validate reports finiteness without writing files") {
  Scratch s("validate");
  Json c{{"channels", {{"n0", {{"zoo", "identity"}}}, {"n1", {{"zoo", "depolarizing"}, {"p", 0.5}}}}}};
  const auto r = cli({"validate", "--config", s.config("c.json", c)});
  CHECK(r.code == 0);
  CHECK(r.out.find("N1||N0: infinite") != std::string::npos);
}
