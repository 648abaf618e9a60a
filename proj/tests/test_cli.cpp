#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cptlab/cli.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kData = CPTLAB_TEST_DATA_DIR;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cptlab::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cptlab_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("value of a constant strategy") {
  const Outcome o = run({"value", "--market", kData + "/coin.mkt", "--pref", kData + "/root_gain.cfg",
                         "--theta", "0.25"});
  CHECK(o.code == 0);
  const auto j = nlohmann::json::parse(o.out);
  CHECK(j.at("v").get<double>() == doctest::Approx(0.375).epsilon(1e-15));
  const Outcome csv = run({"value", "--market", kData + "/coin.mkt", "--theta", "0.25", "--format", "csv"});
  CHECK(csv.code == 0);
  CHECK(csv.out.find("v_plus,v_minus,v") == 0);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == cptlab::cli::kExitValidation);
  CHECK(run({"no-such-command"}).code == cptlab::cli::kExitValidation);
  CHECK(run({"--help"}).code == cptlab::cli::kExitOk);
  CHECK(run({"--version"}).code == cptlab::cli::kExitOk);
  CHECK(run({"value", "--market", kData + "/missing.mkt", "--theta", "1"}).code ==
        cptlab::cli::kExitValidation);
  CHECK(run({"randomization-ladder", "--n", "13"}).code == cptlab::cli::kExitValidation);
  CHECK(run({"optimize", "--market", kData + "/coin.mkt", "--atoms", "0"}).code ==
        cptlab::cli::kExitValidation);

  const Outcome na = run({"marche-check", "--market", kData + "/arbitrage.mkt"});
  CHECK(na.code == cptlab::cli::kExitValidation);
  CHECK(na.err.find("no-arbitrage fails at node") != std::string::npos);
  const auto j = nlohmann::json::parse(na.out);
  CHECK(j.at("no_arbitrage").at("direction") == nlohmann::json::array({0.0, 1.0}));
}

TEST_CASE("parameter checks") {
  const Outcome tk = run({"check-wellposed", "--pref", kData + "/tk.cfg"});
  CHECK(tk.code == 0);
  const auto j = nlohmann::json::parse(tk.out);
  CHECK(j.at("condition_a") == false);
  CHECK(j.at("tk_pathology_p").get<double>() == doctest::Approx(0.7884614203374022).epsilon(1e-9));

  const Outcome root = run({"check-wellposed", "--pref", kData + "/root_gain.cfg"});
  const auto r = nlohmann::json::parse(root.out);
  CHECK(r.at("condition_a") == true);
  CHECK(r.at("lambda").get<double>() == 3.0);
}

TEST_CASE("ladder and ill-posedness demos") {
  const Outcome lad = run({"randomization-ladder", "--n", "2", "--seed", "1"});
  CHECK(lad.code == 0);
  CHECK(lad.out.rfind("n,M_n\n0,0.375", 0) == 0);

  const Outcome ill = run({"illposed-demo", "--pref", kData + "/two_step_illposed.cfg"});
  CHECK(ill.code == 0);
  const auto j = nlohmann::json::parse(ill.out);
  CHECK(j.at("verdict") == "ill-posed");
  CHECK(j.at("v_plus") == "+inf");
}

TEST_CASE("reruns are byte-identical and the manifest checksums its files") {
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  for (const fs::path& dir : {a, b}) {
    const Outcome o = run({"optimize", "--market", kData + "/coin.mkt", "--pref",
                           kData + "/root_gain.cfg", "--atoms", "2", "--multistart", "4", "--seed",
                           "11", "--out", dir.string()});
    REQUIRE(o.code == 0);
  }
  CHECK(slurp(a / "optimize.json") == slurp(b / "optimize.json"));
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest.at("subcommand") == "optimize");
  CHECK(manifest.at("seed") == 11);
  REQUIRE(manifest.at("inputs").size() == 2);
  REQUIRE(manifest.at("outputs").size() >= 1);

  const auto fnv = [](const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
  };
  for (const auto& entry : manifest.at("outputs")) {
    const std::string path = entry.at("path");
    CHECK(entry.at("fnv1a") == fnv(slurp(a / path)));
  }
  for (const auto& entry : manifest.at("inputs")) {
    CHECK(entry.at("fnv1a") == fnv(slurp(entry.at("path").get<std::string>())));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("toolkit self-test and global flags after the subcommand") {
  const Outcome o = run({"toolkit", "self-test", "--format", "csv"});
  CHECK(o.code == 0);
  CHECK(o.out.find("name,statistic,threshold,passed") == 0);
  const Outcome seeded = run({"toolkit", "self-test", "--seed", "7"});
  CHECK(seeded.code != cptlab::cli::kExitValidation);
  CHECK(nlohmann::json::parse(seeded.out).at("seed") == 7);
}
