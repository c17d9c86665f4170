#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#ifndef DBNS_CLI_PATH
#error "DBNS_CLI_PATH must point at the dbns executable"
#endif

using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(DBNS_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dbns_cli_" + name)).string();
}

}  // namespace

TEST_CASE("span") {
  auto r = run("span 103");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "span = 3 (proved)"));
  r = run("span 5");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "span = 2 (proved)"));
  r = run("span 0");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "span = 2 (by convention)"));
  r = run("span twelve");
  CHECK(r.code == 1);
  r = run("--format json span 4985");
  CHECK(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("span") == 4);
  CHECK(j.at("status") == "proved");
}

TEST_CASE("span without a usable pool is inconclusive") {
  const auto pool = tmp("tiny_pool.json");
  std::ofstream(pool) << R"({"moduli": [{"m": "24"}]})";
  const auto r = run("--pool " + pool + " span 103");
  CHECK(r.code == 2);
  CHECK(contains(r.out, "upper bound only"));
  std::filesystem::remove(pool);
}

TEST_CASE("represent") {
  auto r = run("represent 103 --length 3");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "103 = "));
  r = run("represent 103 --length 2");
  CHECK(r.code == 2);
  CHECK(contains(r.out, "not a proof"));
  r = run("represent 103");
  CHECK(r.code == 1);
}

TEST_CASE("census") {
  auto r = run("census 1 102 --length 2");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "not found within bounds: 0"));
  r = run("--format json census 1 200 --length 2");
  CHECK(r.code == 2);
  const auto j = json::parse(r.out);
  CHECK(j.at("misses").at(0) == "103");

  const auto ckp = tmp("census.ckp");
  std::filesystem::remove(ckp);
  r = run("census 1 4984 --length 3 --interval 1000 --checkpoint " + ckp);
  CHECK(r.code == 0);
  r = run("census 1 4984 --length 3 --interval 1000 --resume --checkpoint " + ckp);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "(5 resumed)"));
  std::filesystem::remove(ckp);
}

TEST_CASE("moduli and table1") {
  auto r = run("--format json moduli --from 2 2");
  CHECK(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j.at(0).at("m") == "24");
  r = run("moduli --from 144 432");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "1811941545963463911360"));
  CHECK(contains(r.out, "-36.48"));
  CHECK(contains(r.out, "24.47"));
  r = run("--format json moduli --sweep 48 48 --top 5");
  CHECK(r.code == 0);
  j = json::parse(r.out);
  CHECK(j.size() == 5);
  for (std::size_t i = 1; i < j.size(); ++i) CHECK(j[i - 1]["lnw"]["5"] <= j[i]["lnw"]["5"]);
  r = run("moduli");
  CHECK(r.code == 1);
  r = run("table1");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "54610287600960"));
  CHECK(contains(r.out, "-13.61"));
  CHECK(contains(r.out, "18.84"));
}

TEST_CASE("certify then verify") {
  const auto cert = tmp("cert103.json");
  auto r = run("certify 103 --length 2 --output " + cert);
  CHECK(r.code == 0);
  r = run("verify " + cert);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "verified"));

  json j;
  std::ifstream(cert) >> j;
  j["root"]["children"].erase(0);
  std::ofstream(cert) << j.dump();
  r = run("verify " + cert);
  CHECK(r.code == 1);
  CHECK(contains(r.out, "FAILED"));

  std::ofstream(cert) << "{ not json";
  CHECK(run("verify " + cert).code == 1);
  std::filesystem::remove(cert);

  r = run("certify 5 --length 2");
  CHECK(r.code == 2);
  CHECK(contains(r.out, "inconclusive"));
  CHECK(run("verify /nonexistent/cert.json").code == 1);
}

TEST_CASE("help and bad flags") {
  CHECK(run("--help").code == 0);
  CHECK(run("span --help").code == 0);
  CHECK(run("--memory-budget 1MiB span 5").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("--format yaml span 5").code == 1);
}
