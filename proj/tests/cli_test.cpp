#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is folded into out only when asked.
Run musan(const std::string& args, bool with_stderr = false, const std::string& env = "") {
  std::string cmd = env + " '" MUSAN_CLI_PATH "' " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

const fs::path kSongs = fs::path(MUSAN_TEST_DATA_DIR) / "songs";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::path(MUSAN_SCRATCH_DIR) / (std::string("cli_") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string q(const fs::path& p) const { return "'" + p.string() + "'"; }

  // Three fixtures plus one unreadable file.
  fs::path songDirWithCorruptFile() {
    fs::path d = dir / "songs";
    fs::create_directories(d);
    for (auto& e : fs::directory_iterator(kSongs)) fs::copy_file(e.path(), d / e.path().filename());
    std::ofstream(d / "zz_broken.json") << "{not json";
    return d;
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, AnalyzePrintsStructure) {
  auto r = musan("analyze " + q(kSongs / "qrst.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(trim(r.out), "A4X4A4");
}

TEST_F(Cli, NameSingletonsLettersTheMiddlePhrase) {
  auto r = musan("--name-singletons analyze " + q(kSongs / "qrst.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(trim(r.out), "A4B4A4");
}

TEST_F(Cli, OracleAgreesWithSearch) {
  for (const char* f : {"qrst.json", "riff.json"}) {
    auto a = musan("analyze " + q(kSongs / f));
    auto b = musan("--oracle analyze " + q(kSongs / f));
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(b.code, 0);
    EXPECT_EQ(a.out, b.out) << f;
  }
}

TEST_F(Cli, OracleRefusesLongSongs) {
  // verse_chorus has 46 measures, past the exhaustive-search guard.
  auto r = musan("--oracle analyze " + q(kSongs / "verse_chorus.json"), true);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(trim(r.out))["error"], "contract_error");
}

TEST_F(Cli, AnalyzeJsonPrintsOnlyTheReport) {
  auto r = musan("analyze " + q(kSongs / "qrst.json") + " --json");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["structure"], "A4X4A4");
}

TEST_F(Cli, AnalyzeWritesReport) {
  auto r = musan("--out " + q(dir) + " analyze " + q(kSongs / "riff.json"));
  ASSERT_EQ(r.code, 0);
  json rep = json::parse(slurp(dir / "riff.json"));
  EXPECT_EQ(rep["structure"], "A6X9A6");
  EXPECT_NEAR(rep["sdl"].get<double>(), 22.5, 1e-9);
  EXPECT_FALSE(rep["suboptimal"].get<bool>());
}

TEST_F(Cli, MalformedSongExitsTwoWithJsonError) {
  std::ofstream(dir / "bad.json") << "{not json";
  auto r = musan("analyze " + q(dir / "bad.json"), true);
  EXPECT_EQ(r.code, 2);
  json err = json::parse(trim(r.out));
  EXPECT_EQ(err["exit_code"], 2);
  EXPECT_TRUE(err.contains("message"));
}

TEST_F(Cli, MissingSongExitsTwo) {
  EXPECT_EQ(musan("analyze " + q(dir / "nope.json")).code, 2);
}

TEST_F(Cli, BatchRecordsFailuresAndContinues) {
  fs::path songs = songDirWithCorruptFile();
  auto r = musan("--out " + q(dir / "out") + " batch " + q(songs));
  EXPECT_EQ(r.code, 0);
  json m = json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(m["ok"], 3);
  EXPECT_EQ(m["failed"], 1);
  EXPECT_EQ(m["songs"].size(), 4u);
  EXPECT_TRUE(fs::exists(dir / "out" / "qrst.json"));
  EXPECT_FALSE(fs::exists(dir / "out" / "zz_broken.json"));
}

TEST_F(Cli, BatchIsDeterministicAcrossRunsAndThreads) {
  fs::path songs = songDirWithCorruptFile();
  ASSERT_EQ(musan("--jobs 1 --out " + q(dir / "a") + " batch " + q(songs)).code, 0);
  ASSERT_EQ(musan("--jobs 1 --out " + q(dir / "b") + " batch " + q(songs)).code, 0);
  ASSERT_EQ(musan("--jobs 4 --out " + q(dir / "c") + " batch " + q(songs)).code, 0);
  for (const char* f : {"manifest.json", "qrst.json", "verse_chorus.json", "riff.json"}) {
    std::string a = slurp(dir / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir / "b" / f)) << f;
    EXPECT_EQ(a, slurp(dir / "c" / f)) << f;
  }
}

TEST_F(Cli, BatchOnEmptyDirectoryExitsThree) {
  fs::create_directories(dir / "empty");
  EXPECT_EQ(musan("--out " + q(dir / "out") + " batch " + q(dir / "empty")).code, 3);
}

TEST_F(Cli, StatsWritesTablesAndIsIdempotent) {
  ASSERT_EQ(musan("--out " + q(dir / "reports") + " batch " + q(kSongs)).code, 0);
  ASSERT_EQ(musan("--out " + q(dir / "s1") + " stats " + q(dir / "reports")).code, 0);
  ASSERT_EQ(musan("--out " + q(dir / "s2") + " stats " + q(dir / "reports")).code, 0);
  for (const char* f : {"chord_major.csv", "counts_chord_major.csv", "duration.csv", "transitions_major.csv",
                        "significance_chord_major.csv", "summary.json"}) {
    ASSERT_TRUE(fs::exists(dir / "s1" / f)) << f;
    EXPECT_EQ(slurp(dir / "s1" / f), slurp(dir / "s2" / f)) << f;
  }
  std::string csv = slurp(dir / "s1" / "chord_major.csv");
  EXPECT_EQ(csv.rfind("category,", 0), 0u);
  EXPECT_NE(csv.find("\r\n"), std::string::npos);
  json summary = json::parse(slurp(dir / "s1" / "summary.json"));
  EXPECT_TRUE(summary.contains("phrase_length"));
}

TEST_F(Cli, StatsWithoutReportsExitsFour) {
  EXPECT_EQ(musan("--out " + q(dir / "s") + " stats " + q(dir / "missing")).code, 4);
  fs::create_directories(dir / "none");
  EXPECT_EQ(musan("--out " + q(dir / "s") + " stats " + q(dir / "none")).code, 4);
}

TEST_F(Cli, SectionsSplitsOnSeparators) {
  auto r = musan("sections i4A8B8x4A8X2B8B8c4c4B9o2");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(trim(r.out), "A8B8 | A8X2B8B8 | B9");
  auto j = musan("sections A4X2A4 --json");
  EXPECT_EQ(json::parse(j.out)["sections"].size(), 1u);
}

TEST_F(Cli, VerifyPasses) {
  auto r = musan("verify --cases 30 --seed 5");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["mismatches"], 0);
}

TEST_F(Cli, ConfigPrecedence) {
  std::ofstream(dir / "cfg.json") << R"({"search_budget": 1})";
  std::string song = q(kSongs / "verse_chorus.json");
  EXPECT_EQ(musan("--strict analyze " + song).code, 0);
  EXPECT_EQ(musan("--config " + q(dir / "cfg.json") + " --strict analyze " + song).code, 5);
  EXPECT_EQ(musan("--strict analyze " + song, false, "MUSAN_CONFIG=" + q(dir / "cfg.json")).code, 5);
  EXPECT_EQ(musan("--config " + q(dir / "cfg.json") + " --search-budget 1000000 --strict analyze " + song).code, 0);
  // Without --strict a budget stop still prints a structure.
  auto loose = musan("--config " + q(dir / "cfg.json") + " analyze " + song);
  EXPECT_EQ(loose.code, 0);
  EXPECT_FALSE(trim(loose.out).empty());
}

TEST_F(Cli, UnknownConfigKeyIsRejected) {
  std::ofstream(dir / "cfg.json") << R"({"search_budgett": 1})";
  EXPECT_NE(musan("--config " + q(dir / "cfg.json") + " analyze " + q(kSongs / "qrst.json")).code, 0);
}
