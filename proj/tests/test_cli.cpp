#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cpdshift/cli.hpp"
#include "cpdshift/json_io.hpp"

using namespace cpd;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kStampfli = R"({"type":"eventually_constant","head":[1,0.5],"tail":1})";
const std::string kIsometry = R"({"type":"eventually_constant","head":[],"tail":1})";
const std::string kDelta4 = R"({"type":"berger","measure":{"atoms":[[4,1]]}})";

}  // namespace

TEST(CliClassify, StampfliReportsCpdRefuted) {
  const auto r = run({"classify", "--spec", kStampfli});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["report"]["cpd"]["status"], "Refuted");
  EXPECT_EQ(j["report"]["subnormal"]["status"], "ExactFalse");
  EXPECT_EQ(j["report"]["normaloid"]["status"], "ExactTrue");
}

TEST(CliClassify, IsometryAllGreenExceptNormal) {
  const auto j = Json::parse(run({"classify", "--spec", kIsometry}).out)["report"];
  for (const char* c : {"subnormal", "quasinormal", "cpd", "normaloid", "m_isometry"}) {
    const std::string s = j[c]["status"];
    EXPECT_TRUE(s == "ExactTrue" || s == "ConsistentUpTo") << c << " " << s;
  }
  EXPECT_EQ(j["normal"]["status"], "ExactFalse");
}

TEST(CliClassify, OrderTooSmallIsUsageError) {
  EXPECT_EQ(run({"classify", "--spec", kIsometry, "--order", "3"}).code, 2);
}

TEST(CliClassify, BadSpecIsUsageError) {
  EXPECT_EQ(run({"classify", "--spec", R"({"type":"nope"})"}).code, 2);
  EXPECT_EQ(run({"classify", "--spec", "{not json"}).code, 2);
  EXPECT_EQ(run({"classify", "--spec", R"({"type":"poly3iso","p":[0.5,-1]})"}).code, 2);
  EXPECT_EQ(run({"classify"}).code, 2);
}

TEST(CliClassify, ReadsFileAndIsDeterministic) {
  const std::string path = ::testing::TempDir() + "cpdshift_spec.json";
  {
    std::ofstream f(path);
    f << kStampfli;
  }
  const auto a = run({"classify", "--file", path});
  const auto b = run({"classify", "--file", path});
  std::remove(path.c_str());
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, run({"classify", "--spec", kStampfli}).out);
}

TEST(CliClassify, TextFormat) {
  const auto r = run({"classify", "--spec", kStampfli, "--format", "text"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("cpd"), std::string::npos);
  EXPECT_NE(r.out.find("Refuted"), std::string::npos);
}

TEST(CliTriplet, DeltaFour) {
  const auto r = run({"triplet", "--spec", kDelta4});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = Json::parse(r.out)["triplet"];
  EXPECT_NEAR(t["b"].get<double>(), 3.0, 1e-9);
  EXPECT_NEAR(t["c"].get<double>(), 0.0, 1e-9);
  ASSERT_EQ(t["F"]["atoms"].size(), 1u);
  EXPECT_NEAR(t["F"]["atoms"][0][0].get<double>(), 4.0, 1e-9);
  EXPECT_NEAR(t["F"]["atoms"][0][1].get<double>(), 9.0, 1e-8);
}

TEST(CliTriplet, BergerFlagAppendsMeasure) {
  const auto j = Json::parse(run({"triplet", "--spec", kDelta4, "--berger"}).out);
  EXPECT_TRUE(j["certificate"]["passed"].get<bool>());
  ASSERT_EQ(j["berger"]["atoms"].size(), 1u);
  EXPECT_NEAR(j["berger"]["atoms"][0][1].get<double>(), 1.0, 1e-9);
}

TEST(CliTriplet, IsometryIsZero) {
  const auto t = Json::parse(run({"triplet", "--spec", kIsometry}).out)["triplet"];
  EXPECT_NEAR(t["b"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(t["c"].get<double>(), 0.0, 1e-12);
  EXPECT_TRUE(t["F"]["atoms"].empty());
}

TEST(CliTriplet, StampfliIsNotCpd) {
  const auto r = run({"triplet", "--spec", kStampfli});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("NotCPD"), std::string::npos);
}

TEST(CliVerify, CorpusRunPasses) {
  const auto r = run({"verify", "subnormal", "--n", "2", "--corpus", "100", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["records"].size(), 100u);
  EXPECT_EQ(j["summary"]["violations"], 0);
  EXPECT_EQ(r.out, run({"verify", "subnormal", "--n", "2", "--corpus", "100", "--seed", "7"}).out);
}

TEST(CliVerify, NormalIsVacuous) {
  const auto r = run({"verify", "normal", "--n", "2", "--spec", kStampfli});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(Json::parse(r.out)["records"][0]["status"], "Vacuous");
}

TEST(CliVerify, UsageErrors) {
  EXPECT_EQ(run({"verify", "bogus", "--spec", kIsometry}).code, 2);
  EXPECT_EQ(run({"verify", "bogus"}).code, 2);
  EXPECT_EQ(run({"verify", "subnormal", "--n", "1", "--spec", kIsometry}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST(CliVerify, ThreeIsometrySupported) {
  const auto r = run({"verify", "3isometry", "--n", "2", "--m", "3", "--spec", R"({"type":"poly3iso","p":[1,1]})"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["records"][0]["status"], "Supported");
}

TEST(CliSelftest, LooseThresholdRejectedOrFails) {
  // eps outside (0, 1) is a usage error.
  EXPECT_EQ(run({"selftest", "--eps-psd", "2"}).code, 2);
}

TEST(CliHelp, ExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("classify"), std::string::npos);
}
