#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "sdna/scenario.hpp"

namespace sdna::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
  std::string last_line() const {
    auto s = out;
    while (!s.empty() && s.back() == '\n') s.pop_back();
    return s.substr(s.rfind('\n') + 1);
  }
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::path(::testing::TempDir()) / ("sdna-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }
  Result sdna(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
  }
  std::string slurp(const std::string& name) const {
    std::ifstream in(p(name), std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  void make_synth_chain() {
    ASSERT_EQ(sdna({"pki", "create-root", "--type", "manufacturer", "--name", "Root", "--out", p("root")}).code, 0);
    ASSERT_EQ(sdna({"pki", "issue-cert", "--issuer", p("root"), "--name", "Int", "--out", p("int")}).code, 0);
    ASSERT_EQ(sdna({"pki", "issue-cert", "--issuer", p("int"), "--name", "Leaf", "--level", "leaf", "--out", p("leaf")}).code, 0);
    ASSERT_EQ(sdna({"pki", "issue-token", "--issuer", p("leaf"), "--type", "synthesizer", "--out", p("tok")}).code, 0);
  }
  fs::path dir;
};

TEST_F(Cli, PkiChainValidates) {
  make_synth_chain();
  const auto r = sdna({"pki", "validate-chain", "--chain", p("tok.chain"), "--root", p("root.cert")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.last_line(), "OUTCOME: VALID");
  EXPECT_NE(slurp("tok.chain.txt").find("synthesizer"), std::string::npos);
}

TEST_F(Cli, FlippedSignatureByteIsBadSignature) {
  make_synth_chain();
  auto bytes = slurp("tok.chain");
  const auto chain = pki::CertChain::decode(to_bytes(bytes));
  const auto sig = to_string(chain.token->signature);
  const auto at = bytes.find(sig);
  ASSERT_NE(at, std::string::npos);
  bytes[at + 5] ^= 0x01;
  std::ofstream(p("bad.chain"), std::ios::binary) << bytes;
  const auto r = sdna({"pki", "validate-chain", "--chain", p("bad.chain"), "--root", p("root.cert")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("BadSignature"), std::string::npos);
}

TEST_F(Cli, MaximalRateLimitAccepted) {
  make_synth_chain();
  const auto r = sdna({"pki", "issue-token", "--issuer", p("leaf"), "--type", "synthesizer", "--rate-limit",
                       "18446744073709551615", "--out", p("max")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("18446744073709551615"), std::string::npos);
}

TEST_F(Cli, RevocationAndCrossHierarchy) {
  make_synth_chain();
  ASSERT_EQ(sdna({"pki", "create-root", "--type", "infrastructure", "--name", "Infra", "--out", p("infra")}).code, 0);
  auto r = sdna({"pki", "validate-chain", "--chain", p("tok.chain"), "--root", p("infra.cert")});
  EXPECT_EQ(r.code, 1);
  ASSERT_EQ(sdna({"pki", "revoke", "--list", p("revs"), "--chain", p("tok.chain")}).code, 0);
  r = sdna({"pki", "validate-chain", "--chain", p("tok.chain"), "--root", p("root.cert"), "--revocations", p("revs")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Revoked"), std::string::npos);
}

TEST_F(Cli, SubtokenMustBeSubset) {
  ASSERT_EQ(sdna({"pki", "create-root", "--type", "exemption", "--name", "E", "--out", p("root")}).code, 0);
  ASSERT_EQ(sdna({"pki", "issue-cert", "--issuer", p("root"), "--name", "EI", "--out", p("int")}).code, 0);
  ASSERT_EQ(sdna({"pki", "issue-cert", "--issuer", p("int"), "--name", "EL", "--level", "leaf", "--out", p("leaf")}).code, 0);
  ASSERT_EQ(sdna({"pki", "issue-token", "--issuer", p("leaf"), "--type", "exemption", "--sequences", "aa,bb", "--device",
                  "d1", "--subtoken-key", "--out", p("elt")})
                .code,
            0);
  EXPECT_EQ(sdna({"pki", "issue-subtoken", "--parent", p("elt"), "--sequences", "aa", "--out", p("sub")}).code, 0);
  EXPECT_EQ(sdna({"pki", "validate-chain", "--chain", p("sub.chain"), "--root", p("root.cert")}).code, 0);
  const auto r = sdna({"pki", "issue-subtoken", "--parent", p("elt"), "--sequences", "cc", "--out", p("sub2")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("NotASubset"), std::string::npos);
}

TEST_F(Cli, HdbBuild) {
  std::ofstream(p("hazards.txt")) << "# fixture\n" << to_hex(scenario::fixture_hazard(0)) << ",toxin,why\n";
  const auto r = sdna({"hdb", "build", "--hazards", p("hazards.txt"), "--out", p("db.bin")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("entries: 1"), std::string::npos);
  EXPECT_EQ(slurp("db.bin").find(to_string(scenario::fixture_hazard(0))), std::string::npos);
}

TEST_F(Cli, BasicRunNamesHazardAndIsReproducible) {
  const auto order = to_hex(scenario::fixture_clear(0)) + "," + to_hex(scenario::fixture_hazard(0));
  const auto a = sdna({"run", "basic", "--order", order, "--seed", "9", "--out", p("a.jsonl")});
  const auto b = sdna({"run", "basic", "--order", order, "--seed", "9", "--out", p("b.jsonl")});
  EXPECT_EQ(a.code, 0) << a.out << a.err;
  EXPECT_NE(a.out.find("DENY: toxin-alpha"), std::string::npos);
  EXPECT_EQ(a.last_line(), "OUTCOME: DENY");
  EXPECT_EQ(slurp("a.jsonl"), slurp("b.jsonl"));
  EXPECT_FALSE(slurp("a.jsonl").empty());
  const auto shown = sdna({"transcript", "show", "--in", p("a.jsonl"), "--link", "S->hdb#0"});
  EXPECT_EQ(shown.code, 0);
  EXPECT_NE(shown.out.find("[query]"), std::string::npos);
}

TEST_F(Cli, ExemptionRun) {
  const auto hz = to_hex(scenario::fixture_hazard(0));
  auto r = sdna({"run", "exemption", "--order", hz, "--elt", hz});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.last_line(), "OUTCOME: GRANT");
  r = sdna({"run", "exemption", "--order", hz, "--elt", hz, "--code", "wrong"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.last_line(), "OUTCOME: AuthBackendRejected");
}

TEST_F(Cli, AttackMatrix) {
  struct Case {
    std::vector<std::string> args;
    std::string outcome;
  };
  const std::vector<Case> cases = {
      {{"mitm", "--scep-variant", "scep"}, "ATTACK_SUCCEEDED"},
      {{"mitm", "--scep-variant", "scep-plus"}, "ATTACK_BLOCKED:BadClientSig"},
      {{"swap", "--resumption", "on", "--bind-responses", "off"}, "VERDICT_INVERTED"},
      {{"swap", "--resumption", "on", "--bind-responses", "on"}, "SWAP_DETECTED:BadResponseBinding"},
      {{"swap", "--resumption", "off"}, "SWAP_REJECTED:ResumptionDisabled"},
      {{"passcode"}, "REPLAY_ACCEPTED"},
      {{"collision"}, "LEDGER_MERGED"},
      {{"collision", "--distinct-ids"}, "INDEPENDENT_BUDGETS"},
  };
  for (const auto& c : cases) {
    std::vector<std::string> args{"attack", "--backend", "test"};
    args.insert(args.end(), c.args.begin(), c.args.end());
    const auto r = sdna(args);
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.last_line(), "OUTCOME: " + c.outcome);
  }
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(sdna({}).code, 2);
  EXPECT_EQ(sdna({"attack", "teleport"}).code, 2);
  EXPECT_EQ(sdna({"attack", "mitm", "--threshold", "0"}).code, 2);
  EXPECT_EQ(sdna({"run", "basic", "--resumption", "maybe", "--order", "aa"}).code, 2);
  EXPECT_EQ(sdna({"--help"}).code, 0);
}

}  // namespace
}  // namespace sdna::cli
