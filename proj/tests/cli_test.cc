#include "treesrl/cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include "treesrl/model.h"
#include "treesrl/synthetic.h"

#ifndef TREESRL_FIXTURE_DIR
#error "TREESRL_FIXTURE_DIR must be defined"
#endif

namespace treesrl::cli {
namespace {

std::string Fixture(const std::string& name) {
  return std::string(TREESRL_FIXTURE_DIR) + "/" + name;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

struct Result {
  int code;
  std::string out, err;
};

Result RunWith(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = Run(args, in, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("treesrl_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  // Writes a small synthetic train/dev pair and returns their paths.
  std::pair<std::string, std::string> SyntheticData() {
    const std::string train = Path("train.jsonl"), dev = Path("dev.jsonl");
    EXPECT_EQ(RunWith({"synth", "--output", train, "--sentences", "60", "--seed", "1"}).code, 0);
    EXPECT_EQ(RunWith({"synth", "--output", dev, "--sentences", "15", "--seed", "2"}).code, 0);
    return {train, dev};
  }

  std::filesystem::path dir_;
};

TEST_F(CliTest, ConvertRoundTripIsByteIdentical) {
  const std::string trees = Path("trees.jsonl"), back = Path("back.jsonl");
  ASSERT_EQ(RunWith({"convert", "--input", Fixture("corpus.jsonl"), "--output", trees}).code, 0);
  ASSERT_EQ(RunWith({"convert", "--direction", "trees2srl", "--input", trees, "--output", back})
                .code,
            0);
  EXPECT_EQ(ReadFile(back), ReadFile(Fixture("corpus.jsonl")));
}

TEST_F(CliTest, ConvertEmitsCanonicalTreeAndConstraints) {
  std::istringstream corpus(ReadFile(Fixture("corpus.jsonl")));
  std::string first_line;
  std::getline(corpus, first_line);
  const Result r = RunWith({"convert"}, first_line + "\n");
  ASSERT_EQ(r.code, 0) << r.err;
  const TreeSentence record = ParseTreeJsonLine(r.out, 1);
  ASSERT_EQ(record.trees.size(), 1u);
  EXPECT_EQ(record.trees[0].predicate, 2);
  // The canonical member hangs the whole sentence off the predicate.
  EXPECT_EQ(record.trees[0].tree.labels[2], std::optional<std::string>("PRD"));
  EXPECT_EQ(record.trees[0].tree.heads[2], 0);
  EXPECT_NE(r.out.find("\"constraints\":{\"variant\":\"latent\""), std::string::npos);
}

TEST_F(CliTest, ConvertPropsInput) {
  const Result r = RunWith({"convert", "--format", "props", "--input", Fixture("figure.props")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Result back = RunWith({"convert", "--direction", "trees2srl"}, r.out);
  ASSERT_EQ(back.code, 0) << back.err;
  EXPECT_EQ(back.out, ReadFile(Fixture("corpus.jsonl")).substr(0, back.out.size()));
}

TEST_F(CliTest, EmptyInputGivesEmptyOutput) {
  const std::string empty = Path("empty.jsonl"), out = Path("out.jsonl");
  WriteFile(empty, "");
  ASSERT_EQ(RunWith({"convert", "--input", empty, "--output", out}).code, 0);
  EXPECT_TRUE(std::filesystem::exists(out));
  EXPECT_EQ(ReadFile(out), "");
}

TEST_F(CliTest, MalformedRecordIsLineNumbered) {
  const std::string bad = Path("bad.jsonl");
  WriteFile(bad, ReadFile(Fixture("corpus.jsonl")) + "{\"tokens\":[\"a\"]\n");
  const Result r = RunWith({"convert", "--input", bad});
  EXPECT_EQ(r.code, kInputError);
  EXPECT_NE(r.err.find("line 6"), std::string::npos) << r.err;
}

TEST_F(CliTest, MalformedTreeRejected) {
  const Result r = RunWith(
      {"convert", "--direction", "trees2srl"},
      R"({"tokens":["a","b","c"],"trees":[{"predicate":1,"heads":[0,3,0],"labels":["PRD",null,null]}]})"
      "\n");
  EXPECT_EQ(r.code, kInputError);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownFlagOrMissingFileIsInputError) {
  EXPECT_EQ(RunWith({"convert", "--bogus"}).code, kInputError);
  EXPECT_EQ(RunWith({"convert", "--input", Path("missing.jsonl")}).code, kInputError);
  EXPECT_EQ(RunWith({}).code, kInputError);
  EXPECT_EQ(RunWith({"--help"}).code, kSuccess);
}

TEST_F(CliTest, TrainIsDeterministicAndRecordsDevF1) {
  const auto [train, dev] = SyntheticData();
  const std::string a = Path("a.model"), b = Path("b.model");
  const std::vector<std::string> common = {"train", "--train", train, "--dev", dev,
                                           "--epochs", "3", "--learning-rate", "0.01",
                                           "--hash-bits", "14", "--seed", "4"};
  auto with_model = [&](const std::string& path) {
    auto args = common;
    args.insert(args.end(), {"--model", path});
    return args;
  };
  const Result r = RunWith(with_model(a));
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(RunWith(with_model(b)).code, 0);
  EXPECT_EQ(ReadFile(a), ReadFile(b));
  const Model model = LoadModel(a);
  EXPECT_GT(model.metadata.dev_f1, 0.0);
  EXPECT_EQ(model.metadata.seed, 4u);
  EXPECT_GE(model.metadata.epoch, 1);
  EXPECT_EQ(model.metadata.options.at("learning_rate"), "0.01");
  EXPECT_NE(r.err.find("best epoch"), std::string::npos);
}

TEST_F(CliTest, TrainMissingDevFails) {
  const auto [train, dev] = SyntheticData();
  const Result r = RunWith({"train", "--train", train, "--dev", Path("nope.jsonl"), "--model",
                            Path("m.model")});
  EXPECT_EQ(r.code, kInputError);
  EXPECT_FALSE(std::filesystem::exists(Path("m.model")));
}

TEST_F(CliTest, ConfigFilePrecedence) {
  const auto [train, dev] = SyntheticData();
  const std::string config = Path("train.cfg");
  WriteFile(config, "# training\nepochs = 2\nlearning-rate=0.02\nhash-bits = 12\nseed = 9\n");
  const std::string model = Path("m.model");
  ASSERT_EQ(RunWith({"train", "--train", train, "--dev", dev, "--model", model, "--config", config,
                     "--seed", "5"})
                .code,
            0);
  const Model m = LoadModel(model);
  EXPECT_EQ(m.metadata.options.at("epochs"), "2");            // file over default
  EXPECT_EQ(m.metadata.options.at("learning_rate"), "0.02");  // file over default
  EXPECT_EQ(m.metadata.seed, 5u);                             // flag over file
  WriteFile(config, "not a pair\n");
  EXPECT_EQ(RunWith({"train", "--config", config}).code, kInputError);
  WriteFile(config, "no-such-option = 1\n");
  EXPECT_EQ(RunWith({"train", "--train", train, "--dev", dev, "--model", model, "--config",
                     config})
                .code,
            kInputError);
}

TEST_F(CliTest, ParseEvaluateAndGoldPredicates) {
  const auto [train, dev] = SyntheticData();
  const std::string model = Path("m.model");
  ASSERT_EQ(RunWith({"train", "--train", train, "--dev", dev, "--model", model, "--epochs", "4",
                     "--learning-rate", "0.05", "--hash-bits", "14"})
                .code,
            0);
  const std::string pred = Path("pred.jsonl");
  const Result parsed = RunWith({"parse", "--model", model, "--input", dev, "--output", pred,
                                 "--gold-predicates", "--threads", "3"});
  ASSERT_EQ(parsed.code, 0) << parsed.err;
  EXPECT_NE(parsed.err.find("sentences/s"), std::string::npos);
  std::istringstream gold_in(ReadFile(dev)), pred_in(ReadFile(pred));
  const Corpus gold = ReadJsonl(gold_in), predicted = ReadJsonl(pred_in);
  ASSERT_EQ(gold.size(), predicted.size());
  for (size_t i = 0; i < gold.size(); ++i) {
    ASSERT_EQ(gold[i].frames.size(), predicted[i].frames.size());
    for (size_t f = 0; f < gold[i].frames.size(); ++f) {
      EXPECT_EQ(gold[i].frames[f].predicate, predicted[i].frames[f].predicate);
    }
  }
  const Result report = RunWith({"evaluate", "--gold", dev, "--pred", pred});
  ASSERT_EQ(report.code, 0);
  EXPECT_EQ(report.out, FormatReport(Evaluate(gold, predicted)));

  // Thread count does not change the output.
  const Result one = RunWith({"parse", "--model", model, "--input", dev});
  const Result four = RunWith({"parse", "--model", model, "--input", dev, "--threads", "4"});
  EXPECT_EQ(one.out, four.out);
}

TEST_F(CliTest, ParseEndToEndMayEmitNoFrames) {
  // All-zero weights tie PRD with NULL on every root arc; ties go to NULL.
  const std::string model = Path("zero.model");
  SaveModel(model, LogLinearScorer(LabelSet({"A0"}), LogLinearConfig{10}), ModelMetadata{});
  const Result r = RunWith({"parse", "--model", model},
                           R"({"tokens":["the","dog","saw","a","ball"],"frames":[]})" "\n");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"frames\":[]"), std::string::npos) << r.out;
}

TEST_F(CliTest, InduceAgreement) {
  const auto [train, dev] = SyntheticData();
  const std::string model = Path("m.model"), trees = Path("trees.jsonl");
  ASSERT_EQ(RunWith({"train", "--train", train, "--dev", dev, "--model", model, "--epochs", "2",
                     "--hash-bits", "12"})
                .code,
            0);
  const Result plain = RunWith({"induce", "--model", model, "--input", dev, "--output", trees,
                                "--gold-predicates"});
  ASSERT_EQ(plain.code, 0) << plain.err;
  EXPECT_EQ(plain.err.find("agreement"), std::string::npos);
  const Result self = RunWith({"induce", "--model", model, "--input", dev, "--reference", trees,
                               "--gold-predicates"});
  ASSERT_EQ(self.code, 0) << self.err;
  EXPECT_NE(self.err.find("agreement 100.00"), std::string::npos) << self.err;
}

TEST(AttachmentAgreement, CountsMatchedHeads) {
  // n = 6, predicate 2; reference differs from output at tokens 3 and 6.
  TreeSentence output{Sentence{{"a", "b", "c", "d", "e", "f"}, {}}, {}};
  output.trees.push_back({2, DepTree({-1, 2, 0, 4, 2, 4, 2}), {}, ""});
  TreeSentence reference = output;
  reference.trees[0].tree = DepTree({-1, 2, 0, 2, 2, 4, 5});
  const Agreement a = AttachmentAgreement({output}, {reference});
  EXPECT_EQ(a.matched, 4);
  EXPECT_EQ(a.total, 6);
  EXPECT_NEAR(a.percent(), 400.0 / 6.0, 1e-12);
  EXPECT_THROW(AttachmentAgreement({output}, {}), Error);
}

TEST_F(CliTest, CheckPassesOnFixtures) {
  const Result r = RunWith({"check", "--input", Fixture("corpus.jsonl")});
  EXPECT_EQ(r.code, kSuccess) << r.out << r.err;
  EXPECT_NE(r.out.find("0 mismatches"), std::string::npos) << r.out;
}

TEST_F(CliTest, CheckReportsInjectedFault) {
  const Result r = RunWith({"check", "--input", Fixture("corpus.jsonl"), "--inject-fault"});
  EXPECT_EQ(r.code, kVerificationFailure) << r.out << r.err;
  EXPECT_NE(r.out.find("MISMATCH"), std::string::npos) << r.out;
  // The fault flag is not advertised.
  EXPECT_EQ(RunWith({"check", "--help"}).out.find("inject"), std::string::npos);
}

TEST_F(CliTest, CheckSkipsLongSentences) {
  const Result r = RunWith(
      {"check", "--order", "1"},
      R"({"tokens":["a","b","c","d","e","f","g","h","i","j","k"],"frames":[]})" "\n"
      R"({"tokens":["a","b","c"],"frames":[{"predicate":2,"args":[{"start":1,"end":1,"role":"A0"}]}]})"
      "\n");
  EXPECT_EQ(r.code, kSuccess) << r.out << r.err;
  EXPECT_NE(r.err.find("warning: sentence 1"), std::string::npos) << r.err;
  EXPECT_NE(r.out.find("(1 skipped)"), std::string::npos) << r.out;
}

TEST_F(CliTest, SynthMatchesLibrary) {
  const Result r = RunWith({"synth", "--sentences", "5", "--seed", "3"});
  ASSERT_EQ(r.code, 0);
  std::ostringstream expected;
  WriteJsonl(expected, GenerateSynthetic({5, 3, 12, 3}));
  EXPECT_EQ(r.out, expected.str());
}

}  // namespace
}  // namespace treesrl::cli
