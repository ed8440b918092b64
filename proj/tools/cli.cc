#include "treesrl/cli.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "treesrl/convert.h"
#include "treesrl/decode.h"
#include "treesrl/model.h"
#include "treesrl/parallel.h"
#include "treesrl/synthetic.h"
#include "treesrl/train.h"
#ifdef TREESRL_WITH_ORACLE
#include "treesrl/oracle.h"
#endif

namespace treesrl::cli {

namespace {

using Json = nlohmann::ordered_json;

// Options shared by the subcommands; each subcommand binds the subset it uses.
struct CliConfig {
  std::string input = "-";
  std::string output = "-";
  std::string gold;
  std::string reference;
  std::string model;
  std::string format = "jsonl";
  std::string direction = "srl2trees";
  std::string variant = "latent";
  std::string scorer = "loglinear";
  int order = 1;
  bool gold_predicates = false;
  uint64_t seed = 1;
  int threads = 1;
  bool inject_fault = false;
};

std::string FormatDouble(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string Fixed2(double value) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << value;
  return s.str();
}

Corpus ReadInput(const std::string& path, Format format, std::istream& in) {
  if (path == "-" && format == Format::kJsonl) return ReadJsonl(in);
  return ReadCorpus(path, format);
}

void WriteOutput(const std::string& path, Format format, const Corpus& corpus, std::ostream& out) {
  if (path == "-" && format == Format::kJsonl) {
    WriteJsonl(out, corpus);
    return;
  }
  WriteCorpus(path, format, corpus);
}

std::vector<std::string> ReadLines(const std::string& path, std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  if (path == "-") {
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
  }
  std::ifstream file(path);
  if (!file) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  while (std::getline(file, line)) lines.push_back(line);
  return lines;
}

std::vector<TreeSentence> ReadTrees(const std::string& path, std::istream& in) {
  std::vector<TreeSentence> records;
  const auto lines = ReadLines(path, in);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(ParseTreeJsonLine(lines[i], static_cast<int>(i + 1)));
  }
  return records;
}

void WriteTrees(const std::string& path, const std::vector<TreeSentence>& records,
                std::ostream& out) {
  std::ofstream file;
  std::ostream* target = &out;
  if (path != "-") {
    file.open(path);
    if (!file) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
    target = &file;
  }
  for (const auto& record : records) *target << ToTreeJsonLine(record) << '\n';
  target->flush();
  if (!*target) throw Error(ErrorCode::kIoError, "write failed for '" + path + "'");
}

// Turns key=value lines into long flags. Flags already on the command line
// are left alone so they take precedence.
std::vector<std::string> MergeConfigFile(std::vector<std::string> args) {
  std::string path;
  for (size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream file(path);
  if (!file) throw Error(ErrorCode::kIoError, "cannot open config '" + path + "'");
  std::set<std::string> given;
  for (const auto& arg : args) {
    if (arg.rfind("--", 0) == 0) given.insert(arg.substr(2, arg.find('=') - 2));
  }
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  std::string line;
  int number = 0;
  while (std::getline(file, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig,
                  path + ":" + std::to_string(number) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || key == "config") {
      throw Error(ErrorCode::kInvalidConfig, path + ":" + std::to_string(number) + ": bad key");
    }
    if (given.count(key)) continue;
    args.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  return args;
}

// ---- convert ---------------------------------------------------------------

int Convert(const CliConfig& c, std::istream& in, std::ostream& out) {
  const Format format = ParseFormat(c.format);
  if (c.direction == "srl2trees") {
    const Variant variant = ParseVariant(c.variant);
    std::vector<TreeSentence> records;
    for (const auto& annotation : ReadInput(c.input, format, in)) {
      TreeSentence record{annotation.sentence, {}};
      for (const auto& frame : annotation.frames) {
        const ForestConstraints constraints =
            MakeConstraints(annotation.sentence.size(), frame, variant);
        record.trees.push_back({frame.predicate, CanonicalTree(constraints),
                                constraints.partition.segments(), VariantName(variant)});
      }
      records.push_back(std::move(record));
    }
    WriteTrees(c.output, records, out);
    return kSuccess;
  }
  if (c.direction == "trees2srl") {
    Corpus corpus;
    for (const auto& record : ReadTrees(c.input, in)) {
      SrlAnnotation annotation{record.sentence, {}};
      for (const auto& tree : record.trees) {
        annotation.frames.push_back(RecoverFrame(tree.tree, tree.predicate));
      }
      ValidateAnnotation(annotation);
      corpus.push_back(std::move(annotation));
    }
    WriteOutput(c.output, format, corpus, out);
    return kSuccess;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown direction '" + c.direction + "'");
}

// ---- train -----------------------------------------------------------------

int TrainCommand(const CliConfig& c, const std::string& dev_path, TrainConfig config,
                 std::istream& in, std::ostream& err) {
  if (c.model.empty()) throw Error(ErrorCode::kInvalidConfig, "--model is required");
  const Format format = ParseFormat(c.format);
  config.loss.order = c.order;
  config.loss.variant = ParseVariant(c.variant);
  config.scorer = ParseScorerKind(c.scorer);
  config.seed = c.seed;
  config.threads = c.threads;
  config.Validate();
  const Corpus train = ReadInput(c.input, format, in);
  const Corpus dev = ReadCorpus(dev_path, format);
  const TrainResult result = Train(train, dev, config, [&](const EpochMetrics& m) {
    err << "epoch " << m.epoch << " loss " << Fixed2(m.train_loss) << " dev_f1 "
        << Fixed2(m.dev_f1) << " dev_cm " << Fixed2(m.dev_cm) << (m.improved ? " *" : "")
        << '\n';
  });

  ModelMetadata meta;
  meta.order = config.loss.order;
  meta.variant = VariantName(config.loss.variant);
  meta.seed = config.seed;
  meta.epoch = result.best_epoch;
  meta.dev_f1 = result.best_f1;
  meta.dev_cm = result.best_cm;
  meta.options = {{"aux_weight", FormatDouble(config.loss.aux_weight)},
                  {"batch_tokens", std::to_string(config.batch_tokens)},
                  {"beta1", FormatDouble(config.beta1)},
                  {"beta2", FormatDouble(config.beta2)},
                  {"epochs", std::to_string(config.epochs)},
                  {"epsilon", FormatDouble(config.epsilon)},
                  {"learning_rate", FormatDouble(config.learning_rate)},
                  {"patience", std::to_string(config.patience)},
                  {"threads", std::to_string(config.threads)}};
  SaveModel(c.model, *result.scorer, meta);
  err << "best epoch " << result.best_epoch << " dev_f1 " << Fixed2(result.best_f1) << " dev_cm "
      << Fixed2(result.best_cm) << '\n';
  return kSuccess;
}

// ---- parse / induce --------------------------------------------------------

int EffectiveOrder(const CliConfig& c, const Model& model, bool order_given) {
  const int order = order_given ? c.order : model.metadata.order;
  if (order != 1 && order != 2) throw Error(ErrorCode::kInvalidConfig, "order must be 1 or 2");
  return order;
}

int ParseCommand(const CliConfig& c, bool order_given, std::istream& in, std::ostream& out,
                 std::ostream& err) {
  if (c.model.empty()) throw Error(ErrorCode::kInvalidConfig, "--model is required");
  if (c.threads <= 0) throw Error(ErrorCode::kInvalidConfig, "threads must be positive");
  const Format format = ParseFormat(c.format);
  const Model model = LoadModel(c.model);
  const int order = EffectiveOrder(c, model, order_given);
  const Corpus input = ReadInput(c.input, format, in);
  const auto start = std::chrono::steady_clock::now();
  const Corpus output =
      Predict(*model.scorer, input, order,
              c.gold_predicates ? PredicateMode::kGold : PredicateMode::kPredict, c.threads);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  WriteOutput(c.output, format, output, out);
  err << "parsed " << input.size() << " sentences in " << Fixed2(seconds) << " s ("
      << Fixed2(seconds > 0 ? input.size() / seconds : 0.0) << " sentences/s)\n";
  return kSuccess;
}

int InduceCommand(const CliConfig& c, bool order_given, std::istream& in, std::ostream& out,
                  std::ostream& err) {
  if (c.model.empty()) throw Error(ErrorCode::kInvalidConfig, "--model is required");
  const Format format = ParseFormat(c.format);
  const Model model = LoadModel(c.model);
  const int order = EffectiveOrder(c, model, order_given);
  const Corpus input = ReadInput(c.input, format, in);
  std::vector<TreeSentence> records(input.size());
  ParallelFor(static_cast<int>(input.size()), c.threads, [&](int i, int) {
    DecodeConfig config;
    config.order = order;
    config.mode = c.gold_predicates ? PredicateMode::kGold : PredicateMode::kPredict;
    for (const auto& frame : input[i].frames) config.gold_predicates.push_back(frame.predicate);
    const ScoreTables scores = model.scorer->Tables(input[i].sentence, order);
    records[i].sentence = input[i].sentence;
    for (auto& parsed : ParseFrames(scores, config)) {
      records[i].trees.push_back({parsed.frame.predicate, std::move(parsed.tree), {}, ""});
    }
  });
  WriteTrees(c.output, records, out);
  if (!c.reference.empty()) {
    const Agreement agreement = AttachmentAgreement(records, ReadTrees(c.reference, in));
    err << "agreement " << Fixed2(agreement.percent()) << " (" << agreement.matched << "/"
        << agreement.total << ")\n";
  }
  return kSuccess;
}

// ---- check -----------------------------------------------------------------

#ifdef TREESRL_WITH_ORACLE

constexpr double kCheckTolerance = 1e-9;

ScoreTables AuditScores(std::mt19937_64& rng, int n, bool second_order, const LabelSet& labels) {
  ScoreTables scores = ScoreTables::Zeros(n, second_order, &labels);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double& v : scores.arc.data()) {
    if (v != kNegInf) v = u(rng);
  }
  for (double& v : scores.sib.data()) {
    if (v != kNegInf) v = u(rng);
  }
  auto normalize = [](double* row, int size) {
    double z = kNegInf;
    for (int k = 0; k < size; ++k) z = LogAdd(z, row[k]);
    for (int k = 0; k < size; ++k) row[k] -= z;
  };
  for (double& v : scores.root_label.data()) v = u(rng);
  for (double& v : scores.arg_label.data()) v = u(rng);
  for (int j = 0; j <= n; ++j) normalize(&scores.root_label(j, 0), kNumRootLabels);
  for (int h = 0; h <= n; ++h) {
    for (int m = 0; m <= n; ++m) normalize(&scores.arg_label(h, m, 0), labels.size());
  }
  return scores;
}

double MaxDifference(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    if (a[k] == b[k]) continue;  // also covers matching infinities
    worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return worst;
}

int CheckCommand(const CliConfig& c, bool order_given, std::istream& in, std::ostream& out,
                 std::ostream& err) {
  const Corpus corpus = ReadInput(c.input, ParseFormat(c.format), in);
  std::vector<int> orders = {1, 2};
  if (order_given) {
    if (c.order != 1 && c.order != 2) throw Error(ErrorCode::kInvalidConfig, "order must be 1 or 2");
    orders = {c.order};
  }
  LabelSet labels;
  for (const auto& annotation : corpus) {
    for (const auto& frame : annotation.frames) {
      for (const auto& arg : frame.arguments) labels.Add(arg.role);
    }
  }
  ConstrainedChartOptions chart_options;
  chart_options.restrict_predicate_endpoints = !c.inject_fault;

  long comparisons = 0, mismatches = 0, skipped = 0;
  auto compare = [&](size_t sentence, const std::string& what, double diff) {
    ++comparisons;
    if (diff <= kCheckTolerance) return;
    ++mismatches;
    out << "MISMATCH sentence " << sentence + 1 << " " << what << " diff " << diff << '\n';
  };
  for (size_t i = 0; i < corpus.size(); ++i) {
    const int n = corpus[i].sentence.size();
    if (n > oracle::kMaxLength) {
      err << "warning: sentence " << i + 1 << " has " << n << " tokens (limit "
          << oracle::kMaxLength << "), skipped\n";
      ++skipped;
      continue;
    }
    std::mt19937_64 rng(c.seed + i);
    for (int order : orders) {
      const ScoreTables scores = AuditScores(rng, n, order == 2, labels);
      const std::string tag = "order " + std::to_string(order) + " ";
      const double log_z = order == 1 ? Inside1(scores) : Inside2(scores);
      compare(i, tag + "logZ", std::abs(log_z - oracle::BruteLogZ(scores, order)));
      compare(i, tag + "decode",
              std::abs(Eisner(scores, order).score - oracle::BruteBest(scores, order).score));
      const ChartResult chart = Marginals(scores, order);
      const ChartResult brute = oracle::BruteMarginals(scores, order);
      compare(i, tag + "arc marginals",
              MaxDifference(chart.arc_marginals.data(), brute.arc_marginals.data()));
      if (order == 2) {
        compare(i, tag + "sibling marginals",
                MaxDifference(chart.sib_marginals.data(), brute.sib_marginals.data()));
      }
      for (const auto& frame : corpus[i].frames) {
        const ForestConstraints constraints = MakeConstraints(n, frame);
        const double constrained = order == 1
                                       ? Inside1Constrained(scores, constraints, chart_options)
                                       : Inside2Constrained(scores, constraints, chart_options);
        compare(i, tag + "constrained logZ (predicate " + std::to_string(frame.predicate) + ")",
                std::abs(constrained - oracle::BruteLogZ(scores, order, &constraints)));
      }
    }
  }
  out << "checked " << corpus.size() - skipped << " sentences (" << skipped << " skipped), "
      << comparisons << " comparisons, " << mismatches << " mismatches\n";
  return mismatches == 0 ? kSuccess : kVerificationFailure;
}

#else

int CheckCommand(const CliConfig&, bool, std::istream&, std::ostream&, std::ostream&) {
  throw Error(ErrorCode::kInvalidConfig, "built without the oracle; check is unavailable");
}

#endif

}  // namespace

std::string ToTreeJsonLine(const TreeSentence& record) {
  Json j;
  j["tokens"] = record.sentence.tokens;
  if (!record.sentence.lemmas.empty()) j["lemmas"] = record.sentence.lemmas;
  j["trees"] = Json::array();
  for (const auto& tree : record.trees) {
    Json t;
    t["predicate"] = tree.predicate;
    t["heads"] = std::vector<int>(tree.tree.heads.begin() + 1, tree.tree.heads.end());
    Json labels = Json::array();
    for (size_t m = 1; m < tree.tree.labels.size(); ++m) {
      if (tree.tree.labels[m]) {
        labels.push_back(*tree.tree.labels[m]);
      } else {
        labels.push_back(nullptr);
      }
    }
    t["labels"] = labels;
    if (!tree.variant.empty()) {
      Json segments = Json::array();
      for (const auto& seg : tree.segments) {
        Json s = {{"start", seg.span.start}, {"end", seg.span.end},
                  {"kind", SegmentKindName(seg.kind)}};
        if (seg.kind == SegmentKind::kArgument) s["role"] = seg.role;
        segments.push_back(s);
      }
      t["constraints"] = {{"variant", tree.variant}, {"segments", segments}};
    }
    j["trees"].push_back(t);
  }
  return j.dump();
}

TreeSentence ParseTreeJsonLine(const std::string& line, int line_number) {
  const std::string where = "line " + std::to_string(line_number) + ": ";
  try {
    const Json j = Json::parse(line);
    TreeSentence record;
    record.sentence.tokens = j.at("tokens").get<std::vector<std::string>>();
    if (j.contains("lemmas")) record.sentence.lemmas = j.at("lemmas").get<std::vector<std::string>>();
    const int n = record.sentence.size();
    if (!record.sentence.lemmas.empty() && static_cast<int>(record.sentence.lemmas.size()) != n) {
      throw Error(ErrorCode::kSchemaError, "lemmas and tokens differ in length");
    }
    for (const Json& t : j.at("trees")) {
      TreeRecord tree;
      tree.predicate = t.at("predicate").get<int>();
      std::vector<int> heads = {-1};
      for (int h : t.at("heads").get<std::vector<int>>()) heads.push_back(h);
      const Json& labels = t.at("labels");
      if (static_cast<int>(heads.size()) != n + 1 || static_cast<int>(labels.size()) != n) {
        throw Error(ErrorCode::kMalformedTree, "heads and labels must have one entry per token");
      }
      if (tree.predicate < 1 || tree.predicate > n) {
        throw Error(ErrorCode::kOutOfBounds, "predicate " + std::to_string(tree.predicate));
      }
      for (int m = 1; m <= n; ++m) {
        if (heads[m] < 0 || heads[m] > n) {
          throw Error(ErrorCode::kMalformedTree, "head out of range at token " + std::to_string(m));
        }
      }
      if (!IsProjectiveTree(heads) || RootChildCount(heads) != 1 || heads[tree.predicate] != 0) {
        throw Error(ErrorCode::kMalformedTree,
                    "not a projective tree rooted at predicate " + std::to_string(tree.predicate));
      }
      tree.tree = DepTree(heads);
      for (int m = 1; m <= n; ++m) {
        if (!labels[m - 1].is_null()) tree.tree.labels[m] = labels[m - 1].get<std::string>();
      }
      record.trees.push_back(std::move(tree));
    }
    return record;
  } catch (const Error& e) {
    throw Error(e.code(), where + e.what());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaError, where + e.what());
  }
}

Agreement AttachmentAgreement(const std::vector<TreeSentence>& output,
                              const std::vector<TreeSentence>& reference) {
  if (output.size() != reference.size()) {
    throw Error(ErrorCode::kAlignmentError, "output has " + std::to_string(output.size()) +
                                                " sentences, reference " +
                                                std::to_string(reference.size()));
  }
  Agreement agreement;
  for (size_t i = 0; i < output.size(); ++i) {
    if (output[i].sentence.size() != reference[i].sentence.size()) {
      throw Error(ErrorCode::kAlignmentError,
                  "sentence " + std::to_string(i + 1) + " differs in length");
    }
    for (const auto& tree : output[i].trees) {
      for (const auto& ref : reference[i].trees) {
        if (ref.predicate != tree.predicate) continue;
        for (int m = 1; m <= tree.tree.size(); ++m) {
          agreement.matched += tree.tree.heads[m] == ref.tree.heads[m];
          ++agreement.total;
        }
        break;
      }
    }
  }
  return agreement;
}

int Run(const std::vector<std::string>& raw_args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app("Semantic role labeling as latent-tree dependency parsing", "treesrl");
  app.require_subcommand(1);
  CliConfig c;
  TrainConfig train;
  SyntheticConfig synth;
  std::string dev_path;

  auto io = [&](CLI::App* sub) {
    sub->add_option("--input", c.input, "Input path, '-' for stdin (jsonl only)");
    sub->add_option("--output", c.output, "Output path, '-' for stdout (jsonl only)");
    sub->add_option("--format", c.format, "jsonl or props")->check(CLI::IsMember({"jsonl", "props"}));
  };
  auto decoding = [&](CLI::App* sub) {
    sub->add_option("--model", c.model, "Checkpoint path")->required();
    sub->add_option("--order", c.order, "Override the checkpoint's order (1 or 2)");
    sub->add_flag("--gold-predicates", c.gold_predicates, "Take predicates from the input frames");
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* convert = app.add_subcommand("convert", "Convert between frames and tree records");
  io(convert);
  convert->add_option("--direction", c.direction, "srl2trees or trees2srl")
      ->check(CLI::IsMember({"srl2trees", "trees2srl"}));
  convert->add_option("--variant", c.variant, "latent, first, last or flat");

  CLI::App* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--train", c.input, "Training corpus")->required();
  train_cmd->add_option("--dev", dev_path, "Development corpus")->required();
  train_cmd->add_option("--model", c.model, "Checkpoint to write")->required();
  train_cmd->add_option("--format", c.format, "jsonl or props");
  train_cmd->add_option("--order", c.order, "1 or 2");
  train_cmd->add_option("--variant", c.variant, "latent, first, last or flat");
  train_cmd->add_option("--scorer", c.scorer, "loglinear or neural");
  train_cmd->add_option("--seed", c.seed, "Random seed");
  train_cmd->add_option("--threads", c.threads, "Worker threads");
  train_cmd->add_option("--learning-rate", train.learning_rate);
  train_cmd->add_option("--beta1", train.beta1);
  train_cmd->add_option("--beta2", train.beta2);
  train_cmd->add_option("--epsilon", train.epsilon);
  train_cmd->add_option("--epochs", train.epochs);
  train_cmd->add_option("--patience", train.patience);
  train_cmd->add_option("--batch-tokens", train.batch_tokens);
  train_cmd->add_option("--aux-weight", train.loss.aux_weight, "Root-label loss weight; 0 disables");
  train_cmd->add_option("--hash-bits", train.loglinear.hash_bits);
  train_cmd->add_option("--embed-dim", train.neural.embed_dim);
  train_cmd->add_option("--encoder-dim", train.neural.encoder_dim);
  train_cmd->add_option("--arc-dim", train.neural.arc_dim);
  train_cmd->add_option("--label-dim", train.neural.label_dim);
  train_cmd->add_option("--sib-dim", train.neural.sib_dim);

  CLI::App* parse = app.add_subcommand("parse", "Predict frames");
  io(parse);
  decoding(parse);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score predictions against gold frames");
  evaluate->add_option("--gold", c.gold, "Gold corpus")->required();
  evaluate->add_option("--pred", c.input, "Predicted corpus")->required();
  evaluate->add_option("--format", c.format, "jsonl or props");

  CLI::App* induce = app.add_subcommand("induce", "Emit 1-best full dependency trees");
  io(induce);
  decoding(induce);
  induce->add_option("--reference", c.reference, "Reference tree records");

  CLI::App* check = app.add_subcommand("check", "Audit charts against exhaustive enumeration");
  check->add_option("--input", c.input, "Corpus whose sentences and frames are audited");
  check->add_option("--format", c.format, "jsonl or props");
  check->add_option("--order", c.order, "1 or 2 (default both)");
  check->add_option("--seed", c.seed, "Seed for the random scores");
  check->add_flag("--inject-fault", c.inject_fault)->group("");

  CLI::App* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus");
  synth_cmd->add_option("--output", c.output, "Output path, '-' for stdout");
  synth_cmd->add_option("--format", c.format, "jsonl or props");
  synth_cmd->add_option("--sentences", synth.sentences);
  synth_cmd->add_option("--min-length", synth.min_length);
  synth_cmd->add_option("--max-length", synth.max_length);
  synth_cmd->add_option("--seed", synth.seed);

  try {
    std::vector<std::string> args = {"treesrl"};
    args.insert(args.end(), raw_args.begin(), raw_args.end());
    args = MergeConfigFile(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (convert->parsed()) return Convert(c, in, out);
    if (train_cmd->parsed()) return TrainCommand(c, dev_path, train, in, err);
    if (parse->parsed()) return ParseCommand(c, parse->count("--order") > 0, in, out, err);
    if (evaluate->parsed()) {
      const Format format = ParseFormat(c.format);
      const Corpus gold = ReadInput(c.gold, format, in);
      const Corpus predicted = ReadInput(c.input, format, in);
      out << FormatReport(Evaluate(gold, predicted));
      return kSuccess;
    }
    if (induce->parsed()) return InduceCommand(c, induce->count("--order") > 0, in, out, err);
    if (check->parsed()) return CheckCommand(c, check->count("--order") > 0, in, out, err);
    if (synth_cmd->parsed()) {
      WriteOutput(c.output, ParseFormat(c.format), GenerateSynthetic(synth), out);
      return kSuccess;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace treesrl::cli
