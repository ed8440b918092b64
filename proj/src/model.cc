#include "treesrl/model.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace treesrl {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'R', 'L', 'M', 'O', 'D', 'L'};
constexpr uint32_t kVersion = 1;

using Json = nlohmann::ordered_json;

void PutU32(std::string& out, uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void PutU64(std::string& out, uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  uint64_t Uint(int width) {
    Need(width);
    uint64_t v = 0;
    for (int k = 0; k < width; ++k) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    }
    pos_ += width;
    return v;
  }
  std::string Bytes(size_t count) {
    Need(count);
    std::string out = bytes_.substr(pos_, count);
    pos_ += count;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(size_t count) const {
    if (bytes_.size() - pos_ < count) throw Error(ErrorCode::kIoError, "truncated model file");
  }
  const std::string& bytes_;
  size_t pos_ = 0;
};

Json Header(const Scorer& scorer, const ModelMetadata& metadata) {
  Json header;
  header["scorer"] = ScorerKindName(scorer.kind());
  header["labels"] = scorer.labels().Roles();
  if (const auto* neural = dynamic_cast<const NeuralScorer*>(&scorer)) {
    const NeuralConfig& c = neural->config();
    header["neural"] = {{"embed_dim", c.embed_dim}, {"encoder_dim", c.encoder_dim},
                        {"arc_dim", c.arc_dim},     {"label_dim", c.label_dim},
                        {"sib_dim", c.sib_dim},     {"init_scale", c.init_scale},
                        {"seed", c.seed}};
    header["vocab"] = neural->vocab().words();
  } else if (const auto* linear = dynamic_cast<const LogLinearScorer*>(&scorer)) {
    header["loglinear"] = {{"hash_bits", linear->config().hash_bits}};
  }
  Json meta;
  meta["order"] = metadata.order;
  meta["variant"] = metadata.variant;
  meta["seed"] = metadata.seed;
  meta["epoch"] = metadata.epoch;
  meta["dev_f1"] = metadata.dev_f1;
  meta["dev_cm"] = metadata.dev_cm;
  meta["options"] = Json::object();
  for (const auto& [key, value] : metadata.options) meta["options"][key] = value;
  header["metadata"] = meta;
  return header;
}

std::unique_ptr<Scorer> BuildScorer(const Json& header) {
  LabelSet labels(header.at("labels").get<std::vector<std::string>>());
  const ScorerKind kind = ParseScorerKind(header.at("scorer").get<std::string>());
  if (kind == ScorerKind::kNeural) {
    const Json& j = header.at("neural");
    NeuralConfig c;
    c.embed_dim = j.at("embed_dim");
    c.encoder_dim = j.at("encoder_dim");
    c.arc_dim = j.at("arc_dim");
    c.label_dim = j.at("label_dim");
    c.sib_dim = j.at("sib_dim");
    c.init_scale = j.at("init_scale");
    c.seed = j.at("seed");
    Vocabulary vocab(header.at("vocab").get<std::vector<std::string>>());
    return std::make_unique<NeuralScorer>(std::move(labels), std::move(vocab), c);
  }
  LogLinearConfig c;
  c.hash_bits = header.at("loglinear").at("hash_bits");
  return std::make_unique<LogLinearScorer>(std::move(labels), c);
}

}  // namespace

std::string SerializeModel(const Scorer& scorer, const ModelMetadata& metadata) {
  std::string out(kMagic, sizeof(kMagic));
  PutU32(out, kVersion);
  const std::string header = Header(scorer, metadata).dump();
  PutU64(out, header.size());
  out += header;
  PutU32(out, static_cast<uint32_t>(scorer.params().size()));
  for (const auto& block : scorer.params()) {
    PutU32(out, static_cast<uint32_t>(block.name.size()));
    out += block.name;
    PutU32(out, static_cast<uint32_t>(block.shape.size()));
    for (int d : block.shape) PutU32(out, static_cast<uint32_t>(d));
  }
  for (const auto& block : scorer.params()) {
    for (double v : block.values) PutU64(out, std::bit_cast<uint64_t>(v));
  }
  return out;
}

Model DeserializeModel(const std::string& bytes) {
  Reader in(bytes);
  if (in.Bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw Error(ErrorCode::kIoError, "not a model file (bad magic)");
  }
  const uint32_t version = static_cast<uint32_t>(in.Uint(4));
  if (version != kVersion) {
    throw Error(ErrorCode::kIoError, "unsupported model version " + std::to_string(version));
  }
  const std::string header_text = in.Bytes(in.Uint(8));
  Model model;
  try {
    const Json header = Json::parse(header_text);
    model.scorer = BuildScorer(header);
    const Json& meta = header.at("metadata");
    model.metadata.order = meta.at("order");
    model.metadata.variant = meta.at("variant");
    model.metadata.seed = meta.at("seed");
    model.metadata.epoch = meta.at("epoch");
    model.metadata.dev_f1 = meta.at("dev_f1");
    model.metadata.dev_cm = meta.at("dev_cm");
    for (const auto& [key, value] : meta.at("options").items()) {
      model.metadata.options[key] = value.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("bad model header: ") + e.what());
  }

  auto& params = model.scorer->params();
  const uint32_t count = static_cast<uint32_t>(in.Uint(4));
  if (count != params.size()) throw Error(ErrorCode::kIoError, "parameter block count mismatch");
  for (auto& block : params) {
    const std::string name = in.Bytes(in.Uint(4));
    std::vector<int> shape(in.Uint(4));
    for (int& d : shape) d = static_cast<int>(in.Uint(4));
    if (name != block.name || shape != block.shape) {
      throw Error(ErrorCode::kIoError, "parameter block '" + name + "' does not match scorer");
    }
  }
  for (auto& block : params) {
    for (double& v : block.values) v = std::bit_cast<double>(in.Uint(8));
  }
  if (!in.done()) throw Error(ErrorCode::kIoError, "trailing bytes in model file");
  return model;
}

void SaveModel(const std::string& path, const Scorer& scorer, const ModelMetadata& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  const std::string bytes = SerializeModel(scorer, metadata);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

Model LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return DeserializeModel(buffer.str());
}

}  // namespace treesrl
