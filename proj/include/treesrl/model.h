#ifndef TREESRL_MODEL_H_
#define TREESRL_MODEL_H_

#include <map>
#include <memory>
#include <string>

#include "treesrl/scoring.h"

namespace treesrl {

// Training provenance stored next to the parameters.
struct ModelMetadata {
  int order = 1;
  std::string variant = "latent";
  uint64_t seed = 0;
  int epoch = 0;
  double dev_f1 = 0.0;
  double dev_cm = 0.0;
  // Flattened training options, written in key order.
  std::map<std::string, std::string> options;
};

struct Model {
  std::unique_ptr<Scorer> scorer;
  ModelMetadata metadata;
};

// Binary container: 8-byte magic, u32 version, u64 length + JSON header
// (scorer kind, labels, vocabulary, hyper-parameters, metadata), u32 block
// count, per block {u32 name length, name, u32 rank, u32 dims...}, then all
// values as little-endian IEEE-754 doubles. Output is a pure function of
// the inputs.
std::string SerializeModel(const Scorer& scorer, const ModelMetadata& metadata);
Model DeserializeModel(const std::string& bytes);

void SaveModel(const std::string& path, const Scorer& scorer, const ModelMetadata& metadata);
Model LoadModel(const std::string& path);

}  // namespace treesrl

#endif  // TREESRL_MODEL_H_
