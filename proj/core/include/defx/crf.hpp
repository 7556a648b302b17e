#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "defx/corpus.hpp"
#include "defx/features.hpp"

namespace defx {

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t max_sentence_length = 512;
  std::uint64_t seed = 13;
  std::size_t batch_size = 16;
  bool operator==(const TrainConfig&) const = default;
};

// Linear-chain CRF over the five slot tags. Emission weights are per
// (feature, tag); transitions are [prev*5 + next]; bos/eos weight the first
// and last tag of a sequence.
struct CrfModel {
  std::vector<std::string> feature_names;            // id -> name
  std::unordered_map<std::string, int> feature_index;  // name -> dense id
  std::vector<double> emission;                      // feature_names.size() * 5
  std::array<double, kNumTags * kNumTags> transition{};
  std::array<double, kNumTags> bos{};
  std::array<double, kNumTags> eos{};
  TrainConfig config;

  int feature_id(std::string_view name) const;  // -1 when unseen
  int add_feature(const std::string& name);     // grows emission by one zero row
  std::size_t num_features() const { return feature_names.size(); }
};

// Sum of emission (+ external) potentials along tags, plus bos, transitions,
// and eos. Lengths must agree; empty sequences are an error.
double sequence_score(const CrfModel& model,
                      const std::vector<FeatureVector>& feats,
                      const std::vector<SlotTag>& tags,
                      const ExternalScores* ext = nullptr);

struct ViterbiResult {
  std::vector<SlotTag> tags;
  double score;
};

// Exact max-score decode. Ties break toward the lexicographically smallest
// tag-index sequence; candidates within 1e-10 (relative) of the step maximum
// count as tied, since equal-scoring paths reassociate their sums in
// floating point. `constrained` forbids transitions that would produce
// invalid BIO (ablation flag; off by default).
ViterbiResult viterbi(const CrfModel& model,
                      const std::vector<FeatureVector>& feats,
                      const ExternalScores* ext = nullptr,
                      bool constrained = false);

struct BatchItem {
  const std::vector<FeatureVector>* features;
  const std::vector<SlotTag>* tags;
  const ExternalScores* ext = nullptr;
};

struct CrfGradient {
  std::vector<double> emission;
  std::array<double, kNumTags * kNumTags> transition{};
  std::array<double, kNumTags> bos{};
  std::array<double, kNumTags> eos{};
};

struct LossResult {
  double nll = 0.0;
  CrfGradient gradient;
  std::size_t truncated = 0;  // sentences cut to max_sentence_length
};

// nll = sum_i [logZ_i - score(gold_i)] + (l2/2)||w||^2, with logZ from the
// log-space forward algorithm; gradient = expected - empirical counts + l2*w.
LossResult log_likelihood_and_gradient(const CrfModel& model,
                                       const std::vector<BatchItem>& batch);

using FeatureFn = std::function<std::vector<FeatureVector>(const Sentence&)>;

struct TrainResult {
  CrfModel model;
  std::vector<double> epoch_nll;
  std::size_t truncated_sentences = 0;
};

// Mini-batch gradient descent, deterministic given config.seed (seeded
// shuffle each epoch, fixed accumulation order). The l2 penalty is applied
// as a proximal shrink after each data step so extreme l2 stays stable.
TrainResult train(const Dataset& data, const FeatureFn& features, const TrainConfig& config);

// Decode one sentence worth of features; sentences longer than
// max_sentence_length are windowed into overlapping chunks (stride = half
// window) and stitched by preferring the chunk where the token sits farther
// from a chunk edge.
std::vector<SlotTag> decode(const CrfModel& model,
                            const std::vector<FeatureVector>& feats,
                            const ExternalScores* ext = nullptr,
                            bool constrained = false);

// Per-sentence decode over a collection; empty sentences yield empty tags.
std::vector<std::vector<SlotTag>> predict(const CrfModel& model,
                                          const std::vector<Sentence>& sentences,
                                          const FeatureFn& features,
                                          const ScoreMap* scores = nullptr,
                                          bool constrained = false);

enum class ModelFormat { Binary, Json };

// Both containers round-trip weights bit-identically; load sniffs the format.
void save_model(const CrfModel& model, const std::string& path,
                ModelFormat format = ModelFormat::Binary);
CrfModel load_model(const std::string& path);

std::string model_to_json(const CrfModel& model);
CrfModel model_from_json(std::string_view text);

}  // namespace defx
