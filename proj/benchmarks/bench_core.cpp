#include <benchmark/benchmark.h>

#include <random>

#include "defx/crf.hpp"
#include "defx/eval.hpp"
#include "defx/features.hpp"
#include "defx/heuristics.hpp"
#include "defx/preprocess.hpp"
#include "defx/synthetic.hpp"

using namespace defx;

namespace {

CrfModel trained_model() {
  TrainConfig cfg;
  cfg.epochs = 10;
  return train(make_cue_corpus(50, 7), FeatureExtractor(), cfg).model;
}

void BM_Tokenize(benchmark::State& state) {
  std::string text =
      "Textual entailment is the task of determining whether a hypothesis is "
      "true , given $s^{task}$ and a premise ( WSD ) .";
  for (auto _ : state) {
    auto toks = tokenize(text);
    benchmark::DoNotOptimize(toks);
  }
}
BENCHMARK(BM_Tokenize);

void BM_FeatureExtract(benchmark::State& state) {
  Dataset data = make_cue_corpus(32, 3);
  FeatureExtractor fx;
  std::size_t i = 0;
  for (auto _ : state) {
    auto fv = fx(data.sentences[i++ % data.sentences.size()]);
    benchmark::DoNotOptimize(fv);
  }
}
BENCHMARK(BM_FeatureExtract);

void BM_Viterbi(benchmark::State& state) {
  CrfModel model = trained_model();
  Dataset data = make_cue_corpus(32, 5);
  FeatureExtractor fx;
  std::vector<std::vector<FeatureVector>> feats;
  for (const auto& s : data.sentences) feats.push_back(fx(s));
  std::size_t i = 0;
  for (auto _ : state) {
    auto res = viterbi(model, feats[i++ % feats.size()]);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_Viterbi);

void BM_ForwardBackward(benchmark::State& state) {
  CrfModel model = trained_model();
  Dataset data = make_cue_corpus(16, 11);
  FeatureExtractor fx;
  std::vector<std::vector<FeatureVector>> feats;
  std::vector<BatchItem> batch;
  for (const auto& s : data.sentences) feats.push_back(fx(s));
  for (std::size_t i = 0; i < feats.size(); ++i) {
    batch.push_back({&feats[i], &*data.sentences[i].gold_tags, nullptr});
  }
  for (auto _ : state) {
    auto loss = log_likelihood_and_gradient(model, batch);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_ForwardBackward);

void BM_SchwartzHearst(benchmark::State& state) {
  Sentence s;
  s.tokens = tokenize("the Stanford Natural Language Inference ( SNLI ) corpus and "
                      "word sense disambiguation ( WSD ) task");
  for (auto _ : state) {
    auto pairs = detect_abbreviations(s);
    benchmark::DoNotOptimize(pairs);
  }
}
BENCHMARK(BM_SchwartzHearst);

void BM_Postprocess(benchmark::State& state) {
  std::mt19937_64 rng(9);
  std::vector<std::vector<SlotTag>> inputs;
  for (int i = 0; i < 64; ++i) {
    std::vector<SlotTag> t(24);
    for (auto& x : t) x = static_cast<SlotTag>(rng() % kNumTags);
    inputs.push_back(std::move(t));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    auto pred = postprocess(inputs[i++ % inputs.size()]);
    benchmark::DoNotOptimize(pred);
  }
}
BENCHMARK(BM_Postprocess);

}  // namespace

BENCHMARK_MAIN();
