#include "defx/crf.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "defx/io.hpp"
#include "json.hpp"

namespace defx {

using nlohmann::json;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kT = kNumTags;

inline double logsumexp(const std::array<double, kT>& v) {
  double m = v[0];
  for (int i = 1; i < kT; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < kT; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

// BIO-legal transition: I-X only after B-X or I-X.
inline bool allowed_transition(int prev, int next) {
  SlotTag n = static_cast<SlotTag>(next);
  if (!is_inside(n)) return true;
  return kind_of(static_cast<SlotTag>(prev)) == kind_of(n);
}

inline bool allowed_start(int y) { return !is_inside(static_cast<SlotTag>(y)); }

std::vector<std::vector<int>> encode_features(const CrfModel& m,
                                              const std::vector<FeatureVector>& feats,
                                              std::size_t limit) {
  std::vector<std::vector<int>> enc(limit);
  for (std::size_t t = 0; t < limit; ++t) {
    enc[t].reserve(feats[t].active.size());
    for (const std::string& name : feats[t].active) {
      int id = m.feature_id(name);
      if (id >= 0) enc[t].push_back(id);  // unseen features are dropped
    }
  }
  return enc;
}

std::vector<std::array<double, kT>> potentials(const CrfModel& m,
                                               const std::vector<std::vector<int>>& enc,
                                               const ExternalScores* ext) {
  std::vector<std::array<double, kT>> u(enc.size());
  for (std::size_t t = 0; t < enc.size(); ++t) {
    u[t].fill(0.0);
    for (int f : enc[t]) {
      const double* row = m.emission.data() + static_cast<std::size_t>(f) * kT;
      for (int y = 0; y < kT; ++y) u[t][y] += row[y];
    }
    if (ext) {
      for (int y = 0; y < kT; ++y) u[t][y] += ext->rows[t][y];
    }
  }
  return u;
}

double score_tags(const CrfModel& m, const std::vector<std::array<double, kT>>& u,
                  const std::vector<SlotTag>& tags) {
  double s = m.bos[static_cast<int>(tags[0])] + u[0][static_cast<int>(tags[0])];
  for (std::size_t t = 1; t < tags.size(); ++t) {
    int a = static_cast<int>(tags[t - 1]);
    int b = static_cast<int>(tags[t]);
    s += m.transition[a * kT + b] + u[t][b];
  }
  s += m.eos[static_cast<int>(tags.back())];
  return s;
}

struct SentenceLoss {
  double nll;
  std::size_t truncated;
};

// Accumulates (expected - empirical) counts for one sentence into grad.
SentenceLoss sentence_loss(const CrfModel& m, const BatchItem& item, CrfGradient& grad) {
  const std::size_t full = item.tags->size();
  if (item.features->size() != full) {
    throw Error("crf: feature/tag length mismatch (" + std::to_string(item.features->size()) +
                " vs " + std::to_string(full) + ")");
  }
  if (full == 0) throw Error("crf: empty sentence in batch");
  if (item.ext && item.ext->rows.size() != full) {
    throw Error("crf: external scores length mismatch");
  }
  const std::size_t T = std::min(full, m.config.max_sentence_length);

  auto enc = encode_features(m, *item.features, T);
  auto u = potentials(m, enc, item.ext);

  // forward
  std::vector<std::array<double, kT>> alpha(T);
  for (int y = 0; y < kT; ++y) alpha[0][y] = m.bos[y] + u[0][y];
  std::array<double, kT> tmp;
  for (std::size_t t = 1; t < T; ++t) {
    for (int y = 0; y < kT; ++y) {
      for (int p = 0; p < kT; ++p) tmp[p] = alpha[t - 1][p] + m.transition[p * kT + y];
      alpha[t][y] = u[t][y] + logsumexp(tmp);
    }
  }
  for (int y = 0; y < kT; ++y) tmp[y] = alpha[T - 1][y] + m.eos[y];
  const double log_z = logsumexp(tmp);

  // backward
  std::vector<std::array<double, kT>> beta(T);
  for (int y = 0; y < kT; ++y) beta[T - 1][y] = m.eos[y];
  for (std::size_t t = T - 1; t-- > 0;) {
    for (int y = 0; y < kT; ++y) {
      for (int q = 0; q < kT; ++q) {
        tmp[q] = m.transition[y * kT + q] + u[t + 1][q] + beta[t + 1][q];
      }
      beta[t][y] = logsumexp(tmp);
    }
  }

  // expected counts
  for (std::size_t t = 0; t < T; ++t) {
    std::array<double, kT> marginal;
    for (int y = 0; y < kT; ++y) marginal[y] = std::exp(alpha[t][y] + beta[t][y] - log_z);
    for (int f : enc[t]) {
      double* row = grad.emission.data() + static_cast<std::size_t>(f) * kT;
      for (int y = 0; y < kT; ++y) row[y] += marginal[y];
    }
    if (t == 0) {
      for (int y = 0; y < kT; ++y) grad.bos[y] += marginal[y];
    }
    if (t == T - 1) {
      for (int y = 0; y < kT; ++y) grad.eos[y] += marginal[y];
    }
    if (t + 1 < T) {
      for (int y = 0; y < kT; ++y) {
        for (int q = 0; q < kT; ++q) {
          grad.transition[y * kT + q] += std::exp(alpha[t][y] + m.transition[y * kT + q] +
                                                  u[t + 1][q] + beta[t + 1][q] - log_z);
        }
      }
    }
  }

  // empirical counts
  std::vector<SlotTag> gold(item.tags->begin(), item.tags->begin() + T);
  for (std::size_t t = 0; t < T; ++t) {
    int y = static_cast<int>(gold[t]);
    for (int f : enc[t]) grad.emission[static_cast<std::size_t>(f) * kT + y] -= 1.0;
  }
  grad.bos[static_cast<int>(gold[0])] -= 1.0;
  grad.eos[static_cast<int>(gold[T - 1])] -= 1.0;
  for (std::size_t t = 1; t < T; ++t) {
    grad.transition[static_cast<int>(gold[t - 1]) * kT + static_cast<int>(gold[t])] -= 1.0;
  }

  return {log_z - score_tags(m, u, gold), full > T ? std::size_t{1} : std::size_t{0}};
}

LossResult loss_impl(const CrfModel& m, const std::vector<BatchItem>& batch, double l2) {
  LossResult res;
  res.gradient.emission.assign(m.emission.size(), 0.0);
  for (const BatchItem& item : batch) {
    auto [nll, truncated] = sentence_loss(m, item, res.gradient);
    res.nll += nll;
    res.truncated += truncated;
  }
  if (l2 > 0.0) {
    double sq = 0.0;
    auto penalize = [&](const double* w, double* g, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i) {
        sq += w[i] * w[i];
        g[i] += l2 * w[i];
      }
    };
    penalize(m.emission.data(), res.gradient.emission.data(), m.emission.size());
    penalize(m.transition.data(), res.gradient.transition.data(), m.transition.size());
    penalize(m.bos.data(), res.gradient.bos.data(), m.bos.size());
    penalize(m.eos.data(), res.gradient.eos.data(), m.eos.size());
    res.nll += 0.5 * l2 * sq;
  }
  return res;
}

}  // namespace

int CrfModel::feature_id(std::string_view name) const {
  auto it = feature_index.find(std::string(name));
  return it == feature_index.end() ? -1 : it->second;
}

int CrfModel::add_feature(const std::string& name) {
  auto it = feature_index.find(name);
  if (it != feature_index.end()) return it->second;
  int id = static_cast<int>(feature_names.size());
  feature_names.push_back(name);
  feature_index.emplace(name, id);
  emission.resize(emission.size() + kT, 0.0);
  return id;
}

double sequence_score(const CrfModel& model, const std::vector<FeatureVector>& feats,
                      const std::vector<SlotTag>& tags, const ExternalScores* ext) {
  if (feats.size() != tags.size()) throw Error("sequence_score: length mismatch");
  if (tags.empty()) throw Error("sequence_score: empty sequence");
  if (ext && ext->rows.size() != tags.size()) {
    throw Error("sequence_score: external scores length mismatch");
  }
  auto enc = encode_features(model, feats, feats.size());
  auto u = potentials(model, enc, ext);
  return score_tags(model, u, tags);
}

ViterbiResult viterbi(const CrfModel& model, const std::vector<FeatureVector>& feats,
                      const ExternalScores* ext, bool constrained) {
  const std::size_t T = feats.size();
  if (T == 0) throw Error("viterbi: empty sentence");
  if (ext && ext->rows.size() != T) throw Error("viterbi: external scores length mismatch");

  auto enc = encode_features(model, feats, T);
  auto u = potentials(model, enc, ext);

  // Suffix DP so reconstruction can run left to right and pick the smallest
  // tag index among maximizers, giving the lexicographically smallest
  // optimal sequence.
  std::vector<std::array<double, kT>> best(T);
  for (int y = 0; y < kT; ++y) best[T - 1][y] = u[T - 1][y] + model.eos[y];
  for (std::size_t t = T - 1; t-- > 0;) {
    for (int y = 0; y < kT; ++y) {
      double b = kNegInf;
      for (int q = 0; q < kT; ++q) {
        if (constrained && !allowed_transition(y, q)) continue;
        b = std::max(b, model.transition[y * kT + q] + best[t + 1][q]);
      }
      best[t][y] = u[t][y] + b;
    }
  }

  // Equal-scoring sequences reach the comparison through different summation
  // orders, so exact ties differ by rounding noise; a tiny relative tolerance
  // groups them before the lowest tag index wins.
  std::vector<SlotTag> tags(T);
  int prev = -1;
  std::array<double, kT> cand;
  for (std::size_t t = 0; t < T; ++t) {
    double b = kNegInf;
    for (int y = 0; y < kT; ++y) {
      cand[y] = kNegInf;
      if (t == 0) {
        if (constrained && !allowed_start(y)) continue;
      } else if (constrained && !allowed_transition(prev, y)) {
        continue;
      }
      cand[y] = (t == 0 ? model.bos[y] : model.transition[prev * kT + y]) + best[t][y];
      b = std::max(b, cand[y]);
    }
    const double tol = 1e-10 * std::max(1.0, std::abs(b));
    int arg = 0;
    for (int y = 0; y < kT; ++y) {
      if (cand[y] >= b - tol) {
        arg = y;
        break;
      }
    }
    tags[t] = static_cast<SlotTag>(arg);
    prev = arg;
  }
  return {tags, score_tags(model, u, tags)};
}

LossResult log_likelihood_and_gradient(const CrfModel& model,
                                       const std::vector<BatchItem>& batch) {
  return loss_impl(model, batch, model.config.l2);
}

TrainResult train(const Dataset& data, const FeatureFn& features, const TrainConfig& config) {
  const std::size_t n = data.sentences.size();
  if (n == 0) throw Error("train: empty dataset");
  for (const Sentence& s : data.sentences) {
    if (!s.gold_tags) throw Error("train: unlabeled sentence");
    if (s.size() == 0) throw Error("train: empty sentence");
  }

  std::vector<std::vector<FeatureVector>> feats(n);
  for (std::size_t i = 0; i < n; ++i) feats[i] = features(data.sentences[i]);

  TrainResult out;
  CrfModel& model = out.model;
  model.config = config;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t limit = std::min(feats[i].size(), config.max_sentence_length);
    for (std::size_t t = 0; t < limit; ++t) {
      for (const std::string& name : feats[i][t].active) model.add_feature(name);
    }
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t bs = std::max<std::size_t>(1, config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) {
      std::size_t j = rng() % (i + 1);
      std::swap(order[i], order[j]);
    }

    double epoch_data_nll = 0.0;
    for (std::size_t begin = 0; begin < n; begin += bs) {
      std::size_t end = std::min(begin + bs, n);
      std::vector<BatchItem> batch;
      batch.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        std::size_t i = order[k];
        batch.push_back({&feats[i], &*data.sentences[i].gold_tags, nullptr});
      }
      LossResult loss = loss_impl(model, batch, 0.0);
      epoch_data_nll += loss.nll;

      const double step = config.learning_rate / static_cast<double>(batch.size());
      for (std::size_t i = 0; i < model.emission.size(); ++i) {
        model.emission[i] -= step * loss.gradient.emission[i];
      }
      for (std::size_t i = 0; i < model.transition.size(); ++i) {
        model.transition[i] -= step * loss.gradient.transition[i];
      }
      for (int y = 0; y < kT; ++y) {
        model.bos[y] -= step * loss.gradient.bos[y];
        model.eos[y] -= step * loss.gradient.eos[y];
      }
      if (config.l2 > 0.0) {
        // proximal shrink keeps huge l2 stable instead of oscillating
        const double shrink = 1.0 / (1.0 + config.learning_rate * config.l2);
        for (double& w : model.emission) w *= shrink;
        for (double& w : model.transition) w *= shrink;
        for (double& w : model.bos) w *= shrink;
        for (double& w : model.eos) w *= shrink;
      }
    }

    double sq = 0.0;
    if (config.l2 > 0.0) {
      for (double w : model.emission) sq += w * w;
      for (double w : model.transition) sq += w * w;
      for (double w : model.bos) sq += w * w;
      for (double w : model.eos) sq += w * w;
    }
    out.epoch_nll.push_back(epoch_data_nll + 0.5 * config.l2 * sq);
  }

  // count sentences over the length cap once, not per epoch
  out.truncated_sentences = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (feats[i].size() > config.max_sentence_length) ++out.truncated_sentences;
  }
  return out;
}

std::vector<SlotTag> decode(const CrfModel& model, const std::vector<FeatureVector>& feats,
                            const ExternalScores* ext, bool constrained) {
  const std::size_t T = feats.size();
  if (T == 0) return {};
  const std::size_t W = model.config.max_sentence_length;
  if (ext && ext->rows.size() != T) throw Error("decode: external scores length mismatch");
  if (T <= W) return viterbi(model, feats, ext, constrained).tags;

  // overlapping windows, stride = half window
  const std::size_t stride = std::max<std::size_t>(1, W / 2);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + W < T; s += stride) starts.push_back(s);
  starts.push_back(T - W);

  std::vector<SlotTag> out(T, SlotTag::O);
  std::vector<long> best_margin(T, -1);
  for (std::size_t s : starts) {
    std::vector<FeatureVector> slice(feats.begin() + s, feats.begin() + s + W);
    ExternalScores ext_slice;
    const ExternalScores* ext_ptr = nullptr;
    if (ext) {
      ext_slice.rows.assign(ext->rows.begin() + s, ext->rows.begin() + s + W);
      ext_ptr = &ext_slice;
    }
    auto tags = viterbi(model, slice, ext_ptr, constrained).tags;
    for (std::size_t t = 0; t < W; ++t) {
      // keep the chunk where the token sits farthest from a window edge
      long margin = static_cast<long>(std::min(t, W - 1 - t));
      if (margin > best_margin[s + t]) {
        best_margin[s + t] = margin;
        out[s + t] = tags[t];
      }
    }
  }
  return out;
}

std::vector<std::vector<SlotTag>> predict(const CrfModel& model,
                                          const std::vector<Sentence>& sentences,
                                          const FeatureFn& features, const ScoreMap* scores,
                                          bool constrained) {
  std::vector<std::vector<SlotTag>> out;
  out.reserve(sentences.size());
  for (const Sentence& s : sentences) {
    const ExternalScores* ext = scores ? find_scores(*scores, s) : nullptr;
    out.push_back(decode(model, features(s), ext, constrained));
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'D', 'E', 'F', 'X', 'C', 'R', 'F', '\x01'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

struct Reader {
  std::string_view data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw Error("model file truncated");
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 8;
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }
  std::string str() {
    std::uint64_t n = u64();
    need(n);
    std::string s(data.substr(pos, n));
    pos += n;
    return s;
  }
};

json config_to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"learning_rate", c.learning_rate},
              {"l2", c.l2},
              {"max_sentence_length", c.max_sentence_length},
              {"seed", c.seed},
              {"batch_size", c.batch_size}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.l2 = j.at("l2").get<double>();
  c.max_sentence_length = j.at("max_sentence_length").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  return c;
}

}  // namespace

std::string model_to_json(const CrfModel& model) {
  json j;
  j["format"] = "defx-crf";
  j["version"] = 1;
  j["config"] = config_to_json(model.config);
  j["features"] = model.feature_names;
  j["emission"] = model.emission;
  j["transition"] = model.transition;
  j["bos"] = model.bos;
  j["eos"] = model.eos;
  return j.dump();
}

CrfModel model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model json parse error: ") + e.what());
  }
  if (!j.contains("format") || j["format"] != "defx-crf") {
    throw Error("model json: unrecognized format");
  }
  CrfModel m;
  m.config = config_from_json(j.at("config"));
  m.feature_names = j.at("features").get<std::vector<std::string>>();
  m.emission = j.at("emission").get<std::vector<double>>();
  auto trans = j.at("transition").get<std::vector<double>>();
  auto bos = j.at("bos").get<std::vector<double>>();
  auto eos = j.at("eos").get<std::vector<double>>();
  if (m.emission.size() != m.feature_names.size() * kT || trans.size() != m.transition.size() ||
      bos.size() != kT || eos.size() != kT) {
    throw Error("model json: inconsistent weight shapes");
  }
  std::copy(trans.begin(), trans.end(), m.transition.begin());
  std::copy(bos.begin(), bos.end(), m.bos.begin());
  std::copy(eos.begin(), eos.end(), m.eos.begin());
  for (std::size_t i = 0; i < m.feature_names.size(); ++i) {
    m.feature_index.emplace(m.feature_names[i], static_cast<int>(i));
  }
  return m;
}

void save_model(const CrfModel& model, const std::string& path, ModelFormat format) {
  if (format == ModelFormat::Json) {
    write_file(path, model_to_json(model));
    return;
  }
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u64(out, 1);  // container version
  put_u64(out, static_cast<std::uint64_t>(model.config.epochs));
  put_f64(out, model.config.learning_rate);
  put_f64(out, model.config.l2);
  put_u64(out, model.config.max_sentence_length);
  put_u64(out, model.config.seed);
  put_u64(out, model.config.batch_size);
  put_u64(out, model.feature_names.size());
  for (const std::string& name : model.feature_names) {
    put_u64(out, name.size());
    out += name;
  }
  for (double w : model.emission) put_f64(out, w);
  for (double w : model.transition) put_f64(out, w);
  for (double w : model.bos) put_f64(out, w);
  for (double w : model.eos) put_f64(out, w);
  write_file(path, out);
}

CrfModel load_model(const std::string& path) {
  std::string data = read_file(path);
  if (data.empty()) throw Error("model file empty: " + path);
  if (data[0] == '{') return model_from_json(data);
  if (data.size() < sizeof(kMagic) ||
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error("model file has unknown format: " + path);
  }
  Reader r{data, sizeof(kMagic)};
  std::uint64_t version = r.u64();
  if (version != 1) throw Error("model file version unsupported: " + std::to_string(version));
  CrfModel m;
  m.config.epochs = static_cast<int>(r.u64());
  m.config.learning_rate = r.f64();
  m.config.l2 = r.f64();
  m.config.max_sentence_length = r.u64();
  m.config.seed = r.u64();
  m.config.batch_size = r.u64();
  std::uint64_t nf = r.u64();
  m.feature_names.reserve(nf);
  for (std::uint64_t i = 0; i < nf; ++i) {
    m.feature_names.push_back(r.str());
    m.feature_index.emplace(m.feature_names.back(), static_cast<int>(i));
  }
  m.emission.resize(nf * kT);
  for (double& w : m.emission) w = r.f64();
  for (double& w : m.transition) w = r.f64();
  for (double& w : m.bos) w = r.f64();
  for (double& w : m.eos) w = r.f64();
  return m;
}

}  // namespace defx
