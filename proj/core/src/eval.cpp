#include "defx/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace defx {

using nlohmann::json;

PRF PRF::from_pr(double p, double r) {
  PRF out;
  out.precision = p;
  out.recall = r;
  out.f1 = (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  return out;
}

PRF PRF::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return from_pr(p, r);
}

namespace {

constexpr std::array<SlotTag, 4> kClasses = {SlotTag::BTerm, SlotTag::ITerm, SlotTag::BDef,
                                             SlotTag::IDef};

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

}  // namespace

EvalReport tag_metrics(const std::vector<std::vector<SlotTag>>& gold,
                       const std::vector<std::vector<SlotTag>>& pred) {
  if (gold.size() != pred.size()) throw Error("tag_metrics: sentence count mismatch");

  std::array<Counts, 4> counts{};
  std::array<std::size_t, 4> predicted{};
  EvalReport report;

  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw Error("tag_metrics: length mismatch at sentence " + std::to_string(i));
    }
    for (std::size_t t = 0; t < gold[i].size(); ++t) {
      SlotTag g = gold[i][t], p = pred[i][t];
      ++report.support[static_cast<int>(g)];
      for (std::size_t c = 0; c < kClasses.size(); ++c) {
        SlotTag cls = kClasses[c];
        if (p == cls) ++predicted[c];
        if (g == cls && p == cls) {
          ++counts[c].tp;
        } else if (g != cls && p == cls) {
          ++counts[c].fp;
        } else if (g == cls && p != cls) {
          ++counts[c].fn;
        }
      }
    }
  }

  double sum_p = 0.0, sum_r = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    report.per_class[c] = PRF::from_counts(counts[c].tp, counts[c].fp, counts[c].fn);
    sum_p += report.per_class[c].precision;
    sum_r += report.per_class[c].recall;
    if (report.support[static_cast<int>(kClasses[c])] == 0 && predicted[c] == 0) {
      report.zero_support_classes.emplace_back(to_string(kClasses[c]));
    }
  }
  report.macro = PRF::from_pr(sum_p / 4.0, sum_r / 4.0);
  report.term =
      PRF::from_counts(counts[0].tp + counts[1].tp, counts[0].fp + counts[1].fp,
                       counts[0].fn + counts[1].fn);
  report.def_ =
      PRF::from_counts(counts[2].tp + counts[3].tp, counts[2].fp + counts[3].fp,
                       counts[2].fn + counts[3].fn);
  return report;
}

namespace {

std::size_t overlap(const Span& a, const Span& b) {
  std::size_t lo = std::max(a.start, b.start);
  std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

// Greedy max-overlap matching within one sentence for one kind; returns the
// number of matched predicted spans.
std::size_t match_spans(const std::vector<Span>& gold, const std::vector<Span>& pred,
                        SpanKind kind) {
  struct Cand {
    std::size_t ov, g, p;
  };
  std::vector<std::size_t> gs, ps;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].kind == kind) gs.push_back(i);
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].kind == kind) ps.push_back(i);
  }
  std::vector<Cand> cands;
  for (std::size_t g : gs) {
    for (std::size_t p : ps) {
      std::size_t ov = overlap(gold[g], pred[p]);
      if (ov >= 1) cands.push_back({ov, g, p});
    }
  }
  std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
    if (a.ov != b.ov) return a.ov > b.ov;
    if (gold[a.g].start != gold[b.g].start) return gold[a.g].start < gold[b.g].start;
    return pred[a.p].start < pred[b.p].start;
  });
  std::vector<bool> g_used(gold.size(), false), p_used(pred.size(), false);
  std::size_t matched = 0;
  for (const Cand& c : cands) {
    if (g_used[c.g] || p_used[c.p]) continue;
    g_used[c.g] = p_used[c.p] = true;
    ++matched;
  }
  return matched;
}

}  // namespace

PartialResult partial_match_f(const std::vector<std::vector<Span>>& gold,
                              const std::vector<std::vector<Span>>& pred) {
  if (gold.size() != pred.size()) throw Error("partial_match_f: sentence count mismatch");
  std::array<std::size_t, 2> tp{}, n_gold{}, n_pred{};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (int k = 0; k < 2; ++k) {
      SpanKind kind = static_cast<SpanKind>(k);
      tp[k] += match_spans(gold[i], pred[i], kind);
      for (const Span& s : gold[i]) n_gold[k] += s.kind == kind;
      for (const Span& s : pred[i]) n_pred[k] += s.kind == kind;
    }
  }
  PartialResult out;
  out.term = PRF::from_pr(n_pred[0] ? static_cast<double>(tp[0]) / n_pred[0] : 0.0,
                          n_gold[0] ? static_cast<double>(tp[0]) / n_gold[0] : 0.0);
  out.def_ = PRF::from_pr(n_pred[1] ? static_cast<double>(tp[1]) / n_pred[1] : 0.0,
                          n_gold[1] ? static_cast<double>(tp[1]) / n_gold[1] : 0.0);
  std::size_t tpa = tp[0] + tp[1], ga = n_gold[0] + n_gold[1], pa = n_pred[0] + n_pred[1];
  out.pooled = PRF::from_pr(pa ? static_cast<double>(tpa) / pa : 0.0,
                            ga ? static_cast<double>(tpa) / ga : 0.0);
  return out;
}

double classification_accuracy(const std::vector<bool>& gold_flags,
                               const std::vector<bool>& pred_flags) {
  if (gold_flags.size() != pred_flags.size()) {
    throw Error("classification_accuracy: length mismatch");
  }
  if (gold_flags.empty()) throw Error("classification_accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold_flags.size(); ++i) correct += gold_flags[i] == pred_flags[i];
  return static_cast<double>(correct) / static_cast<double>(gold_flags.size());
}

bool gold_is_definitional(const Sentence& s) {
  if (!s.gold_tags) throw Error("gold_is_definitional: unlabeled sentence");
  bool term = false, def = false;
  for (SlotTag t : *s.gold_tags) {
    if (kind_of(t) == SpanKind::Term) term = true;
    if (kind_of(t) == SpanKind::Def) def = true;
  }
  return term && def;
}

EvalReport evaluate(const std::vector<Sentence>& gold,
                    const std::vector<SentencePrediction>& preds) {
  if (gold.size() != preds.size()) throw Error("evaluate: sentence count mismatch");
  std::vector<std::vector<SlotTag>> gold_tags, pred_tags;
  std::vector<std::vector<Span>> gold_spans, pred_spans;
  std::vector<bool> gold_flags, pred_flags;
  gold_tags.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i].gold_tags) throw Error("evaluate: unlabeled sentence");
    gold_tags.push_back(*gold[i].gold_tags);
    pred_tags.push_back(preds[i].tags);
    gold_spans.push_back(tags_to_spans(*gold[i].gold_tags));
    pred_spans.push_back(preds[i].spans);
    gold_flags.push_back(gold_is_definitional(gold[i]));
    pred_flags.push_back(preds[i].is_definitional);
  }
  EvalReport report = tag_metrics(gold_tags, pred_tags);
  PartialResult partial = partial_match_f(gold_spans, pred_spans);
  report.partial_term = partial.term;
  report.partial_def = partial.def_;
  report.partial_pooled = partial.pooled;
  report.partial_f = partial.pooled.f1;
  report.classification_accuracy = classification_accuracy(gold_flags, pred_flags);
  return report;
}

namespace {

json prf_to_json(const PRF& p) {
  return json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  json j;
  j["macro"] = prf_to_json(r.macro);
  j["term"] = prf_to_json(r.term);
  j["def"] = prf_to_json(r.def_);
  j["partial"] = json{{"term", prf_to_json(r.partial_term)},
                      {"def", prf_to_json(r.partial_def)},
                      {"pooled", prf_to_json(r.partial_pooled)},
                      {"f1", r.partial_f}};
  j["classification_accuracy"] = r.classification_accuracy;
  json per_class;
  for (std::size_t c = 0; c < 4; ++c) {
    per_class[std::string(to_string(kClasses[c]))] = prf_to_json(r.per_class[c]);
  }
  j["per_class"] = std::move(per_class);
  json support;
  for (int t = 0; t < kNumTags; ++t) {
    support[std::string(to_string(static_cast<SlotTag>(t)))] = r.support[t];
  }
  j["support"] = std::move(support);
  j["zero_support_classes"] = r.zero_support_classes;
  j["macro_note"] =
      "macro averages P/R over the four positional classes (B-TERM, I-TERM, "
      "B-DEF, I-DEF); pooling B/I within a kind before averaging is a variant "
      "not used here";
  return j.dump(2);
}

std::string report_to_table(const EvalReport& r) {
  std::ostringstream os;
  auto row = [&](const char* name, const PRF& p) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-8s %6.1f / %6.1f / %6.1f\n", name, 100 * p.precision,
                  100 * p.recall, 100 * p.f1);
    os << buf;
  };
  os << "          P      /  R      /  F1\n";
  row("Macro", r.macro);
  row("TERM", r.term);
  row("DEF", r.def_);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%-8s %6.1f\n", "Partial", 100 * r.partial_f);
  os << buf;
  std::snprintf(buf, sizeof(buf), "%-8s %6.1f\n", "Clsf.", 100 * r.classification_accuracy);
  os << buf;
  return os.str();
}

std::vector<SlotTag> majority_vote(const std::vector<std::vector<SlotTag>>& predictions) {
  if (predictions.empty()) throw Error("majority_vote: no predictions");
  const std::size_t T = predictions[0].size();
  for (const auto& p : predictions) {
    if (p.size() != T) throw Error("majority_vote: length mismatch");
  }
  std::vector<SlotTag> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::array<int, kNumTags> votes{};
    for (const auto& p : predictions) ++votes[static_cast<int>(p[t])];
    int best = 0;  // ties break toward O (index 0), then lowest index
    for (int y = 1; y < kNumTags; ++y) {
      if (votes[y] > votes[best]) best = y;
    }
    out[t] = static_cast<SlotTag>(best);
  }
  return out;
}

SentencePrediction ensemble_vote(const std::vector<std::vector<SlotTag>>& predictions,
                                 const HeuristicsConfig& cfg) {
  return postprocess(majority_vote(predictions), cfg);
}

namespace {

void accumulate_mean(EvalReport& mean, const EvalReport& r, double scale) {
  auto acc = [scale](PRF& m, const PRF& v) {
    m.precision += scale * v.precision;
    m.recall += scale * v.recall;
    m.f1 += scale * v.f1;
  };
  acc(mean.macro, r.macro);
  acc(mean.term, r.term);
  acc(mean.def_, r.def_);
  acc(mean.partial_term, r.partial_term);
  acc(mean.partial_def, r.partial_def);
  acc(mean.partial_pooled, r.partial_pooled);
  mean.partial_f += scale * r.partial_f;
  mean.classification_accuracy += scale * r.classification_accuracy;
  for (std::size_t c = 0; c < 4; ++c) acc(mean.per_class[c], r.per_class[c]);
  for (int t = 0; t < kNumTags; ++t) mean.support[t] += r.support[t];
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t fold) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (fold + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  return x;
}

}  // namespace

CrossvalResult crossval(const Dataset& data, int k, std::uint64_t seed,
                        const TrainConfig& config, const FeatureFn& features,
                        const HeuristicsConfig& heuristics, unsigned jobs) {
  CrossvalResult result;
  result.assignment = split_folds(data, k, seed);
  auto folds = result.assignment.folds();
  for (const auto& f : folds) {
    if (f.empty()) throw Error("crossval: empty fold");
  }

  result.fold_reports.resize(k);
  result.models.resize(k);

  auto run_fold = [&](int f) {
    Dataset train_set;
    train_set.name = data.name;
    std::vector<Sentence> held_out;
    for (std::size_t i = 0; i < data.sentences.size(); ++i) {
      if (result.assignment.fold_of[i] == f) {
        held_out.push_back(data.sentences[i]);
      } else {
        train_set.sentences.push_back(data.sentences[i]);
      }
    }
    TrainConfig fold_cfg = config;
    fold_cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(f));
    TrainResult trained = train(train_set, features, fold_cfg);
    auto raw = predict(trained.model, held_out, features);
    std::vector<SentencePrediction> preds;
    preds.reserve(raw.size());
    for (auto& tags : raw) preds.push_back(postprocess(std::move(tags), heuristics));
    result.fold_reports[f] = evaluate(held_out, preds);
    result.models[f] = std::move(trained.model);
  };

  unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(k)));
  if (workers == 1) {
    for (int f = 0; f < k; ++f) run_fold(f);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int f = next.fetch_add(1); f < k; f = next.fetch_add(1)) run_fold(f);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const double scale = 1.0 / static_cast<double>(k);
  for (const EvalReport& r : result.fold_reports) accumulate_mean(result.mean, r, scale);
  for (std::size_t c = 0; c < 4; ++c) {
    bool always_zero = true;
    for (const EvalReport& r : result.fold_reports) {
      auto it = std::find(r.zero_support_classes.begin(), r.zero_support_classes.end(),
                          std::string(to_string(kClasses[c])));
      if (it == r.zero_support_classes.end()) always_zero = false;
    }
    if (always_zero) result.mean.zero_support_classes.emplace_back(to_string(kClasses[c]));
  }
  return result;
}

std::string_view to_string(BoundarySummary s) {
  switch (s) {
    case BoundarySummary::Correct:
      return "correct";
    case BoundarySummary::TooLongLeft:
      return "too_long_left";
    case BoundarySummary::TooLongRight:
      return "too_long_right";
    case BoundarySummary::CutOffLeft:
      return "cut_off_left";
    case BoundarySummary::CutOffRight:
      return "cut_off_right";
    case BoundarySummary::Mixed:
      return "mixed";
    case BoundarySummary::Spurious:
      return "spurious";
  }
  return "?";
}

BoundaryCategory boundary_category(const Span& pred, const std::vector<Span>& gold) {
  const Span* best = nullptr;
  std::size_t best_ov = 0;
  for (const Span& g : gold) {
    if (g.kind != pred.kind) continue;
    std::size_t ov = overlap(pred, g);
    if (ov == 0) continue;
    if (!best || ov > best_ov || (ov == best_ov && g.start < best->start)) {
      best = &g;
      best_ov = ov;
    }
  }
  BoundaryCategory out;
  if (!best) {
    out.summary = BoundarySummary::Spurious;
    return out;
  }
  out.left = pred.start == best->start ? EdgeFit::Exact
             : pred.start < best->start ? EdgeFit::TooLong
                                        : EdgeFit::CutOff;
  out.right = pred.end == best->end ? EdgeFit::Exact
              : pred.end > best->end ? EdgeFit::TooLong
                                     : EdgeFit::CutOff;
  bool left_exact = *out.left == EdgeFit::Exact;
  bool right_exact = *out.right == EdgeFit::Exact;
  if (left_exact && right_exact) {
    out.summary = BoundarySummary::Correct;
  } else if (!left_exact && !right_exact) {
    out.summary = BoundarySummary::Mixed;
  } else if (!left_exact) {
    out.summary = *out.left == EdgeFit::TooLong ? BoundarySummary::TooLongLeft
                                                : BoundarySummary::CutOffLeft;
  } else {
    out.summary = *out.right == EdgeFit::TooLong ? BoundarySummary::TooLongRight
                                                 : BoundarySummary::CutOffRight;
  }
  return out;
}

std::string_view to_string(TermType t) {
  switch (t) {
    case TermType::Textual:
      return "TEXTUAL";
    case TermType::Acronym:
      return "ACRONYM";
    case TermType::AcronymText:
      return "ACRONYM_TEXT";
    case TermType::Symbol:
      return "SYMBOL";
    case TermType::SymbolText:
      return "SYMBOL_TEXT";
  }
  return "?";
}

TermType term_type(const std::vector<std::string>& span_tokens,
                   const std::set<std::string>& short_forms) {
  if (span_tokens.empty()) throw Error("term_type: empty span");
  auto symbolish = [](const std::string& t) {
    return (!t.empty() && t[0] == '$') || t == "EQUATION";
  };
  auto acronymish = [&](const std::string& t) {
    if (short_forms.count(t)) return true;
    if (t.size() < 2 || t.size() > 6) return false;
    return std::all_of(t.begin(), t.end(),
                       [](char c) { return std::isupper(static_cast<unsigned char>(c)); });
  };
  bool any_sym = false, all_sym = true;
  for (const auto& t : span_tokens) {
    if (symbolish(t)) {
      any_sym = true;
    } else {
      all_sym = false;
    }
  }
  if (any_sym) return all_sym ? TermType::Symbol : TermType::SymbolText;
  bool any_acro = false, all_acro = true;
  for (const auto& t : span_tokens) {
    if (acronymish(t)) {
      any_acro = true;
    } else {
      all_acro = false;
    }
  }
  if (any_acro) return all_acro ? TermType::Acronym : TermType::AcronymText;
  return TermType::Textual;
}

double masi_distance(const std::set<int>& a, const std::set<int>& b) {
  std::size_t inter = 0;
  for (int x : a) inter += b.count(x);
  std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 0.0;  // both empty: J = M = 1

  // monotonicity as a ratio so the final value is one exact division
  std::size_t m_num, m_den;
  if (a == b) {
    m_num = 1;
    m_den = 1;
  } else if (a.empty() || b.empty()) {
    m_num = 0;  // one empty side counts as disjoint
    m_den = 1;
  } else if (inter == a.size() || inter == b.size()) {
    m_num = 2;
    m_den = 3;
  } else if (inter > 0) {
    m_num = 1;
    m_den = 3;
  } else {
    m_num = 0;
    m_den = 1;
  }
  return static_cast<double>(uni * m_den - inter * m_num) / static_cast<double>(uni * m_den);
}

double krippendorff_alpha(const AgreementInput& input, SpanKind kind) {
  // values from units with at least two annotators, keyed by unit
  std::vector<std::vector<const std::set<int>*>> units;
  for (const auto& unit : input.units) {
    if (unit.size() < 2) continue;
    std::vector<const std::set<int>*> vals;
    for (const auto& [annotator, ann] : unit) {
      vals.push_back(kind == SpanKind::Term ? &ann.term : &ann.def_);
    }
    units.push_back(std::move(vals));
  }
  if (units.empty()) throw Error("krippendorff_alpha: no unit with >= 2 annotators");

  double d_o_sum = 0.0;
  std::size_t d_o_pairs = 0;
  for (const auto& vals : units) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      for (std::size_t j = i + 1; j < vals.size(); ++j) {
        d_o_sum += masi_distance(*vals[i], *vals[j]);
        ++d_o_pairs;
      }
    }
  }
  double d_o = d_o_sum / static_cast<double>(d_o_pairs);

  double d_e_sum = 0.0;
  std::size_t d_e_pairs = 0;
  for (std::size_t u = 0; u < units.size(); ++u) {
    for (std::size_t v = u + 1; v < units.size(); ++v) {
      for (const auto* a : units[u]) {
        for (const auto* b : units[v]) {
          d_e_sum += masi_distance(*a, *b);
          ++d_e_pairs;
        }
      }
    }
  }
  if (d_e_pairs == 0 || d_e_sum == 0.0) {
    if (d_o == 0.0) return 1.0;
    throw Error("krippendorff_alpha: expected disagreement is zero but observed is not");
  }
  return 1.0 - d_o / (d_e_sum / static_cast<double>(d_e_pairs));
}

AgreementInput parse_agreement_jsonl(std::string_view text) {
  std::map<std::pair<std::string, int>, std::map<std::string, UnitAnnotation>> grouped;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("agreement parse error at line " + std::to_string(line_no) + ": " + e.what());
    }
    std::pair<std::string, int> key{j.at("doc_id").get<std::string>(),
                                    j.at("sent_index").get<int>()};
    std::string annotator = j.at("annotator").get<std::string>();
    UnitAnnotation ann;
    if (j.contains("term")) {
      for (const auto& v : j["term"]) ann.term.insert(v.get<int>());
    }
    if (j.contains("def")) {
      for (const auto& v : j["def"]) ann.def_.insert(v.get<int>());
    }
    grouped[key][annotator] = std::move(ann);
  }
  AgreementInput out;
  for (auto& [key, unit] : grouped) out.units.push_back(std::move(unit));
  return out;
}

}  // namespace defx
