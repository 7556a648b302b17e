#include "defx/pipeline.hpp"

#include <algorithm>

#include "json.hpp"

namespace defx {

using nlohmann::json;

void ScanStats::merge(const ScanStats& other) {
  documents += other.documents;
  sentences += other.sentences;
  definitional += other.definitional;
  for (std::size_t i = 0; i < term_type_counts.size(); ++i) {
    term_type_counts[i] += other.term_type_counts[i];
  }
}

namespace {

std::string span_text(const Sentence& s, const Span& sp) {
  std::string out;
  for (std::size_t t = sp.start; t < sp.end; ++t) {
    if (t > sp.start) out += ' ';
    out += s.tokens[t].text;
  }
  return out;
}

}  // namespace

ScanResult scan_document(const RawDocument& doc, std::span<const CrfModel> models,
                         const FeatureExtractor& features, const HeuristicsConfig& heuristics,
                         const ScoreMap* scores, const ScanOptions& options) {
  if (models.empty()) throw Error("scan_document: no models");
  ScanResult result;
  result.stats.documents = 1;

  std::vector<Sentence> sentences;
  try {
    RawDocument norm = normalize(doc);
    sentences = segment(norm, options.abbrev ? *options.abbrev : AbbrevList::defaults());
  } catch (const Error& e) {
    throw Error(doc.doc_id + ": " + e.what());
  }
  result.stats.sentences = sentences.size();

  const bool ensemble = models.size() > 1;
  for (const Sentence& s : sentences) {
    SentencePrediction pred;
    if (s.size() == 0) {
      pred = postprocess({}, heuristics);
    } else {
      auto fv = features.extract(s);
      const ExternalScores* ext = scores ? find_scores(*scores, s) : nullptr;
      if (!ensemble) {
        pred = postprocess(decode(models[0], fv, ext, options.constrained), heuristics);
      } else {
        std::vector<std::vector<SlotTag>> votes;
        votes.reserve(models.size());
        for (const CrfModel& m : models) {
          votes.push_back(decode(m, fv, ext, options.constrained));
        }
        pred = ensemble_vote(votes, heuristics);
      }
    }

    if (!pred.is_definitional) {
      if (options.emit_negatives) result.negatives.emplace_back(*s.sent_index, s.text());
      continue;
    }

    ++result.stats.definitional;
    std::set<std::string> short_forms;
    for (const auto& pair : detect_abbreviations(s)) short_forms.insert(pair.short_form);

    GlossaryRecord rec;
    rec.doc_id = doc.doc_id;
    rec.sent_index = *s.sent_index;
    rec.text = s.text();
    rec.is_ensemble = ensemble;
    for (const Span& sp : pred.spans) {
      if (sp.kind == SpanKind::Term) {
        std::vector<std::string> toks;
        for (std::size_t t = sp.start; t < sp.end; ++t) toks.push_back(s.tokens[t].text);
        TermType type = term_type(toks, short_forms);
        ++result.stats.term_type_counts[static_cast<int>(type)];
        rec.terms.push_back({sp, type, span_text(s, sp)});
      } else {
        rec.defs.push_back({sp, span_text(s, sp)});
      }
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::string glossary_to_jsonl(const std::vector<GlossaryRecord>& records) {
  std::string out;
  for (const GlossaryRecord& r : records) {
    json j;
    j["doc_id"] = r.doc_id;
    j["sent_index"] = r.sent_index;
    j["text"] = r.text;
    j["is_ensemble"] = r.is_ensemble;
    json terms = json::array();
    for (const auto& t : r.terms) {
      terms.push_back(json{{"start", t.span.start},
                           {"end", t.span.end},
                           {"type", std::string(to_string(t.type))},
                           {"text", t.text}});
    }
    j["terms"] = std::move(terms);
    json defs = json::array();
    for (const auto& d : r.defs) {
      defs.push_back(json{{"start", d.span.start}, {"end", d.span.end}, {"text", d.text}});
    }
    j["defs"] = std::move(defs);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string stats_to_json(const ScanStats& stats) {
  json types;
  for (int i = 0; i < 5; ++i) {
    types[std::string(to_string(static_cast<TermType>(i)))] = stats.term_type_counts[i];
  }
  json j{{"documents", stats.documents},
         {"sentences", stats.sentences},
         {"definitional", stats.definitional},
         {"avg_defs_per_doc", stats.avg_defs_per_doc()},
         {"term_types", std::move(types)}};
  return j.dump(2);
}

TaxonomyReport analyze_predictions(const std::vector<GlossaryRecord>& records,
                                   const Dataset& gold) {
  if (records.empty()) throw Error("analyze_predictions: empty record set");

  std::map<std::pair<std::string, int>, const Sentence*> index;
  for (const Sentence& s : gold.sentences) {
    if (s.doc_id && s.sent_index) index[{*s.doc_id, *s.sent_index}] = &s;
  }

  std::map<std::string, std::size_t> term_cat, def_cat, term_bound, def_bound;
  std::size_t terms = 0, defs = 0, matched_records = 0;

  for (const GlossaryRecord& rec : records) {
    auto it = index.find({rec.doc_id, rec.sent_index});
    if (it == index.end()) continue;
    ++matched_records;
    const Sentence& g = *it->second;
    auto gold_spans = tags_to_spans(*g.gold_tags);

    for (const auto& t : rec.terms) {
      ++terms;
      bool overlaps = std::any_of(gold_spans.begin(), gold_spans.end(), [&](const Span& gs) {
        return gs.kind == SpanKind::Term && gs.start < t.span.end && t.span.start < gs.end;
      });
      if (!overlaps) {
        ++term_cat["incorrect_term"];
      } else {
        std::string label(to_string(t.type));
        std::transform(label.begin(), label.end(), label.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        ++term_cat[label + "_term"];
      }
      ++term_bound[std::string(to_string(boundary_category(t.span, gold_spans).summary))];
    }
    for (const auto& d : rec.defs) {
      ++defs;
      bool overlaps = std::any_of(gold_spans.begin(), gold_spans.end(), [&](const Span& gs) {
        return gs.kind == SpanKind::Def && gs.start < d.span.end && d.span.start < gs.end;
      });
      // overlap proxies stand in for human plausible/implausible judgments
      ++def_cat[overlaps ? "overlaps_gold_def (proxy)" : "no_gold_overlap (proxy)"];
      ++def_bound[std::string(to_string(boundary_category(d.span, gold_spans).summary))];
    }
  }
  if (matched_records == 0) {
    throw Error("analyze_predictions: no overlap between records and gold documents");
  }

  TaxonomyReport report;
  report.term_count = terms;
  report.def_count = defs;
  auto to_props = [](const std::map<std::string, std::size_t>& counts, std::size_t total,
                     std::map<std::string, double>& out) {
    for (const auto& [k, v] : counts) {
      out[k] = total == 0 ? 0.0 : static_cast<double>(v) / static_cast<double>(total);
    }
  };
  to_props(term_cat, terms, report.term_categories);
  to_props(def_cat, defs, report.def_categories);
  to_props(term_bound, terms, report.term_boundaries);
  to_props(def_bound, defs, report.def_boundaries);
  return report;
}

std::string taxonomy_to_json(const TaxonomyReport& report) {
  json j;
  j["term_count"] = report.term_count;
  j["def_count"] = report.def_count;
  j["term_categories"] = report.term_categories;
  j["def_categories"] = report.def_categories;
  j["term_boundaries"] = report.term_boundaries;
  j["def_boundaries"] = report.def_boundaries;
  return j.dump(2);
}

}  // namespace defx
