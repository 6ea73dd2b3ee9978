#include <fstream>

#include <nlohmann/json.hpp>

#include "dcs/csv.hpp"
#include "dcs/error.hpp"
#include "dcs/evalstats.hpp"

namespace dcs {

namespace {

double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

ClassificationMetrics classify_sentences(std::span<const double> scores,
                                         std::span<const Stance> labels) {
  if (scores.empty()) throw ValidationError("classification needs at least one sentence");
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  std::size_t tp_h = 0, fp_h = 0, tp_d = 0, fp_d = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred_hawk = scores[i] >= 0.5;
    const bool is_hawk = labels[i] == Stance::hawkish;
    if (pred_hawk) (is_hawk ? tp_h : fp_h)++;
    else (is_hawk ? fp_d : tp_d)++;
  }
  // fn for hawkish is a dovish prediction of a hawkish sentence, i.e. fp_d
  ClassificationMetrics m;
  m.n = scores.size();
  m.accuracy = static_cast<double>(tp_h + tp_d) / static_cast<double>(m.n);
  m.f1_hawkish = f1(tp_h, fp_h, fp_d);
  m.f1_dovish = f1(tp_d, fp_d, fp_h);
  m.macro_f1 = 0.5 * (m.f1_hawkish + m.f1_dovish);
  return m;
}

Benchmark load_benchmark_csv(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const auto text_col = table.column("text");
  const auto label_col = table.column("label");
  Benchmark b;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    std::string label = row[label_col];
    for (auto& c : label) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (label == "neutral") {
      ++b.dropped_neutral;
      continue;
    }
    Stance s;
    if (label == "hawkish") s = Stance::hawkish;
    else if (label == "dovish") s = Stance::dovish;
    else throw ParseError("unknown label '" + row[label_col] + "'", table.line_numbers[i]);
    b.sentences.push_back({row[text_col], s, std::nullopt});
    b.row_ids.push_back(std::to_string(i));
  }
  return b;
}

void attach_embeddings(Benchmark& bench, const EmbeddingStore& store, std::uint16_t layer) {
  for (std::size_t i = 0; i < bench.sentences.size(); ++i)
    bench.sentences[i].embedding = widen(store.at(bench.row_ids[i], View::absolute, layer).vector);
}

StanceLexicon StanceLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    return {Lexicon(j.at("hawkish").get<std::vector<std::string>>()),
            Lexicon(j.at("dovish").get<std::vector<std::string>>())};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed lexicon " + path.string() + ": " + e.what());
  }
}

double dictionary_score(std::string_view text, const StanceLexicon& lexicon) {
  const auto tokens = tokenize(text);
  return static_cast<double>(lexicon.hawkish.count(tokens)) -
         static_cast<double>(lexicon.dovish.count(tokens));
}

double aggregate_meeting(std::size_t hawkish, std::size_t dovish, std::size_t total) {
  if (total == 0) throw ValidationError("meeting has no sentences");
  if (hawkish + dovish > total)
    throw ValidationError("hawkish + dovish counts exceed the sentence total");
  return (static_cast<double>(hawkish) - static_cast<double>(dovish)) / static_cast<double>(total);
}

}  // namespace dcs
