#include <algorithm>
#include <map>

#include "dcs/error.hpp"
#include "dcs/evalstats.hpp"

namespace dcs {

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::full;
  if (name == "no_delta") return Variant::no_delta;
  if (name == "no_conf") return Variant::no_conf;
  if (name == "single_axis") return Variant::single_axis;
  throw ValidationError("unknown variant '" + name + "'");
}

const char* to_string(Variant v) noexcept {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_delta: return "no_delta";
    case Variant::no_conf: return "no_conf";
    case Variant::single_axis: return "single_axis";
  }
  return "?";
}

AblationResult ablation_harness(const PairDataset& dataset, const TrainConfig& config,
                                Variant variant, const AnchorSet* anchors) {
  TrainConfig cfg = config;
  LossWeights weights;
  const PairDataset single = variant == Variant::single_axis ? with_absolute_as_relative(dataset)
                                                             : PairDataset{};
  const PairDataset& data = variant == Variant::single_axis ? single : dataset;
  if (variant == Variant::no_delta) weights.delta = 0.0;
  if (variant == Variant::no_conf) cfg.lambda_max = 0.0;

  auto trained = train(data, cfg, weights);
  AblationResult out{variant, std::move(trained.params), std::move(trained.trace), std::nullopt, {}};
  if (anchors != nullptr) {
    out.orientation = anchor_orientation(out.params, *anchors);
    out.params = out.orientation->params;
  }
  out.scores = score(meetings_of(data), out.params, cfg.tau);
  return out;
}

std::vector<DatedScore> dated_scores(const std::vector<Statement>& corpus,
                                     const std::vector<ScoredMeeting>& scores) {
  std::map<std::string, const Statement*> by_id;
  for (const auto& st : corpus) by_id[st.meeting_id] = &st;
  std::vector<DatedScore> out;
  out.reserve(scores.size());
  for (const auto& s : scores) {
    auto it = by_id.find(s.meeting_id);
    if (it == by_id.end()) throw ValidationError("scored meeting '" + s.meeting_id + "' not in corpus");
    out.push_back({s.meeting_id, it->second->date, s.s});
  }
  return out;
}

SweepReport layer_sweep(const std::vector<Statement>& corpus, const EmbeddingStore& store,
                        const std::vector<std::uint16_t>& layers, const TrainConfig& config,
                        const std::vector<Reference>& references,
                        const EmbeddingStore* anchor_store) {
  SweepReport report;
  for (const auto& r : references) report.reference_names.push_back(r.name);
  const auto available = store.layers();
  for (auto layer : layers) {
    if (std::find(available.begin(), available.end(), layer) == available.end()) {
      report.warnings.push_back("layer " + std::to_string(layer) + " missing from store; skipped");
      continue;
    }
    const auto dataset = build_pairs(corpus, store, layer);
    std::optional<AnchorSet> anchors;
    if (anchor_store != nullptr) {
      try {
        anchors = AnchorSet::from_store(*anchor_store, layer);
      } catch (const ValidationError& e) {
        report.warnings.push_back("layer " + std::to_string(layer) + ": " + e.what() +
                                  "; polarity left unanchored");
      }
    }
    const auto result =
        ablation_harness(dataset, config, Variant::full, anchors ? &*anchors : nullptr);
    SweepRow row;
    row.layer = layer;
    row.flipped = result.orientation && result.orientation->flipped;
    const auto dated = dated_scores(corpus, result.scores);
    for (const auto& ref : references) {
      try {
        row.correlations.push_back(correlate(ref.match(dated)));
      } catch (const ValidationError& e) {
        report.warnings.push_back("layer " + std::to_string(layer) + " / " + ref.name + ": " + e.what());
        row.correlations.push_back({});
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace dcs
