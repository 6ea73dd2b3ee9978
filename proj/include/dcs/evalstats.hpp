#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcs/corpus.hpp"
#include "dcs/embedstore.hpp"
#include "dcs/lexicon.hpp"
#include "dcs/scorer.hpp"

namespace dcs {

// ---------------------------------------------------------------------------
// Sentence-level classification

enum class Stance { hawkish, dovish };

struct LabeledSentence {
  std::string text;
  Stance label = Stance::hawkish;
  std::optional<std::vector<double>> embedding;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double f1_hawkish = 0.0;
  double f1_dovish = 0.0;
  std::size_t n = 0;
};

/// s >= 0.5 predicts hawkish. A class with no predicted and no actual members scores F1 = 0.
ClassificationMetrics classify_sentences(std::span<const double> scores,
                                         std::span<const Stance> labels);

/// Benchmark `text,label` CSV. Neutral rows are dropped; `row_ids` keeps the
/// 0-based data-row index of each retained sentence (the key used for its
/// embedding record).
struct Benchmark {
  std::vector<LabeledSentence> sentences;
  std::vector<std::string> row_ids;
  std::size_t dropped_neutral = 0;
};

Benchmark load_benchmark_csv(const std::filesystem::path& path);

/// Attaches absolute-view embeddings keyed by row id.
void attach_embeddings(Benchmark& bench, const EmbeddingStore& store, std::uint16_t layer);

// ---------------------------------------------------------------------------
// Dictionary baseline and count aggregation

struct StanceLexicon {
  Lexicon hawkish;
  Lexicon dovish;

  /// JSON file `{"hawkish": [...], "dovish": [...]}`.
  static StanceLexicon load(const std::filesystem::path& path);
};

/// Hawkish minus dovish term matches, using the sentence-filter stem rule.
double dictionary_score(std::string_view text, const StanceLexicon& lexicon);

/// (hawkish - dovish) / total sentence count.
double aggregate_meeting(std::size_t hawkish, std::size_t dovish, std::size_t total);

// ---------------------------------------------------------------------------
// Correlation

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

std::vector<double> standardize(std::span<const double> x);

// ---------------------------------------------------------------------------
// Regression

struct RegressionReport {
  double beta = 0.0;
  double intercept = 0.0;
  double se_beta_nw = 0.0;
  double se_intercept_nw = 0.0;
  double p_value = 1.0;
  double p_value_intercept = 1.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  int nw_lag = 0;
};

/// floor(4 * (n/100)^(2/9)).
int default_newey_west_lag(std::size_t n);

/// OLS of y on [1, x] with Bartlett-kernel HAC covariance (no small-sample
/// correction). p-values from the normal approximation.
RegressionReport ols_newey_west(std::span<const double> y, std::span<const double> x,
                                std::optional<int> lag = std::nullopt);

// ---------------------------------------------------------------------------
// Alignment with external series

struct Observation {
  Date date;
  double value = 0.0;
};

struct MacroSeries {
  std::string indicator;  // CPI, PPI, ...
  std::vector<Observation> observations;
};

/// `date,value` CSV; dates must be strictly increasing.
MacroSeries load_macro_csv(const std::filesystem::path& path, std::string indicator);

struct YieldRow {
  Date date;
  double y2 = 0.0;
  double y10 = 0.0;
  double y20 = 0.0;
};

/// `date,y2,y10,y20` CSV in percent.
std::vector<YieldRow> load_yield_csv(const std::filesystem::path& path);
MacroSeries yield_series(const std::vector<YieldRow>& rows, int maturity);

struct DatedScore {
  std::string meeting_id;
  Date date;
  double value = 0.0;
};

struct MatchedSamples {
  std::vector<std::string> meeting_ids;
  std::vector<Date> meeting_dates;
  std::vector<double> scores;
  std::vector<double> values;

  std::size_t n() const noexcept { return scores.size(); }
};

/// Each meeting pairs with the earliest observation dated strictly after it;
/// meetings with no later observation are dropped. Throws when nothing matches.
MatchedSamples match_macro(std::span<const DatedScore> scores, const MacroSeries& series);
/// Observation on the meeting date itself.
MatchedSamples match_same_day(std::span<const DatedScore> scores, const MacroSeries& series);
MatchedSamples match_by_id(std::span<const DatedScore> scores,
                           const std::map<std::string, double>& values);

/// An external series plus its matching rule.
struct Reference {
  enum class Rule { next_release, same_day, by_id };

  std::string name;
  Rule rule = Rule::next_release;
  MacroSeries series;
  std::map<std::string, double> keyed;

  MatchedSamples match(std::span<const DatedScore> scores) const;

  /// `date,value` file -> next_release; `meeting_id,value` file -> by_id.
  static Reference load(const std::filesystem::path& path, std::string name);
};

struct CorrelationSummary {
  std::size_t n = 0;
  std::optional<double> pearson;
  std::optional<double> spearman;
};

/// Correlations, or nullopt entries when n < 3 or a side is constant.
CorrelationSummary correlate(const MatchedSamples& samples);

// ---------------------------------------------------------------------------
// Policy periods

struct PeriodSplit {
  std::string name;
  Date start;  // inclusive
  Date end;    // inclusive
};

/// P1..P4 cut at the Dec 2008 zero-bound move, the Dec 2015 liftoff and the
/// March 2020 emergency cut.
const std::vector<PeriodSplit>& default_periods();

struct PeriodRow {
  PeriodSplit split;
  CorrelationSummary corr;
  bool sufficient = false;
};

std::vector<PeriodRow> period_report(const MatchedSamples& samples,
                                     const std::vector<PeriodSplit>& splits = default_periods());
std::vector<PeriodRow> period_report(std::span<const DatedScore> scores, const Reference& reference,
                                     const std::vector<PeriodSplit>& splits = default_periods());

// ---------------------------------------------------------------------------
// Harnesses

enum class Variant { full, no_delta, no_conf, single_axis };

Variant parse_variant(const std::string& name);
const char* to_string(Variant v) noexcept;

struct AblationResult {
  Variant variant = Variant::full;
  DualAxisParams params;  // anchored when anchors were supplied
  TrainingTrace trace;
  std::optional<Orientation> orientation;
  std::vector<ScoredMeeting> scores;
};

/// full: L_delta + lambda*L_conf. no_delta: lambda*L_conf only. no_conf:
/// L_delta only. single_axis: absolute embeddings feed both heads.
AblationResult ablation_harness(const PairDataset& dataset, const TrainConfig& config,
                                Variant variant, const AnchorSet* anchors = nullptr);

std::vector<DatedScore> dated_scores(const std::vector<Statement>& corpus,
                                     const std::vector<ScoredMeeting>& scores);

struct SweepRow {
  std::uint16_t layer = 0;
  bool flipped = false;
  std::vector<CorrelationSummary> correlations;  // one per reference
};

struct SweepReport {
  std::vector<std::string> reference_names;
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

/// Trains and scores each requested layer independently with the same config.
/// Layers missing from `store` are skipped with a warning.
SweepReport layer_sweep(const std::vector<Statement>& corpus, const EmbeddingStore& store,
                        const std::vector<std::uint16_t>& layers, const TrainConfig& config,
                        const std::vector<Reference>& references,
                        const EmbeddingStore* anchor_store = nullptr);

}  // namespace dcs
