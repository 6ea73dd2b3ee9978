#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcs/embedstore.hpp"

namespace dcs {

double sigmoid(double z) noexcept;
double softplus(double x) noexcept;
double softplus_inverse(double y);

enum class Axis { abs, rel };

/// Parameters of the two linear heads. alpha = softplus(alpha_raw) keeps the
/// shift scale positive. The same shape is reused for gradients.
struct DualAxisParams {
  std::vector<double> theta_abs;
  double b_abs = 0.0;
  std::vector<double> theta_rel;
  double b_rel = 0.0;
  double alpha_raw = 0.0;

  std::size_t dim() const noexcept { return theta_abs.size(); }
  double alpha() const noexcept { return softplus(alpha_raw); }

  /// Both heads negated, alpha untouched.
  DualAxisParams flipped() const;

  /// Layout: theta_abs | b_abs | theta_rel | b_rel | alpha_raw.
  std::vector<double> flatten() const;
  static DualAxisParams unflatten(std::span<const double> flat, std::size_t dim);

  friend bool operator==(const DualAxisParams&, const DualAxisParams&) = default;
};

struct TrainConfig {
  double learning_rate = 0.0005;
  int epochs = 2000;
  double tau = 5.0;
  double lambda_max = 0.1;
  int warmup_epochs = 100;
  int ramp_epochs = 100;
  std::uint64_t seed = 0;
  double clamp_eps = 1e-7;

  /// Backbone presets: llama-3.2-1b, qwen3-4b, llama-3.1-8b, deepseek-r1-14b.
  static TrainConfig preset(const std::string& name);
  static const std::vector<std::string>& preset_names();

  void validate() const;
};

/// Relative weight of the consistency term. Only the ablation harness
/// changes it; the confidence term is governed by lambda.
struct LossWeights {
  double delta = 1.0;
};

struct LossTerms {
  double total = 0.0;
  double l_delta = 0.0;
  double l_conf = 0.0;
};

double project(std::span<const double> h, Axis axis, const DualAxisParams& params);

/// total = delta_weight * l_delta + lambda * l_conf, where l_delta averages the
/// squared residual ((z_abs_t - z_abs_{t-1}) - alpha*tanh(z_rel_t/tau)) over
/// pairs and l_conf averages the binary entropy of the clamped scores over all
/// meetings (natural log).
LossTerms loss(const PairDataset& dataset, const DualAxisParams& params, double lambda_current,
               double tau, double clamp_eps = 1e-7, LossWeights weights = {});

DualAxisParams gradients(const PairDataset& dataset, const DualAxisParams& params,
                         double lambda_current, double tau, double clamp_eps = 1e-7,
                         LossWeights weights = {});

/// Loss and gradient in one pass.
LossTerms loss_and_gradients(const PairDataset& dataset, const DualAxisParams& params,
                             double lambda_current, double tau, double clamp_eps,
                             LossWeights weights, DualAxisParams& grad);

double lambda_schedule(int epoch, const TrainConfig& config) noexcept;

struct TraceRow {
  int epoch = 0;
  double l_delta = 0.0;
  double l_conf = 0.0;
  double lambda = 0.0;
};

using TrainingTrace = std::vector<TraceRow>;

struct TrainResult {
  DualAxisParams params;
  TrainingTrace trace;
};

DualAxisParams initial_params(std::size_t dim, std::uint64_t seed);

/// Full-batch Adam from initial_params(dim, seed). Throws DivergenceError
/// when the objective becomes non-finite.
TrainResult train(const PairDataset& dataset, const TrainConfig& config, LossWeights weights = {});

struct AnchorSet {
  std::vector<std::string> hawkish;
  std::vector<std::string> dovish;
  std::vector<std::vector<double>> hawk_embeddings;
  std::vector<std::vector<double>> dove_embeddings;

  /// The 15 + 15 exemplar sentences, without embeddings.
  static const AnchorSet& default_sentences();

  /// Store record ids used for anchor embeddings: hawk_01..hawk_15, dove_01..dove_15.
  static std::string hawk_id(std::size_t i);
  static std::string dove_id(std::size_t i);

  /// Default sentences with embeddings looked up (absolute view) in `store`.
  static AnchorSet from_store(const EmbeddingStore& store, std::uint16_t layer);
};

struct Orientation {
  DualAxisParams params;
  bool flipped = false;
  double z_hawk = 0.0;
  double z_dove = 0.0;
};

Orientation anchor_orientation(const DualAxisParams& params, const AnchorSet& anchors);

struct ScoredMeeting {
  std::string meeting_id;
  double z_abs = 0.0;
  std::optional<double> z_rel;
  double s = 0.5;
  std::optional<double> delta;
};

struct MeetingEmbedding {
  std::string meeting_id;
  std::vector<double> h_abs;
  std::optional<std::vector<double>> h_rel;
};

std::vector<ScoredMeeting> score(const std::vector<MeetingEmbedding>& meetings,
                                 const DualAxisParams& params, double tau);

/// Every meeting of the dataset, with the relative view attached from the second on.
std::vector<MeetingEmbedding> meetings_of(const PairDataset& dataset);

/// Serialized parameters: params plus the config they were trained with.
struct ParamsFile {
  DualAxisParams params;
  TrainConfig config;
  std::uint16_t layer = 0;
  bool anchored = false;
  bool flipped = false;
};

void write_params(const ParamsFile& file, const std::filesystem::path& path);
ParamsFile read_params(const std::filesystem::path& path);
std::string params_to_json(const ParamsFile& file);
ParamsFile params_from_json(const std::string& text);

void write_trace_csv(const TrainingTrace& trace, const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

}  // namespace dcs
