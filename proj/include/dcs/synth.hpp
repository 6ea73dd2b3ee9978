#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dcs/corpus.hpp"
#include "dcs/embedstore.hpp"

namespace dcs {

enum class Trajectory { random_walk, regime_break, sinusoid };

Trajectory parse_trajectory(const std::string& name);
const char* to_string(Trajectory t) noexcept;

struct SynthConfig {
  int n_meetings = 50;
  int dim = 16;
  double noise_sigma = 0.1;
  double signal_scale = 1.0;
  std::uint64_t seed = 0;
  Trajectory trajectory = Trajectory::random_walk;
  std::uint16_t layer = 0;
  /// Scale of an optional non-stance factor n_t (standardized random walk)
  /// planted along a third unit direction w in both views. Zero by default.
  double nuisance_scale = 0.0;

  void validate() const;
};

/// Planted-stance corpus. The latent trajectory g is standardized to zero mean
/// and unit variance; h_abs_t = scale*g_t*u + noise and
/// h_rel_t = scale*(g_t - g_{t-1})*v + noise for fixed random unit u, v.
struct SynthData {
  std::vector<Statement> corpus;
  EmbeddingStore store;
  /// 15 hawkish anchors planted at g = +2, 15 dovish at g = -2.
  EmbeddingStore anchors;
  std::vector<double> true_stance;
  std::vector<double> u;  // absolute direction
  std::vector<double> v;  // relative direction
  std::vector<double> w;  // nuisance direction
};

SynthData generate(const SynthConfig& config);

/// Writes corpus.ndjson, store.dcse, anchors.dcse and true_stance.csv into `dir`.
void write_synth(const SynthData& data, const std::filesystem::path& dir);

}  // namespace dcs
