#include "dcs/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "dcs/error.hpp"
#include "dcs/rng.hpp"
#include "dcs/scorer.hpp"

namespace dcs {

Trajectory parse_trajectory(const std::string& name) {
  if (name == "random_walk") return Trajectory::random_walk;
  if (name == "regime_break") return Trajectory::regime_break;
  if (name == "sinusoid") return Trajectory::sinusoid;
  throw ValidationError("unknown trajectory '" + name + "'");
}

const char* to_string(Trajectory t) noexcept {
  switch (t) {
    case Trajectory::random_walk: return "random_walk";
    case Trajectory::regime_break: return "regime_break";
    case Trajectory::sinusoid: return "sinusoid";
  }
  return "?";
}

void SynthConfig::validate() const {
  if (n_meetings < 2) throw ValidationError("synth needs at least 2 meetings");
  if (dim < 2) throw ValidationError("synth dim must be at least 2");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be non-negative");
  if (!(signal_scale > 0.0)) throw ValidationError("signal_scale must be positive");
  if (!(nuisance_scale >= 0.0)) throw ValidationError("nuisance_scale must be non-negative");
}

namespace {

std::vector<double> unit_vector(Rng& rng, int dim) {
  std::vector<double> x(static_cast<std::size_t>(dim));
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& e : x) {
      e = rng.normal();
      norm += e * e;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& e : x) e /= norm;
  return x;
}

std::vector<double> trajectory(Rng& rng, const SynthConfig& c) {
  const auto n = static_cast<std::size_t>(c.n_meetings);
  std::vector<double> g(n, 0.0);
  switch (c.trajectory) {
    case Trajectory::random_walk:
      for (std::size_t t = 1; t < n; ++t) g[t] = g[t - 1] + rng.normal();
      break;
    case Trajectory::regime_break: {
      // a handful of level shifts with small within-regime drift
      double level = rng.normal();
      for (std::size_t t = 0; t < n; ++t) {
        if (t > 0 && rng.uniform() < 0.12) level = rng.normal(0.0, 1.5);
        g[t] = level + 0.15 * rng.normal();
      }
      break;
    }
    case Trajectory::sinusoid: {
      const double period = 12.0 + 12.0 * rng.uniform();
      const double phase = 2.0 * std::numbers::pi * rng.uniform();
      for (std::size_t t = 0; t < n; ++t)
        g[t] = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period + phase) +
               0.1 * rng.normal();
      break;
    }
  }
  double mean = 0.0;
  for (double x : g) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : g) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n);
  const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
  for (auto& x : g) x = (x - mean) / sd;
  return g;
}

std::vector<float> plant(Rng& rng, double amount, const std::vector<double>& dir, double sigma,
                         double nuisance = 0.0, const std::vector<double>* nuisance_dir = nullptr) {
  std::vector<float> h(dir.size());
  for (std::size_t i = 0; i < dir.size(); ++i) {
    double x = amount * dir[i] + sigma * rng.normal();
    if (nuisance_dir != nullptr) x += nuisance * (*nuisance_dir)[i];
    h[i] = static_cast<float>(x);
  }
  return h;
}

}  // namespace

SynthData generate(const SynthConfig& config) {
  config.validate();
  // own stream: the scorer initialises its directions from Rng(seed) and must not see u
  Rng rng(derive_seed(config.seed, 0x53594e54));
  SynthData out;
  out.u = unit_vector(rng, config.dim);
  out.v = unit_vector(rng, config.dim);
  out.true_stance = trajectory(rng, config);
  // drawn only when enabled so default streams are unchanged
  std::vector<double> nuisance(static_cast<std::size_t>(config.n_meetings), 0.0);
  const bool with_nuisance = config.nuisance_scale > 0.0;
  if (with_nuisance) {
    out.w = unit_vector(rng, config.dim);
    SynthConfig walk = config;
    walk.trajectory = Trajectory::random_walk;
    nuisance = trajectory(rng, walk);
    for (auto& x : nuisance) x *= config.nuisance_scale;
  }
  const auto* w = with_nuisance ? &out.w : nullptr;

  std::vector<EmbeddingRecord> records;
  const Date start(2003, 1, 28);
  for (int t = 0; t < config.n_meetings; ++t) {
    char id[32];
    std::snprintf(id, sizeof id, "synth_%04d", t + 1);
    Statement st;
    st.meeting_id = id;
    const long days = start.days() + 45L * t;
    const auto ymd = std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days}}};
    st.date = Date(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                   static_cast<unsigned>(ymd.day()));
    st.raw_text = "Synthetic statement " + std::to_string(t + 1) +
                  ". Inflation pressures were rising and employment growth remained strong.";
    st.sentences = filter_sentences(st.raw_text);
    out.corpus.push_back(st);

    const double g = out.true_stance[static_cast<std::size_t>(t)];
    records.push_back({st.meeting_id, View::absolute, config.layer,
                       plant(rng, config.signal_scale * g, out.u, config.noise_sigma,
                             nuisance[static_cast<std::size_t>(t)], w)});
    if (t > 0) {
      const double dg = g - out.true_stance[static_cast<std::size_t>(t - 1)];
      records.push_back({st.meeting_id, View::relative, config.layer,
                         plant(rng, config.signal_scale * dg, out.v, config.noise_sigma,
                               nuisance[static_cast<std::size_t>(t)], w)});
    }
  }
  out.store = EmbeddingStore(std::move(records));

  std::vector<EmbeddingRecord> anchors;
  auto anchor = [&](double g) {
    const double n = with_nuisance ? config.nuisance_scale * rng.normal() : 0.0;
    return plant(rng, config.signal_scale * g, out.u, config.noise_sigma, n, w);
  };
  for (std::size_t i = 0; i < 15; ++i)
    anchors.push_back({AnchorSet::hawk_id(i), View::absolute, config.layer, anchor(2.0)});
  for (std::size_t i = 0; i < 15; ++i)
    anchors.push_back({AnchorSet::dove_id(i), View::absolute, config.layer, anchor(-2.0)});
  out.anchors = EmbeddingStore(std::move(anchors));
  return out;
}

void write_synth(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_corpus(dir / "corpus.ndjson", data.corpus);
  write_store(data.store, dir / "store.dcse");
  write_store(data.anchors, dir / "anchors.dcse");
  std::ofstream out(dir / "true_stance.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "true_stance.csv").string());
  out << "meeting_id,value\n";
  for (std::size_t t = 0; t < data.corpus.size(); ++t)
    out << data.corpus[t].meeting_id << ',' << format_double(data.true_stance[t]) << '\n';
  if (!out) throw IoError("short write to true_stance.csv");
}

}  // namespace dcs
