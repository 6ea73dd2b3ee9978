#include "dcs/scorer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dcs/adam.hpp"
#include "dcs/error.hpp"
#include "dcs/rng.hpp"

namespace dcs {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double softplus_inverse(double y) {
  if (!(y > 0.0)) throw ValidationError("softplus_inverse needs a positive argument");
  return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
}

DualAxisParams DualAxisParams::flipped() const {
  DualAxisParams out = *this;
  for (auto& x : out.theta_abs) x = -x;
  for (auto& x : out.theta_rel) x = -x;
  out.b_abs = -b_abs;
  out.b_rel = -b_rel;
  return out;
}

std::vector<double> DualAxisParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(2 * dim() + 3);
  flat.insert(flat.end(), theta_abs.begin(), theta_abs.end());
  flat.push_back(b_abs);
  flat.insert(flat.end(), theta_rel.begin(), theta_rel.end());
  flat.push_back(b_rel);
  flat.push_back(alpha_raw);
  return flat;
}

DualAxisParams DualAxisParams::unflatten(std::span<const double> flat, std::size_t dim) {
  if (flat.size() != 2 * dim + 3) throw ValidationError("flat parameter vector has wrong length");
  DualAxisParams p;
  p.theta_abs.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(dim));
  p.b_abs = flat[dim];
  p.theta_rel.assign(flat.begin() + static_cast<std::ptrdiff_t>(dim + 1),
                     flat.begin() + static_cast<std::ptrdiff_t>(2 * dim + 1));
  p.b_rel = flat[2 * dim + 1];
  p.alpha_raw = flat[2 * dim + 2];
  return p;
}

TrainConfig TrainConfig::preset(const std::string& name) {
  TrainConfig c;
  if (name == "llama-3.2-1b") {
    c.learning_rate = 0.01, c.epochs = 2000, c.tau = 8.0, c.lambda_max = 1.0;
  } else if (name == "qwen3-4b") {
    c.learning_rate = 0.0005, c.epochs = 1000, c.tau = 8.0, c.lambda_max = 0.1;
  } else if (name == "llama-3.1-8b") {
    c.learning_rate = 0.0005, c.epochs = 1000, c.tau = 1.0, c.lambda_max = 1.0;
  } else if (name == "deepseek-r1-14b") {
    c.learning_rate = 0.0005, c.epochs = 2000, c.tau = 5.0, c.lambda_max = 0.1;
  } else {
    throw ValidationError("unknown preset '" + name + "'");
  }
  return c;
}

const std::vector<std::string>& TrainConfig::preset_names() {
  static const std::vector<std::string> names{"llama-3.2-1b", "qwen3-4b", "llama-3.1-8b",
                                              "deepseek-r1-14b"};
  return names;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("learning rate must be positive");
  if (epochs <= 0) throw ValidationError("epochs must be positive");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
  if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max))
    throw ValidationError("lambda_max must be non-negative");
  if (warmup_epochs < 0 || ramp_epochs < 0)
    throw ValidationError("warmup and ramp epochs must be non-negative");
  if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) throw ValidationError("clamp_eps must lie in (0, 0.5)");
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void check_dataset(const PairDataset& dataset, const DualAxisParams& params, double lambda,
                   double tau) {
  if (dataset.abs_singletons.empty()) throw ValidationError("empty dataset");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be non-negative");
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  const auto d = params.dim();
  if (params.theta_rel.size() != d) throw ValidationError("theta_abs and theta_rel sizes differ");
  for (const auto& s : dataset.abs_singletons)
    if (s.h_abs.size() != d)
      throw ValidationError("embedding dim " + std::to_string(s.h_abs.size()) +
                            " does not match parameter dim " + std::to_string(d));
  for (const auto& p : dataset.pairs)
    if (p.h_abs_prev.size() != d || p.h_abs_curr.size() != d || p.h_rel_curr.size() != d)
      throw ValidationError("pair embedding dim does not match parameter dim");
}

double binary_entropy(double s) { return -(s * std::log(s) + (1.0 - s) * std::log(1.0 - s)); }

}  // namespace

double project(std::span<const double> h, Axis axis, const DualAxisParams& params) {
  const auto& theta = axis == Axis::abs ? params.theta_abs : params.theta_rel;
  if (h.size() != theta.size())
    throw ValidationError("projection dim mismatch: " + std::to_string(h.size()) + " vs " +
                          std::to_string(theta.size()));
  return dot(theta, h) + (axis == Axis::abs ? params.b_abs : params.b_rel);
}

LossTerms loss_and_gradients(const PairDataset& dataset, const DualAxisParams& params,
                             double lambda_current, double tau, double clamp_eps,
                             LossWeights weights, DualAxisParams& grad) {
  check_dataset(dataset, params, lambda_current, tau);
  const auto d = params.dim();
  grad = DualAxisParams{std::vector<double>(d, 0.0), 0.0, std::vector<double>(d, 0.0), 0.0, 0.0};
  const double alpha = params.alpha();
  LossTerms out;

  double grad_alpha = 0.0;
  if (!dataset.pairs.empty()) {
    const double inv_p = 1.0 / static_cast<double>(dataset.pairs.size());
    double sum = 0.0;
    for (const auto& pair : dataset.pairs) {
      const double za_prev = project(pair.h_abs_prev, Axis::abs, params);
      const double za_curr = project(pair.h_abs_curr, Axis::abs, params);
      const double zr = project(pair.h_rel_curr, Axis::rel, params);
      const double u = std::tanh(zr / tau);
      const double r = (za_curr - za_prev) - alpha * u;
      sum += r * r;

      const double g = weights.delta * 2.0 * r * inv_p;
      axpy(g, pair.h_abs_curr, grad.theta_abs);
      axpy(-g, pair.h_abs_prev, grad.theta_abs);
      const double g_zr = -g * alpha * (1.0 - u * u) / tau;
      axpy(g_zr, pair.h_rel_curr, grad.theta_rel);
      grad.b_rel += g_zr;
      grad_alpha += -g * u;
    }
    out.l_delta = sum * inv_p;
  }

  const double inv_t = 1.0 / static_cast<double>(dataset.abs_singletons.size());
  double entropy_sum = 0.0;
  for (const auto& m : dataset.abs_singletons) {
    const double z = project(m.h_abs, Axis::abs, params);
    const double raw = sigmoid(z);
    const double s = std::clamp(raw, clamp_eps, 1.0 - clamp_eps);
    entropy_sum += binary_entropy(s);
    if (raw > clamp_eps && raw < 1.0 - clamp_eps && lambda_current != 0.0) {
      // dH/dz = -z * s * (1 - s)
      const double g = lambda_current * inv_t * (-z) * raw * sigmoid(-z);
      axpy(g, m.h_abs, grad.theta_abs);
      grad.b_abs += g;
    }
  }
  out.l_conf = entropy_sum * inv_t;
  grad.alpha_raw = grad_alpha * sigmoid(params.alpha_raw);
  out.total = weights.delta * out.l_delta + lambda_current * out.l_conf;
  return out;
}

LossTerms loss(const PairDataset& dataset, const DualAxisParams& params, double lambda_current,
               double tau, double clamp_eps, LossWeights weights) {
  DualAxisParams unused;
  return loss_and_gradients(dataset, params, lambda_current, tau, clamp_eps, weights, unused);
}

DualAxisParams gradients(const PairDataset& dataset, const DualAxisParams& params,
                         double lambda_current, double tau, double clamp_eps, LossWeights weights) {
  DualAxisParams grad;
  loss_and_gradients(dataset, params, lambda_current, tau, clamp_eps, weights, grad);
  return grad;
}

double lambda_schedule(int epoch, const TrainConfig& config) noexcept {
  if (epoch < config.warmup_epochs) return 0.0;
  if (epoch < config.warmup_epochs + config.ramp_epochs)
    return config.lambda_max * static_cast<double>(epoch - config.warmup_epochs) /
           static_cast<double>(config.ramp_epochs);
  return config.lambda_max;
}

DualAxisParams initial_params(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ValidationError("parameter dim must be positive");
  Rng rng(seed);
  const double sd = 1.0 / std::sqrt(static_cast<double>(dim));
  DualAxisParams p;
  p.theta_abs.resize(dim);
  p.theta_rel.resize(dim);
  for (auto& x : p.theta_abs) x = rng.normal(0.0, sd);
  for (auto& x : p.theta_rel) x = rng.normal(0.0, sd);
  p.alpha_raw = softplus_inverse(1.0);
  return p;
}

namespace {

std::string describe(const TrainConfig& c) {
  std::ostringstream ss;
  ss << "lr=" << c.learning_rate << " epochs=" << c.epochs << " tau=" << c.tau
     << " lambda_max=" << c.lambda_max << " warmup=" << c.warmup_epochs
     << " ramp=" << c.ramp_epochs << " seed=" << c.seed;
  return ss.str();
}

}  // namespace

TrainResult train(const PairDataset& dataset, const TrainConfig& config, LossWeights weights) {
  config.validate();
  if (dataset.pairs.empty()) throw ValidationError("training needs at least one meeting pair");
  const auto d = dataset.dim();
  TrainResult result;
  result.params = initial_params(d, config.seed);
  result.trace.reserve(static_cast<std::size_t>(config.epochs));

  auto flat = result.params.flatten();
  Adam adam(flat.size(), config.learning_rate);
  DualAxisParams grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto params = DualAxisParams::unflatten(flat, d);
    const double lambda = lambda_schedule(epoch, config);
    const auto terms =
        loss_and_gradients(dataset, params, lambda, config.tau, config.clamp_eps, weights, grad);
    if (!std::isfinite(terms.total))
      throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + " (" +
                                describe(config) + ")",
                            epoch);
    result.trace.push_back({epoch, terms.l_delta, terms.l_conf, lambda});
    const auto g = grad.flatten();
    adam.step(flat, g);
  }
  for (double x : flat)
    if (!std::isfinite(x))
      throw DivergenceError("non-finite parameters after epoch " + std::to_string(config.epochs - 1) +
                                " (" + describe(config) + ")",
                            config.epochs - 1);
  result.params = DualAxisParams::unflatten(flat, d);
  return result;
}

const AnchorSet& AnchorSet::default_sentences() {
  static const AnchorSet anchors{
      {
          "Inflation remains too high and the Committee is prepared to raise the policy rate further until inflation is clearly moving down toward the objective.",
          "The Committee will maintain a restrictive stance of policy for as long as needed to return inflation to target.",
          "If inflation pressures persist, we will accelerate the pace of tightening and consider larger rate increases.",
          "We are prepared to keep interest rates higher for longer to ensure inflation returns to target in a timely manner.",
          "The Committee is committed to reducing inflation and will not hesitate to tighten policy if necessary.",
          "Balance sheet reduction will continue as planned to further tighten financial conditions.",
          "We see upside risks to inflation and will act as appropriate to prevent inflation from becoming entrenched.",
          "The labor market is strong and demand remains elevated; further policy firming may be warranted.",
          "We are not considering rate cuts; restoring price stability is the priority.",
          "Policy must remain restrictive even if growth slows, to ensure inflation expectations stay anchored.",
          "Recent inflation data show insufficient progress; additional tightening is likely appropriate.",
          "We will resist easing financial conditions prematurely and will maintain restrictive policy.",
          "A strong commitment to price stability requires keeping policy tight until inflation is decisively lower.",
          "We will continue tightening until there is compelling evidence that inflation is returning to target.",
          "We are prepared to accept some labor market softening to bring inflation down.",
      },
      {
          "Inflation has eased meaningfully and the Committee can proceed more cautiously with further policy adjustments.",
          "The Committee will consider pausing further rate increases to assess the effects of prior tightening.",
          "If inflation continues to moderate, it may become appropriate to begin lowering the policy rate over time.",
          "Risks to employment have increased and policy should avoid unnecessary harm to the labor market.",
          "The Committee will be patient and data dependent, and is open to reducing restraint if conditions warrant.",
          "We will slow the pace of tightening and consider maintaining the current rate while monitoring the outlook.",
          "With inflation moving down, policy can become less restrictive while still supporting continued progress.",
          "Financial conditions have tightened significantly; additional tightening may not be needed.",
          "The Committee is prepared to provide accommodation if downside risks to growth and employment materialize.",
          "We are considering rate cuts if inflation continues to fall and economic activity weakens.",
          "We will prioritize sustaining the expansion and supporting maximum employment as inflation pressures recede.",
          "Balance sheet policy can be adjusted to avoid undue tightening of liquidity conditions.",
          "The Committee will tolerate some inflation undershoot to support a broad and inclusive recovery.",
          "We will avoid over-tightening and are willing to ease if inflation is on a clear downward path.",
          "Given improving inflation dynamics, a less restrictive stance may be appropriate.",
      },
      {},
      {},
  };
  return anchors;
}

namespace {

std::string numbered(const char* prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%s_%02zu", prefix, i + 1);
  return buf;
}

}  // namespace

std::string AnchorSet::hawk_id(std::size_t i) { return numbered("hawk", i); }
std::string AnchorSet::dove_id(std::size_t i) { return numbered("dove", i); }

AnchorSet AnchorSet::from_store(const EmbeddingStore& store, std::uint16_t layer) {
  AnchorSet set = default_sentences();
  for (std::size_t i = 0; i < set.hawkish.size(); ++i)
    set.hawk_embeddings.push_back(widen(store.at(hawk_id(i), View::absolute, layer).vector));
  for (std::size_t i = 0; i < set.dovish.size(); ++i)
    set.dove_embeddings.push_back(widen(store.at(dove_id(i), View::absolute, layer).vector));
  return set;
}

Orientation anchor_orientation(const DualAxisParams& params, const AnchorSet& anchors) {
  if (anchors.hawk_embeddings.empty() || anchors.dove_embeddings.empty())
    throw ValidationError("anchor set needs hawkish and dovish embeddings");
  auto mean_logit = [&](const std::vector<std::vector<double>>& hs) {
    double acc = 0.0;
    for (const auto& h : hs) acc += project(h, Axis::abs, params);
    return acc / static_cast<double>(hs.size());
  };
  Orientation o;
  o.z_hawk = mean_logit(anchors.hawk_embeddings);
  o.z_dove = mean_logit(anchors.dove_embeddings);
  o.flipped = o.z_hawk < o.z_dove;
  o.params = o.flipped ? params.flipped() : params;
  if (o.flipped) {
    o.z_hawk = -o.z_hawk;
    o.z_dove = -o.z_dove;
  }
  return o;
}

std::vector<ScoredMeeting> score(const std::vector<MeetingEmbedding>& meetings,
                                 const DualAxisParams& params, double tau) {
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  const double alpha = params.alpha();
  std::vector<ScoredMeeting> out;
  out.reserve(meetings.size());
  for (const auto& m : meetings) {
    ScoredMeeting sm;
    sm.meeting_id = m.meeting_id;
    sm.z_abs = project(m.h_abs, Axis::abs, params);
    sm.s = sigmoid(sm.z_abs);
    if (m.h_rel) {
      sm.z_rel = project(*m.h_rel, Axis::rel, params);
      sm.delta = alpha * std::tanh(*sm.z_rel / tau);
    }
    out.push_back(std::move(sm));
  }
  return out;
}

std::vector<MeetingEmbedding> meetings_of(const PairDataset& dataset) {
  std::vector<MeetingEmbedding> out;
  out.reserve(dataset.abs_singletons.size());
  for (std::size_t t = 0; t < dataset.abs_singletons.size(); ++t) {
    MeetingEmbedding m{dataset.abs_singletons[t].meeting_id, dataset.abs_singletons[t].h_abs, {}};
    if (t > 0) m.h_rel = dataset.pairs[t - 1].h_rel_curr;
    out.push_back(std::move(m));
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string params_to_json(const ParamsFile& f) {
  nlohmann::ordered_json j;
  j["d"] = f.params.dim();
  j["theta_abs"] = f.params.theta_abs;
  j["b_abs"] = f.params.b_abs;
  j["theta_rel"] = f.params.theta_rel;
  j["b_rel"] = f.params.b_rel;
  j["alpha_raw"] = f.params.alpha_raw;
  j["layer"] = f.layer;
  j["anchored"] = f.anchored;
  j["flipped"] = f.flipped;
  j["config"] = {
      {"learning_rate", f.config.learning_rate}, {"epochs", f.config.epochs},
      {"tau", f.config.tau},                     {"lambda_max", f.config.lambda_max},
      {"warmup_epochs", f.config.warmup_epochs}, {"ramp_epochs", f.config.ramp_epochs},
      {"seed", f.config.seed},                   {"clamp_eps", f.config.clamp_eps},
  };
  return j.dump();
}

ParamsFile params_from_json(const std::string& text) {
  ParamsFile f;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto d = j.at("d").get<std::size_t>();
    f.params.theta_abs = j.at("theta_abs").get<std::vector<double>>();
    f.params.theta_rel = j.at("theta_rel").get<std::vector<double>>();
    f.params.b_abs = j.at("b_abs").get<double>();
    f.params.b_rel = j.at("b_rel").get<double>();
    f.params.alpha_raw = j.at("alpha_raw").get<double>();
    if (f.params.theta_abs.size() != d || f.params.theta_rel.size() != d)
      throw ValidationError("params 'd' does not match vector lengths");
    f.layer = j.value("layer", std::uint16_t{0});
    f.anchored = j.value("anchored", false);
    f.flipped = j.value("flipped", false);
    const auto& c = j.at("config");
    f.config.learning_rate = c.at("learning_rate").get<double>();
    f.config.epochs = c.at("epochs").get<int>();
    f.config.tau = c.at("tau").get<double>();
    f.config.lambda_max = c.at("lambda_max").get<double>();
    f.config.warmup_epochs = c.at("warmup_epochs").get<int>();
    f.config.ramp_epochs = c.at("ramp_epochs").get<int>();
    f.config.seed = c.at("seed").get<std::uint64_t>();
    f.config.clamp_eps = c.value("clamp_eps", 1e-7);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed params file: ") + e.what());
  }
  return f;
}

void write_params(const ParamsFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << params_to_json(file) << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

ParamsFile read_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open params " + path.string());
  std::string line;
  std::getline(in, line);
  return params_from_json(line);
}

void write_trace_csv(const TrainingTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,l_delta,l_conf,lambda\n";
  for (const auto& r : trace)
    out << r.epoch << ',' << format_double(r.l_delta) << ',' << format_double(r.l_conf) << ','
        << format_double(r.lambda) << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace dcs
