#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dcs/corpus.hpp"
#include "dcs/csv.hpp"
#include "dcs/embedstore.hpp"
#include "dcs/error.hpp"
#include "dcs/evalstats.hpp"
#include "dcs/scorer.hpp"
#include "dcs/synth.hpp"
#include "manifest.hpp"

namespace dcs::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Options {
  std::string corpus;
  std::string store;
  std::vector<std::string> stores;
  std::optional<int> layer;
  std::vector<int> layers;
  std::string params;
  std::string anchors;
  std::string scores;
  std::vector<std::string> macros;
  std::string yields;
  std::string benchmark;
  std::string lexicon;
  std::string templates;
  std::string baseline_labels;
  std::string out = ".";

  std::string preset = "deepseek-r1-14b";
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<int> epochs;
  std::optional<double> tau;
  std::optional<double> lambda_max;
  std::optional<int> warmup;
  std::optional<int> ramp;
  std::optional<int> nw_lag;
  std::string variant = "all";

  int n = 50;
  int dim = 16;
  double noise = 0.1;
  double signal = 1.0;
  double nuisance = 0.0;
  std::string trajectory = "random_walk";
};

/// Per-invocation state: the manifest being assembled and the output directory.
struct Run {
  RunManifest manifest;
  fs::path out;

  void output(const fs::path& p) { manifest.add_output(p); }
  void input(const fs::path& p) { manifest.add_input(p); }
  void warn(const std::string& w) {
    spdlog::warn("{}", w);
    manifest.warnings.push_back(w);
  }
};

void setup_logging() {
  auto logger = spdlog::get("dcs");
  if (!logger) logger = spdlog::stderr_color_mt("dcs");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("DCS_LOG"); env != nullptr && *env != '\0')
    level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

std::string fixed(double x, int precision = 4) { return fmt::format("{:.{}f}", x, precision); }
std::string fixed(const std::optional<double>& x) { return x ? fixed(*x) : "n/a"; }

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::uint16_t checked_layer(int layer) {
  if (layer < 0 || layer > 65535) throw ValidationError("layer out of range: " + std::to_string(layer));
  return static_cast<std::uint16_t>(layer);
}

std::uint16_t resolve_layer(const EmbeddingStore& store, const std::optional<int>& layer) {
  if (layer) return checked_layer(*layer);
  const auto layers = store.layers();
  if (layers.size() == 1) return layers.front();
  if (layers.empty()) throw ValidationError("embedding store is empty");
  throw ValidationError("store holds " + std::to_string(layers.size()) + " layers; pass --layer");
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw ValidationError(std::string(flag) + " is required");
  if (!fs::is_regular_file(path)) throw IoError("no such file: " + path + " (" + flag + ")");
}

TrainConfig resolve_train(const Options& o) {
  auto c = TrainConfig::preset(o.preset);
  if (o.lr) c.learning_rate = *o.lr;
  if (o.epochs) c.epochs = *o.epochs;
  if (o.tau) c.tau = *o.tau;
  if (o.lambda_max) c.lambda_max = *o.lambda_max;
  if (o.warmup) c.warmup_epochs = *o.warmup;
  if (o.ramp) c.ramp_epochs = *o.ramp;
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

json train_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs},
          {"tau", c.tau},                     {"lambda_max", c.lambda_max},
          {"warmup_epochs", c.warmup_epochs}, {"ramp_epochs", c.ramp_epochs},
          {"seed", c.seed},                   {"clamp_eps", c.clamp_eps}};
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("short write to " + path.string());
}

void write_text(Run& run, const std::string& name, const std::string& text) {
  const auto path = run.out / name;
  auto out = open_out(path);
  out << text;
  close_out(out, path);
  run.output(path);
}

void write_report(Run& run, const json& report, const std::string& text) {
  write_text(run, "report.json", report.dump(2) + "\n");
  write_text(run, "report.txt", text);
}

EmbeddingStore load_store(Run& run, const std::string& path, const char* flag) {
  require_file(path, flag);
  run.input(path);
  return read_store(fs::path(path));
}

std::vector<Statement> load_corpus_input(Run& run, const std::string& path) {
  require_file(path, "--corpus");
  run.input(path);
  return load_corpus(path);
}

ParamsFile load_params(Run& run, const std::string& path) {
  require_file(path, "--params");
  run.input(path);
  return read_params(path);
}

void write_scores_csv(Run& run, const fs::path& path, const std::vector<Statement>& corpus,
                      const std::vector<ScoredMeeting>& scores) {
  const auto dated = dated_scores(corpus, scores);
  auto out = open_out(path);
  out << "meeting_id,date,z_abs,z_rel,s,delta\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    out << csv_escape(s.meeting_id) << ',' << dated[i].date.iso() << ',' << format_double(s.z_abs)
        << ',' << (s.z_rel ? format_double(*s.z_rel) : "") << ',' << format_double(s.s) << ','
        << (s.delta ? format_double(*s.delta) : "") << '\n';
  }
  close_out(out, path);
  run.output(path);
}

std::vector<DatedScore> read_scores_csv(Run& run, const std::string& path) {
  require_file(path, "--scores");
  run.input(path);
  const auto table = read_csv(fs::path(path));
  const auto id_col = table.column("meeting_id");
  const auto date_col = table.column("date");
  const auto s_col = table.column("s");
  std::vector<DatedScore> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      out.push_back({row[id_col], Date::parse(row[date_col]), std::stod(row[s_col])});
    } catch (const std::logic_error&) {
      throw ParseError("bad score row in " + path, table.line_numbers[r]);
    }
  }
  if (out.empty()) throw ValidationError("no scores in " + path);
  return out;
}

/// `NAME=path` or a bare path (named after its stem).
std::vector<Reference> load_references(Run& run, const std::vector<std::string>& specs) {
  std::vector<Reference> refs;
  std::set<std::string> names;
  for (const auto& spec : specs) {
    std::string name;
    std::string path = spec;
    if (const auto eq = spec.find('='); eq != std::string::npos && eq > 0) {
      name = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    } else {
      name = fs::path(spec).stem().string();
    }
    require_file(path, "--macro");
    if (!names.insert(name).second) throw ValidationError("duplicate reference name '" + name + "'");
    run.input(path);
    refs.push_back(Reference::load(path, name));
  }
  return refs;
}

const char* rule_name(Reference::Rule r) {
  switch (r) {
    case Reference::Rule::next_release: return "next_release";
    case Reference::Rule::same_day: return "same_day";
    case Reference::Rule::by_id: return "by_id";
  }
  return "?";
}

json corr_json(const CorrelationSummary& c) {
  return {{"n", c.n}, {"pearson", opt_json(c.pearson)}, {"spearman", opt_json(c.spearman)}};
}

json regression_json(const RegressionReport& r) {
  return {{"beta", r.beta},
          {"se_beta_nw", r.se_beta_nw},
          {"p_value", r.p_value},
          {"intercept", r.intercept},
          {"se_intercept_nw", r.se_intercept_nw},
          {"p_value_intercept", r.p_value_intercept},
          {"r_squared", r.r_squared},
          {"n", r.n},
          {"nw_lag", r.nw_lag}};
}

json metrics_json(const ClassificationMetrics& m) {
  return {{"n", m.n},
          {"accuracy", m.accuracy},
          {"macro_f1", m.macro_f1},
          {"f1_hawkish", m.f1_hawkish},
          {"f1_dovish", m.f1_dovish}};
}

// ---------------------------------------------------------------------------
// commands

void cmd_synth(const Options& o, Run& run) {
  SynthConfig c;
  c.n_meetings = o.n;
  c.dim = o.dim;
  c.noise_sigma = o.noise;
  c.signal_scale = o.signal;
  c.nuisance_scale = o.nuisance;
  c.seed = o.seed.value_or(0);
  c.trajectory = parse_trajectory(o.trajectory);
  c.layer = checked_layer(o.layer.value_or(0));
  const auto data = generate(c);
  write_synth(data, run.out);
  for (const char* f : {"corpus.ndjson", "store.dcse", "anchors.dcse", "true_stance.csv"})
    run.output(run.out / f);
  run.manifest.config["resolved"] = {{"n_meetings", c.n_meetings}, {"dim", c.dim},
                                     {"noise_sigma", c.noise_sigma}, {"signal_scale", c.signal_scale},
                                     {"nuisance_scale", c.nuisance_scale}, {"seed", c.seed},
                                     {"trajectory", to_string(c.trajectory)}, {"layer", c.layer}};
}

void cmd_filter(const Options& o, Run& run) {
  const auto corpus = load_corpus_input(run, o.corpus);
  PromptTemplates templates = PromptTemplates::builtin();
  if (!o.templates.empty()) {
    templates = PromptTemplates::load(o.templates);
    run.input(fs::path(o.templates) / "absolute.txt");
    run.input(fs::path(o.templates) / "relative.txt");
  }
  const auto filtered_path = run.out / "filtered.ndjson";
  const auto prompts_path = run.out / "prompts.ndjson";
  auto filtered = open_out(filtered_path);
  auto prompts = open_out(prompts_path);
  std::size_t kept = 0;
  std::size_t total = 0;
  for (std::size_t t = 0; t < corpus.size(); ++t) {
    const auto& st = corpus[t];
    total += split_sentences(st.raw_text).size();
    kept += st.sentences.size();
    filtered << json{{"meeting_id", st.meeting_id}, {"date", st.date.iso()}, {"sentences", st.sentences}}
                    .dump()
             << '\n';
    const auto pair = build_prompts(t == 0 ? nullptr : &corpus[t - 1], st, templates);
    json p{{"meeting_id", st.meeting_id}, {"absolute_prompt", pair.absolute_prompt}};
    p["relative_prompt"] = pair.relative_prompt ? json(*pair.relative_prompt) : json(nullptr);
    prompts << p.dump() << '\n';
  }
  close_out(filtered, filtered_path);
  close_out(prompts, prompts_path);
  run.output(filtered_path);
  run.output(prompts_path);
  run.manifest.config["resolved"] = {{"meetings", corpus.size()}, {"sentences_total", total},
                                     {"sentences_retained", kept}};
  spdlog::info("retained {} of {} sentences over {} meetings", kept, total, corpus.size());
}

void cmd_build_pairs(const Options& o, Run& run) {
  const auto corpus = load_corpus_input(run, o.corpus);
  const auto store = load_store(run, o.store, "--store");
  const auto layer = resolve_layer(store, o.layer);
  const auto dataset = build_pairs(corpus, store, layer);
  const auto path = run.out / "pairs.csv";
  auto out = open_out(path);
  out << "index,prev_id,curr_id\n";
  for (std::size_t i = 0; i < dataset.pairs.size(); ++i)
    out << i << ',' << csv_escape(dataset.pairs[i].prev_id) << ','
        << csv_escape(dataset.pairs[i].curr_id) << '\n';
  close_out(out, path);
  run.output(path);
  run.manifest.config["resolved"] = {{"layer", layer}, {"dim", dataset.dim()},
                                     {"pairs", dataset.pairs.size()}};
}

void cmd_train(const Options& o, Run& run) {
  const auto cfg = resolve_train(o);
  const auto corpus = load_corpus_input(run, o.corpus);
  const auto store = load_store(run, o.store, "--store");
  const auto layer = resolve_layer(store, o.layer);
  const auto dataset = build_pairs(corpus, store, layer);
  run.manifest.config["resolved"] = train_json(cfg);
  run.manifest.config["resolved"]["layer"] = layer;
  spdlog::info("training on {} pairs, dim {}", dataset.pairs.size(), dataset.dim());
  const auto result = train(dataset, cfg);
  const auto& last = result.trace.back();
  spdlog::info("final l_delta {} l_conf {}", last.l_delta, last.l_conf);
  write_params({result.params, cfg, layer, false, false}, run.out / "params.json");
  run.output(run.out / "params.json");
  write_trace_csv(result.trace, run.out / "trace.csv");
  run.output(run.out / "trace.csv");
}

void cmd_anchor(const Options& o, Run& run) {
  auto pf = load_params(run, o.params);
  const auto store = load_store(run, o.anchors, "--anchors");
  const auto layer = o.layer ? checked_layer(*o.layer) : pf.layer;
  const auto anchors = AnchorSet::from_store(store, layer);
  const auto orient = anchor_orientation(pf.params, anchors);
  if (orient.z_hawk == orient.z_dove)
    run.warn("hawkish and dovish anchors project to the same mean logit; polarity is arbitrary");
  pf.params = orient.params;
  pf.flipped = pf.flipped != orient.flipped;
  pf.anchored = true;
  write_params(pf, run.out / "params.json");
  run.output(run.out / "params.json");
  const json report{{"layer", layer},
                    {"z_hawk", orient.z_hawk},
                    {"z_dove", orient.z_dove},
                    {"flipped", orient.flipped}};
  write_text(run, "anchor.json", report.dump(2) + "\n");
  run.manifest.config["resolved"] = {{"layer", layer}};
}

void cmd_score(const Options& o, Run& run) {
  const auto pf = load_params(run, o.params);
  const auto corpus = load_corpus_input(run, o.corpus);
  const auto store = load_store(run, o.store, "--store");
  const auto layer = o.layer ? checked_layer(*o.layer) : pf.layer;
  const double tau = o.tau.value_or(pf.config.tau);
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  if (!pf.anchored)
    run.warn("polarity is unanchored: params were not oriented with anchor sentences (run `anchor` "
             "first); hawkish may map to low scores");
  const auto dataset = build_pairs(corpus, store, layer);
  const auto scores = score(meetings_of(dataset), pf.params, tau);
  write_scores_csv(run, run.out / "scores.csv", corpus, scores);
  run.manifest.config["resolved"] = {{"layer", layer}, {"tau", tau}, {"anchored", pf.anchored}};
}

void cmd_eval_sentence(const Options& o, Run& run) {
  require_file(o.benchmark, "--benchmark");
  run.input(o.benchmark);
  auto bench = load_benchmark_csv(o.benchmark);
  const bool with_model = !o.params.empty() || !o.store.empty();
  if (!with_model && o.lexicon.empty())
    throw ValidationError("eval-sentence needs --params with --store, or --lexicon");
  std::vector<Stance> labels;
  for (const auto& s : bench.sentences) labels.push_back(s.label);

  json report{{"sentences", bench.sentences.size()}, {"dropped_neutral", bench.dropped_neutral}};
  std::string text = fmt::format("sentences: {} (neutral dropped: {})\n\n{:<12}{:>10}{:>10}{:>10}{:>10}\n",
                                 bench.sentences.size(), bench.dropped_neutral, "method", "accuracy",
                                 "macro_f1", "f1_hawk", "f1_dove");
  auto row = [&](const char* name, const ClassificationMetrics& m) {
    report[name] = metrics_json(m);
    text += fmt::format("{:<12}{:>10}{:>10}{:>10}{:>10}\n", name, fixed(m.accuracy), fixed(m.macro_f1),
                        fixed(m.f1_hawkish), fixed(m.f1_dovish));
  };

  if (with_model) {
    const auto pf = load_params(run, o.params);
    const auto store = load_store(run, o.store, "--store");
    const auto layer = o.layer ? checked_layer(*o.layer) : pf.layer;
    if (!pf.anchored) run.warn("polarity is unanchored: params were not oriented with anchor sentences");
    attach_embeddings(bench, store, layer);
    std::vector<double> s;
    for (const auto& sent : bench.sentences)
      s.push_back(sigmoid(project(*sent.embedding, Axis::abs, pf.params)));
    row("dcs", classify_sentences(s, labels));
    run.manifest.config["resolved"] = {{"layer", layer}};
  }
  if (!o.lexicon.empty()) {
    require_file(o.lexicon, "--lexicon");
    run.input(o.lexicon);
    const auto lex = StanceLexicon::load(o.lexicon);
    std::vector<double> s;
    for (const auto& sent : bench.sentences) {
      const double d = dictionary_score(sent.text, lex);
      s.push_back(d > 0.0 ? 1.0 : d < 0.0 ? 0.0 : 0.5);
    }
    row("dictionary", classify_sentences(s, labels));
  }
  write_report(run, report, text);
}

/// Appendix-style count aggregation over externally labeled sentences:
/// CSV `meeting_id,label` with one row per sentence.
std::vector<DatedScore> baseline_scores(Run& run, const std::string& path,
                                        const std::vector<DatedScore>& dates) {
  require_file(path, "--baseline-labels");
  run.input(path);
  const auto table = read_csv(fs::path(path));
  const auto id_col = table.column("meeting_id");
  const auto label_col = table.column("label");
  struct Counts {
    std::size_t h = 0, d = 0, n = 0;
  };
  std::map<std::string, Counts> counts;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& label = table.rows[r][label_col];
    auto& c = counts[table.rows[r][id_col]];
    ++c.n;
    if (label == "hawkish") ++c.h;
    else if (label == "dovish") ++c.d;
    else if (label != "neutral")
      throw ParseError("label must be hawkish, dovish or neutral", table.line_numbers[r]);
  }
  std::vector<DatedScore> out;
  for (const auto& s : dates) {
    auto it = counts.find(s.meeting_id);
    if (it == counts.end()) continue;
    out.push_back({s.meeting_id, s.date, aggregate_meeting(it->second.h, it->second.d, it->second.n)});
  }
  if (out.empty()) throw ValidationError("no labeled sentences match the scored meetings");
  return out;
}

void cmd_eval_macro(const Options& o, Run& run) {
  const auto scores = read_scores_csv(run, o.scores);
  const auto refs = load_references(run, o.macros);
  std::vector<std::pair<std::string, std::vector<DatedScore>>> methods{{"dcs", scores}};
  if (!o.baseline_labels.empty())
    methods.emplace_back("baseline", baseline_scores(run, o.baseline_labels, scores));

  json report = json::object();
  std::string text = fmt::format("{:<10}{:<12}{:>6}{:>10}{:>10}{:>12}{:>12}{:>10}{:>5}\n", "method",
                                 "reference", "n", "pearson", "spearman", "beta", "se_nw", "p", "lag");
  for (const auto& [method, series] : methods) {
    json& block = report[method];
    for (const auto& ref : refs) {
      const auto matched = ref.match(series);
      const auto corr = correlate(matched);
      json entry{{"rule", rule_name(ref.rule)}};
      entry["correlation"] = corr_json(corr);
      std::string reg_text = fmt::format("{:>12}{:>12}{:>10}{:>5}", "n/a", "n/a", "n/a", "");
      if (matched.n() >= 3) {
        const auto reg = ols_newey_west(matched.values, matched.scores, o.nw_lag);
        entry["regression"] = regression_json(reg);
        reg_text = fmt::format("{:>12}{:>12}{:>10}{:>5}", fixed(reg.beta), fixed(reg.se_beta_nw),
                               fixed(reg.p_value), reg.nw_lag);
      } else {
        entry["regression"] = nullptr;
        run.warn(method + " / " + ref.name + ": fewer than 3 matched meetings; regression skipped");
      }
      block[ref.name] = entry;
      text += fmt::format("{:<10}{:<12}{:>6}{:>10}{:>10}{}\n", method, ref.name, corr.n,
                          fixed(corr.pearson), fixed(corr.spearman), reg_text);
    }
  }
  write_report(run, report, text);
}

void cmd_eval_yields(const Options& o, Run& run) {
  const auto scores = read_scores_csv(run, o.scores);
  require_file(o.yields, "--yields");
  run.input(o.yields);
  const auto rows = load_yield_csv(o.yields);
  json report = json::object();
  std::string text = fmt::format("{:<6}{:>6}{:>12}{:>12}{:>10}{:>10}{:>5}\n", "yield", "n", "beta",
                                 "se_nw", "p", "r2", "lag");
  for (int maturity : {2, 10, 20}) {
    Reference ref;
    ref.name = "y" + std::to_string(maturity);
    ref.rule = Reference::Rule::same_day;
    ref.series = yield_series(rows, maturity);
    const auto matched = ref.match(scores);
    if (matched.n() < 3) throw ValidationError(ref.name + ": fewer than 3 same-day matches");
    const auto x = standardize(matched.scores);
    const auto reg = ols_newey_west(matched.values, x, o.nw_lag);
    report[ref.name] = regression_json(reg);
    text += fmt::format("{:<6}{:>6}{:>12}{:>12}{:>10}{:>10}{:>5}\n", ref.name, reg.n, fixed(reg.beta),
                        fixed(reg.se_beta_nw), fixed(reg.p_value), fixed(reg.r_squared), reg.nw_lag);
  }
  write_report(run, report, text);
}

void cmd_eval_periods(const Options& o, Run& run) {
  const auto scores = read_scores_csv(run, o.scores);
  const auto refs = load_references(run, o.macros);
  json report = json::object();
  std::string text = fmt::format("{:<12}{:<6}{:<12}{:<12}{:>6}{:>10}{:>10}\n", "reference", "period",
                                 "start", "end", "n", "pearson", "spearman");
  for (const auto& ref : refs) {
    json rows = json::array();
    for (const auto& row : period_report(scores, ref)) {
      json r{{"period", row.split.name}, {"start", row.split.start.iso()}, {"end", row.split.end.iso()},
             {"sufficient", row.sufficient}};
      r["correlation"] = corr_json(row.corr);
      rows.push_back(r);
      text += fmt::format("{:<12}{:<6}{:<12}{:<12}{:>6}{:>10}{:>10}\n", ref.name, row.split.name,
                          row.split.start.iso(), row.split.end.iso(), row.corr.n,
                          fixed(row.corr.pearson), fixed(row.corr.spearman));
      if (!row.sufficient)
        run.warn(ref.name + " / " + row.split.name + ": too few meetings for correlation");
    }
    report[ref.name] = rows;
  }
  write_report(run, report, text);
}

std::optional<AnchorSet> optional_anchors(Run& run, const std::string& path, std::uint16_t layer) {
  if (path.empty()) {
    run.warn("no --anchors given: polarity is unanchored");
    return std::nullopt;
  }
  return AnchorSet::from_store(load_store(run, path, "--anchors"), layer);
}

void cmd_ablate(const Options& o, Run& run) {
  const auto cfg = resolve_train(o);
  const auto corpus = load_corpus_input(run, o.corpus);
  const auto store = load_store(run, o.store, "--store");
  const auto layer = resolve_layer(store, o.layer);
  const auto anchors = optional_anchors(run, o.anchors, layer);
  const auto refs = load_references(run, o.macros);
  std::vector<Variant> variants;
  if (o.variant == "all")
    variants = {Variant::full, Variant::no_delta, Variant::no_conf, Variant::single_axis};
  else
    variants = {parse_variant(o.variant)};
  run.manifest.config["resolved"] = train_json(cfg);
  run.manifest.config["resolved"]["layer"] = layer;

  const auto dataset = build_pairs(corpus, store, layer);
  json report = json::object();
  std::string text = fmt::format("{:<12}{:<12}{:>6}{:>10}{:>10}\n", "variant", "reference", "n",
                                 "pearson", "spearman");
  for (auto v : variants) {
    const std::string name = to_string(v);
    const auto result = ablation_harness(dataset, cfg, v, anchors ? &*anchors : nullptr);
    const ParamsFile pf{result.params, cfg, layer, result.orientation.has_value(),
                        result.orientation && result.orientation->flipped};
    write_params(pf, run.out / ("params_" + name + ".json"));
    run.output(run.out / ("params_" + name + ".json"));
    write_trace_csv(result.trace, run.out / ("trace_" + name + ".csv"));
    run.output(run.out / ("trace_" + name + ".csv"));
    write_scores_csv(run, run.out / ("scores_" + name + ".csv"), corpus, result.scores);

    json entry{{"final_l_delta", result.trace.back().l_delta}, {"final_l_conf", result.trace.back().l_conf}};
    const auto dated = dated_scores(corpus, result.scores);
    for (const auto& ref : refs) {
      const auto corr = correlate(ref.match(dated));
      entry["correlations"][ref.name] = corr_json(corr);
      text += fmt::format("{:<12}{:<12}{:>6}{:>10}{:>10}\n", name, ref.name, corr.n, fixed(corr.pearson),
                          fixed(corr.spearman));
    }
    if (refs.empty()) text += fmt::format("{:<12}{:<12}\n", name, "-");
    report[name] = entry;
  }
  write_report(run, report, text);
}

void cmd_layer_sweep(const Options& o, Run& run) {
  const auto cfg = resolve_train(o);
  const auto corpus = load_corpus_input(run, o.corpus);
  if (o.stores.empty()) throw ValidationError("--store is required");
  std::vector<EmbeddingRecord> merged;
  for (const auto& path : o.stores) {
    const auto s = load_store(run, path, "--store");
    merged.insert(merged.end(), s.records().begin(), s.records().end());
  }
  const EmbeddingStore store(std::move(merged));
  std::vector<std::uint16_t> layers;
  for (int l : o.layers) layers.push_back(checked_layer(l));
  if (layers.empty()) layers = store.layers();
  std::optional<EmbeddingStore> anchor_store;
  if (!o.anchors.empty()) anchor_store = load_store(run, o.anchors, "--anchors");
  else run.warn("no --anchors given: polarity is unanchored");
  const auto refs = load_references(run, o.macros);
  run.manifest.config["resolved"] = train_json(cfg);

  const auto sweep = layer_sweep(corpus, store, layers, cfg, refs, anchor_store ? &*anchor_store : nullptr);
  for (const auto& w : sweep.warnings) run.warn(w);

  std::string csv = "layer,flipped";
  for (const auto& name : sweep.reference_names)
    csv += ",n_" + name + ",pearson_" + name + ",spearman_" + name;
  csv += '\n';
  std::string text = fmt::format("{:<7}{:<9}", "layer", "flipped");
  for (const auto& name : sweep.reference_names) text += fmt::format("{:>14}", "rho_" + name);
  text += '\n';
  json rows = json::array();
  for (const auto& row : sweep.rows) {
    json r{{"layer", row.layer}, {"flipped", row.flipped}};
    csv += std::to_string(row.layer) + (row.flipped ? ",1" : ",0");
    text += fmt::format("{:<7}{:<9}", row.layer, row.flipped ? "yes" : "no");
    for (std::size_t i = 0; i < row.correlations.size(); ++i) {
      const auto& c = row.correlations[i];
      r["correlations"][sweep.reference_names[i]] = corr_json(c);
      csv += "," + std::to_string(c.n) + "," + (c.pearson ? format_double(*c.pearson) : "") + "," +
             (c.spearman ? format_double(*c.spearman) : "");
      text += fmt::format("{:>14}", fixed(c.spearman));
    }
    csv += '\n';
    text += '\n';
    rows.push_back(r);
  }
  write_text(run, "sweep.csv", csv);
  write_report(run, json{{"rows", rows}}, text);
}

// ---------------------------------------------------------------------------
// option wiring

struct Command {
  const char* name;
  const char* help;
  std::function<void(CLI::App&, Options&)> wire;
  std::function<void(const Options&, Run&)> run;
};

void add_training(CLI::App& sub, Options& o) {
  sub.add_option("--preset", o.preset, "Hyperparameter preset")
      ->check(CLI::IsMember(TrainConfig::preset_names()))
      ->capture_default_str();
  sub.add_option("--lr", o.lr, "Adam learning rate");
  sub.add_option("--epochs", o.epochs, "Training epochs");
  sub.add_option("--tau", o.tau, "Shift temperature");
  sub.add_option("--lambda-max", o.lambda_max, "Final confidence weight");
  sub.add_option("--warmup", o.warmup, "Epochs with the confidence term off");
  sub.add_option("--ramp", o.ramp, "Epochs of linear confidence ramp");
  sub.add_option("--seed", o.seed, "Initialisation seed");
}

void add_out(CLI::App& sub, Options& o) {
  sub.add_option("--out", o.out, "Output directory")->capture_default_str();
}

const std::vector<Command>& commands() {
  static const std::vector<Command> table{
      {"synth", "Generate a planted-stance corpus and embedding store",
       [](CLI::App& s, Options& o) {
         s.add_option("--seed", o.seed, "Generator seed");
         s.add_option("--n", o.n, "Number of meetings")->capture_default_str();
         s.add_option("--dim", o.dim, "Embedding dimension")->capture_default_str();
         s.add_option("--noise", o.noise, "Isotropic noise sigma")->capture_default_str();
         s.add_option("--signal", o.signal, "Stance signal scale")->capture_default_str();
         s.add_option("--nuisance", o.nuisance, "Scale of a non-stance factor")->capture_default_str();
         s.add_option("--trajectory", o.trajectory, "random_walk, regime_break or sinusoid")
             ->capture_default_str();
         s.add_option("--layer", o.layer, "Layer index to tag records with");
       },
       cmd_synth},
      {"filter", "Filter statement sentences and render prompts",
       [](CLI::App& s, Options& o) {
         s.add_option("--corpus", o.corpus, "Corpus NDJSON")->required();
         s.add_option("--templates", o.templates, "Directory with absolute.txt and relative.txt");
       },
       cmd_filter},
      {"build-pairs", "List consecutive-meeting training pairs",
       [](CLI::App& s, Options& o) {
         s.add_option("--corpus", o.corpus, "Corpus NDJSON")->required();
         s.add_option("--store", o.store, "DCSE embedding store")->required();
         s.add_option("--layer", o.layer, "Layer to use");
       },
       cmd_build_pairs},
      {"train", "Fit the dual-axis scorer",
       [](CLI::App& s, Options& o) {
         s.add_option("--corpus", o.corpus, "Corpus NDJSON")->required();
         s.add_option("--store", o.store, "DCSE embedding store")->required();
         s.add_option("--layer", o.layer, "Layer to use");
         add_training(s, o);
       },
       cmd_train},
      {"anchor", "Orient trained parameters with anchor sentences",
       [](CLI::App& s, Options& o) {
         s.add_option("--params", o.params, "params.json from train")->required();
         s.add_option("--anchors", o.anchors, "DCSE store of anchor embeddings")->required();
         s.add_option("--layer", o.layer, "Layer (defaults to the params layer)");
       },
       cmd_anchor},
      {"score", "Score every meeting",
       [](CLI::App& s, Options& o) {
         s.add_option("--params", o.params, "params.json")->required();
         s.add_option("--corpus", o.corpus, "Corpus NDJSON")->required();
         s.add_option("--store", o.store, "DCSE embedding store")->required();
         s.add_option("--layer", o.layer, "Layer (defaults to the params layer)");
         s.add_option("--tau", o.tau, "Shift temperature (defaults to the trained value)");
       },
       cmd_score},
      {"eval-sentence", "Sentence-level hawkish/dovish classification",
       [](CLI::App& s, Options& o) {
         s.add_option("--benchmark", o.benchmark, "text,label CSV")->required();
         s.add_option("--params", o.params, "params.json");
         s.add_option("--store", o.store, "DCSE store of sentence embeddings");
         s.add_option("--layer", o.layer, "Layer (defaults to the params layer)");
         s.add_option("--lexicon", o.lexicon, "Dictionary baseline lexicon JSON");
       },
       cmd_eval_sentence},
      {"eval-macro", "Correlate scores with macro series",
       [](CLI::App& s, Options& o) {
         s.add_option("--scores", o.scores, "scores.csv")->required();
         s.add_option("--macro", o.macros, "[NAME=]path to date,value or meeting_id,value CSV")
             ->required();
         s.add_option("--nw-lag", o.nw_lag, "Newey-West lag (default automatic)");
         s.add_option("--baseline-labels", o.baseline_labels, "meeting_id,label sentence labels");
       },
       cmd_eval_macro},
      {"eval-yields", "Regress same-day Treasury yields on standardized scores",
       [](CLI::App& s, Options& o) {
         s.add_option("--scores", o.scores, "scores.csv")->required();
         s.add_option("--yields", o.yields, "date,y2,y10,y20 CSV")->required();
         s.add_option("--nw-lag", o.nw_lag, "Newey-West lag (default automatic)");
       },
       cmd_eval_yields},
      {"eval-periods", "Correlations within policy periods",
       [](CLI::App& s, Options& o) {
         s.add_option("--scores", o.scores, "scores.csv")->required();
         s.add_option("--macro", o.macros, "[NAME=]path to reference CSV")->required();
       },
       cmd_eval_periods},
      {"ablate", "Train and score the ablation variants",
       [](CLI::App& s, Options& o) {
         s.add_option("--corpus", o.corpus, "Corpus NDJSON")->required();
         s.add_option("--store", o.store, "DCSE embedding store")->required();
         s.add_option("--layer", o.layer, "Layer to use");
         s.add_option("--anchors", o.anchors, "DCSE store of anchor embeddings");
         s.add_option("--macro", o.macros, "[NAME=]path to reference CSV");
         s.add_option("--variant", o.variant, "all, full, no_delta, no_conf or single_axis")
             ->capture_default_str();
         add_training(s, o);
       },
       cmd_ablate},
      {"layer-sweep", "Train one scorer per layer and compare",
       [](CLI::App& s, Options& o) {
         s.add_option("--corpus", o.corpus, "Corpus NDJSON")->required();
         s.add_option("--store", o.stores, "DCSE store (repeatable)")->required();
         s.add_option("--layer", o.layers, "Layer to include (repeatable; default all)");
         s.add_option("--anchors", o.anchors, "DCSE store of anchor embeddings");
         s.add_option("--macro", o.macros, "[NAME=]path to reference CSV")->required();
         add_training(s, o);
       },
       cmd_layer_sweep},
  };
  return table;
}

/// TOML reader that files top-level keys under the active subcommand, so a
/// config may use either bare keys or `[command]` sections.
class CommandConfig : public CLI::ConfigTOML {
 public:
  explicit CommandConfig(std::string command) : command_(std::move(command)) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    if (command_.empty()) return items;
    for (auto& item : items)
      if (item.parents.empty() && item.name != "config") item.parents = {command_};
    return items;
  }

 private:
  std::string command_;
};

json options_snapshot(const CLI::App& sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name == "--help" || opt->count() == 0) continue;
    const auto& r = opt->results();
    j[name.substr(2)] = r.size() == 1 ? json(r.front()) : json(r);
  }
  return j;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  setup_logging();
  CLI::App app{"Delta-consistent stance scoring over frozen LLM embeddings", "dcs"};
  app.set_config("--config", "", "TOML file of option values; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  Options o;
  std::map<const CLI::App*, const Command*> by_app;
  std::string active;
  for (int i = 1; i < argc && active.empty(); ++i)
    for (const auto& c : commands())
      if (argv[i] == std::string_view(c.name)) active = c.name;
  app.config_formatter(std::make_shared<CommandConfig>(active));
  for (const auto& c : commands()) {
    auto* sub = app.add_subcommand(c.name, c.help);
    c.wire(*sub, o);
    add_out(*sub, o);
    by_app[sub] = &c;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const bool help = e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success);
    app.exit(e, out, err);
    if (!help) err << app.help();
    return help ? 0 : 1;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const Command& cmd = *by_app.at(sub);
  Run run;
  run.manifest.command = cmd.name;
  run.manifest.config = json::object();
  run.manifest.config["options"] = options_snapshot(*sub);
  if (const auto* cfg = app.get_option("--config"); cfg->count() > 0)
    run.manifest.config["config_file"] = cfg->as<std::string>();
  try {
    run.out = o.out;
    std::error_code ec;
    fs::create_directories(run.out, ec);
    if (ec) throw IoError("cannot create output directory " + run.out.string() + ": " + ec.message());
    cmd.run(o, run);
    run.manifest.write(run.out);
    return 0;
  } catch (const IoError& e) {
    err << "dcs " << cmd.name << ": I/O error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "dcs " << cmd.name << ": I/O error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "dcs " << cmd.name << ": " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    err << "dcs " << cmd.name << ": " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "dcs " << cmd.name << ": malformed JSON: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace dcs::cli
