#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dcs/corpus.hpp"
#include "dcs/embedstore.hpp"
#include "dcs/error.hpp"
#include "dcs/evalstats.hpp"
#include "dcs/scorer.hpp"
#include "dcs/synth.hpp"

namespace py = pybind11;
using namespace dcs;

namespace {

std::vector<double> as_vector(const py::iterable& xs) {
  std::vector<double> out;
  for (auto x : xs) out.push_back(x.cast<double>());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dual-axis stance scoring over frozen language-model embeddings";

  auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConflictError>(m, "ConflictError", validation.ptr());
  py::register_exception<OrderingError>(m, "OrderingError", validation.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", validation.ptr());
  py::register_exception<ParseError>(m, "ParseError", validation.ptr());
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  // corpus
  py::class_<Statement>(m, "Statement")
      .def(py::init([](std::string id, const std::string& date, std::string text) {
             Statement s;
             s.meeting_id = std::move(id);
             s.date = Date::parse(date);
             s.raw_text = std::move(text);
             s.sentences = filter_sentences(s.raw_text);
             return s;
           }),
           py::arg("meeting_id"), py::arg("date"), py::arg("text"))
      .def_readonly("meeting_id", &Statement::meeting_id)
      .def_property_readonly("date", [](const Statement& s) { return s.date.iso(); })
      .def_readonly("raw_text", &Statement::raw_text)
      .def_readonly("sentences", &Statement::sentences)
      .def("filtered_text", &Statement::filtered_text)
      .def("__repr__", [](const Statement& s) { return "<Statement " + s.meeting_id + " " + s.date.iso() + ">"; });

  py::class_<FilterDictionary>(m, "FilterDictionary")
      .def_static("defaults", &FilterDictionary::defaults, py::return_value_policy::copy)
      .def_readwrite("indicator_terms_a1", &FilterDictionary::indicator_terms_a1)
      .def_readwrite("directional_terms_a2", &FilterDictionary::directional_terms_a2)
      .def_readwrite("indicator_terms_b1", &FilterDictionary::indicator_terms_b1)
      .def_readwrite("directional_terms_b2", &FilterDictionary::directional_terms_b2);
  m.def("split_sentences", &split_sentences, py::arg("text"));
  m.def("filter_sentences", py::overload_cast<std::string_view, const FilterDictionary&>(&filter_sentences),
        py::arg("text"), py::arg("dictionary") = FilterDictionary::defaults());
  m.def("load_corpus", [](const std::filesystem::path& p) { return load_corpus(p); }, py::arg("path"));
  m.def("write_corpus", &write_corpus, py::arg("path"), py::arg("corpus"));
  m.def(
      "build_prompts",
      [](const std::optional<Statement>& prev, const Statement& curr) {
        const auto p = build_prompts(prev ? &*prev : nullptr, curr);
        return py::make_tuple(p.absolute_prompt, p.relative_prompt);
      },
      py::arg("prev"), py::arg("curr"), "(absolute_prompt, relative_prompt or None)");

  // embeddings
  py::enum_<View>(m, "View").value("absolute", View::absolute).value("relative", View::relative);
  py::class_<EmbeddingRecord>(m, "EmbeddingRecord")
      .def(py::init([](std::string id, View view, std::uint16_t layer, std::vector<float> v) {
             return EmbeddingRecord{std::move(id), view, layer, std::move(v)};
           }),
           py::arg("meeting_id"), py::arg("view"), py::arg("layer"), py::arg("vector"))
      .def_readonly("meeting_id", &EmbeddingRecord::meeting_id)
      .def_readonly("view", &EmbeddingRecord::view)
      .def_readonly("layer", &EmbeddingRecord::layer)
      .def_readonly("vector", &EmbeddingRecord::vector);
  py::class_<EmbeddingStore>(m, "EmbeddingStore")
      .def(py::init<std::vector<EmbeddingRecord>>(), py::arg("records"))
      .def_property_readonly("records", &EmbeddingStore::records)
      .def("__len__", &EmbeddingStore::size)
      .def("layers", &EmbeddingStore::layers)
      .def("dim", &EmbeddingStore::dim, py::arg("view"), py::arg("layer"));
  m.def("read_store", py::overload_cast<const std::filesystem::path&>(&read_store), py::arg("path"));
  m.def("write_store", py::overload_cast<const EmbeddingStore&, const std::filesystem::path&>(&write_store),
        py::arg("store"), py::arg("path"));

  py::class_<PairDataset>(m, "PairDataset")
      .def_property_readonly("n_pairs", [](const PairDataset& d) { return d.pairs.size(); })
      .def_property_readonly("n_meetings", [](const PairDataset& d) { return d.abs_singletons.size(); })
      .def_property_readonly("dim", &PairDataset::dim);
  m.def("build_pairs", &build_pairs, py::arg("corpus"), py::arg("store"), py::arg("layer") = 0);

  // scorer
  py::class_<DualAxisParams>(m, "DualAxisParams")
      .def_readwrite("theta_abs", &DualAxisParams::theta_abs)
      .def_readwrite("b_abs", &DualAxisParams::b_abs)
      .def_readwrite("theta_rel", &DualAxisParams::theta_rel)
      .def_readwrite("b_rel", &DualAxisParams::b_rel)
      .def_readwrite("alpha_raw", &DualAxisParams::alpha_raw)
      .def_property_readonly("alpha", &DualAxisParams::alpha)
      .def("flipped", &DualAxisParams::flipped);
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_static("preset", &TrainConfig::preset, py::arg("name"))
      .def_static("preset_names", &TrainConfig::preset_names)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("tau", &TrainConfig::tau)
      .def_readwrite("lambda_max", &TrainConfig::lambda_max)
      .def_readwrite("warmup_epochs", &TrainConfig::warmup_epochs)
      .def_readwrite("ramp_epochs", &TrainConfig::ramp_epochs)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("clamp_eps", &TrainConfig::clamp_eps)
      .def("validate", &TrainConfig::validate);
  py::class_<TraceRow>(m, "TraceRow")
      .def_readonly("epoch", &TraceRow::epoch)
      .def_readonly("l_delta", &TraceRow::l_delta)
      .def_readonly("l_conf", &TraceRow::l_conf)
      .def_readonly("lambda_", &TraceRow::lambda);
  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("trace", &TrainResult::trace);
  py::class_<LossTerms>(m, "LossTerms")
      .def_readonly("total", &LossTerms::total)
      .def_readonly("l_delta", &LossTerms::l_delta)
      .def_readonly("l_conf", &LossTerms::l_conf);

  m.def("lambda_schedule", &lambda_schedule, py::arg("epoch"), py::arg("config"));
  m.def(
      "loss",
      [](const PairDataset& d, const DualAxisParams& p, double lambda, double tau) { return loss(d, p, lambda, tau); },
      py::arg("dataset"), py::arg("params"), py::arg("lambda_current"), py::arg("tau"));
  m.def(
      "train", [](const PairDataset& d, const TrainConfig& c) { return train(d, c); }, py::arg("dataset"),
      py::arg("config") = TrainConfig{}, py::call_guard<py::gil_scoped_release>());

  py::class_<AnchorSet>(m, "AnchorSet")
      .def_static("from_store", &AnchorSet::from_store, py::arg("store"), py::arg("layer") = 0)
      .def_readonly("hawkish", &AnchorSet::hawkish)
      .def_readonly("dovish", &AnchorSet::dovish);
  py::class_<Orientation>(m, "Orientation")
      .def_readonly("params", &Orientation::params)
      .def_readonly("flipped", &Orientation::flipped)
      .def_readonly("z_hawk", &Orientation::z_hawk)
      .def_readonly("z_dove", &Orientation::z_dove);
  m.def("anchor_orientation", &anchor_orientation, py::arg("params"), py::arg("anchors"));

  py::class_<ScoredMeeting>(m, "ScoredMeeting")
      .def_readonly("meeting_id", &ScoredMeeting::meeting_id)
      .def_readonly("z_abs", &ScoredMeeting::z_abs)
      .def_readonly("z_rel", &ScoredMeeting::z_rel)
      .def_readonly("s", &ScoredMeeting::s)
      .def_readonly("delta", &ScoredMeeting::delta);
  m.def(
      "score",
      [](const PairDataset& d, const DualAxisParams& p, double tau) { return score(meetings_of(d), p, tau); },
      py::arg("dataset"), py::arg("params"), py::arg("tau"), "Scores every meeting of a dataset.");

  // statistics
  m.def(
      "pearson", [](const py::iterable& x, const py::iterable& y) { return pearson(as_vector(x), as_vector(y)); },
      py::arg("x"), py::arg("y"));
  m.def(
      "spearman", [](const py::iterable& x, const py::iterable& y) { return spearman(as_vector(x), as_vector(y)); },
      py::arg("x"), py::arg("y"));
  m.def("aggregate_meeting", &aggregate_meeting, py::arg("hawkish"), py::arg("dovish"), py::arg("total"));
  py::class_<RegressionReport>(m, "RegressionReport")
      .def_readonly("beta", &RegressionReport::beta)
      .def_readonly("intercept", &RegressionReport::intercept)
      .def_readonly("se_beta", &RegressionReport::se_beta_nw)
      .def_readonly("se_intercept", &RegressionReport::se_intercept_nw)
      .def_readonly("p_value", &RegressionReport::p_value)
      .def_readonly("r_squared", &RegressionReport::r_squared)
      .def_readonly("n", &RegressionReport::n)
      .def_readonly("lag", &RegressionReport::nw_lag);
  m.def(
      "ols_newey_west",
      [](const py::iterable& y, const py::iterable& x, std::optional<int> lag) {
        return ols_newey_west(as_vector(y), as_vector(x), lag);
      },
      py::arg("y"), py::arg("x"), py::arg("lag") = py::none());

  // synthetic data
  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("n_meetings", &SynthConfig::n_meetings)
      .def_readwrite("dim", &SynthConfig::dim)
      .def_readwrite("noise_sigma", &SynthConfig::noise_sigma)
      .def_readwrite("signal_scale", &SynthConfig::signal_scale)
      .def_readwrite("nuisance_scale", &SynthConfig::nuisance_scale)
      .def_readwrite("seed", &SynthConfig::seed)
      .def_property(
          "trajectory", [](const SynthConfig& c) { return std::string(to_string(c.trajectory)); },
          [](SynthConfig& c, const std::string& t) { c.trajectory = parse_trajectory(t); })
      .def_readwrite("layer", &SynthConfig::layer);
  py::class_<SynthData>(m, "SynthData")
      .def_readonly("corpus", &SynthData::corpus)
      .def_readonly("store", &SynthData::store)
      .def_readonly("anchors", &SynthData::anchors)
      .def_readonly("true_stance", &SynthData::true_stance);
  m.def("generate", &generate, py::arg("config") = SynthConfig{});
  m.def("write_synth", &write_synth, py::arg("data"), py::arg("dir"));
}
