#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lidkit/corpus.hpp"
#include "lidkit/decision.hpp"
#include "lidkit/errors.hpp"
#include "lidkit/eval.hpp"
#include "lidkit/features.hpp"
#include "lidkit/model.hpp"

namespace py = pybind11;
using namespace lidkit;

namespace {

using Pairs = std::vector<std::pair<Label, std::string>>;
using DistMap = std::map<Label, double>;

std::vector<LabeledLine> to_lines(const Pairs& pairs) {
  std::vector<LabeledLine> lines;
  lines.reserve(pairs.size());
  for (const auto& [label, text] : pairs) lines.push_back(make_line(label, text));
  return lines;
}

Pairs to_pairs(const std::vector<LabeledLine>& lines) {
  Pairs out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.emplace_back(l.label, l.text);
  return out;
}

PredictionDist to_dist(const DistMap& probs) {
  return PredictionDist::from_pairs({probs.begin(), probs.end()});
}

DistMap to_map(const PredictionDist& dist) {
  DistMap out;
  for (std::size_t i = 0; i < dist.size(); ++i) out[dist.labels()[i]] = dist.probs()[i];
  return out;
}

std::vector<std::pair<Label, double>> scored(const std::vector<ScoredLabel>& top) {
  std::vector<std::pair<Label, double>> out;
  for (const auto& s : top) out.emplace_back(s.label, s.prob);
  return out;
}

}  // namespace

PYBIND11_MODULE(_lidkit, m) {
  m.doc() = "Language identification: features, training, decisions and evaluation";

  auto base = py::register_exception<Error>(m, "LidkitError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<CorpusFormatError>(m, "CorpusFormatError", data.ptr());
  py::register_exception<NoFeatures>(m, "NoFeatures", data.ptr());
  py::register_exception<NoLabels>(m, "NoLabels", data.ptr());
  py::register_exception<UnsupportedFormat>(m, "UnsupportedFormat", data.ptr());
  py::register_exception<CorruptModel>(m, "CorruptModel", data.ptr());
  py::register_exception<UnmappedLabel>(m, "UnmappedLabel", data.ptr());
  py::register_exception<InputMismatch>(m, "InputMismatch", data.ptr());
  py::register_exception<EmptyScope>(m, "EmptyScope", data.ptr());

  m.attr("UNDETERMINED") = std::string(kUndetermined);
  m.attr("MODEL_FORMAT_VERSION") = kModelFormatVersion;

  // corpus
  m.def("detect_script", [](const std::string& text) {
    const auto p = detect_script(text);
    py::dict d;
    d["dominant_script"] = p.dominant_script;
    d["purity"] = p.purity;
    d["letter_counts"] = p.letter_counts;
    return d;
  }, py::arg("text"));
  m.def("dedup", [](const Pairs& lines) { return to_pairs(dedup(to_lines(lines))); },
        py::arg("lines"), "Drop later exact duplicates (after NFC) across all labels.");
  m.def("contamination_rate", [](const Pairs& test, const Pairs& train) {
    return contamination_rate(to_lines(test), to_lines(train));
  }, py::arg("test"), py::arg("train"));

  // features
  py::class_<FeatureConfig>(m, "FeatureConfig")
      .def(py::init<>())
      .def_readwrite("min_count", &FeatureConfig::min_count)
      .def_readwrite("min_count_label", &FeatureConfig::min_count_label)
      .def_readwrite("word_ngrams", &FeatureConfig::word_ngrams)
      .def_readwrite("bucket", &FeatureConfig::bucket)
      .def_readwrite("minn", &FeatureConfig::minn)
      .def_readwrite("maxn", &FeatureConfig::maxn);
  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("char_ngrams", &char_ngrams, py::arg("word"), py::arg("minn"), py::arg("maxn"));
  m.def("fnv1a", &fnv1a, py::arg("bytes"));
  m.def("hash_ngram", &hash_ngram, py::arg("ngram"), py::arg("bucket"));

  // model
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("dim", &TrainConfig::dim)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("inv_temperature", &TrainConfig::inv_temperature)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("threads", &TrainConfig::threads);

  py::class_<LidModel>(m, "Model")
      .def_property_readonly("labels", [](const LidModel& model) {
        return std::vector<Label>(model.labels().begin(), model.labels().end());
      })
      .def_property_readonly("feature_config", &LidModel::feature_config)
      .def_property_readonly("train_config", &LidModel::train_config)
      .def("features", &LidModel::features, py::arg("text"))
      .def("predict", [](const LidModel& model, const std::string& text, std::size_t k) {
        return scored(model.predict(text, k));
      }, py::arg("text"), py::arg("k") = 1)
      .def("distribution", [](const LidModel& model, const std::string& text) -> std::optional<DistMap> {
        auto dist = model.distribution(std::string_view(text));
        if (!dist) return std::nullopt;
        return to_map(*dist);
      }, py::arg("text"), "Full label distribution, or None when the text has no features.")
      .def("save", [](const LidModel& model, const std::string& path) { save_model(model, path); },
           py::arg("path"));

  m.def("train", [](const Pairs& corpus, const FeatureConfig& features, const TrainConfig& training) {
    const auto lines = to_lines(corpus);
    py::gil_scoped_release release;
    return train(lines, features, training);
  }, py::arg("corpus"), py::arg("features") = FeatureConfig{}, py::arg("training") = TrainConfig{});
  m.def("load_model", &load_model, py::arg("path"));
  m.def("temperature_weights", [](const std::map<Label, std::uint64_t>& counts, double alpha) {
    CorpusStats stats;
    for (const auto& [label, n] : counts) {
      stats.per_label_counts[label] = n;
      stats.total += n;
    }
    return temperature_weights(stats, alpha);
  }, py::arg("counts"), py::arg("alpha") = 0.3);

  // decision
  m.def("decide", [](const DistMap& dist, const std::set<Label>& base_set, double theta) {
    return decide(to_dist(dist), DecisionConfig::set_known(base_set, theta));
  }, py::arg("dist"), py::arg("base_set"), py::arg("theta") = 0.0,
     "Thresholded argmax over base_set; None means undetermined.");
  m.def("rollup", [](const DistMap& dist, const std::map<Label, Label>& macro_of) {
    return to_map(rollup(to_dist(dist), LanguageHierarchy(macro_of)));
  }, py::arg("dist"), py::arg("macro_of"));
  m.def("map_labels", [](const std::vector<Label>& labels, const std::map<Label, Label>& rules,
                         bool strict) {
    return map_labels(labels, LabelMap{rules}, strict ? MapMode::Strict : MapMode::Lenient);
  }, py::arg("labels"), py::arg("rules"), py::arg("strict") = true);

  // eval
  py::class_<LabelCounts>(m, "LabelCounts")
      .def(py::init([](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
        return LabelCounts{tp, fp, fn, tn};
      }), py::arg("tp") = 0, py::arg("fp") = 0, py::arg("fn") = 0, py::arg("tn") = 0)
      .def_readwrite("tp", &LabelCounts::tp)
      .def_readwrite("fp", &LabelCounts::fp)
      .def_readwrite("fn", &LabelCounts::fn)
      .def_readwrite("tn", &LabelCounts::tn)
      .def("__eq__", [](const LabelCounts& a, const LabelCounts& b) { return a == b; })
      .def("__repr__", [](const LabelCounts& c) {
        return "LabelCounts(tp=" + std::to_string(c.tp) + ", fp=" + std::to_string(c.fp) +
               ", fn=" + std::to_string(c.fn) + ", tn=" + std::to_string(c.tn) + ")";
      });
  m.def("f1", py::overload_cast<const LabelCounts&>(&f1), py::arg("counts"));
  m.def("fpr", py::overload_cast<const LabelCounts&>(&fpr), py::arg("counts"));
  m.def("cleanness", py::overload_cast<const LabelCounts&>(&cleanness), py::arg("counts"));
  m.def("confusion", [](const std::vector<Label>& gold, const std::vector<std::optional<Label>>& pred,
                        const std::set<Label>& scope) {
    return confusion(gold, pred, EvalScope{scope}).per_label;
  }, py::arg("gold"), py::arg("pred"), py::arg("scope"));
  m.def("macro_scores", [](const std::vector<Label>& gold, const std::vector<std::optional<Label>>& pred,
                           const std::set<Label>& scope) {
    const EvalScope s{scope};
    const auto counts = confusion(gold, pred, s);
    return std::make_pair(f1_macro(counts, s), fpr_macro(counts, s));
  }, py::arg("gold"), py::arg("pred"), py::arg("scope"), "(macro F1, macro FPR) over scope.");
  m.def("intersect_scope", [](const std::set<Label>& a, const std::set<Label>& b,
                              const std::set<Label>& benchmark) {
    return intersect_scope(a, b, benchmark).labels;
  }, py::arg("model_a"), py::arg("model_b"), py::arg("benchmark"));
  m.def("reliability", [](const std::vector<std::pair<std::optional<Label>, double>>& predictions,
                          const std::vector<Label>& gold, std::size_t n_bins) {
    std::vector<ScoredPrediction> preds;
    for (const auto& [label, conf] : predictions) preds.push_back({label, conf});
    const auto bins = reliability(preds, gold, n_bins);
    py::list rows;
    for (const auto& b : bins.bins) {
      py::dict row;
      row["lo"] = b.lo;
      row["hi"] = b.hi;
      row["mean_confidence"] = b.mean_confidence;
      row["accuracy"] = b.accuracy;
      row["count"] = b.count;
      rows.append(row);
    }
    return py::make_tuple(rows, bins.expected_calibration_error());
  }, py::arg("predictions"), py::arg("gold"), py::arg("n_bins") = 10,
     "Reliability bins and expected calibration error.");
}
