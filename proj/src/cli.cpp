#include "lidkit/cli.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "lidkit/corpus.hpp"
#include "lidkit/decision.hpp"
#include "lidkit/errors.hpp"
#include "lidkit/unicode.hpp"

namespace lidkit::cli {
namespace {

namespace fs = std::filesystem;

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError("invalid value for " + key + ": '" + text + "'");
  }
  return value;
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

const std::map<std::string, Setter>& config_keys() {
  static const std::map<std::string, Setter> keys = {
      {"minCount", [](auto& c, const auto& v) { c.features.min_count = parse_number<std::uint64_t>("minCount", v); }},
      {"minCountLabel", [](auto& c, const auto& v) { c.features.min_count_label = parse_number<std::uint64_t>("minCountLabel", v); }},
      {"wordNgrams", [](auto& c, const auto& v) { c.features.word_ngrams = parse_number<std::uint32_t>("wordNgrams", v); }},
      {"bucket", [](auto& c, const auto& v) { c.features.bucket = parse_number<std::uint32_t>("bucket", v); }},
      {"minn", [](auto& c, const auto& v) { c.features.minn = parse_number<std::uint32_t>("minn", v); }},
      {"maxn", [](auto& c, const auto& v) { c.features.maxn = parse_number<std::uint32_t>("maxn", v); }},
      {"dim", [](auto& c, const auto& v) { c.training.dim = parse_number<std::uint32_t>("dim", v); }},
      {"epoch", [](auto& c, const auto& v) { c.training.epochs = parse_number<std::uint32_t>("epoch", v); }},
      {"lr", [](auto& c, const auto& v) { c.training.lr = parse_number<double>("lr", v); }},
      {"loss", [](auto& c, const auto& v) {
         if (v != "softmax") throw ValidationError("unsupported loss: " + v);
         c.training.loss = Loss::Softmax;
       }},
      {"invTemperature", [](auto& c, const auto& v) { c.training.inv_temperature = parse_number<double>("invTemperature", v); }},
      {"seed", [](auto& c, const auto& v) { c.training.seed = parse_number<std::uint64_t>("seed", v); }},
      {"threads", [](auto& c, const auto& v) { c.training.threads = parse_number<std::uint32_t>("threads", v); }},
      {"input", [](auto& c, const auto& v) { c.input = v; }},
      {"output", [](auto& c, const auto& v) { c.output = v; }},
      {"model", [](auto& c, const auto& v) { c.model = v; }},
      {"hierarchy", [](auto& c, const auto& v) { c.hierarchy = v; }},
      {"labelMap", [](auto& c, const auto& v) { c.label_map = v; }},
      {"baseSet", [](auto& c, const auto& v) { c.base_set = v; }},
      {"outDir", [](auto& c, const auto& v) { c.out_dir = v; }},
      {"theta", [](auto& c, const auto& v) { c.theta = parse_number<double>("theta", v); }},
      {"scenario", [](auto& c, const auto& v) { c.scenario = v; }},
      {"skew", [](auto& c, const auto& v) { c.skew = parse_skew(v); }},
      {"k", [](auto& c, const auto& v) { c.k = parse_number<std::size_t>("k", v); }},
  };
  return keys;
}

std::string format_prob(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", p);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

// Owns an input file or borrows the caller's stream for "-".
class Input {
 public:
  Input(const std::string& path, std::istream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ifstream>(path);
    if (!*file_) throw IoError("cannot open input: " + path);
    stream_ = file_.get();
  }
  std::istream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw IoError("cannot open output: " + path);
    stream_ = file_.get();
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::vector<LabeledLine> read_corpus_from(const std::string& path, std::istream& in) {
  Input input(path, in);
  return read_corpus(input.stream());
}

// Rollup and base-set restriction shared by predict and clean. Mapping to
// the benchmark granularity happens before restriction.
class Decider {
 public:
  Decider(const LidModel& model, const PipelineConfig& config) : model_(model) {
    if (!config.hierarchy.empty()) hierarchy_ = load_hierarchy(config.hierarchy);
    if (!config.base_set.empty()) {
      decision_ = DecisionConfig::set_known(read_label_set_file(config.base_set), config.theta);
    } else {
      std::vector<Label> universe(model.labels().begin(), model.labels().end());
      if (!hierarchy_.empty()) {
        std::set<Label> rolled;
        for (const auto& l : universe) rolled.insert(hierarchy_.target(l));
        universe.assign(rolled.begin(), rolled.end());
      }
      decision_ = DecisionConfig::set_unknown(universe, config.theta);
    }
  }

  struct Outcome {
    std::optional<Label> label;
    std::vector<ScoredLabel> top;  // restricted to B, best first
  };

  Outcome classify(std::string_view text, std::size_t k) const {
    auto dist = model_.distribution(text);
    if (!dist) return {std::nullopt, {{Label(kUndetermined), 1.0}}};
    if (!hierarchy_.empty()) dist = rollup(*dist, hierarchy_);
    Outcome outcome;
    outcome.label = decide(*dist, decision_);

    std::vector<Label> labels;
    std::vector<double> probs;
    for (const auto& label : decision_.base_set) {
      if (!dist->contains(label)) continue;
      labels.push_back(label);
      probs.push_back(dist->prob(label));
    }
    outcome.top = top_k(PredictionDist(std::move(labels), std::move(probs)), k);
    return outcome;
  }

 private:
  const LidModel& model_;
  LanguageHierarchy hierarchy_;
  DecisionConfig decision_;
};

void report_config_error(const std::string& what) { throw ValidationError(what); }

// ---- commands ----------------------------------------------------------

int cmd_train(const PipelineConfig& config, std::istream& in, std::ostream& err) {
  if (config.output.empty()) report_config_error("train needs --output <model path>");
  const auto corpus = read_corpus_from(config.input, in);
  const auto progress = [&](const EpochReport& r) {
    err << "epoch " << r.epoch << '/' << config.training.epochs << "  steps " << r.steps
        << "  loss " << r.mean_loss << '\n';
  };
  const LidModel model = train(corpus, config.features, config.training, progress);
  save_model(model, config.output);
  err << "labels " << model.labels().size() << "  words " << model.vocab().word_count()
      << "  -> " << config.output << '\n';
  return kOk;
}

int cmd_predict(const PipelineConfig& config, bool strip_labels, std::istream& in,
                std::ostream& out) {
  if (config.model.empty()) report_config_error("predict needs --model");
  if (config.k < 1) report_config_error("k must be >= 1");
  const LidModel model = load_model(config.model);
  const Decider decider(model, config);
  Input input(config.input, in);
  Output output(config.output, out);
  std::string line;
  while (std::getline(input.stream(), line)) {
    std::string_view text = line;
    if (strip_labels && text.starts_with(kLabelPrefix)) {
      const size_t space = text.find(' ');
      text = space == std::string_view::npos ? std::string_view{} : text.substr(space + 1);
    }
    const auto outcome = decider.classify(text, config.k);
    std::ostream& os = output.stream();
    if (!outcome.label) {
      const double best = outcome.top.empty() ? 0.0 : outcome.top.front().prob;
      os << kUndetermined << '\t' << format_prob(best) << '\n';
      continue;
    }
    for (size_t i = 0; i < outcome.top.size(); ++i) {
      if (i > 0) os << '\t';
      os << outcome.top[i].label << '\t' << format_prob(outcome.top[i].prob);
    }
    os << '\n';
  }
  output.finish();
  return kOk;
}

int cmd_clean(const PipelineConfig& config, std::istream& in, std::ostream& err) {
  if (config.model.empty()) report_config_error("clean needs --model");
  if (config.out_dir.empty()) report_config_error("clean needs --outDir");
  const LidModel model = load_model(config.model);
  const Decider decider(model, config);
  Input input(config.input, in);

  std::map<Label, std::unique_ptr<std::ofstream>> files;
  std::map<Label, std::uint64_t> kept;
  std::string line;
  while (std::getline(input.stream(), line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto outcome = decider.classify(line, 1);
    const Label label = outcome.label.value_or(Label(kUndetermined));
    auto& file = files[label];
    if (!file) {
      std::error_code ec;
      fs::create_directories(config.out_dir, ec);
      const fs::path path = fs::path(config.out_dir) / (label + ".txt");
      file = std::make_unique<std::ofstream>(path);
      if (!*file) throw IoError("cannot write " + path.string());
    }
    *file << line << '\n';
    if (!*file) throw IoError("write failed for label " + label);
    ++kept[label];
  }
  for (auto& [label, file] : files) {
    file->close();
    if (!*file) throw IoError("write failed for label " + label);
  }
  for (const auto& [label, n] : kept) err << label << '\t' << n << '\n';
  return kOk;
}

struct EvalOptions {
  std::string gold;
  std::string pred;
  std::string benchmark_labels;
  std::vector<std::string> model_labels;
  bool strict = false;
  std::string calibration;
  std::size_t bins = 10;
};

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_tabs(line));
  }
  return rows;
}

// Gold rows are bare labels or `__label__xxx text` corpus lines.
Label gold_label(const std::string& field) {
  if (!field.starts_with(kLabelPrefix)) return field;
  const size_t space = field.find(' ');
  return field.substr(kLabelPrefix.size(), space == std::string::npos ? std::string::npos
                                                                      : space - kLabelPrefix.size());
}

int cmd_eval(const PipelineConfig& config, const EvalOptions& opts, std::ostream& out,
             std::ostream& err) {
  if (opts.gold.empty() || opts.pred.empty()) report_config_error("eval needs --gold and --pred");
  if (config.scenario != "known" && config.scenario != "unknown") {
    report_config_error("scenario must be 'known' or 'unknown'");
  }
  const auto gold_rows = read_rows(opts.gold);
  const auto pred_rows = read_rows(opts.pred);
  if (gold_rows.size() != pred_rows.size()) {
    throw InputMismatch("gold has " + std::to_string(gold_rows.size()) +
                        " rows but predictions have " + std::to_string(pred_rows.size()));
  }

  std::optional<LabelMap> map;
  if (!config.label_map.empty()) map = load_label_map(config.label_map);
  const MapMode mode = opts.strict ? MapMode::Strict : MapMode::Lenient;
  auto relabel = [&](const Label& l) { return map ? map->apply(l, mode) : l; };

  std::vector<Label> gold;
  std::vector<Prediction> pred;
  std::vector<ScoredPrediction> scored;
  for (size_t i = 0; i < gold_rows.size(); ++i) {
    gold.push_back(relabel(gold_label(gold_rows[i].at(0))));
    const auto& row = pred_rows[i];
    Prediction p;
    if (row.at(0) != kUndetermined) p = relabel(row[0]);
    double conf = 0.0;
    if (row.size() > 1) conf = parse_number<double>("prediction confidence", row[1]);
    pred.push_back(p);
    scored.push_back({p, conf});
  }

  std::set<Label> benchmark;
  if (!opts.benchmark_labels.empty()) {
    for (const auto& l : read_label_set_file(opts.benchmark_labels)) benchmark.insert(relabel(l));
  } else {
    benchmark.insert(gold.begin(), gold.end());
  }

  EvalScope scope;
  if (config.scenario == "known" && !opts.model_labels.empty()) {
    if (opts.model_labels.size() > 2) report_config_error("at most two --modelLabels files");
    auto load_mapped = [&](const std::string& path) {
      std::set<Label> labels;
      for (const auto& l : read_label_set_file(path)) labels.insert(relabel(l));
      return labels;
    };
    const auto a = load_mapped(opts.model_labels[0]);
    const auto b = opts.model_labels.size() == 2 ? load_mapped(opts.model_labels[1]) : a;
    scope = intersect_scope(a, b, benchmark);
  } else {
    scope.labels = benchmark;
    if (scope.labels.empty()) throw EmptyScope();
  }

  if (!config.skew.empty()) {
    const auto order = skew_indices(gold, config.skew);
    std::vector<Label> g;
    std::vector<Prediction> p;
    std::vector<ScoredPrediction> s;
    g.reserve(order.size());
    for (size_t i : order) {
      g.push_back(gold[i]);
      p.push_back(pred[i]);
      s.push_back(scored[i]);
    }
    gold = std::move(g);
    pred = std::move(p);
    scored = std::move(s);
  }

  const ConfusionCounts counts = confusion(gold, pred, scope);
  Output output(config.output, out);
  write_report(output.stream(), counts, scope);
  output.finish();

  if (!opts.calibration.empty()) {
    Output calib(opts.calibration, out);
    write_calibration(calib.stream(), reliability(scored, gold, opts.bins));
    calib.finish();
  }
  err << "scope " << scope.labels.size() << " labels, " << gold.size() << " rows\n";
  return kOk;
}

int cmd_calib(const PipelineConfig& config, const EvalOptions& opts, std::ostream& out,
              std::ostream& err) {
  if (opts.gold.empty() || opts.pred.empty()) report_config_error("calib needs --gold and --pred");
  const auto gold_rows = read_rows(opts.gold);
  const auto pred_rows = read_rows(opts.pred);
  if (gold_rows.size() != pred_rows.size()) throw InputMismatch("gold/pred row counts differ");
  std::vector<Label> gold;
  std::vector<ScoredPrediction> scored;
  for (size_t i = 0; i < gold_rows.size(); ++i) {
    gold.push_back(gold_label(gold_rows[i].at(0)));
    const auto& row = pred_rows[i];
    if (row.size() < 2) throw DataError("prediction row " + std::to_string(i + 1) + " lacks a probability");
    Prediction p;
    if (row[0] != kUndetermined) p = row[0];
    scored.push_back({p, parse_number<double>("prediction confidence", row[1])});
  }
  const auto bins = reliability(scored, gold, opts.bins);
  Output output(config.output, out);
  write_calibration(output.stream(), bins);
  output.finish();
  err << "ECE " << bins.expected_calibration_error() << '\n';
  return kOk;
}

int cmd_contam(const std::string& test_path, const std::string& train_path,
               const PipelineConfig& config, std::istream& in, std::ostream& out) {
  if (test_path.empty() || train_path.empty()) report_config_error("contam needs --test and --train");
  const auto test = read_corpus_from(test_path, in);
  const auto train_lines = read_corpus_file(train_path);
  Output output(config.output, out);
  for (const auto& [label, rate] : contamination_rate(test, train_lines)) {
    output.stream() << label << '\t' << format_prob(rate) << '\n';
  }
  output.finish();
  return kOk;
}

int cmd_stats(const PipelineConfig& config, std::istream& in, std::ostream& out) {
  const auto stats = corpus_stats(read_corpus_from(config.input, in));
  Output output(config.output, out);
  for (const auto& [label, n] : stats.per_label_counts) output.stream() << label << '\t' << n << '\n';
  output.stream() << "__total__\t" << stats.total << '\n';
  output.finish();
  return kOk;
}

struct SplitOptions {
  std::string train_out;
  std::string test_out;
  double train_fraction = 0.85;
  std::size_t test_cap = 1000;
};

int cmd_split(const PipelineConfig& config, const SplitOptions& opts, std::istream& in,
              std::ostream& err) {
  if (opts.train_out.empty() || opts.test_out.empty()) {
    report_config_error("split needs --trainOut and --testOut");
  }
  const auto lines = read_corpus_from(config.input, in);
  const auto split = split_train_test(
      lines, SplitConfig{opts.train_fraction, opts.test_cap, config.training.seed});
  Output train_out(opts.train_out, err);
  write_corpus(train_out.stream(), split.train);
  train_out.finish();
  Output test_out(opts.test_out, err);
  write_corpus(test_out.stream(), split.test);
  test_out.finish();
  err << "train " << split.train.size() << "  test " << split.test.size() << '\n';
  return kOk;
}

struct PrepOptions {
  std::string scripts;
  double min_purity = 1.0;
  bool no_dedup = false;
};

ScriptExpectations read_script_table(const std::string& path) {
  ScriptExpectations table;
  for (const auto& [label, scripts] : read_label_pairs_file(path)) {
    std::stringstream ss(scripts);
    std::string script;
    while (std::getline(ss, script, ',')) {
      std::string s(unicode::trim(script));
      if (!s.empty()) table[label].insert(s);
    }
  }
  return table;
}

int cmd_prep(const PipelineConfig& config, const PrepOptions& opts, std::istream& in,
             std::ostream& out, std::ostream& err) {
  auto lines = read_corpus_from(config.input, in);
  const size_t read = lines.size();
  size_t script_dropped = 0;
  if (!opts.scripts.empty()) {
    auto filtered = filter_by_script(lines, read_script_table(opts.scripts), opts.min_purity);
    script_dropped = filtered.dropped;
    lines = std::move(filtered.kept);
  }
  const size_t before_dedup = lines.size();
  if (!opts.no_dedup) lines = dedup(lines);
  Output output(config.output, out);
  write_corpus(output.stream(), lines);
  output.finish();
  err << "read " << read << "  wrong-script " << script_dropped << "  duplicates "
      << (before_dedup - lines.size()) << "  kept " << lines.size() << '\n';
  return kOk;
}

std::string find_config_path(const std::vector<std::string>& args) {
  for (size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].starts_with("--config=")) return args[i].substr(9);
  }
  return {};
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case Error::Kind::Validation:
      return kUsage;
    case Error::Kind::Data:
      return kDataError;
    case Error::Kind::Io:
      return kIoError;
  }
  return kDataError;
}

}  // namespace

void apply_config_text(const std::string& text, PipelineConfig& config) {
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view trimmed = unicode::trim(line);
    if (trimmed.empty()) continue;
    const size_t eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(unicode::trim(trimmed.substr(0, eq)));
    const std::string value(unicode::trim(trimmed.substr(eq + 1)));
    const auto& keys = config_keys();
    auto it = keys.find(key);
    if (it == keys.end()) throw ValidationError("unknown config key: " + key);
    it->second(config, value);
  }
}

SkewFactors parse_skew(const std::string& spec) {
  SkewFactors factors;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string entry(unicode::trim(item));
    if (entry.empty()) continue;
    const size_t colon = entry.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw ValidationError("skew entry must be label:factor, got '" + entry + "'");
    }
    const auto k = parse_number<std::uint64_t>("skew factor", entry.substr(colon + 1));
    if (k < 1) throw ValidationError("skew factor must be >= 1");
    factors[entry.substr(0, colon)] = k;
  }
  return factors;
}

std::vector<std::string> normalize_flags(std::vector<std::string> args) {
  for (size_t i = 1; i < args.size(); ++i) {
    std::string& a = args[i];
    if (a.size() > 2 && a[0] == '-' && a[1] != '-' && std::isalpha(static_cast<unsigned char>(a[1]))) {
      a.insert(a.begin(), '-');
    }
  }
  return args;
}

int run(std::vector<std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
  args = normalize_flags(std::move(args));
  PipelineConfig config;
  EvalOptions eval_opts;
  SplitOptions split_opts;
  PrepOptions prep_opts;
  std::string contam_test, contam_train, config_path;
  bool strip_labels = false;

  try {
    if (const std::string path = find_config_path(args); !path.empty()) {
      std::ifstream file(path);
      if (!file) throw IoError("cannot open config: " + path);
      std::stringstream text;
      text << file.rdbuf();
      apply_config_text(text.str(), config);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }

  CLI::App app{"Language identification toolkit: train, predict, clean, evaluate"};
  app.set_version_flag("--version", std::string("lidkit ") + kToolkitVersion +
                                        " (model format " +
                                        std::to_string(kModelFormatVersion) + ")");
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_option("--output,-o", config.output, "output path ('-' for stdout)");
  };
  auto add_features = [&](CLI::App* sub) {
    sub->add_option("--minCount", config.features.min_count, "minimal number of word occurrences");
    sub->add_option("--minCountLabel", config.features.min_count_label, "minimal number of label occurrences");
    sub->add_option("--wordNgrams", config.features.word_ngrams, "max length of word ngram");
    sub->add_option("--bucket", config.features.bucket, "number of buckets");
    sub->add_option("--minn", config.features.minn, "min length of char ngram");
    sub->add_option("--maxn", config.features.maxn, "max length of char ngram");
  };
  auto add_decision = [&](CLI::App* sub) {
    sub->add_option("--model,-m", config.model, "model file");
    sub->add_option("--input,-i", config.input, "input text ('-' for stdin)");
    sub->add_option("--theta", config.theta, "confidence threshold in [0,1]");
    sub->add_option("--baseSet", config.base_set, "restrict decisions to these labels");
    sub->add_option("--hierarchy", config.hierarchy, "variety<TAB>macrolanguage rollup file");
  };

  std::string loss_name = "softmax";
  CLI::App* train_cmd = app.add_subcommand("train", "train a model on a __label__ corpus");
  add_common(train_cmd);
  add_features(train_cmd);
  train_cmd->add_option("--input,-i", config.input, "training corpus ('-' for stdin)");
  train_cmd->add_option("--dim", config.training.dim, "size of word vectors");
  train_cmd->add_option("--epoch", config.training.epochs, "number of epochs");
  train_cmd->add_option("--lr", config.training.lr, "learning rate");
  train_cmd->add_option("--loss", loss_name, "loss function (softmax)");
  train_cmd->add_option("--invTemperature", config.training.inv_temperature,
                        "language sampling exponent 1/T");
  train_cmd->add_option("--seed", config.training.seed, "random seed");
  train_cmd->add_option("--threads", config.training.threads,
                        "worker threads (>1 is not bitwise reproducible)");

  CLI::App* predict_cmd = app.add_subcommand("predict", "label each input line");
  add_common(predict_cmd);
  add_decision(predict_cmd);
  predict_cmd->add_option("-k,--k", config.k, "number of labels per line");
  predict_cmd->add_flag("--stripLabels", strip_labels, "ignore a leading __label__ token");

  CLI::App* clean_cmd = app.add_subcommand("clean", "route lines into per-language files");
  add_common(clean_cmd);
  add_decision(clean_cmd);
  clean_cmd->add_option("--outDir", config.out_dir, "output directory");

  CLI::App* eval_cmd = app.add_subcommand("eval", "score predictions against gold labels");
  add_common(eval_cmd);
  eval_cmd->add_option("--gold", eval_opts.gold, "gold labels, one per line");
  eval_cmd->add_option("--pred", eval_opts.pred, "predictions (label[<TAB>prob])");
  eval_cmd->add_option("--scenario", config.scenario, "known | unknown");
  eval_cmd->add_option("--benchmarkLabels", eval_opts.benchmark_labels, "benchmark label set");
  eval_cmd->add_option("--modelLabels", eval_opts.model_labels, "label set of a model (up to two)");
  eval_cmd->add_option("--labelMap", config.label_map, "source<TAB>target relabeling");
  eval_cmd->add_flag("--strict", eval_opts.strict, "fail on labels missing from the map");
  std::string skew_spec;
  eval_cmd->add_option("--skew", skew_spec, "label:factor[,label:factor...]");
  eval_cmd->add_option("--calibration", eval_opts.calibration, "also write reliability bins here");
  eval_cmd->add_option("--bins", eval_opts.bins, "calibration bins");

  CLI::App* calib_cmd = app.add_subcommand("calib", "reliability diagram bins");
  add_common(calib_cmd);
  calib_cmd->add_option("--gold", eval_opts.gold, "gold labels");
  calib_cmd->add_option("--pred", eval_opts.pred, "predictions label<TAB>prob");
  calib_cmd->add_option("--bins", eval_opts.bins, "number of bins");

  CLI::App* contam_cmd = app.add_subcommand("contam", "test/train word 4-gram contamination");
  add_common(contam_cmd);
  contam_cmd->add_option("--test", contam_test, "test corpus");
  contam_cmd->add_option("--train", contam_train, "train corpus");

  CLI::App* stats_cmd = app.add_subcommand("stats", "per-label line counts");
  add_common(stats_cmd);
  stats_cmd->add_option("--input,-i", config.input, "corpus ('-' for stdin)");

  CLI::App* split_cmd = app.add_subcommand("split", "train/test split with per-label test cap");
  add_common(split_cmd);
  split_cmd->add_option("--input,-i", config.input, "corpus ('-' for stdin)");
  split_cmd->add_option("--trainOut", split_opts.train_out, "train corpus output");
  split_cmd->add_option("--testOut", split_opts.test_out, "test corpus output");
  split_cmd->add_option("--trainFraction", split_opts.train_fraction, "train share");
  split_cmd->add_option("--testCap", split_opts.test_cap, "max test lines per label");
  split_cmd->add_option("--seed", config.training.seed, "random seed");

  CLI::App* prep_cmd = app.add_subcommand("prep", "script filtering and deduplication");
  add_common(prep_cmd);
  prep_cmd->add_option("--input,-i", config.input, "corpus ('-' for stdin)");
  prep_cmd->add_option("--scripts", prep_opts.scripts, "label<TAB>Script[,Script...] table");
  prep_cmd->add_option("--minPurity", prep_opts.min_purity, "minimum dominant-script share");
  prep_cmd->add_flag("--noDedup", prep_opts.no_dedup, "keep duplicate sentences");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (loss_name != "softmax") throw ValidationError("unsupported loss: " + loss_name);
    if (!skew_spec.empty()) config.skew = parse_skew(skew_spec);
    if (!(config.theta >= 0.0 && config.theta <= 1.0)) {
      throw ValidationError("theta must lie in [0,1]");
    }
    if (train_cmd->parsed()) {
      config.features.validate();
      config.training.validate();
      return cmd_train(config, in, err);
    }
    if (predict_cmd->parsed()) return cmd_predict(config, strip_labels, in, out);
    if (clean_cmd->parsed()) return cmd_clean(config, in, err);
    if (eval_cmd->parsed()) return cmd_eval(config, eval_opts, out, err);
    if (calib_cmd->parsed()) return cmd_calib(config, eval_opts, out, err);
    if (contam_cmd->parsed()) return cmd_contam(contam_test, contam_train, config, in, out);
    if (stats_cmd->parsed()) return cmd_stats(config, in, out);
    if (split_cmd->parsed()) return cmd_split(config, split_opts, in, err);
    if (prep_cmd->parsed()) return cmd_prep(config, prep_opts, in, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace lidkit::cli
