// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "lidkit/cli.hpp"
#include "lidkit/corpus.hpp"
#include "lidkit/decision.hpp"
#include "lidkit/errors.hpp"
#include "lidkit/eval.hpp"
#include "lidkit/model.hpp"
#include "lidkit/unicode.hpp"
#include "support/synthetic.hpp"

using namespace lidkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lidkit_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1 ------------------------------------------------------------------------
Outcome synthetic_end_to_end() {
  testing::SyntheticSpec spec;
  spec.languages = 20;
  spec.lines_per_language = 5000;
  spec.seed = 2024;
  const auto corpus = testing::synthetic_corpus(spec);
  const auto split = split_train_test(corpus, SplitConfig{0.85, 1000, 7});

  FeatureConfig features;
  features.min_count = 1;
  TrainConfig training;
  training.dim = 16;
  training.epochs = 5;
  training.lr = 0.8;
  training.threads = 1;

  const auto start = std::chrono::steady_clock::now();
  const LidModel model = train(split.train, features, training);

  std::vector<Label> gold;
  std::vector<Prediction> pred;
  const std::vector<Label> universe(model.labels().begin(), model.labels().end());
  const auto decision = DecisionConfig::set_unknown(universe, 0.0);
  for (const auto& line : split.test) {
    gold.push_back(line.label);
    auto dist = model.distribution(std::string_view(line.text));
    pred.push_back(dist ? decide(*dist, decision) : std::nullopt);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  EvalScope scope;
  for (std::size_t i = 0; i < spec.languages; ++i) scope.labels.insert(testing::synthetic_label(i));
  const auto counts = confusion(gold, pred, scope);
  const double f1m = f1_macro(counts, scope);
  const double fprm = fpr_macro(counts, scope);
  return {f1m >= 0.95 && fprm <= 0.005 && seconds < 120.0,
          format("train %zu / test %zu lines, macro F1 %.4f, FPR %.5f, %.1f s", split.train.size(),
                 split.test.size(), f1m, fprm, seconds)};
}

// 2 ------------------------------------------------------------------------
double reference_loss(const Matrix<double>& E, const Matrix<double>& W,
                      const std::vector<FeatureId>& bag, std::size_t target) {
  std::vector<double> h(E.cols(), 0.0);
  for (FeatureId f : bag) {
    for (std::size_t c = 0; c < h.size(); ++c) h[c] += E.at(f, c) / static_cast<double>(bag.size());
  }
  std::vector<double> z(W.rows(), 0.0);
  for (std::size_t j = 0; j < z.size(); ++j) {
    for (std::size_t c = 0; c < h.size(); ++c) z[j] += W.at(j, c) * h[c];
  }
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s) - z[target];
}

Outcome gradient_check() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-4;
  double worst = 0.0;
  for (int example = 0; example < 100; ++example) {
    Matrix<double> E(10, 4), W(3, 4);
    for (double& v : E.data()) v = u(rng);
    for (double& v : W.data()) v = u(rng);
    std::vector<FeatureId> bag(1 + rng() % 8);
    for (auto& f : bag) f = static_cast<FeatureId>(rng() % 10);
    const std::size_t target = rng() % 3;
    const auto grad = example_gradient(E, W, bag, target);

    auto compare = [&](double analytic, double& cell) {
      const double keep = cell;
      cell = keep + h;
      const double up = reference_loss(E, W, bag, target);
      cell = keep - h;
      const double down = reference_loss(E, W, bag, target);
      cell = keep;
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    };
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t c = 0; c < 4; ++c) compare(grad.output.at(j, c), W.at(j, c));
    }
    for (FeatureId f = 0; f < 10; ++f) {
      const auto mult = static_cast<std::size_t>(std::count(bag.begin(), bag.end(), f));
      if (mult == 0) continue;
      const auto row = grad.input_row(mult);
      for (std::size_t c = 0; c < 4; ++c) compare(row[c], E.at(f, c));
    }
  }
  return {worst < 1e-4, format("max relative error %.3e over 100 examples", worst)};
}

// 3 ------------------------------------------------------------------------
Outcome softmax_normalization() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  std::size_t non_finite = 0;
  for (int i = 0; i < 10000; ++i) {
    const double scale = std::pow(10.0, static_cast<double>(rng() % 5));  // 1 .. 1e4
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> logits(1 + rng() % 50);
    for (double& z : logits) z = u(rng);
    softmax_inplace(logits);
    double sum = 0.0;
    for (double p : logits) {
      if (!std::isfinite(p)) ++non_finite;
      sum += p;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return {worst < 1e-6 && non_finite == 0,
          format("max |sum - 1| %.3e, non-finite %zu", worst, non_finite)};
}

// 4 ------------------------------------------------------------------------
Outcome metric_oracle() {
  using boost::multiprecision::cpp_int;
  using Rational = boost::multiprecision::cpp_rational;
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? Rational(0) : Rational(cpp_int(num), cpp_int(den));
  };
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int table = 0; table < 1000; ++table) {
    ConfusionCounts counts;
    EvalScope scope;
    const std::size_t n = 1 + rng() % 12;
    for (std::size_t l = 0; l < n; ++l) {
      const Label label = "x" + std::to_string(l);
      auto draw = [&] { return rng() % 4 == 0 ? std::uint64_t{0} : rng() % 1000000; };
      counts.per_label[label] = LabelCounts{draw(), draw(), draw(), draw()};
      scope.labels.insert(label);
    }
    Rational f1_sum = 0, fpr_sum = 0;
    for (const auto& label : scope.labels) {
      const auto& c = counts.at(label);
      f1_sum += ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
      fpr_sum += ratio(c.fp, c.fp + c.tn);
      worst = std::max(worst, std::abs(cleanness(counts, label) -
                                       static_cast<double>(ratio(c.tp, c.tp + c.fp))));
    }
    const Rational size(static_cast<long long>(n));
    worst = std::max(worst, std::abs(f1_macro(counts, scope) - static_cast<double>(f1_sum / size)));
    worst = std::max(worst, std::abs(fpr_macro(counts, scope) - static_cast<double>(fpr_sum / size)));
  }
  return {worst <= 1e-12, format("max deviation %.3e over 1000 tables", worst)};
}

// 5 ------------------------------------------------------------------------
Outcome noise_reproduction() {
  // 1% of the stream is language x, always recognized; every other sentence
  // is mislabeled x with probability 1%.
  std::mt19937_64 rng(5);
  std::bernoulli_distribution is_x(0.01), false_alarm(0.01);
  std::vector<Label> gold;
  std::vector<Prediction> pred;
  for (int i = 0; i < 200000; ++i) {
    if (is_x(rng)) {
      gold.push_back("x");
      pred.push_back(Label("x"));
    } else {
      gold.push_back("y");
      pred.push_back(false_alarm(rng) ? Label("x") : Label("y"));
    }
  }
  const auto counts = confusion(gold, pred, EvalScope{{"x", "y"}});
  const auto& c = counts.at("x");
  const double cl = cleanness(c);
  const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return {cl >= 0.49 && cl <= 0.52,
          format("TP %llu FP %llu, recall %.2f, FPR %.4f, cleanness %.4f",
                 static_cast<unsigned long long>(c.tp), static_cast<unsigned long long>(c.fp),
                 recall, fpr(c), cl)};
}

// 6 ------------------------------------------------------------------------
double dzo_cleanness(const std::string& report) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("dzo\t", 0) != 0) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    return std::stod(cells.at(7));
  }
  return -1.0;
}

Outcome dzongkha_skew() {
  const auto dir = scratch("dzongkha");
  std::ofstream gold(dir / "gold.txt"), pred(dir / "pred.txt");
  for (int i = 0; i < 1041; ++i) {
    gold << "dzo\n";
    pred << "dzo\n";
  }
  for (int i = 0; i < 103; ++i) {
    gold << "bod\n";
    pred << "dzo\n";
  }
  for (int i = 0; i < 897; ++i) {
    gold << "bod\n";
    pred << "bod\n";
  }
  gold.close();
  pred.close();

  auto eval = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"lidkit", "eval", "--gold", (dir / "gold.txt").string(),
                                  "--pred", (dir / "pred.txt").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    std::istringstream in;
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    return code == 0 ? dzo_cleanness(out.str()) : -1.0;
  };
  const double plain = eval({});
  const double skewed = eval({"--skew", "bod:100"});
  const bool ok = plain >= 0.905 && plain <= 0.915 && skewed >= 0.088 && skewed <= 0.096;
  return {ok, format("cl(FP=103) %.4f, cl(FP=10300 via --skew bod:100) %.4f", plain, skewed)};
}

// 7 ------------------------------------------------------------------------
Outcome temperature_sampling() {
  CorpusStats stats;
  stats.per_label_counts = {{"a", 100000}, {"b", 1000}, {"c", 10}};
  stats.total = 101010;
  const auto weights = temperature_weights(stats, 0.3);
  std::vector<double> w;
  for (const auto& [label, p] : weights) w.push_back(p);
  LanguageSampler sampler(w);
  std::mt19937_64 rng(7);
  const int draws = 100000;
  std::vector<int> counts(w.size(), 0);
  for (int i = 0; i < draws; ++i) ++counts[sampler(rng)];
  bool ok = true;
  std::string detail;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double expected = draws * w[j];
    const double sigma = std::sqrt(draws * w[j] * (1.0 - w[j]));
    const double z = (counts[j] - expected) / sigma;
    ok = ok && std::abs(z) <= 3.0;
    detail += format("%s%.4f/%.4f (z=%+.2f)", j ? ", " : "", counts[j] / double(draws), w[j], z);
  }
  return {ok, "observed/expected " + detail};
}

// 8 ------------------------------------------------------------------------
PredictionDist random_distribution(const std::vector<Label>& pool, std::mt19937_64& rng) {
  std::vector<Label> chosen(pool);
  std::shuffle(chosen.begin(), chosen.end(), rng);
  chosen.resize(1 + rng() % pool.size());
  std::gamma_distribution<double> g(0.3, 1.0);  // peaky and flat draws alike
  std::vector<double> w(chosen.size());
  double total = 0.0;
  for (double& v : w) total += (v = g(rng) + 1e-12);
  std::vector<std::pair<Label, double>> entries;
  for (std::size_t i = 0; i < chosen.size(); ++i) entries.emplace_back(chosen[i], w[i] / total);
  return PredictionDist::from_pairs(std::move(entries));
}

std::vector<Label> label_pool(std::size_t n) {
  std::vector<Label> pool;
  for (std::size_t i = 0; i < n; ++i) pool.push_back("p" + std::to_string(10 + i));
  return pool;
}

Outcome decision_properties() {
  std::mt19937_64 rng(8);
  const auto pool = label_pool(10);
  std::vector<PredictionDist> dists;
  for (int i = 0; i < 10000; ++i) dists.push_back(random_distribution(pool, rng));

  std::size_t monotone_violations = 0;
  std::size_t previous = 0;
  for (int step = 0; step <= 20; ++step) {
    const double theta = std::min(1.0, step * 0.05);
    std::size_t und = 0;
    for (const auto& d : dists) {
      const std::vector<Label> labels(d.labels().begin(), d.labels().end());
      und += decide(d, DecisionConfig::set_unknown(labels, theta)) ? 0 : 1;
    }
    if (und < previous) ++monotone_violations;
    previous = und;
  }

  std::size_t restriction_violations = 0, in_set = 0;
  for (const auto& d : dists) {
    const std::vector<Label> labels(d.labels().begin(), d.labels().end());
    const auto global = decide(d, DecisionConfig::set_unknown(labels, 0.0));
    std::set<Label> base;
    for (const auto& l : pool) if (rng() % 2 == 0) base.insert(l);
    if (base.empty()) base.insert(pool[rng() % pool.size()]);
    if (!global || !base.count(*global)) continue;
    ++in_set;
    if (decide(d, DecisionConfig::set_known(base, 0.0)) != global) ++restriction_violations;
  }
  return {monotone_violations == 0 && restriction_violations == 0,
          format("monotonicity violations %zu, restriction violations %zu (%zu in-set pairs)",
                 monotone_violations, restriction_violations, in_set)};
}

// 9 ------------------------------------------------------------------------
Outcome rollup_conservation() {
  std::mt19937_64 rng(9);
  const auto pool = label_pool(15);
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<Label> macros;
    for (const auto& l : pool) if (rng() % 4 == 0) macros.push_back(l);
    std::map<Label, Label> links;
    for (const auto& l : pool) {
      if (macros.empty() || std::count(macros.begin(), macros.end(), l)) continue;
      if (rng() % 2 == 0) links[l] = macros[rng() % macros.size()];
    }
    const LanguageHierarchy hierarchy(links);
    const auto dist = random_distribution(pool, rng);

    // Fixed order: groups by target label; within a group the target
    // itself, then its varieties by label.
    std::map<Label, std::vector<double>> groups;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      const Label& l = dist.labels()[k];
      if (hierarchy.target(l) == l) groups[l].push_back(dist.probs()[k]);
    }
    for (std::size_t k = 0; k < dist.size(); ++k) {
      const Label& l = dist.labels()[k];
      if (hierarchy.target(l) != l) groups[hierarchy.target(l)].push_back(dist.probs()[k]);
    }
    double before = 0.0;
    for (const auto& [target, members] : groups) {
      double s = 0.0;
      for (double p : members) s += p;
      before += s;
    }
    if (before != rollup(dist, hierarchy).mass()) ++violations;
  }
  return {violations == 0, format("%zu violations over 10000 distributions", violations)};
}

// 10 -----------------------------------------------------------------------
std::map<Label, double> brute_contamination(const std::vector<LabeledLine>& test,
                                            const std::vector<LabeledLine>& train) {
  auto grams = [](const std::string& text) {
    const auto words = tokenize(text);
    std::set<std::string> out;
    for (std::size_t i = 0; i + 4 <= words.size(); ++i) {
      out.insert(words[i] + " " + words[i + 1] + " " + words[i + 2] + " " + words[i + 3]);
    }
    return out;
  };
  std::vector<std::set<std::string>> train_grams;
  for (const auto& line : train) train_grams.push_back(grams(line.text));
  std::map<Label, std::pair<double, double>> tally;
  for (const auto& line : test) {
    auto& [hit, total] = tally[line.label];
    total += 1;
    const auto g = grams(line.text);
    if (g.empty()) continue;
    for (const auto& t : train_grams) {
      if (std::includes(t.begin(), t.end(), g.begin(), g.end())) {
        hit += 1;
        break;
      }
    }
  }
  std::map<Label, double> rates;
  for (const auto& [label, t] : tally) rates[label] = t.first / t.second;
  return rates;
}

Outcome contamination_oracle() {
  std::mt19937_64 rng(10);
  const std::vector<std::string> words{"a", "b", "c", "d", "e", "f"};
  auto sentence = [&](std::size_t max_len) {
    std::string s;
    const std::size_t n = rng() % (max_len + 1);
    for (std::size_t i = 0; i < n; ++i) s += words[rng() % words.size()] + " ";
    return s.empty() ? std::string("a") : s;
  };
  std::size_t disagreements = 0, contaminated_labels = 0;
  for (int corpus = 0; corpus < 200; ++corpus) {
    std::vector<LabeledLine> train, test;
    const std::size_t n_train = 1 + rng() % 200;
    const std::size_t n_test = 1 + rng() % 200;
    for (std::size_t i = 0; i < n_train; ++i) {
      train.push_back(make_line("t" + std::to_string(rng() % 3), sentence(14)));
    }
    for (std::size_t i = 0; i < n_test; ++i) {
      std::string text;
      if (rng() % 2 == 0) {
        // A window of a training sentence: contaminated whenever >= 4 words.
        const auto source = tokenize(train[rng() % train.size()].text);
        const std::size_t from = rng() % (source.size() + 1);
        const std::size_t to = from + rng() % (source.size() - from + 1);
        for (std::size_t k = from; k < to; ++k) text += source[k] + " ";
      }
      if (text.empty()) text = sentence(8);
      test.push_back(make_line("t" + std::to_string(rng() % 3), text));
    }
    const auto fast = contamination_rate(test, train);
    const auto slow = brute_contamination(test, train);
    if (fast != slow) ++disagreements;
    for (const auto& [label, rate] : fast) contaminated_labels += rate > 0.0 ? 1 : 0;
  }
  return {disagreements == 0,
          format("%zu disagreements over 200 corpora (%zu label rates > 0)", disagreements,
                 contaminated_labels)};
}

// 11 -----------------------------------------------------------------------
Outcome serialization() {
  testing::SyntheticSpec spec;
  spec.languages = 6;
  spec.lines_per_language = 300;
  FeatureConfig features;
  features.min_count = 2;
  features.bucket = 100000;
  features.word_ngrams = 2;
  TrainConfig training;
  training.dim = 16;
  training.epochs = 3;
  const auto model = train(testing::synthetic_corpus(spec), features, training);

  const auto dir = scratch("serialization");
  const std::string path = (dir / "model.bin").string();
  save_model(model, path);
  const auto loaded = load_model(path);

  std::mt19937_64 rng(11);
  const std::u32string junk = U"abc xyz жя 中文 ĀĂĄ 123 .,!";
  std::size_t mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string text;
    if (i % 3 == 0) {
      std::u32string s;
      for (std::size_t k = 0, n = rng() % 30; k < n; ++k) s.push_back(junk[rng() % junk.size()]);
      text = unicode::encode(s);
    } else {
      text = testing::synthetic_sentence(rng() % spec.languages, spec.letters_per_language, rng());
    }
    const auto a = model.distribution(std::string_view(text));
    const auto b = loaded.distribution(std::string_view(text));
    if (a.has_value() != b.has_value()) {
      ++mismatches;
      continue;
    }
    if (!a) continue;
    const std::vector<double> pa(a->probs().begin(), a->probs().end());
    const std::vector<double> pb(b->probs().begin(), b->probs().end());
    if (std::memcmp(pa.data(), pb.data(), pa.size() * sizeof(double)) != 0) ++mismatches;
  }

  std::ifstream in(path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto rejects = [&](std::string data, auto tag) {
    using Expected = decltype(tag);
    std::istringstream s(data);
    try {
      read_model(s);
    } catch (const Expected&) {
      return true;
    } catch (...) {
    }
    return false;
  };
  std::string flipped = bytes;
  flipped[bytes.size() / 3] ^= 0x01;
  std::string magic = bytes;
  magic.replace(0, 8, "NOTAMODL");
  const bool corrupt_ok = rejects(flipped, CorruptModel("")) &&
                          rejects(bytes.substr(0, bytes.size() - 7), CorruptModel(""));
  const bool magic_ok = rejects(magic, UnsupportedFormat(""));
  return {mismatches == 0 && corrupt_ok && magic_ok,
          format("%zu mismatches over 1000 sentences; corrupt/truncated -> CorruptModel: %s; "
                 "wrong magic -> UnsupportedFormat: %s",
                 mismatches, corrupt_ok ? "yes" : "no", magic_ok ? "yes" : "no")};
}

// 12 -----------------------------------------------------------------------
Outcome calibration_harness() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredPrediction> preds;
  std::vector<Label> gold;
  for (int i = 0; i < 100000; ++i) {
    const double c = u(rng);
    preds.push_back({Label("hit"), c});
    gold.push_back(u(rng) < c ? "hit" : "miss");
  }
  const auto bins = reliability(preds, gold, 10);
  double worst = 0.0;
  std::size_t occupied = 0;
  for (const auto& bin : bins.bins) {
    if (bin.count == 0) continue;
    ++occupied;
    worst = std::max(worst, std::abs(bin.accuracy - bin.mean_confidence));
  }
  return {worst < 0.02 && occupied > 0,
          format("%zu occupied bins, max |accuracy - confidence| %.4f, ECE %.4f", occupied, worst,
                 bins.expected_calibration_error())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"synthetic end-to-end", synthetic_end_to_end},
      {"gradient check", gradient_check},
      {"softmax normalization", softmax_normalization},
      {"metric oracle equivalence", metric_oracle},
      {"50% noise reproduction", noise_reproduction},
      {"Dzongkha skew arithmetic", dzongkha_skew},
      {"temperature sampling", temperature_sampling},
      {"decision-rule properties", decision_properties},
      {"rollup mass conservation", rollup_conservation},
      {"contamination oracle", contamination_oracle},
      {"serialization", serialization},
      {"calibration harness", calibration_harness},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  " << (i + 1 < 10 ? " " : "") << i + 1
              << ". " << criteria[i].first << ": " << outcome.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
