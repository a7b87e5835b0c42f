#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lidkit/decision.hpp"
#include "lidkit/errors.hpp"

using namespace lidkit;

namespace {

PredictionDist dist_of(std::vector<std::pair<Label, double>> entries) {
  return PredictionDist::from_pairs(std::move(entries));
}

std::vector<Label> label_pool(std::size_t n) {
  std::vector<Label> pool;
  for (std::size_t i = 0; i < n; ++i) pool.push_back("q" + std::to_string(100 + i));
  return pool;
}

PredictionDist random_dist(const std::vector<Label>& pool, std::mt19937_64& rng) {
  std::vector<Label> chosen(pool);
  std::shuffle(chosen.begin(), chosen.end(), rng);
  chosen.resize(1 + rng() % pool.size());
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> w(chosen.size());
  for (double& v : w) v = ex(rng);
  // Occasional exact ties.
  if (w.size() > 1 && rng() % 4 == 0) w[1] = w[0];
  double total = 0.0;
  for (double v : w) total += v;
  std::vector<std::pair<Label, double>> entries;
  for (std::size_t i = 0; i < chosen.size(); ++i) entries.emplace_back(chosen[i], w[i] / total);
  return dist_of(std::move(entries));
}

std::set<Label> random_subset(const std::vector<Label>& pool, std::mt19937_64& rng) {
  std::set<Label> out;
  for (const auto& l : pool) if (rng() % 2 == 0) out.insert(l);
  if (out.empty()) out.insert(pool[rng() % pool.size()]);
  return out;
}

// Reference decision: scan B, keep the strict maximum, compare to theta.
std::optional<Label> reference_decide(const PredictionDist& dist, const std::set<Label>& base,
                                      double theta) {
  std::optional<Label> best;
  double best_p = -1.0;
  for (const auto& l : base) {
    if (!dist.contains(l)) continue;
    if (dist.prob(l) > best_p) {
      best_p = dist.prob(l);
      best = l;
    }
  }
  if (!best || best_p < theta) return std::nullopt;
  return best;
}

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("lidkit_decision_" + name);
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("decide examples") {
  const auto d = dist_of({{"a", 0.5}, {"b", 0.3}, {"c", 0.2}});
  CHECK(decide(d, DecisionConfig::set_known({"a", "b", "c"}, 0.0)) == Label("a"));
  CHECK(decide(d, DecisionConfig::set_known({"b", "c"}, 0.25)) == Label("b"));
  CHECK_FALSE(decide(d, DecisionConfig::set_known({"b", "c"}, 0.31)).has_value());

  const auto uniform = dist_of({{"w", 0.25}, {"x", 0.25}, {"y", 0.25}, {"z", 0.25}});
  const std::vector<Label> all{"w", "x", "y", "z"};
  CHECK_FALSE(decide(uniform, DecisionConfig::set_unknown(all, 0.5)).has_value());
  CHECK(decide(uniform, DecisionConfig::set_unknown(all, 0.25)) == Label("w"));

  // Labels of B the model does not know never win.
  CHECK_FALSE(decide(d, DecisionConfig::set_known({"zzz"}, 0.0)).has_value());
  CHECK(decide(d, DecisionConfig::set_known({"c", "zzz"}, 0.0)) == Label("c"));
}

TEST_CASE("DecisionConfig validation") {
  const auto d = dist_of({{"a", 1.0}});
  CHECK_THROWS_AS(decide(d, DecisionConfig::set_known({}, 0.5)), ValidationError);
  CHECK_THROWS_AS(decide(d, DecisionConfig::set_known({"a"}, 1.01)), ValidationError);
  CHECK_THROWS_AS(decide(d, DecisionConfig::set_known({"a"}, -0.1)), ValidationError);
  CHECK(decide(d, DecisionConfig::set_known({"a"}, 1.0)) == Label("a"));
}

TEST_CASE("decide matches the reference scan") {
  std::mt19937_64 rng(1);
  const auto pool = label_pool(8);
  std::uniform_real_distribution<double> theta(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const auto d = random_dist(pool, rng);
    const auto base = random_subset(pool, rng);
    const double t = theta(rng);
    CHECK(decide(d, DecisionConfig::set_known(base, t)) == reference_decide(d, base, t));
  }
}

TEST_CASE("undetermined count is monotone in theta") {
  std::mt19937_64 rng(2);
  const auto pool = label_pool(6);
  std::vector<PredictionDist> dists;
  for (int i = 0; i < 2000; ++i) dists.push_back(random_dist(pool, rng));
  std::size_t previous = 0;
  for (int step = 0; step <= 20; ++step) {
    const double t = step * 0.05;
    std::size_t und = 0;
    for (const auto& d : dists) {
      const std::vector<Label> labels(d.labels().begin(), d.labels().end());
      und += decide(d, DecisionConfig::set_unknown(labels, t)) ? 0 : 1;
    }
    CHECK(und >= previous);
    previous = und;
  }
  CHECK(previous > 0);
}

TEST_CASE("restriction keeps an in-set global argmax") {
  std::mt19937_64 rng(3);
  const auto pool = label_pool(8);
  for (int i = 0; i < 2000; ++i) {
    const auto d = random_dist(pool, rng);
    const std::vector<Label> all(d.labels().begin(), d.labels().end());
    const auto global = decide(d, DecisionConfig::set_unknown(all, 0.0));
    REQUIRE(global.has_value());
    auto base = random_subset(pool, rng);
    base.insert(*global);
    CHECK(decide(d, DecisionConfig::set_known(base, 0.0)) == global);
  }
}

TEST_CASE("rollup folds varieties into their macrolanguage") {
  LanguageHierarchy h({{"twi", "aka"}, {"fat", "aka"}});
  const auto rolled = rollup(dist_of({{"twi", 0.5}, {"fat", 0.3}, {"eng", 0.2}}), h);
  REQUIRE(rolled.size() == 2);
  CHECK(rolled.labels()[0] == "aka");
  CHECK(rolled.labels()[1] == "eng");
  CHECK(rolled.prob("aka") == doctest::Approx(0.8));
  CHECK(rolled.prob("eng") == doctest::Approx(0.2));

  const auto with_macro = rollup(dist_of({{"aka", 0.1}, {"twi", 0.6}, {"eng", 0.3}}), h);
  CHECK(with_macro.prob("aka") == doctest::Approx(0.7));
  CHECK_FALSE(with_macro.contains("twi"));

  const auto d = dist_of({{"a", 0.4}, {"b", 0.6}});
  const auto same = rollup(d, LanguageHierarchy{});
  CHECK(std::vector<Label>(same.labels().begin(), same.labels().end()) == std::vector<Label>{"a", "b"});
  CHECK(std::vector<double>(same.probs().begin(), same.probs().end()) == std::vector<double>{0.4, 0.6});

  CHECK(h.target("twi") == "aka");
  CHECK(h.target("eng") == "eng");
}

TEST_CASE("rollup conserves mass in grouped summation order") {
  std::mt19937_64 rng(4);
  const auto pool = label_pool(12);
  for (int i = 0; i < 2000; ++i) {
    std::map<Label, Label> links;
    std::vector<Label> macros;
    for (const auto& l : pool) {
      if (rng() % 3 == 0) macros.push_back(l);
    }
    for (const auto& l : pool) {
      if (macros.empty() || std::find(macros.begin(), macros.end(), l) != macros.end()) continue;
      if (rng() % 2 == 0) links[l] = macros[rng() % macros.size()];
    }
    const LanguageHierarchy h(links);
    const auto d = random_dist(pool, rng);

    std::map<Label, std::vector<double>> groups;
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (h.target(d.labels()[k]) == d.labels()[k]) groups[d.labels()[k]].push_back(d.probs()[k]);
    }
    for (std::size_t k = 0; k < d.size(); ++k) {
      const Label& t = h.target(d.labels()[k]);
      if (t != d.labels()[k]) groups[t].push_back(d.probs()[k]);
    }
    double before = 0.0;
    for (const auto& [label, members] : groups) {
      double g = 0.0;
      for (double p : members) g += p;
      before += g;
    }
    const auto after = rollup(d, h);
    CHECK(before == after.mass());
    for (const auto& label : after.labels()) CHECK(h.target(label) == label);
  }
}

TEST_CASE("hierarchy validation") {
  CHECK_THROWS_AS(LanguageHierarchy(std::map<Label, Label>{{"aka", "aka"}}), ValidationError);
  CHECK_THROWS_AS(LanguageHierarchy(std::map<Label, Label>{{"twi", "aka"}, {"aka", "mul"}}), ValidationError);
  CHECK_NOTHROW(LanguageHierarchy(std::map<Label, Label>{{"twi", "aka"}, {"fat", "aka"}, {"pes", "fas"}}));
}

TEST_CASE("map_labels relabels many-to-one") {
  LabelMap m{{{"pes", "fas"}, {"prs", "fas"}}};
  const std::vector<Label> in{"pes", "prs", "pes"};
  CHECK(map_labels(in, m) == std::vector<Label>{"fas", "fas", "fas"});

  const std::vector<Label> mixed{"pes", "eng"};
  CHECK_THROWS_AS(map_labels(mixed, m, MapMode::Strict), UnmappedLabel);
  try {
    map_labels(mixed, m, MapMode::Strict);
  } catch (const UnmappedLabel& e) {
    CHECK(e.label() == "eng");
  }
  CHECK(map_labels(mixed, m, MapMode::Lenient) == std::vector<Label>{"fas", "eng"});

  LabelMap identity;
  const std::vector<Label> labels{"a", "b", "c"};
  for (const auto& l : labels) identity.rules[l] = l;
  CHECK(map_labels(labels, identity) == labels);

  // Idempotent when targets are fixed points.
  LabelMap closed{{{"pes", "fas"}, {"prs", "fas"}, {"fas", "fas"}}};
  const auto once = map_labels(in, closed);
  CHECK(map_labels(once, closed) == once);
}

TEST_CASE("label pair files") {
  std::istringstream in("# comment\npes\tfas\n\nprs\tfas   # trailing\n");
  const auto pairs = read_label_pairs(in);
  CHECK(pairs == std::map<Label, Label>{{"pes", "fas"}, {"prs", "fas"}});

  std::istringstream conflict("a\tb\na\tc\n");
  CHECK_THROWS_AS(read_label_pairs(conflict), DataError);
  std::istringstream malformed("only_one_column\n");
  CHECK_THROWS_AS(read_label_pairs(malformed), DataError);

  const auto hier = write_temp("hier.tsv", "twi\taka\nfat\taka\n");
  CHECK(load_hierarchy(hier.string()).target("fat") == "aka");
  const auto map = write_temp("map.tsv", "pes\tfas\n");
  CHECK(load_label_map(map.string()).apply("pes", MapMode::Strict) == "fas");
  const auto set = write_temp("set.txt", "# labels\neng\nfra\textra\n\n");
  CHECK(read_label_set_file(set.string()) == std::set<Label>{"eng", "fra"});
  CHECK_THROWS_AS(load_hierarchy("/nonexistent/h.tsv"), IoError);
}
