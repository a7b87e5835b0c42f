#include "lidkit/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "lidkit/errors.hpp"
#include "lidkit/unicode.hpp"

namespace lidkit {

void TrainConfig::validate() const {
  if (dim < 1) throw ValidationError("dim must be >= 1");
  if (epochs < 1) throw ValidationError("epoch must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("lr must be > 0");
  if (!(inv_temperature > 0.0 && inv_temperature <= 1.0)) {
    throw ValidationError("inverse temperature must lie in (0,1]");
  }
  if (loss != Loss::Softmax) throw ValidationError("only softmax loss is supported");
  if (threads < 1) throw ValidationError("threads must be >= 1");
}

LidModel::LidModel(Vocabulary vocab, FeatureConfig features, TrainConfig training,
                   Matrix<float> input, Matrix<float> output)
    : vocab_(std::move(vocab)),
      features_(features),
      training_(training),
      input_(std::move(input)),
      output_(std::move(output)) {
  features_.validate();
  if (vocab_.label_count() == 0) throw NoLabels();
  const size_t expected_rows = vocab_.word_count() + features_.bucket;
  if (input_.rows() != expected_rows || input_.cols() != training_.dim) {
    throw ValidationError("input matrix shape does not match vocabulary/config");
  }
  if (output_.rows() != vocab_.label_count() || output_.cols() != training_.dim) {
    throw ValidationError("output matrix shape does not match labels/config");
  }
  auto finite = [](float v) { return std::isfinite(v); };
  if (!std::all_of(input_.data().begin(), input_.data().end(), finite) ||
      !std::all_of(output_.data().begin(), output_.data().end(), finite)) {
    throw ValidationError("model weights must be finite");
  }
}

FeatureBag LidModel::features(std::string_view text) const {
  return featurize(unicode::nfc(text), vocab_, features_);
}

std::vector<double> LidModel::sentence_vector(std::span<const FeatureId> bag) const {
  return mean_embedding(input_, bag);
}

PredictionDist LidModel::distribution(std::span<const FeatureId> bag) const {
  const std::vector<double> hidden = mean_embedding(input_, bag);
  std::vector<double> probs = output_logits(output_, hidden);
  softmax_inplace(probs);
  return PredictionDist(vocab_.labels(), std::move(probs));
}

std::optional<PredictionDist> LidModel::distribution(std::string_view text) const {
  const FeatureBag bag = features(text);
  if (bag.empty()) return std::nullopt;
  return distribution(std::span<const FeatureId>(bag));
}

std::vector<ScoredLabel> LidModel::predict(std::string_view text, std::size_t k) const {
  if (k < 1) throw ValidationError("k must be >= 1");
  auto dist = distribution(text);
  if (!dist) return {ScoredLabel{Label(kUndetermined), 1.0}};
  return top_k(*dist, k);
}

std::map<Label, double> temperature_weights(const CorpusStats& stats, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0,1]");
  if (stats.per_label_counts.empty() || stats.total == 0) {
    throw ValidationError("temperature weights need a non-empty corpus");
  }
  const double total = static_cast<double>(stats.total);
  std::map<Label, double> weights;
  double norm = 0.0;
  for (const auto& [label, count] : stats.per_label_counts) {
    const double w = std::pow(static_cast<double>(count) / total, alpha);
    weights[label] = w;
    norm += w;
  }
  for (auto& [label, w] : weights) w /= norm;
  return weights;
}

namespace {

struct TrainingSet {
  std::vector<std::vector<FeatureBag>> bags_by_label;  // indexed by label id
  std::vector<double> label_weights;
  std::uint64_t line_count = 0;
};

TrainingSet prepare(std::span<const LabeledLine> corpus, const Vocabulary& vocab,
                    const FeatureConfig& features, double alpha) {
  TrainingSet set;
  set.bags_by_label.resize(vocab.label_count());
  CorpusStats stats;
  for (const auto& line : corpus) {
    auto label = vocab.label_id(line.label);
    if (!label) continue;
    FeatureBag bag = featurize(line.text, vocab, features);
    if (bag.empty()) continue;
    set.bags_by_label[*label].push_back(std::move(bag));
    ++stats.per_label_counts[line.label];
    ++stats.total;
  }
  if (stats.total == 0) throw DataError("no trainable lines in corpus");
  set.line_count = stats.total;

  const auto weights = temperature_weights(stats, alpha);
  set.label_weights.assign(vocab.label_count(), 0.0);
  for (size_t id = 0; id < vocab.label_count(); ++id) {
    auto it = weights.find(vocab.labels()[id]);
    if (it != weights.end()) set.label_weights[id] = it->second;
  }
  return set;
}

template <bool Shared>
double run_steps(Matrix<float>& input, Matrix<float>& output, const TrainingSet& set,
                 std::mt19937_64& rng, std::uint64_t first_step, std::uint64_t count,
                 std::uint64_t total_steps, double lr) {
  LanguageSampler pick_label(set.label_weights);
  SgdScratch scratch;
  double loss_sum = 0.0;
  for (std::uint64_t s = 0; s < count; ++s) {
    const size_t label = pick_label(rng);
    const auto& pool = set.bags_by_label[label];
    std::uniform_int_distribution<size_t> pick_line(0, pool.size() - 1);
    const FeatureBag& bag = pool[pick_line(rng)];
    const double progress =
        static_cast<double>(first_step + s) / static_cast<double>(total_steps);
    const double step_lr = lr * (1.0 - progress);
    loss_sum += sgd_step<Shared>(input, output, std::span<const FeatureId>(bag), label,
                                 step_lr, scratch);
  }
  return loss_sum;
}

}  // namespace

LidModel train(std::span<const LabeledLine> corpus, const FeatureConfig& features,
               const TrainConfig& training, const ProgressCallback& progress) {
  features.validate();
  training.validate();
  if (corpus.empty()) throw ValidationError("training corpus is empty");

  Vocabulary vocab = build_vocab(corpus, features);
  const TrainingSet set = prepare(corpus, vocab, features, training.inv_temperature);

  std::mt19937_64 rng(training.seed);
  Matrix<float> input(vocab.word_count() + features.bucket, training.dim);
  {
    const float bound = 1.0f / static_cast<float>(training.dim);
    std::uniform_real_distribution<float> init(-bound, bound);
    for (float& w : input.data()) w = init(rng);
  }
  Matrix<float> output(vocab.label_count(), training.dim, 0.0f);

  const std::uint64_t steps_per_epoch = set.line_count;
  const std::uint64_t total_steps = steps_per_epoch * training.epochs;
  for (std::uint32_t epoch = 0; epoch < training.epochs; ++epoch) {
    const std::uint64_t first = epoch * steps_per_epoch;
    double loss_sum = 0.0;
    if (training.threads == 1) {
      loss_sum = run_steps<false>(input, output, set, rng, first, steps_per_epoch,
                                  total_steps, training.lr);
    } else {
      const std::uint32_t workers = training.threads;
      std::vector<double> losses(workers, 0.0);
      std::vector<std::mt19937_64> rngs;
      for (std::uint32_t w = 0; w < workers; ++w) rngs.emplace_back(rng());
      std::vector<std::thread> pool;
      for (std::uint32_t w = 0; w < workers; ++w) {
        const std::uint64_t begin = steps_per_epoch * w / workers;
        const std::uint64_t end = steps_per_epoch * (w + 1) / workers;
        pool.emplace_back([&, w, begin, end] {
          losses[w] = run_steps<true>(input, output, set, rngs[w], first + begin, end - begin,
                                      total_steps, training.lr);
        });
      }
      for (auto& t : pool) t.join();
      for (double l : losses) loss_sum += l;
    }
    if (progress) {
      progress({epoch + 1, loss_sum / static_cast<double>(steps_per_epoch), steps_per_epoch});
    }
  }
  return LidModel(std::move(vocab), features, training, std::move(input), std::move(output));
}

}  // namespace lidkit
