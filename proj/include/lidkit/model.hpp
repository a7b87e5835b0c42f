#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidkit/corpus.hpp"
#include "lidkit/features.hpp"
#include "lidkit/linear.hpp"
#include "lidkit/prediction.hpp"

namespace lidkit {

enum class Loss : std::uint8_t { Softmax = 0 };

/// Optimizer settings. Defaults reproduce the production model: 256-dim
/// embeddings, 2 epochs at lr 0.8, languages drawn with weight p^0.3.
struct TrainConfig {
  std::uint32_t dim = 256;
  std::uint32_t epochs = 2;
  double lr = 0.8;
  Loss loss = Loss::Softmax;
  double inv_temperature = 0.3;
  std::uint64_t seed = 0;
  // Not serialized. More than one thread trains lock-free and gives up
  // bitwise reproducibility.
  std::uint32_t threads = 1;

  void validate() const;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

class LidModel {
 public:
  /// Throws ValidationError when matrix shapes disagree with the vocabulary
  /// and configs, when there are no labels, or when a weight is not finite.
  LidModel(Vocabulary vocab, FeatureConfig features, TrainConfig training,
           Matrix<float> input, Matrix<float> output);

  const Vocabulary& vocab() const noexcept { return vocab_; }
  std::span<const Label> labels() const noexcept { return vocab_.labels(); }
  const FeatureConfig& feature_config() const noexcept { return features_; }
  const TrainConfig& train_config() const noexcept { return training_; }
  const Matrix<float>& input() const noexcept { return input_; }
  const Matrix<float>& output() const noexcept { return output_; }

  /// NFC-normalizes `text` and extracts its feature bag.
  FeatureBag features(std::string_view text) const;

  /// Mean embedding; throws NoFeatures on an empty bag.
  std::vector<double> sentence_vector(std::span<const FeatureId> bag) const;

  /// Full distribution; throws NoFeatures on an empty bag.
  PredictionDist distribution(std::span<const FeatureId> bag) const;

  /// Full distribution, or nullopt when the text has no features.
  std::optional<PredictionDist> distribution(std::string_view text) const;

  /// Top-k labels. Featureless text yields a single ("und", 1.0) entry.
  std::vector<ScoredLabel> predict(std::string_view text, std::size_t k = 1) const;

 private:
  Vocabulary vocab_;
  FeatureConfig features_;
  TrainConfig training_;
  Matrix<float> input_;
  Matrix<float> output_;
};

/// (n_l / N)^alpha normalized to sum 1.
std::map<Label, double> temperature_weights(const CorpusStats& stats, double alpha);

/// Draws a class index with probability proportional to its weight. This is
/// the per-step language draw used by train().
class LanguageSampler {
 public:
  explicit LanguageSampler(std::span<const double> weights)
      : dist_(weights.begin(), weights.end()) {}

  std::size_t operator()(std::mt19937_64& rng) { return dist_(rng); }

 private:
  std::discrete_distribution<std::size_t> dist_;
};

struct EpochReport {
  std::uint32_t epoch = 0;
  double mean_loss = 0.0;
  std::uint64_t steps = 0;
};

using ProgressCallback = std::function<void(const EpochReport&)>;

/// Trains a model on `corpus`. Each of the epochs * |corpus| steps draws a
/// language from temperature_weights and then a uniform line of it; the
/// learning rate decays linearly to zero over all steps. Lines whose label
/// falls below min_count_label or that have no features are not sampled.
LidModel train(std::span<const LabeledLine> corpus, const FeatureConfig& features,
               const TrainConfig& training, const ProgressCallback& progress = {});

void write_model(std::ostream& out, const LidModel& model);
/// Throws UnsupportedFormat on wrong magic or version, CorruptModel on a
/// truncated or checksum-failing stream.
LidModel read_model(std::istream& in);

void save_model(const LidModel& model, const std::string& path);
LidModel load_model(const std::string& path);

}  // namespace lidkit
