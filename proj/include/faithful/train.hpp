#pragma once

#include "faithful/metrics.hpp"
#include "faithful/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace faithful {

struct TrainConfig {
  int epochs = 500;
  std::string optimizer = "RMSPROP";
  double learningRate = 3e-5;
  int batchSize = 1;
  std::uint64_t seed = 0;  // shuffling and augmentation
  std::string loss = "ANGULAR";
  bool augment = true;
  double rmspropAlpha = 0.99;
  double rmspropEps = 1e-8;

  /// Short runs on the synthetic dataset.
  static TrainConfig desk();
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// RMSprop with per-parameter running mean of squared gradients.
class RmsProp {
 public:
  RmsProp(const ParameterList& params, double lr, double alpha, double eps);
  void step(const ParameterList& params);

 private:
  double lr_, alpha_, eps_;
  std::vector<Eigen::ArrayXd> square_avg_;
};

struct TrainResult {
  Model model;
  std::vector<double> epochLoss;  // mean angular loss per epoch
};

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Trains a freshly initialized model on `train_set` with angular loss.
/// Throws NumericError on a non-finite loss.
TrainResult train_model(const ModelSpec& spec, const std::vector<FrameSequence>& train_set,
                        const TrainConfig& config, std::uint64_t init_seed,
                        const EpochCallback& on_epoch = {});

/// Angular error (degrees) of `model` on each sequence, in order.
std::vector<double> evaluate(const Model& model, const std::vector<FrameSequence>& sequences);

}  // namespace faithful
