#include "faithful/train.hpp"

#include "faithful/augment.hpp"
#include "faithful/error.hpp"

#include <cmath>
#include <numeric>

namespace faithful {

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.epochs = 200;
  c.learningRate = 3e-4;
  return c;
}

void TrainConfig::validate() const {
  if (epochs <= 0) throw ConfigurationError("epochs must be positive");
  if (!(learningRate > 0.0)) throw ConfigurationError("learningRate must be positive");
  if (batchSize < 1) throw ConfigurationError("batchSize must be at least 1");
  if (optimizer != "RMSPROP") throw ConfigurationError("unsupported optimizer '" + optimizer + "'");
  if (loss != "ANGULAR") throw ConfigurationError("unsupported loss '" + loss + "'");
  if (!(rmspropAlpha > 0.0 && rmspropAlpha < 1.0)) throw ConfigurationError("rmspropAlpha must lie in (0, 1)");
  if (!(rmspropEps > 0.0)) throw ConfigurationError("rmspropEps must be positive");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},       {"optimizer", c.optimizer},
                     {"learningRate", c.learningRate}, {"batchSize", c.batchSize},
                     {"seed", c.seed},           {"loss", c.loss},
                     {"augment", c.augment},     {"rmspropAlpha", c.rmspropAlpha},
                     {"rmspropEps", c.rmspropEps}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  const TrainConfig d = TrainConfig::desk();
  c.epochs = j.value("epochs", d.epochs);
  c.optimizer = j.value("optimizer", d.optimizer);
  c.learningRate = j.value("learningRate", d.learningRate);
  c.batchSize = j.value("batchSize", d.batchSize);
  c.seed = j.value("seed", d.seed);
  c.loss = j.value("loss", d.loss);
  c.augment = j.value("augment", d.augment);
  c.rmspropAlpha = j.value("rmspropAlpha", d.rmspropAlpha);
  c.rmspropEps = j.value("rmspropEps", d.rmspropEps);
  c.validate();
}

RmsProp::RmsProp(const ParameterList& params, double lr, double alpha, double eps)
    : lr_(lr), alpha_(alpha), eps_(eps) {
  for (const auto& [name, var] : params.entries()) square_avg_.push_back(Eigen::ArrayXd::Zero(var.size()));
}

void RmsProp::step(const ParameterList& params) {
  std::size_t i = 0;
  for (const auto& [name, var] : params.entries()) {
    Var v = var;
    const Eigen::ArrayXd& g = v.mutable_grad();
    square_avg_[i] = alpha_ * square_avg_[i] + (1.0 - alpha_) * g.square();
    v.mutable_value() -= lr_ * g / (square_avg_[i].sqrt() + eps_);
    ++i;
  }
}

TrainResult train_model(const ModelSpec& spec, const std::vector<FrameSequence>& train_set,
                        const TrainConfig& config, std::uint64_t init_seed,
                        const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw InputError("training set is empty");
  TrainResult result{build_model(spec, init_seed), {}};
  Network& net = result.model.network();
  const ParameterList& params = net.parameters();
  RmsProp optimizer(params, config.learningRate, config.rmspropAlpha, config.rmspropEps);
  Rng rng(derive_seed(config.seed, hash_string("train")));

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double total = 0.0;
    int in_batch = 0;
    params.zero_grad();
    for (std::size_t idx : order) {
      const FrameSequence& seq = train_set[idx];
      const FrameSequence sample = config.augment ? augment(seq, rng) : seq;
      Network::Output out = forward(result.model, sample);
      Var loss = ad::angular_error_deg(out.raw, sample.illuminant);
      if (!std::isfinite(loss.item()))
        throw NumericError("loss", "non-finite training loss at epoch " + std::to_string(epoch) +
                                       " on sequence '" + seq.id + "'");
      total += loss.item();
      ad::backward(config.batchSize > 1 ? ad::scale(loss, 1.0 / config.batchSize) : loss);
      if (++in_batch == config.batchSize) {
        optimizer.step(params);
        params.zero_grad();
        in_batch = 0;
      }
    }
    if (in_batch > 0) optimizer.step(params);
    const double mean_loss = total / static_cast<double>(train_set.size());
    result.epochLoss.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch, mean_loss);
  }
  return result;
}

std::vector<double> evaluate(const Model& model, const std::vector<FrameSequence>& sequences) {
  std::vector<double> errors;
  errors.reserve(sequences.size());
  for (const FrameSequence& seq : sequences)
    errors.push_back(angular_error(predict(model, seq).illuminant, seq.illuminant));
  return errors;
}

}  // namespace faithful
