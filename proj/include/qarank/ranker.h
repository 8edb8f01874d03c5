#ifndef QARANK_RANKER_H_
#define QARANK_RANKER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "qarank/features.h"

namespace qarank {

// Two-layer scorer f(x) = ReLU(x A^T + b1) B^T + b2 with A (m x d), b1 (m),
// B (1 x m, stored as a column vector) and scalar b2.
struct RankerModel {
  Eigen::MatrixXd A;
  Eigen::VectorXd b1;
  Eigen::VectorXd B;
  double b2 = 0.0;

  static RankerModel zeros(std::size_t input_dim, std::size_t hidden_units);
  // Glorot-uniform weights, zero biases.
  static RankerModel initialize(std::size_t input_dim, std::size_t hidden_units,
                                std::uint64_t seed);

  std::size_t input_dim() const { return static_cast<std::size_t>(A.cols()); }
  std::size_t hidden_units() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t parameter_count() const;
  bool all_finite() const;

  bool operator==(const RankerModel& o) const;
};

double forward(const RankerModel& model, std::span<const double> x);
// Scores each row of X.
Eigen::VectorXd forward_batch(const RankerModel& model, const Eigen::MatrixXd& X);

double sigmoid(double z);

// [y_i - sigmoid(f_i - f_j)]^2
double rank_loss(double y_i, double f_i, double f_j);

// Entrywise L1 norm of A, b1, B and b2.
double l1_penalty(const RankerModel& model);

struct TrainingPair {
  FeatureVector x_i;
  FeatureVector x_j;
  double y_i = 0.0;  // label of the higher-ranked member
};

// A scaled candidate with its correctness label; a question's candidates are
// given in first-occurrence order.
struct LabeledCandidate {
  FeatureVector x;
  bool correct = false;
};

// Adjacent pairs (p, p+1) for p + 1 < pair_rank_threshold, i.e. (0,1), (1,2),
// (2,3) with the default threshold of 4.
std::vector<TrainingPair> sample_pairs(std::span<const LabeledCandidate> candidates,
                                       int pair_rank_threshold = 4,
                                       bool skip_equal_label_pairs = false);

struct Gradients {
  Eigen::MatrixXd A;
  Eigen::VectorXd b1;
  Eigen::VectorXd B;
  double b2 = 0.0;
};

// Mean pair loss over the batch plus lambda * L1.
double objective(const RankerModel& model, std::span<const TrainingPair> batch,
                 double lambda);
// Mean pair loss only.
double mean_rank_loss(const RankerModel& model, std::span<const TrainingPair> pairs);

// Exact gradient of objective(); the L1 subgradient is sign(w) with 0 at 0.
Gradients gradients(const RankerModel& model, std::span<const TrainingPair> batch,
                    double lambda);

struct TrainConfig {
  double learning_rate = 0.0005;
  int batch_size = 256;
  int hidden_units = 512;
  std::vector<double> lambda_grid = {5e-4, 5e-5};
  int max_epochs = 100;
  int patience = 10;
  int pair_rank_threshold = 4;
  int inference_top = 10;
  bool skip_equal_label_pairs = false;
  std::uint64_t seed = 42;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  // Throws on non-positive values or patience > max_epochs.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

class AdamOptimizer {
 public:
  AdamOptimizer(const RankerModel& shape, double learning_rate, double beta1,
                double beta2, double epsilon);
  void step(RankerModel& model, const Gradients& g);

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  Gradients m_, v_;
};

// Tracks the best selection loss; stops once `patience` epochs pass without
// a strict improvement or after max_epochs.
class EarlyStopping {
 public:
  EarlyStopping(int patience, int max_epochs);

  // Records the loss of the next epoch; true when it is a new best.
  bool update(double selection_loss);
  bool should_stop() const;
  bool patience_exhausted() const;
  int epochs() const { return epochs_; }
  int best_epoch() const { return best_epoch_; }  // 1-based, 0 before update
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  int max_epochs_;
  int epochs_ = 0;
  int best_epoch_ = 0;
  double best_loss_ = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double selection_loss = 0.0;
  bool improved = false;
};

struct TrainingLog {
  double lambda = 0.0;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_selection_loss = 0.0;
  bool early_stopped = false;
  std::size_t train_pairs = 0;
  std::size_t selection_pairs = 0;

  nlohmann::ordered_json to_json() const;
  static TrainingLog from_json(const nlohmann::json& j);
  // One structured line per epoch plus the stop/best events.
  std::vector<std::string> lines() const;
};

struct TrainResult {
  RankerModel model;  // parameters of the best selection epoch
  TrainingLog log;
};

// Mini-batch Adam on objective(); selection loss is the mean pair loss
// without the L1 term. Deterministic for a fixed config.seed.
TrainResult train(std::span<const TrainingPair> train_pairs,
                  std::span<const TrainingPair> selection_pairs,
                  const TrainConfig& config, double lambda);

struct RankedCandidate {
  std::size_t index = 0;        // position in the input
  std::optional<double> score;  // unset for candidates past inference_top
};

// Scores the first inference_top candidates, sorts them by score descending
// (ties keep input order) and appends the rest unscored in input order.
std::vector<RankedCandidate> rerank(const RankerModel& model,
                                    std::span<const FeatureVector> scaled,
                                    int inference_top = 10);

}  // namespace qarank

#endif  // QARANK_RANKER_H_
