#include "qarank/ranker.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace qarank {

using nlohmann::json;
using nlohmann::ordered_json;

RankerModel RankerModel::zeros(std::size_t input_dim, std::size_t hidden_units) {
  RankerModel m;
  m.A = Eigen::MatrixXd::Zero(hidden_units, input_dim);
  m.b1 = Eigen::VectorXd::Zero(hidden_units);
  m.B = Eigen::VectorXd::Zero(hidden_units);
  m.b2 = 0.0;
  return m;
}

RankerModel RankerModel::initialize(std::size_t input_dim, std::size_t hidden_units,
                                    std::uint64_t seed) {
  if (input_dim == 0 || hidden_units == 0)
    throw Error("model dimensions must be positive");
  RankerModel m = zeros(input_dim, hidden_units);
  std::mt19937_64 rng(seed);
  const double limit_a = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_units));
  const double limit_b = std::sqrt(6.0 / static_cast<double>(hidden_units + 1));
  std::uniform_real_distribution<double> ua(-limit_a, limit_a);
  std::uniform_real_distribution<double> ub(-limit_b, limit_b);
  for (Eigen::Index r = 0; r < m.A.rows(); ++r)
    for (Eigen::Index c = 0; c < m.A.cols(); ++c) m.A(r, c) = ua(rng);
  for (Eigen::Index r = 0; r < m.B.size(); ++r) m.B(r) = ub(rng);
  return m;
}

std::size_t RankerModel::parameter_count() const {
  return static_cast<std::size_t>(A.size() + b1.size() + B.size() + 1);
}

bool RankerModel::all_finite() const {
  return A.allFinite() && b1.allFinite() && B.allFinite() && std::isfinite(b2);
}

bool RankerModel::operator==(const RankerModel& o) const {
  return A.rows() == o.A.rows() && A.cols() == o.A.cols() && A == o.A &&
         b1 == o.b1 && B == o.B && b2 == o.b2;
}

double forward(const RankerModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim())
    throw Error("input has dimension " + std::to_string(x.size()) + ", model expects " +
                std::to_string(model.input_dim()));
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd h = (model.A * xv + model.b1).cwiseMax(0.0);
  return h.dot(model.B) + model.b2;
}

Eigen::VectorXd forward_batch(const RankerModel& model, const Eigen::MatrixXd& X) {
  if (static_cast<std::size_t>(X.cols()) != model.input_dim())
    throw Error("input has dimension " + std::to_string(X.cols()) + ", model expects " +
                std::to_string(model.input_dim()));
  Eigen::MatrixXd H = ((X * model.A.transpose()).rowwise() + model.b1.transpose())
                          .cwiseMax(0.0);
  return (H * model.B).array() + model.b2;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double rank_loss(double y_i, double f_i, double f_j) {
  const double r = y_i - sigmoid(f_i - f_j);
  return r * r;
}

double l1_penalty(const RankerModel& model) {
  return model.A.cwiseAbs().sum() + model.b1.cwiseAbs().sum() +
         model.B.cwiseAbs().sum() + std::abs(model.b2);
}

std::vector<TrainingPair> sample_pairs(std::span<const LabeledCandidate> candidates,
                                       int pair_rank_threshold,
                                       bool skip_equal_label_pairs) {
  std::vector<TrainingPair> out;
  for (std::size_t p = 0; p + 1 < candidates.size() &&
                          static_cast<int>(p + 1) < pair_rank_threshold;
       ++p) {
    const auto& a = candidates[p];
    const auto& b = candidates[p + 1];
    if (skip_equal_label_pairs && a.correct == b.correct) continue;
    out.push_back({a.x, b.x, a.correct ? 1.0 : 0.0});
  }
  return out;
}

namespace {

struct PairBatch {
  Eigen::MatrixXd Xi, Xj;
  Eigen::VectorXd y;
};

PairBatch gather(std::span<const TrainingPair> pairs,
                 std::span<const std::size_t> indices, std::size_t d) {
  PairBatch b;
  const auto n = static_cast<Eigen::Index>(indices.size());
  b.Xi.resize(n, static_cast<Eigen::Index>(d));
  b.Xj.resize(n, static_cast<Eigen::Index>(d));
  b.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& p = pairs[indices[r]];
    if (p.x_i.size() != d || p.x_j.size() != d)
      throw Error("training pair has wrong feature dimension");
    for (std::size_t c = 0; c < d; ++c) {
      b.Xi(r, static_cast<Eigen::Index>(c)) = p.x_i[c];
      b.Xj(r, static_cast<Eigen::Index>(c)) = p.x_j[c];
    }
    b.y(r) = p.y_i;
  }
  return b;
}

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Mean pair loss and, when `grad` is set, its gradient plus lambda * dL1.
double loss_and_gradients(const RankerModel& model, const PairBatch& batch,
                          double lambda, Gradients* grad) {
  const auto n = batch.y.size();
  if (n == 0) throw Error("empty batch");
  Eigen::MatrixXd Zi = (batch.Xi * model.A.transpose()).rowwise() + model.b1.transpose();
  Eigen::MatrixXd Zj = (batch.Xj * model.A.transpose()).rowwise() + model.b1.transpose();
  Eigen::MatrixXd Hi = Zi.cwiseMax(0.0);
  Eigen::MatrixXd Hj = Zj.cwiseMax(0.0);
  Eigen::VectorXd fi = (Hi * model.B).array() + model.b2;
  Eigen::VectorXd fj = (Hj * model.B).array() + model.b2;

  double loss = 0.0;
  Eigen::VectorXd ci(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double s = sigmoid(fi(r) - fj(r));
    const double resid = batch.y(r) - s;
    loss += resid * resid;
    ci(r) = -2.0 * resid * s * (1.0 - s) / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  if (grad == nullptr) return loss;

  // f_i enters with +ci, f_j with -ci.
  Eigen::MatrixXd dZi = (ci * model.B.transpose()).cwiseProduct(
      (Zi.array() > 0.0).cast<double>().matrix());
  Eigen::MatrixXd dZj = (-ci * model.B.transpose()).cwiseProduct(
      (Zj.array() > 0.0).cast<double>().matrix());
  grad->B = Hi.transpose() * ci - Hj.transpose() * ci;
  grad->b2 = 0.0;  // b2 cancels in f_i - f_j
  grad->A = dZi.transpose() * batch.Xi + dZj.transpose() * batch.Xj;
  grad->b1 = dZi.colwise().sum().transpose() + dZj.colwise().sum().transpose();

  if (lambda != 0.0) {
    grad->A += lambda * model.A.unaryExpr(&sign);
    grad->b1 += lambda * model.b1.unaryExpr(&sign);
    grad->B += lambda * model.B.unaryExpr(&sign);
    grad->b2 += lambda * sign(model.b2);
  }
  return loss;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

double mean_rank_loss(const RankerModel& model, std::span<const TrainingPair> pairs) {
  if (pairs.empty()) throw Error("mean_rank_loss: no pairs");
  const auto idx = all_indices(pairs.size());
  return loss_and_gradients(model, gather(pairs, idx, model.input_dim()), 0.0, nullptr);
}

double objective(const RankerModel& model, std::span<const TrainingPair> batch,
                 double lambda) {
  return mean_rank_loss(model, batch) + lambda * l1_penalty(model);
}

Gradients gradients(const RankerModel& model, std::span<const TrainingPair> batch,
                    double lambda) {
  if (batch.empty()) throw Error("gradients: empty batch");
  Gradients g;
  const auto idx = all_indices(batch.size());
  loss_and_gradients(model, gather(batch, idx, model.input_dim()), lambda, &g);
  return g;
}

void TrainConfig::validate() const {
  auto positive = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("train config: ") + what + " must be positive");
  };
  positive(learning_rate > 0, "learning_rate");
  positive(batch_size > 0, "batch_size");
  positive(hidden_units > 0, "hidden_units");
  positive(max_epochs > 0, "max_epochs");
  positive(patience > 0, "patience");
  positive(pair_rank_threshold > 0, "pair_rank_threshold");
  positive(inference_top > 0, "inference_top");
  if (lambda_grid.empty()) throw Error("train config: lambda_grid is empty");
  for (double l : lambda_grid)
    if (!(l >= 0) || !std::isfinite(l)) throw Error("train config: bad lambda");
  if (patience > max_epochs) throw Error("train config: patience exceeds max_epochs");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1 &&
        adam_epsilon > 0))
    throw Error("train config: bad Adam constants");
}

ordered_json TrainConfig::to_json() const {
  ordered_json j;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["hidden_units"] = hidden_units;
  j["lambda_grid"] = lambda_grid;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["pair_rank_threshold"] = pair_rank_threshold;
  j["inference_top"] = inference_top;
  j["skip_equal_label_pairs"] = skip_equal_label_pairs;
  j["seed"] = seed;
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["adam_epsilon"] = adam_epsilon;
  return j;
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.hidden_units = j.value("hidden_units", c.hidden_units);
  c.lambda_grid = j.value("lambda_grid", c.lambda_grid);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.pair_rank_threshold = j.value("pair_rank_threshold", c.pair_rank_threshold);
  c.inference_top = j.value("inference_top", c.inference_top);
  c.skip_equal_label_pairs = j.value("skip_equal_label_pairs", c.skip_equal_label_pairs);
  c.seed = j.value("seed", c.seed);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
  return c;
}

AdamOptimizer::AdamOptimizer(const RankerModel& shape, double learning_rate,
                             double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  for (Gradients* g : {&m_, &v_}) {
    g->A = Eigen::MatrixXd::Zero(shape.A.rows(), shape.A.cols());
    g->b1 = Eigen::VectorXd::Zero(shape.b1.size());
    g->B = Eigen::VectorXd::Zero(shape.B.size());
    g->b2 = 0.0;
  }
}

void AdamOptimizer::step(RankerModel& model, const Gradients& g) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = beta1_ * m + (1.0 - beta1_) * grad;
    v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  update(model.A, g.A, m_.A, v_.A);
  update(model.b1, g.b1, m_.b1, v_.b1);
  update(model.B, g.B, m_.B, v_.B);
  m_.b2 = beta1_ * m_.b2 + (1.0 - beta1_) * g.b2;
  v_.b2 = beta2_ * v_.b2 + (1.0 - beta2_) * g.b2 * g.b2;
  model.b2 -= lr_ * (m_.b2 / c1) / (std::sqrt(v_.b2 / c2) + eps_);
}

EarlyStopping::EarlyStopping(int patience, int max_epochs)
    : patience_(patience), max_epochs_(max_epochs) {
  if (patience < 1 || max_epochs < 1) throw Error("early stopping needs positive limits");
}

bool EarlyStopping::update(double selection_loss) {
  ++epochs_;
  if (best_epoch_ == 0 || selection_loss < best_loss_) {
    best_loss_ = selection_loss;
    best_epoch_ = epochs_;
    return true;
  }
  return false;
}

bool EarlyStopping::patience_exhausted() const {
  return best_epoch_ > 0 && epochs_ - best_epoch_ >= patience_;
}

bool EarlyStopping::should_stop() const {
  return epochs_ >= max_epochs_ || patience_exhausted();
}

ordered_json TrainingLog::to_json() const {
  ordered_json j;
  j["lambda"] = lambda;
  j["best_epoch"] = best_epoch;
  j["best_selection_loss"] = best_selection_loss;
  j["early_stopped"] = early_stopped;
  j["train_pairs"] = train_pairs;
  j["selection_pairs"] = selection_pairs;
  j["epochs"] = ordered_json::array();
  for (const auto& e : epochs) {
    ordered_json je;
    je["epoch"] = e.epoch;
    je["train_loss"] = e.train_loss;
    je["selection_loss"] = e.selection_loss;
    je["improved"] = e.improved;
    j["epochs"].push_back(std::move(je));
  }
  return j;
}

TrainingLog TrainingLog::from_json(const json& j) {
  TrainingLog log;
  log.lambda = j.at("lambda").get<double>();
  log.best_epoch = j.at("best_epoch").get<int>();
  log.best_selection_loss = j.at("best_selection_loss").get<double>();
  log.early_stopped = j.at("early_stopped").get<bool>();
  log.train_pairs = j.at("train_pairs").get<std::size_t>();
  log.selection_pairs = j.at("selection_pairs").get<std::size_t>();
  for (const auto& je : j.at("epochs")) {
    log.epochs.push_back({je.at("epoch").get<int>(), je.at("train_loss").get<double>(),
                          je.at("selection_loss").get<double>(),
                          je.at("improved").get<bool>()});
  }
  return log;
}

std::vector<std::string> TrainingLog::lines() const {
  std::vector<std::string> out;
  for (const auto& e : epochs) {
    ordered_json j;
    j["event"] = "epoch";
    j["lambda"] = lambda;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["selection_loss"] = e.selection_loss;
    j["improved"] = e.improved;
    out.push_back(j.dump());
  }
  ordered_json stop;
  stop["event"] = early_stopped ? "early_stop" : "max_epochs";
  stop["lambda"] = lambda;
  stop["epochs_run"] = epochs.size();
  out.push_back(stop.dump());
  ordered_json best;
  best["event"] = "best_epoch";
  best["lambda"] = lambda;
  best["epoch"] = best_epoch;
  best["selection_loss"] = best_selection_loss;
  out.push_back(best.dump());
  return out;
}

TrainResult train(std::span<const TrainingPair> train_pairs,
                  std::span<const TrainingPair> selection_pairs,
                  const TrainConfig& config, double lambda) {
  config.validate();
  if (train_pairs.empty()) throw Error("no training pairs could be generated");
  if (selection_pairs.empty()) throw Error("no model-selection pairs could be generated");
  const std::size_t d = train_pairs.front().x_i.size();
  if (d == 0) throw Error("training pairs have empty feature vectors");

  RankerModel model = RankerModel::initialize(d, config.hidden_units, config.seed);
  AdamOptimizer adam(model, config.learning_rate, config.adam_beta1, config.adam_beta2,
                     config.adam_epsilon);
  EarlyStopping stopper(config.patience, config.max_epochs);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const auto sel_idx = all_indices(selection_pairs.size());
  const PairBatch selection = gather(selection_pairs, sel_idx, d);
  std::vector<std::size_t> order = all_indices(train_pairs.size());

  TrainResult result{model, {}};
  result.log.lambda = lambda;
  result.log.train_pairs = train_pairs.size();
  result.log.selection_pairs = selection_pairs.size();

  while (!stopper.should_stop()) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    const std::size_t bs = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      Gradients g;
      const double loss = loss_and_gradients(model, gather(train_pairs, idx, d), lambda, &g);
      epoch_loss += (loss + lambda * l1_penalty(model)) * static_cast<double>(idx.size());
      adam.step(model, g);
    }
    if (!model.all_finite()) throw Error("training diverged (non-finite parameters)");
    const double sel_loss = loss_and_gradients(model, selection, 0.0, nullptr);
    const bool improved = stopper.update(sel_loss);
    if (improved) result.model = model;
    result.log.epochs.push_back({stopper.epochs(),
                                 epoch_loss / static_cast<double>(order.size()), sel_loss,
                                 improved});
  }
  result.log.best_epoch = stopper.best_epoch();
  result.log.best_selection_loss = stopper.best_loss();
  result.log.early_stopped = stopper.patience_exhausted();
  return result;
}

std::vector<RankedCandidate> rerank(const RankerModel& model,
                                    std::span<const FeatureVector> scaled,
                                    int inference_top) {
  std::vector<RankedCandidate> out;
  if (scaled.empty()) return out;
  if (inference_top < 1) throw Error("inference_top must be >= 1");
  const std::size_t n = std::min(scaled.size(), static_cast<std::size_t>(inference_top));
  const std::size_t d = model.input_dim();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < n; ++r) {
    if (scaled[r].size() != d)
      throw Error("candidate feature dimension " + std::to_string(scaled[r].size()) +
                  " does not match model dimension " + std::to_string(d));
    for (std::size_t c = 0; c < d; ++c)
      X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = scaled[r][c];
  }
  const Eigen::VectorXd f = forward_batch(model, X);
  for (std::size_t r = 0; r < n; ++r) out.push_back({r, f(static_cast<Eigen::Index>(r))});
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) {
                     return *a.score > *b.score;
                   });
  for (std::size_t r = n; r < scaled.size(); ++r) out.push_back({r, std::nullopt});
  return out;
}

}  // namespace qarank
