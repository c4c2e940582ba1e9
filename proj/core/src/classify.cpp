#include "epoc/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "epoc/errors.hpp"

namespace epoc {

Standardizer Standardizer::fit(std::span<const FeatureVector> features) {
  Standardizer s;
  if (features.empty()) return s;
  const double n = static_cast<double>(features.size());
  for (std::size_t j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (const auto& f : features) mean += f[j];
    mean /= n;
    double var = 0.0;
    for (const auto& f : features) var += (f[j] - mean) * (f[j] - mean);
    const double sd = std::sqrt(var / n);
    s.mean[j] = mean;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

FeatureVector Standardizer::apply(const FeatureVector& x) const {
  return {(x[0] - mean[0]) / scale[0], (x[1] - mean[1]) / scale[1]};
}

std::string_view to_string(LinearKind kind) {
  return kind == LinearKind::Svm ? "svm" : "logreg";
}

double LinearModel::decision(const FeatureVector& x) const {
  const auto z = scaler.apply(x);
  return weights[0] * z[0] + weights[1] * z[1] + bias;
}

void require_two_classes(const LabeledFeatureSet& data) {
  if (data.features.size() != data.labels.size())
    throw std::invalid_argument("feature and label counts differ");
  bool has0 = false, has1 = false;
  for (int y : data.labels) {
    if (y == 0) has0 = true;
    else if (y == 1) has1 = true;
    else throw std::invalid_argument("labels must be 0 or 1");
  }
  if (!has0 || !has1) throw std::invalid_argument("training data must contain both classes");
}

namespace {

struct LinearParams {
  double w0{0.0}, w1{0.0}, b{0.0};
};

double log1p_exp(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct LinearObjective {
  const std::vector<FeatureVector>& x;
  const std::vector<double>& sign;
  LinearKind kind;
  double l2;

  double value(const LinearParams& p) const {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double m = sign[i] * (p.w0 * x[i][0] + p.w1 * x[i][1] + p.b);
      loss += kind == LinearKind::Svm ? std::max(0.0, 1.0 - m) : log1p_exp(-m);
    }
    return loss / static_cast<double>(x.size()) + 0.5 * l2 * (p.w0 * p.w0 + p.w1 * p.w1);
  }

  LinearParams gradient(const LinearParams& p) const {
    LinearParams g;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double m = sign[i] * (p.w0 * x[i][0] + p.w1 * x[i][1] + p.b);
      const double coef = kind == LinearKind::Svm ? (m < 1.0 ? 1.0 : 0.0) : sigmoid(-m);
      g.w0 -= coef * sign[i] * x[i][0];
      g.w1 -= coef * sign[i] * x[i][1];
      g.b -= coef * sign[i];
    }
    const double n = static_cast<double>(x.size());
    g.w0 = g.w0 / n + l2 * p.w0;
    g.w1 = g.w1 / n + l2 * p.w1;
    g.b /= n;
    return g;
  }
};

}  // namespace

LinearTraining train_linear_detailed(const LabeledFeatureSet& data, LinearKind kind,
                                     const LinearHyperparams& hp) {
  require_two_classes(data);
  if (!(hp.l2 >= 0.0) || !(hp.initial_step > 0.0))
    throw std::invalid_argument("invalid linear hyperparameters");

  LinearTraining out;
  out.model.kind = kind;
  out.model.scaler = Standardizer::fit(data.features);
  std::vector<FeatureVector> x;
  std::vector<double> sign;
  x.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    x.push_back(out.model.scaler.apply(data.features[i]));
    sign.push_back(data.labels[i] == 1 ? 1.0 : -1.0);
  }

  const LinearObjective objective{x, sign, kind, hp.l2};
  LinearParams p;
  double current = objective.value(p);
  out.loss_history.push_back(current);
  double step = hp.initial_step;
  constexpr int kMaxHalvings = 40;
  constexpr double kArmijo = 1e-4;

  for (std::size_t it = 0; it < hp.iterations; ++it) {
    const LinearParams g = objective.gradient(p);
    const double g2 = g.w0 * g.w0 + g.w1 * g.w1 + g.b * g.b;
    if (g2 == 0.0) break;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      const LinearParams trial{p.w0 - step * g.w0, p.w1 - step * g.w1, p.b - step * g.b};
      const double value = objective.value(trial);
      // Hinge loss is not smooth, so only plain decrease is demanded there.
      const double required = kind == LinearKind::LogReg ? current - kArmijo * step * g2 : current;
      if (value < required) {
        p = trial;
        current = value;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    out.loss_history.push_back(current);
    step = std::min(step * 2.0, hp.initial_step * 16.0);
  }

  out.model.weights = {p.w0, p.w1};
  out.model.bias = p.b;
  if (!std::isfinite(p.w0) || !std::isfinite(p.w1) || !std::isfinite(p.b))
    throw std::runtime_error("linear training produced non-finite parameters");
  return out;
}

LinearModel train_linear(const LabeledFeatureSet& data, LinearKind kind,
                         const LinearHyperparams& hp) {
  return train_linear_detailed(data, kind, hp).model;
}

std::string serialize(const LinearModel& m) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string out;
  out += "kind=" + std::string(to_string(m.kind)) + "\n";
  out += "weight0=" + num(m.weights[0]) + "\n";
  out += "weight1=" + num(m.weights[1]) + "\n";
  out += "bias=" + num(m.bias) + "\n";
  out += "mean0=" + num(m.scaler.mean[0]) + "\n";
  out += "mean1=" + num(m.scaler.mean[1]) + "\n";
  out += "scale0=" + num(m.scaler.scale[0]) + "\n";
  out += "scale1=" + num(m.scaler.scale[1]) + "\n";
  return out;
}

LinearModel parse_linear_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(0, "linear model missing key '" + key + "'");
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw ParseError(0, "linear model key '" + key + "' is not a finite number");
    }
  };
  LinearModel m;
  const auto kind = kv.find("kind");
  if (kind == kv.end()) throw ParseError(0, "linear model missing key 'kind'");
  if (kind->second == "svm") m.kind = LinearKind::Svm;
  else if (kind->second == "logreg") m.kind = LinearKind::LogReg;
  else throw ParseError(0, "unknown linear model kind '" + kind->second + "'");
  m.weights = {get("weight0"), get("weight1")};
  m.bias = get("bias");
  m.scaler.mean = {get("mean0"), get("mean1")};
  m.scaler.scale = {get("scale0"), get("scale1")};
  return m;
}

// ---------------------------------------------------------------------------
// MLP

namespace {

using M = MlpModel;
constexpr std::size_t kW1 = 0;
constexpr std::size_t kB1 = kW1 + M::kHidden1 * M::kInputs;
constexpr std::size_t kW2 = kB1 + M::kHidden1;
constexpr std::size_t kB2 = kW2 + M::kHidden2 * M::kHidden1;
constexpr std::size_t kW3 = kB2 + M::kHidden2;
constexpr std::size_t kB3 = kW3 + M::kHidden2;
static_assert(kB3 + 1 == M::kParamCount);

struct Activations {
  std::array<double, M::kHidden1> h1;
  std::array<double, M::kHidden2> h2;
  double logit;
};

Activations forward(std::span<const double> p, const FeatureVector& x) {
  Activations a{};
  for (std::size_t i = 0; i < M::kHidden1; ++i)
    a.h1[i] = std::tanh(p[kW1 + i * 2] * x[0] + p[kW1 + i * 2 + 1] * x[1] + p[kB1 + i]);
  for (std::size_t j = 0; j < M::kHidden2; ++j) {
    double z = p[kB2 + j];
    const double* row = &p[kW2 + j * M::kHidden1];
    for (std::size_t i = 0; i < M::kHidden1; ++i) z += row[i] * a.h1[i];
    a.h2[j] = std::tanh(z);
  }
  double z = p[kB3];
  for (std::size_t j = 0; j < M::kHidden2; ++j) z += p[kW3 + j] * a.h2[j];
  a.logit = z;
  return a;
}

// Stable -[y log s(z) + (1-y) log(1-s(z))].
double bce_with_logit(double z, int y) {
  return std::max(z, 0.0) - z * static_cast<double>(y) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

double MlpModel::probability(const FeatureVector& x) const {
  return sigmoid(forward(params, scaler.apply(x)).logit);
}

MlpModel mlp_initialize(std::uint64_t seed) {
  MlpModel m;
  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < count; ++i) m.params[offset + i] = dist(rng);
  };
  fill(kW1, M::kHidden1 * M::kInputs, M::kInputs, M::kHidden1);
  fill(kW2, M::kHidden2 * M::kHidden1, M::kHidden1, M::kHidden2);
  fill(kW3, M::kHidden2, M::kHidden2, 1);
  return m;
}

LossAndGradient mlp_loss_and_gradient(std::span<const double> p,
                                      std::span<const FeatureVector> inputs,
                                      std::span<const int> labels) {
  if (p.size() != M::kParamCount) throw std::invalid_argument("wrong MLP parameter count");
  if (inputs.size() != labels.size() || inputs.empty())
    throw std::invalid_argument("MLP batch needs matching, non-empty inputs and labels");
  LossAndGradient out;
  out.gradient.assign(M::kParamCount, 0.0);
  auto& g = out.gradient;
  std::array<double, M::kHidden2> d2{};
  std::array<double, M::kHidden1> d1{};

  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const auto& x = inputs[s];
    const Activations a = forward(p, x);
    out.loss += bce_with_logit(a.logit, labels[s]);
    const double dz = sigmoid(a.logit) - static_cast<double>(labels[s]);

    g[kB3] += dz;
    for (std::size_t j = 0; j < M::kHidden2; ++j) {
      g[kW3 + j] += dz * a.h2[j];
      d2[j] = dz * p[kW3 + j] * (1.0 - a.h2[j] * a.h2[j]);
    }
    d1.fill(0.0);
    for (std::size_t j = 0; j < M::kHidden2; ++j) {
      g[kB2 + j] += d2[j];
      double* grow = &g[kW2 + j * M::kHidden1];
      const double* prow = &p[kW2 + j * M::kHidden1];
      for (std::size_t i = 0; i < M::kHidden1; ++i) {
        grow[i] += d2[j] * a.h1[i];
        d1[i] += d2[j] * prow[i];
      }
    }
    for (std::size_t i = 0; i < M::kHidden1; ++i) {
      const double d = d1[i] * (1.0 - a.h1[i] * a.h1[i]);
      g[kB1 + i] += d;
      g[kW1 + i * 2] += d * x[0];
      g[kW1 + i * 2 + 1] += d * x[1];
    }
  }
  const double n = static_cast<double>(inputs.size());
  out.loss /= n;
  for (double& v : g) v /= n;
  return out;
}

MlpModel train_mlp(const LabeledFeatureSet& data, const MlpHyperparams& hp) {
  require_two_classes(data);
  if (!(hp.learning_rate > 0.0) || hp.batch_size == 0)
    throw std::invalid_argument("invalid MLP hyperparameters");
  MlpModel model = mlp_initialize(hp.seed);
  model.scaler = Standardizer::fit(data.features);

  std::vector<FeatureVector> x;
  x.reserve(data.size());
  for (const auto& f : data.features) x.push_back(model.scaler.apply(f));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(hp.seed ^ 0x5DEECE66Dull);
  std::vector<FeatureVector> bx;
  std::vector<int> by;

  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      bx.clear();
      by.clear();
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(x[order[i]]);
        by.push_back(data.labels[order[i]]);
      }
      const auto lg = mlp_loss_and_gradient(model.params, bx, by);
      if (!std::isfinite(lg.loss))
        throw std::runtime_error("MLP training diverged at epoch " + std::to_string(epoch));
      for (std::size_t k = 0; k < M::kParamCount; ++k)
        model.params[k] -= hp.learning_rate * lg.gradient[k];
    }
  }
  model.final_loss = mlp_loss_and_gradient(model.params, x, data.labels).loss;
  if (!std::isfinite(model.final_loss)) throw std::runtime_error("MLP training diverged");
  return model;
}

MlpModel train_mlp(const LabeledFeatureSet& data, std::size_t epochs, double learning_rate,
                   std::uint64_t seed) {
  MlpHyperparams hp;
  hp.epochs = epochs;
  hp.learning_rate = learning_rate;
  hp.seed = seed;
  return train_mlp(data, hp);
}

Trainer linear_trainer(LinearKind kind, LinearHyperparams hp) {
  return [kind, hp](const LabeledFeatureSet& d) -> Predictor {
    auto model = train_linear(d, kind, hp);
    return [model](const FeatureVector& x) { return model.predict(x); };
  };
}

Trainer mlp_trainer(MlpHyperparams hp) {
  return [hp](const LabeledFeatureSet& d) -> Predictor {
    auto model = std::make_shared<MlpModel>(train_mlp(d, hp));
    return [model](const FeatureVector& x) { return model->predict(x); };
  };
}

Evaluation score(const Predictor& predict, const LabeledFeatureSet& data) {
  Evaluation e;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int p = predict(data.features[i]);
    const int y = data.labels[i];
    if (p == 1 && y == 1) ++e.confusion.true_pos;
    else if (p == 0 && y == 0) ++e.confusion.true_neg;
    else if (p == 1) ++e.confusion.false_pos;
    else ++e.confusion.false_neg;
  }
  const auto total = e.confusion.total();
  e.accuracy = total ? static_cast<double>(e.confusion.true_pos + e.confusion.true_neg) /
                           static_cast<double>(total)
                     : 0.0;
  return e;
}

namespace {

LabeledFeatureSet subset(const LabeledFeatureSet& data, const std::vector<std::size_t>& idx) {
  LabeledFeatureSet out;
  out.window_len = data.window_len;
  out.hop = data.hop;
  for (auto i : idx) out.push_back(data.features[i], data.labels[i]);
  return out;
}

void accumulate(Confusion& into, const Confusion& c) {
  into.true_pos += c.true_pos;
  into.true_neg += c.true_neg;
  into.false_pos += c.false_pos;
  into.false_neg += c.false_neg;
}

}  // namespace

Evaluation evaluate(const Trainer& train, const LabeledFeatureSet& data, const Split& split,
                    std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("evaluate: no samples");
  if (data.features.size() != data.labels.size())
    throw std::invalid_argument("evaluate: feature and label counts differ");

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.labels[i];
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    by_class[static_cast<std::size_t>(y)].push_back(i);
  }
  std::mt19937_64 rng(seed);
  for (auto& v : by_class) std::shuffle(v.begin(), v.end(), rng);

  Evaluation result;
  if (const auto* h = std::get_if<Holdout>(&split)) {
    if (!(h->fraction >= 0.0 && h->fraction < 1.0))
      throw std::invalid_argument("holdout fraction must lie in [0, 1)");
    if (h->fraction == 0.0) return score(train(data), data);
    std::vector<std::size_t> train_idx, test_idx;
    for (const auto& v : by_class) {
      const auto n_test =
          static_cast<std::size_t>(std::lround(h->fraction * static_cast<double>(v.size())));
      test_idx.insert(test_idx.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_test));
      train_idx.insert(train_idx.end(), v.begin() + static_cast<std::ptrdiff_t>(n_test), v.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    if (test_idx.empty()) throw std::invalid_argument("holdout fraction leaves no test samples");
    return score(train(subset(data, train_idx)), subset(data, test_idx));
  }

  const std::size_t k = std::get<KFold>(split).k;
  if (k < 2) throw std::invalid_argument("k-fold needs k >= 2");
  for (const auto& v : by_class)
    if (k > v.size())
      throw std::invalid_argument("fold count " + std::to_string(k) + " exceeds class size " +
                                  std::to_string(v.size()));
  std::vector<std::size_t> fold_of(data.size());
  for (const auto& v : by_class)
    for (std::size_t r = 0; r < v.size(); ++r) fold_of[v[r]] = r % k;

  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < data.size(); ++i)
      (fold_of[i] == fold ? test_idx : train_idx).push_back(i);
    const auto e = score(train(subset(data, train_idx)), subset(data, test_idx));
    accumulate(result.confusion, e.confusion);
  }
  result.accuracy = static_cast<double>(result.confusion.true_pos + result.confusion.true_neg) /
                    static_cast<double>(result.confusion.total());
  return result;
}

}  // namespace epoc
