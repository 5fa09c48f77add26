// Depth-1 gradient boosting with logistic loss and Newton leaf values.

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "conceptforge/bootstrap.hpp"

namespace conceptforge {

using nlohmann::json;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

DiscriminatorModel DiscriminatorModel::train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                                             const Config& cfg) {
  if (X.empty() || X.size() != y.size()) throw Error("discriminator: need matching non-empty X and y");
  const std::size_t n = X.size();
  const std::size_t dim = X.front().size();
  for (const auto& row : X)
    if (row.size() != dim) throw Error("discriminator: ragged feature matrix");

  double pos = 0;
  for (int label : y) {
    if (label != 0 && label != 1) throw Error("discriminator: labels must be 0/1");
    pos += label;
  }
  double prior = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);

  DiscriminatorModel m;
  m.trained_ = true;
  m.base_ = std::log(prior / (1.0 - prior));
  m.learning_rate_ = cfg.learning_rate;

  std::vector<double> F(n, m.base_), g(n), h(n);
  std::vector<std::size_t> order(n);
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    double G = 0, H = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = sigmoid(F[i]);
      g[i] = y[i] - p;
      h[i] = p * (1.0 - p);
      G += g[i];
      H += h[i];
    }
    double parent_gain = G * G / (H + cfg.l2);

    bool found = false;
    double best_gain = parent_gain + 1e-12;
    Stump best;
    for (std::size_t f = 0; f < dim; ++f) {
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return X[a][f] < X[b][f]; });
      double GL = 0, HL = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        GL += g[order[k]];
        HL += h[order[k]];
        double lo = X[order[k]][f], hi = X[order[k + 1]][f];
        if (!(lo < hi)) continue;
        double GR = G - GL, HR = H - HL;
        double gain = GL * GL / (HL + cfg.l2) + GR * GR / (HR + cfg.l2);
        if (gain > best_gain) {
          best_gain = gain;
          best = {f, lo + (hi - lo) / 2.0, GL / (HL + cfg.l2), GR / (HR + cfg.l2)};
          found = true;
        }
      }
    }
    if (!found) break;
    m.stumps_.push_back(best);
    for (std::size_t i = 0; i < n; ++i)
      F[i] += cfg.learning_rate * (X[i][best.feature] <= best.threshold ? best.left : best.right);
  }
  return m;
}

double DiscriminatorModel::score(const std::vector<double>& x) const {
  if (!trained_) throw Error("discriminator: model is not trained");
  double F = base_;
  for (const auto& s : stumps_) {
    if (s.feature >= x.size()) throw Error("discriminator: feature vector too short");
    F += learning_rate_ * (x[s.feature] <= s.threshold ? s.left : s.right);
  }
  return sigmoid(F);
}

std::string DiscriminatorModel::to_json() const {
  json stumps = json::array();
  for (const auto& s : stumps_) stumps.push_back({s.feature, s.threshold, s.left, s.right});
  return json{{"format", "conceptforge-discriminator"},
              {"version", 1},
              {"trained", trained_},
              {"base", base_},
              {"learning_rate", learning_rate_},
              {"stumps", std::move(stumps)}}
      .dump();
}

DiscriminatorModel DiscriminatorModel::from_json(std::string_view text) {
  auto j = json::parse(text);
  if (j.value("format", "") != "conceptforge-discriminator") throw Error("not a discriminator model");
  DiscriminatorModel m;
  m.trained_ = j.at("trained").get<bool>();
  m.base_ = j.at("base").get<double>();
  m.learning_rate_ = j.at("learning_rate").get<double>();
  for (const auto& s : j.at("stumps"))
    m.stumps_.push_back({s.at(0).get<std::size_t>(), s.at(1).get<double>(), s.at(2).get<double>(),
                         s.at(3).get<double>()});
  return m;
}

}  // namespace conceptforge
