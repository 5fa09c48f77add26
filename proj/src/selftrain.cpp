#include "conceptforge/selftrain.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace conceptforge {

using nlohmann::json;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool transition_allowed(std::size_t prev, std::size_t cur) {
  return !(prev == static_cast<std::size_t>(Tag::O) && cur == static_cast<std::size_t>(Tag::I));
}
bool start_allowed(std::size_t cur) { return cur != static_cast<std::size_t>(Tag::I); }

double log_sum_exp(std::span<const double> v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

std::string token_shape(std::string_view tok) {
  std::string shape;
  for (unsigned char c : tok) {
    char s;
    if (c >= 'A' && c <= 'Z') s = 'X';
    else if (c >= 'a' && c <= 'z') s = 'x';
    else if (c >= '0' && c <= '9') s = 'd';
    else if (c >= 0x80) s = 'u';
    else s = static_cast<char>(c);
    if (shape.empty() || shape.back() != s) shape += s;
  }
  return shape;
}

}  // namespace

std::string_view tag_name(Tag t) {
  switch (t) {
    case Tag::O: return "O";
    case Tag::B: return "B-CPT";
    case Tag::I: return "I-CPT";
  }
  return "O";
}

Tag parse_tag(std::string_view s) {
  if (s == "O") return Tag::O;
  if (s == "B-CPT" || s == "B") return Tag::B;
  if (s == "I-CPT" || s == "I") return Tag::I;
  throw Error("unknown tag '" + std::string(s) + "'");
}

bool is_valid_bio(std::span<const Tag> labels) {
  Tag prev = Tag::O;
  for (auto t : labels) {
    if (t == Tag::I && prev == Tag::O) return false;
    prev = t;
  }
  return true;
}

std::vector<Tag> repair_bio(std::vector<Tag> labels) {
  Tag prev = Tag::O;
  for (auto& t : labels) {
    if (t == Tag::I && prev == Tag::O) t = Tag::B;
    prev = t;
  }
  return labels;
}

std::vector<Span> spans_of(std::span<const Tag> labels) {
  std::vector<Span> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Tag::O) continue;
    if (labels[i] == Tag::B || out.empty() || out.back().end != i) out.push_back({i, i + 1});
    else out.back().end = i + 1;
  }
  return out;
}

std::vector<Tag> tags_from_spans(std::size_t n, std::span<const Span> spans) {
  std::vector<Tag> tags(n, Tag::O);
  for (const auto& s : spans) {
    if (s.end > n || s.begin >= s.end) throw Error("tags_from_spans: span out of range");
    tags[s.begin] = Tag::B;
    for (auto i = s.begin + 1; i < s.end; ++i) tags[i] = Tag::I;
  }
  return tags;
}

std::vector<TaggedSequence> parse_conll(std::string_view contents) {
  std::vector<TaggedSequence> out;
  TaggedSequence cur;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (cur.tokens.empty()) return;
    if (!is_valid_bio(cur.labels))
      throw Error("CoNLL sentence " + std::to_string(out.size() + 1) + " (ending line " + std::to_string(line_no) +
                  "): invalid BIO sequence");
    out.push_back(std::move(cur));
    cur = {};
  };
  for (const auto& raw : split(contents, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) {
      flush();
      continue;
    }
    auto tab = line.rfind('\t');
    if (tab == std::string_view::npos) throw Error("CoNLL line " + std::to_string(line_no) + ": expected token<TAB>tag");
    auto tok = normalize_text(line.substr(0, tab));
    if (tok.empty()) throw Error("CoNLL line " + std::to_string(line_no) + ": empty token");
    cur.tokens.push_back(std::move(tok));
    cur.labels.push_back(parse_tag(trim(line.substr(tab + 1))));
  }
  flush();
  return out;
}

std::vector<TaggedSequence> load_conll(const std::string& path) { return parse_conll(read_file(path)); }

std::string to_conll(std::span<const TaggedSequence> seqs) {
  std::string out;
  for (const auto& s : seqs) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i];
      out += '\t';
      out += tag_name(s.labels[i]);
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<std::string>> load_sentences(const std::string& path, TokenizerMode mode) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : read_lines(path)) {
    auto toks = to_tokens(line, mode);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dictionary tagger

DictTagger DictTagger::build(std::span<const std::vector<std::string>> lexicon) {
  auto trie = std::make_shared<TokenTrie<bool>>();
  for (const auto& phrase : lexicon) trie->insert(phrase, true);
  if (trie->empty()) throw Error("build_dict_tagger: lexicon is empty");
  DictTagger t;
  t.trie_ = std::move(trie);
  return t;
}

std::vector<Tag> DictTagger::tag(std::span<const std::string> tokens) const {
  std::vector<Span> spans;
  for (const auto& m : trie_->forward_max_match(tokens)) spans.push_back(m.span);
  return tags_from_spans(tokens.size(), spans);
}

// ---------------------------------------------------------------------------
// Linear-chain CRF

std::vector<std::vector<std::size_t>> ChainTagger::featurize(std::span<const std::string> tokens) const {
  std::vector<std::vector<std::size_t>> out(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string names[] = {
        "bias",
        "w0=" + tokens[i],
        "w-1=" + (i > 0 ? tokens[i - 1] : std::string("<s>")),
        "w+1=" + (i + 1 < tokens.size() ? tokens[i + 1] : std::string("</s>")),
        "shape=" + token_shape(tokens[i]),
    };
    for (const auto& n : names) {
      auto it = feature_ids_.find(n);
      if (it != feature_ids_.end()) out[i].push_back(it->second);
    }
  }
  return out;
}

std::vector<std::array<double, kNumTags>> ChainTagger::emissions(
    const std::vector<std::vector<std::size_t>>& feats) const {
  std::vector<std::array<double, kNumTags>> e(feats.size());
  for (std::size_t t = 0; t < feats.size(); ++t) {
    e[t].fill(0.0);
    for (auto f : feats[t])
      for (std::size_t y = 0; y < kNumTags; ++y) e[t][y] += emission_[f * kNumTags + y];
  }
  return e;
}

namespace {

struct Lattice {
  std::vector<std::array<double, kNumTags>> alpha, beta;
  double log_z = 0.0;
};

Lattice forward_backward(const std::vector<std::array<double, kNumTags>>& e,
                         const std::array<double, kNumTags * kNumTags>& trans,
                         const std::array<double, kNumTags>& start) {
  const std::size_t T = e.size();
  Lattice L;
  L.alpha.assign(T, {});
  L.beta.assign(T, {});
  for (std::size_t y = 0; y < kNumTags; ++y) L.alpha[0][y] = start_allowed(y) ? start[y] + e[0][y] : kNegInf;
  std::array<double, kNumTags> tmp;
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < kNumTags; ++y) {
      for (std::size_t p = 0; p < kNumTags; ++p)
        tmp[p] = transition_allowed(p, y) ? L.alpha[t - 1][p] + trans[p * kNumTags + y] : kNegInf;
      L.alpha[t][y] = log_sum_exp(tmp) + e[t][y];
    }
  }
  L.beta[T - 1].fill(0.0);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t p = 0; p < kNumTags; ++p) {
      for (std::size_t y = 0; y < kNumTags; ++y)
        tmp[y] = transition_allowed(p, y) ? trans[p * kNumTags + y] + e[t + 1][y] + L.beta[t + 1][y] : kNegInf;
      L.beta[t][p] = log_sum_exp(tmp);
    }
  }
  L.log_z = log_sum_exp(L.alpha[T - 1]);
  return L;
}

}  // namespace

ChainTagger ChainTagger::train(std::span<const TaggedSequence> samples, const ChainConfig& cfg) {
  if (samples.empty()) throw Error("train_chain_tagger: no training samples");
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (samples[s].tokens.size() != samples[s].labels.size())
      throw Error("train_chain_tagger: sample " + std::to_string(s) + " has mismatched tokens/labels");
    if (!is_valid_bio(samples[s].labels))
      throw Error("train_chain_tagger: sample " + std::to_string(s) + " has invalid BIO labels");
  }

  ChainTagger m;
  m.config_ = cfg;
  // Feature dictionary in sorted order so ids do not depend on hash-map iteration.
  std::set<std::string> names;
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      names.insert("bias");
      names.insert("w0=" + s.tokens[i]);
      names.insert("w-1=" + (i > 0 ? s.tokens[i - 1] : std::string("<s>")));
      names.insert("w+1=" + (i + 1 < s.tokens.size() ? s.tokens[i + 1] : std::string("</s>")));
      names.insert("shape=" + token_shape(s.tokens[i]));
    }
  }
  std::size_t next = 0;
  for (const auto& n : names) m.feature_ids_.emplace(n, next++);
  m.emission_.assign(m.feature_ids_.size() * kNumTags, 0.0);

  std::vector<double> g2_em(m.emission_.size(), 0.0);
  std::array<double, kNumTags * kNumTags> g2_tr{};
  std::array<double, kNumTags> g2_st{};
  auto adagrad = [&](double& w, double& g2, double g) {
    g2 += g * g;
    w -= cfg.learning_rate * g / (std::sqrt(g2) + 1e-8);
  };

  std::vector<std::vector<std::vector<std::size_t>>> feats;
  for (const auto& s : samples) feats.push_back(m.featurize(s.tokens));

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto si : order) {
      const auto& s = samples[si];
      if (s.tokens.empty()) continue;
      const auto& f = feats[si];
      auto e = m.emissions(f);
      auto L = forward_backward(e, m.transition_, m.start_);
      const std::size_t T = s.tokens.size();

      std::map<std::size_t, double> g_em;
      std::array<double, kNumTags * kNumTags> g_tr{};
      std::array<double, kNumTags> g_st{};
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t y = 0; y < kNumTags; ++y) {
          double mu = std::exp(L.alpha[t][y] + L.beta[t][y] - L.log_z);
          double grad = mu - (static_cast<std::size_t>(s.labels[t]) == y ? 1.0 : 0.0);
          for (auto fid : f[t]) g_em[fid * kNumTags + y] += grad;
          if (t == 0) g_st[y] += grad;
        }
        if (t == 0) continue;
        for (std::size_t p = 0; p < kNumTags; ++p)
          for (std::size_t y = 0; y < kNumTags; ++y) {
            if (!transition_allowed(p, y)) continue;
            double xi = std::exp(L.alpha[t - 1][p] + m.transition_[p * kNumTags + y] + e[t][y] + L.beta[t][y] -
                                 L.log_z);
            g_tr[p * kNumTags + y] += xi;
          }
        g_tr[static_cast<std::size_t>(s.labels[t - 1]) * kNumTags + static_cast<std::size_t>(s.labels[t])] -= 1.0;
      }
      for (auto& [idx, g] : g_em) adagrad(m.emission_[idx], g2_em[idx], g + cfg.l2 * m.emission_[idx]);
      for (std::size_t k = 0; k < g_tr.size(); ++k) adagrad(m.transition_[k], g2_tr[k], g_tr[k] + cfg.l2 * m.transition_[k]);
      for (std::size_t k = 0; k < g_st.size(); ++k) adagrad(m.start_[k], g2_st[k], g_st[k] + cfg.l2 * m.start_[k]);
    }
  }
  return m;
}

double ChainTagger::nll(const TaggedSequence& s) const {
  if (s.tokens.empty()) return 0.0;
  auto e = emissions(featurize(s.tokens));
  auto L = forward_backward(e, transition_, start_);
  double score = start_[static_cast<std::size_t>(s.labels[0])];
  for (std::size_t t = 0; t < s.tokens.size(); ++t) {
    score += e[t][static_cast<std::size_t>(s.labels[t])];
    if (t > 0)
      score += transition_[static_cast<std::size_t>(s.labels[t - 1]) * kNumTags + static_cast<std::size_t>(s.labels[t])];
  }
  return L.log_z - score;
}

std::vector<Tag> ChainTagger::tag(std::span<const std::string> tokens) const {
  const std::size_t T = tokens.size();
  if (T == 0) return {};
  auto e = emissions(featurize(tokens));
  std::vector<std::array<double, kNumTags>> delta(T);
  std::vector<std::array<std::size_t, kNumTags>> back(T);
  for (std::size_t y = 0; y < kNumTags; ++y) delta[0][y] = start_allowed(y) ? start_[y] + e[0][y] : kNegInf;
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < kNumTags; ++y) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t p = 0; p < kNumTags; ++p) {
        if (!transition_allowed(p, y)) continue;
        double v = delta[t - 1][p] + transition_[p * kNumTags + y];
        if (v > best) {
          best = v;
          arg = p;
        }
      }
      delta[t][y] = best + e[t][y];
      back[t][y] = arg;
    }
  }
  std::size_t y = 0;
  for (std::size_t k = 1; k < kNumTags; ++k)
    if (delta[T - 1][k] > delta[T - 1][y]) y = k;
  std::vector<Tag> out(T);
  for (std::size_t t = T; t-- > 0;) {
    out[t] = static_cast<Tag>(y);
    if (t > 0) y = back[t][y];
  }
  return out;
}

std::vector<std::pair<std::string, std::size_t>> ChainTagger::feature_ids_sorted() const {
  std::vector<std::pair<std::string, std::size_t>> v(feature_ids_.begin(), feature_ids_.end());
  std::sort(v.begin(), v.end());
  return v;
}

std::string ChainTagger::to_json() const {
  json feats = json::object();
  for (const auto& [name, id] : feature_ids_sorted())
    feats[name] = {emission_[id * kNumTags], emission_[id * kNumTags + 1], emission_[id * kNumTags + 2]};
  return json{{"format", "conceptforge-chain-tagger"},
              {"version", 1},
              {"seed", config_.seed},
              {"epochs", config_.epochs},
              {"transition", transition_},
              {"start", start_},
              {"emission", std::move(feats)}}
      .dump();
}

// ---------------------------------------------------------------------------
// Window tagger

std::vector<std::string> WindowTagger::feature_strings(std::span<const std::string> tokens, std::size_t i) {
  std::vector<std::string> out;
  out.emplace_back("bias");
  auto at = [&](std::ptrdiff_t k) -> std::string {
    auto j = static_cast<std::ptrdiff_t>(i) + k;
    if (j < 0) return "<s>";
    if (j >= static_cast<std::ptrdiff_t>(tokens.size())) return "</s>";
    return tokens[static_cast<std::size_t>(j)];
  };
  out.push_back("t-2=" + at(-2));
  out.push_back("t-1=" + at(-1));
  out.push_back("t0=" + at(0));
  out.push_back("t+1=" + at(1));
  out.push_back("t+2=" + at(2));
  std::string marked = "<" + tokens[i] + ">";
  auto b = utf8_boundaries(marked);
  std::size_t chars = b.size() - 1;
  for (std::size_t n = 1; n <= 3; ++n)
    for (std::size_t k = 0; k + n <= chars; ++k) out.push_back("c=" + marked.substr(b[k], b[k + n] - b[k]));
  return out;
}

std::vector<std::vector<std::size_t>> WindowTagger::hashed_features(std::span<const std::string> tokens) const {
  const std::uint64_t mask = (std::uint64_t{1} << config_.hash_bits) - 1;
  std::vector<std::vector<std::size_t>> out(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i)
    for (const auto& f : feature_strings(tokens, i)) out[i].push_back(static_cast<std::size_t>(fnv1a64(f) & mask));
  return out;
}

WindowTagger WindowTagger::init(const WindowConfig& cfg) {
  if (cfg.hash_bits < 4 || cfg.hash_bits > 24) throw Error("window tagger: hash_bits must be in [4, 24]");
  WindowTagger m;
  m.config_ = cfg;
  m.params_.resize((std::size_t{1} << cfg.hash_bits) * kNumTags);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& p : m.params_) p = cfg.init_scale * normal(rng);
  return m;
}

std::vector<std::array<double, kNumTags>> WindowTagger::token_probs(std::span<const std::string> tokens) const {
  auto feats = hashed_features(tokens);
  std::vector<std::array<double, kNumTags>> out(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    std::array<double, kNumTags> z{};
    for (auto b : feats[t])
      for (std::size_t y = 0; y < kNumTags; ++y) z[y] += params_[b * kNumTags + y];
    double mx = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (auto& v : z) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (auto& v : z) v /= sum;
    out[t] = z;
  }
  return out;
}

std::vector<Tag> WindowTagger::tag(std::span<const std::string> tokens) const {
  std::vector<Tag> out;
  out.reserve(tokens.size());
  for (const auto& p : token_probs(tokens)) {
    std::size_t best = 0;
    for (std::size_t y = 1; y < kNumTags; ++y)
      if (p[y] > p[best]) best = y;
    out.push_back(static_cast<Tag>(best));
  }
  return repair_bio(std::move(out));
}

double WindowTagger::loss(std::span<const TaggedSequence> batch) const {
  if (batch.empty()) return 0.0;
  double total = 0;
  for (const auto& s : batch) {
    auto feats = hashed_features(s.tokens);
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      std::array<double, kNumTags> z{};
      for (auto b : feats[t])
        for (std::size_t y = 0; y < kNumTags; ++y) z[y] += params_[b * kNumTags + y];
      total += log_sum_exp(z) - z[static_cast<std::size_t>(s.labels[t])];
    }
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> WindowTagger::gradient(std::span<const TaggedSequence> batch) const {
  std::vector<double> g(params_.size(), 0.0);
  if (batch.empty()) return g;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& s : batch) {
    auto feats = hashed_features(s.tokens);
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      std::array<double, kNumTags> z{};
      for (auto b : feats[t])
        for (std::size_t y = 0; y < kNumTags; ++y) z[y] += params_[b * kNumTags + y];
      double lz = log_sum_exp(z);
      for (std::size_t y = 0; y < kNumTags; ++y) {
        double d = (std::exp(z[y] - lz) - (static_cast<std::size_t>(s.labels[t]) == y ? 1.0 : 0.0)) * scale;
        for (auto b : feats[t]) g[b * kNumTags + y] += d;
      }
    }
  }
  return g;
}

void WindowTagger::perturbed_step(std::span<const TaggedSequence> batch, double sigma, std::mt19937_64& rng) {
  if (sigma < 0) throw Error("window tagger: sigma must be >= 0");
  if (sigma > 0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& p : params_) p += noise(rng);
  }
  auto g = gradient(batch);
  for (std::size_t k = 0; k < params_.size(); ++k) params_[k] -= config_.learning_rate * g[k];
}

std::string WindowTagger::to_json() const {
  return json{{"format", "conceptforge-window-tagger"},
              {"version", 1},
              {"hash_bits", config_.hash_bits},
              {"init_scale", config_.init_scale},
              {"learning_rate", config_.learning_rate},
              {"batch_size", config_.batch_size},
              {"seed", config_.seed},
              {"params", params_}}
      .dump();
}

WindowTagger WindowTagger::from_json(std::string_view text) {
  auto j = json::parse(text);
  if (j.value("format", "") != "conceptforge-window-tagger") throw Error("not a window tagger model");
  WindowTagger m;
  m.config_.hash_bits = j.at("hash_bits").get<std::size_t>();
  m.config_.init_scale = j.at("init_scale").get<double>();
  m.config_.learning_rate = j.at("learning_rate").get<double>();
  m.config_.batch_size = j.at("batch_size").get<std::size_t>();
  m.config_.seed = j.at("seed").get<std::uint64_t>();
  m.params_ = j.at("params").get<std::vector<double>>();
  if (m.params_.size() != (std::size_t{1} << m.config_.hash_bits) * kNumTags)
    throw Error("window tagger: parameter count does not match hash_bits");
  return m;
}

void window_training_pass(WindowTagger& model, std::span<const TaggedSequence> samples, double sigma,
                          std::mt19937_64& rng) {
  if (sigma < 0) throw Error("train_window_tagger: sigma must be >= 0");
  if (samples.empty()) return;
  const std::size_t batch = std::max<std::size_t>(1, std::min(model.config().batch_size, samples.size()));
  const std::size_t steps = std::max<std::size_t>(1, samples.size() / batch);
  std::vector<std::size_t> idx(samples.size());
  std::vector<TaggedSequence> mb;
  for (std::size_t step = 0; step < steps; ++step) {
    // Sample a minibatch without replacement (partial Fisher-Yates).
    std::iota(idx.begin(), idx.end(), 0);
    mb.clear();
    for (std::size_t k = 0; k < batch; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
      std::swap(idx[k], idx[pick(rng)]);
      mb.push_back(samples[idx[k]]);
    }
    model.perturbed_step(mb, sigma, rng);
  }
}

WindowTagger train_window_tagger(std::span<const TaggedSequence> samples, const WindowConfig& cfg, double sigma,
                                 std::size_t epochs) {
  if (sigma < 0) throw Error("train_window_tagger: sigma must be >= 0");
  if (samples.empty()) throw Error("train_window_tagger: no training samples");
  auto model = WindowTagger::init(cfg);
  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  for (std::size_t e = 0; e < epochs; ++e) window_training_pass(model, samples, sigma, rng);
  return model;
}

// ---------------------------------------------------------------------------
// Consensus and the self-training loop

std::optional<TaggedSequence> ensemble_consensus(std::span<const std::string> tokens, const DictTagger& dict,
                                                 const ChainTagger& chain, const WindowTagger& window,
                                                 ConsensusMode mode) {
  auto a = spans_of(dict.tag(tokens));
  auto b = spans_of(chain.tag(tokens));
  auto c = spans_of(window.tag(tokens));
  TaggedSequence out;
  out.tokens.assign(tokens.begin(), tokens.end());
  if (mode == ConsensusMode::sentence) {
    if (a != b || b != c) return std::nullopt;
    out.labels = tags_from_spans(tokens.size(), a);
    return out;
  }
  std::vector<Span> shared;
  for (const auto& s : a)
    if (std::find(b.begin(), b.end(), s) != b.end() && std::find(c.begin(), c.end(), s) != c.end())
      shared.push_back(s);
  bool all_empty = a.empty() && b.empty() && c.empty();
  if (shared.empty() && !all_empty) return std::nullopt;
  out.labels = tags_from_spans(tokens.size(), shared);
  return out;
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::gold: return "gold";
    case Provenance::seed_model: return "seed-model";
    case Provenance::consensus: return "consensus";
  }
  return "gold";
}

namespace {

std::vector<std::size_t> sample_subset(std::size_t n, double frac, std::mt19937_64& rng) {
  auto k = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<TaggedSequence> pool_samples(const std::vector<PoolEntry>& pool) {
  std::vector<TaggedSequence> out;
  out.reserve(pool.size());
  for (const auto& e : pool) out.push_back(e.sample);
  return out;
}

}  // namespace

SelfTrainResult self_train(std::span<const TaggedSequence> seeds, std::span<const std::vector<std::string>> unlabeled,
                           std::span<const std::vector<std::string>> lexicon, const SelfTrainConfig& cfg,
                           std::span<const TaggedSequence> heldout) {
  if (seeds.empty()) throw Error("self_train: no seed samples");
  if (!(cfg.sample_frac > 0.0 && cfg.sample_frac <= 1.0)) throw Error("self_train: sample_frac must be in (0, 1]");
  if (cfg.sigma < 0) throw Error("self_train: sigma must be >= 0");

  std::mt19937_64 rng(cfg.rng_seed);
  auto dict = DictTagger::build(lexicon);
  auto chain = ChainTagger::train(seeds, cfg.chain);
  auto window = WindowTagger::init(cfg.window);

  SelfTrainResult result{window, chain, dict, {}, {}, {}};
  std::vector<bool> pooled(unlabeled.size(), false);
  for (const auto& s : seeds) result.pool.push_back({s, Provenance::gold, 0, std::nullopt});

  // Round 0: pseudo-labels from the seed chain tagger alone.
  RoundReport r0;
  auto subset = sample_subset(unlabeled.size(), cfg.sample_frac, rng);
  r0.sampled = subset.size();
  for (auto i : subset) {
    TaggedSequence ts{unlabeled[i], chain.tag(unlabeled[i])};
    result.pool.push_back({std::move(ts), Provenance::seed_model, 0, i});
    pooled[i] = true;
  }
  r0.admitted = subset.size();
  r0.acceptance_rate = subset.empty() ? 0.0 : 1.0;
  result.window_at_round.push_back(window);
  {
    auto samples = pool_samples(result.pool);
    for (std::size_t p = 0; p < cfg.passes_per_round; ++p) window_training_pass(window, samples, cfg.sigma, rng);
  }
  r0.pool_size = result.pool.size();
  if (!heldout.empty()) r0.heldout_f1 = evaluate_tagger(window, heldout).f1;
  result.rounds.push_back(r0);

  for (std::size_t round = 1; round <= cfg.iters; ++round) {
    RoundReport rep;
    rep.round = round;
    subset = sample_subset(unlabeled.size(), cfg.sample_frac, rng);
    rep.sampled = subset.size();
    result.window_at_round.push_back(window);
    for (auto i : subset) {
      if (pooled[i]) continue;
      if (auto agreed = ensemble_consensus(unlabeled[i], dict, chain, window, cfg.consensus)) {
        result.pool.push_back({std::move(*agreed), Provenance::consensus, round, i});
        pooled[i] = true;
        ++rep.admitted;
      }
    }
    rep.acceptance_rate = subset.empty() ? 0.0 : static_cast<double>(rep.admitted) / static_cast<double>(subset.size());
    rep.warning_no_consensus = rep.admitted == 0;
    auto samples = pool_samples(result.pool);
    for (std::size_t p = 0; p < cfg.passes_per_round; ++p) window_training_pass(window, samples, cfg.sigma, rng);
    rep.pool_size = result.pool.size();
    if (!heldout.empty()) rep.heldout_f1 = evaluate_tagger(window, heldout).f1;
    result.rounds.push_back(rep);
  }
  result.window = std::move(window);
  return result;
}

std::string self_train_report_json(const SelfTrainResult& r, const SelfTrainConfig& cfg) {
  json rounds = json::array();
  for (const auto& rep : r.rounds) {
    json j = {{"round", rep.round},
              {"sampled", rep.sampled},
              {"admitted", rep.admitted},
              {"pool_size", rep.pool_size},
              {"acceptance_rate", rep.acceptance_rate},
              {"warning_no_consensus", rep.warning_no_consensus}};
    j["heldout_f1"] = rep.heldout_f1 ? json(*rep.heldout_f1) : json(nullptr);
    rounds.push_back(std::move(j));
  }
  return json{{"tagger", "window"},
              {"note", "window tagger is a hashed-feature per-token logistic model standing in for a contextual tagger"},
              {"rng_seed", cfg.rng_seed},
              {"sigma", cfg.sigma},
              {"iters", cfg.iters},
              {"sample_frac", cfg.sample_frac},
              {"consensus", cfg.consensus == ConsensusMode::sentence ? "sentence" : "span"},
              {"rounds", std::move(rounds)}}
      .dump(1);
}

SpanScore span_f1(std::span<const TaggedSequence> gold, std::span<const std::vector<Tag>> predicted) {
  if (gold.size() != predicted.size()) throw Error("span_f1: gold/predicted size mismatch");
  std::size_t tp = 0, n_gold = 0, n_pred = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto g = spans_of(gold[i].labels);
    auto p = spans_of(predicted[i]);
    n_gold += g.size();
    n_pred += p.size();
    for (const auto& s : p)
      if (std::find(g.begin(), g.end(), s) != g.end()) ++tp;
  }
  SpanScore s;
  s.precision = n_pred ? static_cast<double>(tp) / static_cast<double>(n_pred) : 0.0;
  s.recall = n_gold ? static_cast<double>(tp) / static_cast<double>(n_gold) : 0.0;
  s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  if (n_gold == 0 && n_pred == 0) s.precision = s.recall = s.f1 = 1.0;
  return s;
}

}  // namespace conceptforge
