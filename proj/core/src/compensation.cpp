/*
 * Copyright (c) 2026 The mrc Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mrc/compensation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mrc/error.hpp"
#include "mrc/random.hpp"

namespace mrc {

namespace {

void require_pairs(std::span<const NormalizedPair> pairs, const DenseMatrix& g,
                   const DenseMatrix& y, const char* op) {
  if (pairs.empty()) throw ArgumentError(std::string(op) + ": empty batch");
  if (g.cols() != y.cols()) throw DimensionMismatchError(std::string(op) + ": g and y rank differ");
  for (const NormalizedPair& p : pairs) {
    if (p.a.cols() != g.rows() || p.b.cols() != y.rows() || p.a.rows() != p.b.rows()) {
      throw DimensionMismatchError(std::string(op) + ": pair shape does not match g, y");
    }
  }
}

bool finite(const DenseMatrix& m) { return m.all_finite(); }

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<NormalizedPair> normalize_all(const LayerRecord& layer, const LowRankFactors& factors,
                                          std::span<const DenseMatrix> samples,
                                          std::size_t& skipped) {
  const DenseMatrix residual = layer.weight - factors.product();
  std::vector<NormalizedPair> pairs;
  pairs.reserve(samples.size());
  skipped = 0;
  for (const DenseMatrix& x : samples) {
    if (auto p = normalize_sample(x, layer.weight, residual)) {
      pairs.push_back(std::move(*p));
    } else {
      ++skipped;
    }
  }
  return pairs;
}

}  // namespace

std::size_t comp_rank(std::size_t n, std::size_t d, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError("comp_rank: budget fraction must lie in (0, 1)");
  }
  const double q = std::floor(fraction * static_cast<double>(n) * static_cast<double>(d) /
                              static_cast<double>(n + d));
  return std::max<std::size_t>(1, static_cast<std::size_t>(q));
}

std::optional<NormalizedPair> normalize_sample(const DenseMatrix& x, const LayerRecord& layer,
                                               const LowRankFactors& factors) {
  return normalize_sample(x, layer.weight, layer.weight - factors.product());
}

std::optional<NormalizedPair> normalize_sample(const DenseMatrix& x, const DenseMatrix& weight,
                                               const DenseMatrix& residual_weight) {
  const double norm = std::sqrt(squared_norm(matmul(x, weight)));
  if (norm == 0.0) return std::nullopt;
  const double inv = 1.0 / norm;
  return NormalizedPair{x * inv, matmul(x, residual_weight) * inv};
}

namespace {

using PairView = std::span<const NormalizedPair* const>;

std::vector<const NormalizedPair*> view_of(std::span<const NormalizedPair> pairs) {
  std::vector<const NormalizedPair*> v;
  v.reserve(pairs.size());
  for (const NormalizedPair& p : pairs) v.push_back(&p);
  return v;
}

// Sufficient statistics of a set of pairs: sum a^T a, sum a^T b and
// sum ||b||^2. The loss and both gradients only depend on these.
struct Stats {
  DenseMatrix ata;
  DenseMatrix atb;
  double btb = 0.0;
  std::size_t count = 0;
};

Stats stats_of(const NormalizedPair& p) {
  return Stats{matmul_tn(p.a, p.a), matmul_tn(p.a, p.b), squared_norm(p.b), 1};
}

Stats sum_stats(std::span<const Stats* const> parts) {
  Stats out = *parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    out.ata += parts[i]->ata;
    out.atb += parts[i]->atb;
    out.btb += parts[i]->btb;
    out.count += parts[i]->count;
  }
  return out;
}

Stats stats_of(PairView pairs) {
  std::vector<Stats> each;
  each.reserve(pairs.size());
  for (const NormalizedPair* p : pairs) each.push_back(stats_of(*p));
  std::vector<const Stats*> ptrs;
  for (const Stats& st : each) ptrs.push_back(&st);
  return sum_stats(ptrs);
}

double trace_product(const DenseMatrix& x, const DenseMatrix& y) {
  // tr(x^T y) for equally shaped x, y
  double t = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) t += x.data()[i] * y.data()[i];
  return t;
}

// Loss and, optionally, gradients. With E = a g y^T - b summed over pairs,
// P = (a^T a) g, K = g^T P and C = (a^T b)^T g:
//   ||E||^2   = tr(y^T y K) - 2 tr(y^T C) + ||b||^2
//   a^T E y   = P (y^T y) - (a^T b) y
//   E^T a g   = y K - C
double evaluate_stats(const Stats& st, const DenseMatrix& g, const DenseMatrix& y,
                      Gradients* grad) {
  const DenseMatrix p = matmul(st.ata, g);
  const DenseMatrix k = matmul_tn(g, p);
  const DenseMatrix c = matmul_tn(st.atb, g);
  const DenseMatrix yty = matmul_tn(y, y);
  const double inv = 1.0 / static_cast<double>(st.count);
  const double sum = trace_product(yty, k) - 2.0 * trace_product(y, c) + st.btb;
  if (grad != nullptr) {
    grad->dg = (matmul(p, yty) - matmul(st.atb, y)) * (2.0 * inv);
    grad->dy = (matmul(y, k) - c) * (2.0 * inv);
  }
  return std::max(sum, 0.0) * inv;
}

double loss_of(PairView pairs, const DenseMatrix& g, const DenseMatrix& y) {
  return evaluate_stats(stats_of(pairs), g, y, nullptr);
}

Gradients gradients_of(PairView pairs, const DenseMatrix& g, const DenseMatrix& y) {
  Gradients out;
  evaluate_stats(stats_of(pairs), g, y, &out);
  return out;
}

}  // namespace

double loss(std::span<const NormalizedPair> pairs, const DenseMatrix& g, const DenseMatrix& y) {
  require_pairs(pairs, g, y, "loss");
  return loss_of(view_of(pairs), g, y);
}

Gradients gradients(std::span<const NormalizedPair> pairs, const DenseMatrix& g,
                    const DenseMatrix& y) {
  require_pairs(pairs, g, y, "gradients");
  return gradients_of(view_of(pairs), g, y);
}

CompensationResult compensate(const LayerRecord& layer, const LowRankFactors& factors,
                              std::span<const DenseMatrix> samples, std::size_t q,
                              const GdConfig& config) {
  if (samples.empty()) throw ArgumentError("layer '" + layer.name + "': empty calibration proxy");
  if (q < 1 || q >= factors.rank()) {
    throw ArgumentError("layer '" + layer.name + "': compensation rank " + std::to_string(q) +
                        " must be in [1, " + std::to_string(factors.rank()) + ")");
  }
  if (!(config.learning_rate > 0.0) || config.iterations < 1 || config.batch_size < 1) {
    throw ArgumentError("compensate: learning_rate > 0, iterations >= 1, batch_size >= 1 required");
  }

  CompensationResult result;
  const std::vector<NormalizedPair> pairs =
      normalize_all(layer, factors, samples, result.log.skipped_samples);
  if (pairs.empty()) {
    throw ArgumentError("layer '" + layer.name + "': every calibration sample has zero output");
  }

  Rng rng(config.seed);
  DenseMatrix g = gaussian_matrix(rng, layer.n(), q, config.init_stddev);
  DenseMatrix y(layer.d(), q);
  const DenseMatrix g_init = g;

  result.log.initial_loss = loss(pairs, g, y);
  result.log.points.push_back({0, result.log.initial_loss, result.log.initial_loss});

  auto diverged = [&](std::size_t it) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", config.learning_rate);
    return DivergenceError("layer '" + layer.name + "': gradient descent diverged at iteration " +
                               std::to_string(it) + " with learning rate " + buf,
                           static_cast<long>(it), config.learning_rate);
  };

  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  std::vector<Stats> per_pair;
  per_pair.reserve(pairs.size());
  for (const NormalizedPair& p : pairs) per_pair.push_back(stats_of(p));
  std::vector<const Stats*> everything;
  for (const Stats& st : per_pair) everything.push_back(&st);
  const Stats all = sum_stats(everything);
  std::vector<const Stats*> batch;
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    if (cursor >= order.size()) {
      order = shuffled_indices(rng, pairs.size());
      cursor = 0;
    }
    const std::size_t take = std::min(config.batch_size, order.size() - cursor);
    batch.clear();
    for (std::size_t i = 0; i < take; ++i) batch.push_back(&per_pair[order[cursor + i]]);
    cursor += take;

    ConvergencePoint point;
    point.iteration = it;
    Gradients grad;
    point.batch_loss = evaluate_stats(sum_stats(batch), g, y, &grad);
    if (!std::isfinite(point.batch_loss) || !finite(grad.dg) || !finite(grad.dy)) {
      throw diverged(it);
    }
    g -= grad.dg * config.learning_rate;
    y -= grad.dy * config.learning_rate;

    if (it % config.checkpoint_every == 0 || it == config.iterations) {
      const double full = evaluate_stats(all, g, y, nullptr);
      if (!std::isfinite(full)) throw diverged(it);
      point.full_loss = full;
    }
    result.log.points.push_back(point);
  }

  result.log.final_loss = *result.log.points.back().full_loss;
  if (result.log.final_loss > result.log.initial_loss) {
    g = g_init;
    y = DenseMatrix(layer.d(), q);
    result.log.final_loss = result.log.initial_loss;
  }
  result.factors = CompensationFactors{std::move(g), std::move(y)};
  return result;
}

std::string convergence_csv(const std::string& layer, const CompensationLog& log) {
  std::string out;
  for (const ConvergencePoint& p : log.points) {
    out += layer + "," + std::to_string(p.iteration) + "," + fmt_double(p.batch_loss) + ",";
    if (p.full_loss) out += fmt_double(*p.full_loss);
    out += "\n";
  }
  return out;
}

std::string_view to_string(ResidualBaseline kind) noexcept {
  switch (kind) {
    case ResidualBaseline::UnstructuredSparse: return "sparse-unstructured";
    case ResidualBaseline::StructuredSparse: return "sparse-structured";
    case ResidualBaseline::Diagonal: return "diagonal";
  }
  return "unknown";
}

DenseMatrix baseline_compensation(ResidualBaseline kind, const LayerRecord& layer,
                                  const LowRankFactors& factors,
                                  std::span<const DenseMatrix> samples, std::size_t param_budget) {
  const std::size_t n = layer.n();
  const std::size_t d = layer.d();
  const DenseMatrix residual = layer.weight - factors.product();
  DenseMatrix z(n, d);
  if (param_budget == 0) return z;

  switch (kind) {
    case ResidualBaseline::UnstructuredSparse: {
      std::vector<std::size_t> idx(residual.size());
      std::iota(idx.begin(), idx.end(), 0);
      const std::size_t k = std::min(param_budget, idx.size());
      auto r = residual.data();
      std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(k), idx.end(),
                        [&](std::size_t a, std::size_t b) {
                          const double ma = std::abs(r[a]);
                          const double mb = std::abs(r[b]);
                          return ma != mb ? ma > mb : a < b;
                        });
      for (std::size_t i = 0; i < k; ++i) z.data()[idx[i]] = r[idx[i]];
      return z;
    }
    case ResidualBaseline::StructuredSparse: {
      std::size_t skipped = 0;
      const auto pairs = normalize_all(layer, factors, samples, skipped);
      std::vector<double> energy(d, 0.0);
      for (const NormalizedPair& p : pairs) {
        for (std::size_t s = 0; s < p.b.rows(); ++s) {
          auto row = p.b.row(s);
          for (std::size_t c = 0; c < d; ++c) energy[c] += row[c] * row[c];
        }
      }
      std::vector<std::size_t> cols(d);
      std::iota(cols.begin(), cols.end(), 0);
      const std::size_t k = std::clamp<std::size_t>(param_budget / n, 1, d);
      std::stable_sort(cols.begin(), cols.end(),
                       [&](std::size_t a, std::size_t b) { return energy[a] > energy[b]; });
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t r = 0; r < n; ++r) z(r, cols[i]) = residual(r, cols[i]);
      }
      return z;
    }
    case ResidualBaseline::Diagonal: {
      std::size_t skipped = 0;
      const auto pairs = normalize_all(layer, factors, samples, skipped);
      const std::size_t k = std::min(n, d);
      std::vector<double> num(k, 0.0);
      std::vector<double> den(k, 0.0);
      for (const NormalizedPair& p : pairs) {
        for (std::size_t s = 0; s < p.a.rows(); ++s) {
          for (std::size_t c = 0; c < k; ++c) {
            num[c] += p.a(s, c) * p.b(s, c);
            den[c] += p.a(s, c) * p.a(s, c);
          }
        }
      }
      // Keep the entries with the largest loss reduction num^2 / den.
      std::vector<std::size_t> entries(k);
      std::iota(entries.begin(), entries.end(), 0);
      auto gain = [&](std::size_t c) { return den[c] > 0.0 ? num[c] * num[c] / den[c] : 0.0; };
      std::stable_sort(entries.begin(), entries.end(),
                       [&](std::size_t a, std::size_t b) { return gain(a) > gain(b); });
      const std::size_t keep = std::min(param_budget, k);
      for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t c = entries[i];
        if (den[c] > 0.0) z(c, c) = num[c] / den[c];
      }
      return z;
    }
  }
  return z;
}

}  // namespace mrc
