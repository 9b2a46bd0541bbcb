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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "mrc/act_lra.hpp"
#include "mrc/allocator.hpp"
#include "mrc/bundle_io.hpp"
#include "mrc/compensation.hpp"
#include "mrc/cost.hpp"
#include "mrc/linalg.hpp"
#include "mrc/pipeline.hpp"
#include "mrc/quant.hpp"
#include "mrc/random.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using mrc::DenseMatrix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <typename... Args>
std::string format(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t uniform(mrc::Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// 1. Eckart-Young tail identity.
Outcome tail_identity() {
  mrc::Rng rng(101);
  double worst = 0.0;
  std::size_t checks = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t rows = uniform(rng, 2, 16), cols = uniform(rng, 2, 16);
    const DenseMatrix m = oracle::random_matrix(rng, rows, cols);
    const auto full = mrc::svd(m);
    const auto sigma = oracle::singular_values(m);
    const double scale = oracle::sq_norm(m);
    for (std::size_t r = 1; r <= std::min(rows, cols); ++r) {
      const double err = oracle::sq_norm(oracle::sub(m, mrc::reconstruct(mrc::truncate(full, r))));
      const double tail = oracle::tail_energy(sigma, r);
      // relative to the tail; the floor covers r = full rank, where both are rounding noise
      worst = std::max(worst, std::abs(err - tail) / std::max(tail, 1e-6 * scale));
      ++checks;
    }
  }
  return {worst <= 1e-9, format("%zu (matrix, rank) pairs, worst relative gap %.2e", checks, worst)};
}

// 2. Activation-aware factors attain the tail energy of x_rep W.
Outcome activation_aware_optimality() {
  mrc::Rng rng(202);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t s = uniform(rng, 2, 20), n = uniform(rng, 2, 16), d = uniform(rng, 2, 16);
    mrc::LayerRecord layer;
    layer.name = "w";
    layer.weight = oracle::random_matrix(rng, n, d);
    const DenseMatrix x = oracle::random_matrix(rng, s, n);
    const DenseMatrix xw = oracle::mul(x, layer.weight);
    const auto sigma = oracle::singular_values(xw);
    const std::size_t r = uniform(rng, 1, std::max<std::size_t>(1, std::min(s, d) - 1));
    const auto f = mrc::factorize(layer, x, r);
    const double err = oracle::sq_norm(oracle::sub(oracle::mul(x, f.product()), xw));
    const double tail = oracle::tail_energy(sigma, r);
    worst = std::max(worst, std::abs(err - tail) / std::max(tail, 1e-6 * oracle::sq_norm(xw)));
  }
  return {worst <= 1e-7, format("50 pairs, worst relative gap %.2e", worst)};
}

// 3. Activation-aware beats plain weight SVD at every rank fraction.
Outcome beats_plain_svd() {
  std::size_t wins = 0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    mrc::SyntheticSpec spec;
    spec.seed = 3000 + static_cast<std::uint64_t>(t);
    const auto bundle = mrc::gen_synthetic(spec);
    bool all = true;
    for (const auto& layer : bundle.layers) {
      const auto& samples = bundle.proxy.stack(layer.name).samples;
      const DenseMatrix x_rep = mrc::representative_input(bundle.proxy, layer.name);
      const std::size_t k = std::min(layer.n(), layer.d());
      for (double fraction : {0.2, 0.4, 0.6, 0.8}) {
        const auto r = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(k)));
        const double aware = oracle::output_error(layer.weight,
                                                  mrc::factorize(layer, x_rep, r).product(), samples);
        const double plain =
            oracle::output_error(layer.weight, mrc::plain_factorize(layer, r).product(), samples);
        all = all && aware < plain;
      }
    }
    wins += all;
  }
  const double rate = static_cast<double>(wins) / trials;
  return {rate >= 0.95, format("%zu/%d trials win at all four fractions on all layers", wins, trials)};
}

// 4. Closed-form gradients against central differences.
Outcome gradient_check() {
  mrc::Rng rng(404);
  std::size_t bad = 0, entries = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t s = uniform(rng, 1, 6), n = uniform(rng, 2, 7), d = uniform(rng, 2, 7);
    const std::size_t q = uniform(rng, 1, 3), count = uniform(rng, 1, 4);
    std::vector<mrc::NormalizedPair> pairs;
    for (std::size_t i = 0; i < count; ++i) {
      pairs.push_back({oracle::random_matrix(rng, s, n), oracle::random_matrix(rng, s, d)});
    }
    const DenseMatrix g = oracle::random_matrix(rng, n, q);
    const DenseMatrix y = oracle::random_matrix(rng, d, q);
    const auto grad = mrc::gradients(pairs, g, y);
    const DenseMatrix fd_g = oracle::finite_difference(
        [&](const DenseMatrix& v) { return oracle::loss(pairs, v, y); }, g, 1e-6);
    const DenseMatrix fd_y = oracle::finite_difference(
        [&](const DenseMatrix& v) { return oracle::loss(pairs, g, v); }, y, 1e-6);
    for (std::size_t i = 0; i < g.size(); ++i, ++entries) {
      bad += !oracle::rel_close(grad.dg.data()[i], fd_g.data()[i], 1e-4);
    }
    for (std::size_t i = 0; i < y.size(); ++i, ++entries) {
      bad += !oracle::rel_close(grad.dy.data()[i], fd_y.data()[i], 1e-4);
    }
  }
  return {bad == 0, format("100 instances, %zu of %zu entries outside 1e-4", bad, entries)};
}

// 5. Compensation efficacy and baseline ordering.
Outcome compensation_efficacy() {
  std::size_t layers = 0, beats_none = 0, beats_rank = 0;
  double low_rank = 0.0, diagonal = 0.0, structured = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    mrc::SyntheticSpec spec;
    spec.seed = 5000 + seed;
    const auto model = mrc::gen_synthetic(spec);
    mrc::PipelineConfig config;
    config.seed = seed;
    config.workers = 4;
    const auto result = mrc::compress(model, config);
    const auto& split = result.bundle.split;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      const auto& layer = model.layers[l];
      const auto& cl = result.bundle.layers[l];
      const auto& stack = model.proxy.stacks[l];
      std::vector<DenseMatrix> calib, held;
      for (std::size_t i : split.calibration) calib.push_back(stack.samples[i]);
      for (std::size_t i : split.held_out) held.push_back(stack.samples[i]);

      const DenseMatrix uv = cl.factors.product();
      const double none = oracle::output_error(layer.weight, uv, held);
      const double with = oracle::output_error(layer.weight, uv + cl.compensation->product(), held);
      const DenseMatrix x_rep = mrc::representative_input(stack, split.calibration);
      const double extra = oracle::output_error(
          layer.weight, mrc::factorize(layer, x_rep, cl.rank() + cl.comp_rank()).product(), held);
      ++layers;
      beats_none += with < none;
      beats_rank += with < extra;

      const std::size_t budget = cl.comp_rank() * (cl.n + cl.d);
      const auto diag = mrc::baseline_compensation(mrc::ResidualBaseline::Diagonal, layer,
                                                   cl.factors, calib, budget);
      const auto cols = mrc::baseline_compensation(mrc::ResidualBaseline::StructuredSparse, layer,
                                                   cl.factors, calib, budget);
      low_rank += with;
      diagonal += oracle::output_error(layer.weight, uv + diag, held);
      structured += oracle::output_error(layer.weight, uv + cols, held);
    }
  }
  const double n = static_cast<double>(layers);
  const bool pass = beats_none >= 0.9 * n && beats_rank >= 0.9 * n && low_rank < diagonal &&
                    low_rank < structured;
  return {pass, format("below none %zu/%zu, below extra rank %zu/%zu; mean residual low-rank "
                       "%.4g, structured %.4g, diagonal %.4g",
                       beats_none, layers, beats_rank, layers, low_rank / n, structured / n,
                       diagonal / n)};
}

// 6. Greedy allocation against exhaustive search.
Outcome allocator_near_optimal() {
  std::size_t near = 0, psi_ok = 0, small = 0;
  const int instances = 50;
  for (int t = 0; t < instances; ++t) {
    mrc::SyntheticSpec spec;
    spec.seed = 6000 + static_cast<std::uint64_t>(t);
    spec.layers = 3;
    const bool wide = t % 2 == 0;
    spec.n = wide ? 12 : 16;
    spec.d = 16;
    spec.tokens = wide ? 24 : 32;
    spec.samples = 8;
    spec.spectrum_decay = wide ? 0.85 : 0.9;
    const auto bundle = mrc::gen_synthetic(spec);
    const auto shapes = mrc::layer_shapes(bundle);
    std::vector<mrc::SingularSpectrum> spectra;
    std::vector<std::vector<double>> sigmas;
    for (const auto& layer : bundle.layers) {
      spectra.push_back(mrc::activation_aware_spectrum(
          layer, mrc::representative_input(bundle.proxy, layer.name)));
      sigmas.push_back(spectra.back().sigma);
    }
    const auto brute = oracle::brute_force_allocation(shapes, sigmas, 2.0, 0, {1, 1, 1});
    small += brute.feasible <= 1000;
    const auto a = mrc::allocate(shapes, spectra, 2.0, {});
    double objective = 0.0;
    for (std::size_t l = 0; l < 3; ++l) objective += mrc::energy_loss(spectra[l], a.ranks[l]);
    near += objective <= 1.1 * brute.best_objective;
    psi_ok += mrc::psi(shapes, a.ranks) >= 2.0;
  }
  const bool pass = near >= 0.9 * instances && psi_ok == instances && small == instances;
  return {pass, format("within 10%%: %zu/%d, psi >= alpha: %zu/%d, grids <= 1000 feasible: %zu/%d",
                       near, instances, psi_ok, instances, small, instances)};
}

// 7. Schedule semantics.
Outcome schedule_semantics() {
  const mrc::ScheduleParams p{12345.0, 2345.0, 80.0, 500};
  const bool start = mrc::schedule(p, 0.0) == p.n0;
  const double expected = p.n_target + (p.n0 - p.n_target) / std::exp(1.0);
  const double at_gamma = std::abs(mrc::schedule(p, 80.0) - expected) / expected;
  double worst = 0.0;
  for (std::size_t horizon : {1u, 7u, 80u, 250u, 500u}) {
    double sum = 0.0;
    for (std::size_t t = 1; t <= horizon; ++t) sum += mrc::removal_at(p, t);
    const double drop = p.n0 - mrc::schedule(p, static_cast<double>(horizon));
    worst = std::max(worst, std::abs(sum - drop) / drop);
  }
  return {start && at_gamma <= 1e-9 && worst <= 1e-9,
          format("tau(0) exact: %s, tau(gamma) gap %.2e, telescoping gap %.2e",
                 start ? "yes" : "no", at_gamma, worst)};
}

// 8. Quantization error bound and size accounting.
Outcome quantization() {
  mrc::Rng rng(808);
  std::size_t violations = 0;
  for (unsigned bits = 2; bits <= 8; ++bits) {
    const DenseMatrix m = oracle::random_matrix(rng, 33, 1000, -4.0, 3.0);
    const auto q = mrc::quantize(m, bits);
    const auto back = mrc::dequantize(q);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      double lo = m(0, c), hi = m(0, c);
      for (std::size_t r = 0; r < m.rows(); ++r) {
        lo = std::min(lo, m(r, c));
        hi = std::max(hi, m(r, c));
      }
      const double step = (hi - lo) / static_cast<double>((1u << bits) - 1);
      for (std::size_t r = 0; r < m.rows(); ++r) {
        violations += std::abs(back(r, c) - m(r, c)) > step / 2 + 1e-12;
      }
    }
  }

  // Half-size factors of DeiT-like layers, 8-bit codes.
  mrc::CompressedBundle bundle;
  bundle.config.alpha = 2.0;
  bundle.proxy_samples = 2;
  bundle.split = {{0}, {1}};
  const std::pair<std::size_t, std::size_t> dims[] = {{768, 2304}, {768, 768}, {768, 3072},
                                                      {3072, 768}};
  std::size_t idx = 0;
  for (auto [n, d] : dims) {
    const std::size_t total = n * d / (2 * (n + d));
    const std::size_t q = mrc::comp_rank(n, d, 0.05);
    mrc::CompressedLayer l;
    l.name = "layer" + std::to_string(idx++);
    l.n = n;
    l.d = d;
    l.factors = {oracle::random_matrix(rng, n, total - q), oracle::random_matrix(rng, d, total - q)};
    l.compensation = mrc::CompensationFactors{oracle::random_matrix(rng, n, q),
                                              oracle::random_matrix(rng, d, q)};
    bundle.layers.push_back(std::move(l));
  }
  const auto size = mrc::size_report(mrc::quantize_bundle(bundle, {}));
  const double fraction = size.bytes / size.fp16_baseline_bytes;
  const bool size_ok = std::abs(fraction / 0.25 - 1.0) <= 0.02;
  return {violations == 0 && size_ok,
          format("%zu bound violations over 7000 channels; psi %.4f, 8-bit size %.4f of FP16",
                 violations, bundle.psi(), fraction)};
}

// 9. Cost model.
Outcome cost_model() {
  mrc::Rng rng(909);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double n = static_cast<double>(uniform(rng, 1, 1024));
    const double k = static_cast<double>(uniform(rng, 1, 4096));
    const double m = static_cast<double>(uniform(rng, 1, 4096));
    const double r = static_cast<double>(uniform(rng, 1, 512));
    const double q = static_cast<double>(uniform(rng, 1, 64));
    const double closed = n * k * m * (r + q) * (k + m) / (k * m);
    worst = std::max(worst, std::abs(mrc::factored_multiplications(n, k, m, r, q) - closed) / closed);
  }
  std::size_t misses = 0, cases = 0;
  for (int k = 1; k <= 16; ++k) {
    for (int m = 1; m <= 16; ++m) {
      for (int r = 1; r <= 16; ++r) {
        for (int q = 1; q <= 4; ++q) {
          if ((r + q) * (k + m) >= k * m) continue;
          ++cases;
          misses += !(mrc::cost_ratio(3, k, m, r, q) < 1.0);
        }
      }
    }
  }
  return {worst <= 1e-12 && misses == 0,
          format("worst relative gap %.2e; %zu/%zu sweep cases below break-even cost < 1",
                 worst, cases - misses, cases)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run(const std::string& args) {
  const std::string cmd = std::string(MRC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

// 10. Byte-identical compress runs.
Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "mrc_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string model = (dir / "model").string();
  if (run("gen --out " + model + " --seed 10") != 0) return {false, "gen failed"};
  for (const char* out : {"a", "b"}) {
    if (run("compress --bundle " + model + " --out " + (dir / out).string() + " --seed 10") != 0) {
      return {false, "compress failed"};
    }
  }
  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const fs::path other = dir / "b" / fs::relative(entry.path(), dir / "a");
    differing += !fs::exists(other) || read_file(entry.path()) != read_file(other);
  }
  std::size_t files_b = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "b")) {
    files_b += entry.is_regular_file();
  }
  fs::remove_all(dir);
  return {files > 0 && differing == 0 && files == files_b,
          format("%zu files, %zu differing", files, differing)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "tail identity", 10, tail_identity},
      {2, "activation-aware optimality", 10, activation_aware_optimality},
      {3, "activation-aware beats weight SVD", 120, beats_plain_svd},
      {4, "gradient correctness", 30, gradient_check},
      {5, "compensation efficacy", 600, compensation_efficacy},
      {6, "allocator near-optimality", 120, allocator_near_optimal},
      {7, "schedule semantics", 10, schedule_semantics},
      {8, "quantization bound and size", 60, quantization},
      {9, "cost model", 10, cost_model},
      {10, "end-to-end determinism", 120, determinism},
  };
  int failed = 0;
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_seconds;
    failed += !pass;
    std::printf("criterion %2d %-36s %s  %s (%.2fs, limit %.0fs)\n", c.id, c.name,
                pass ? "PASS" : "FAIL", o.detail.c_str(), secs, c.limit_seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
