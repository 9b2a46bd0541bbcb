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

// mrc: mixed-rank low-rank compression of linear layers.
//
//   mrc gen       --out DIR [--seed S] [--layers L] [--n N] [--d D] ...
//   mrc compress  --bundle DIR --out DIR [--config FILE] [--alpha A] ...
//   mrc evaluate  --original DIR --compressed DIR [--csv FILE]
//   mrc quantize  --compressed DIR --out DIR [--bits N] [--mode M] ...
//   mrc cost      --compressed DIR --seq-len N [--csv FILE]
//
// Failures print "error[<category>]: <message>" on stderr and exit with the
// category's code.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "mrc/bundle_io.hpp"
#include "mrc/error.hpp"
#include "mrc/model.hpp"
#include "mrc/pipeline.hpp"
#include "mrc/tensor_io.hpp"

namespace {

std::string dashed(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

int report_error(mrc::ErrorCategory category, const std::string& what) {
  std::cerr << "error[" << mrc::category_name(category) << "]: " << what << "\n";
  return mrc::exit_code(category);
}

struct GenArgs {
  std::string out;
  mrc::SyntheticSpec spec;
};

struct CompressArgs {
  std::string bundle;
  std::string out;
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

mrc::PipelineConfig resolve_config(const CompressArgs& args) {
  mrc::PipelineConfig config;
  if (!args.config_file.empty()) {
    mrc::apply_config_text(config, mrc::read_file(args.config_file));
  }
  for (const auto& [key, value] : args.overrides) {
    if (!value.empty()) mrc::apply_config_entry(config, key, value);
  }
  mrc::validate(config);
  return config;
}

int run_gen(const GenArgs& args) {
  mrc::ModelBundle bundle = mrc::gen_synthetic(args.spec);
  mrc::save_bundle(bundle, args.out);
  std::cout << "wrote " << bundle.layers.size() << " layers with "
            << bundle.proxy.sample_count() << " proxy samples to " << args.out << "\n";
  return 0;
}

int run_compress(const CompressArgs& args) {
  const mrc::PipelineConfig config = resolve_config(args);
  const mrc::ModelBundle model = mrc::load_bundle(args.bundle);
  const mrc::CompressionResult result = mrc::compress(model, config);
  mrc::save_compression(result, args.out);
  std::cout << mrc::read_file(std::filesystem::path(args.out) / "reports" / "summary.txt");
  return 0;
}

int run_evaluate(const std::string& original, const std::string& compressed,
                 const std::string& csv) {
  const mrc::ModelBundle model = mrc::load_bundle(original);
  const mrc::CompressedBundle bundle = mrc::load_compressed(compressed);
  const mrc::EvaluationReport report = mrc::evaluate(model, bundle);
  const std::string table = mrc::evaluation_csv(report);
  if (csv.empty()) {
    std::cout << table;
  } else {
    mrc::write_file(csv, table);
  }
  std::cout << mrc::evaluation_summary(report);
  return 0;
}

int run_quantize(const std::string& compressed, const std::string& out,
                 const mrc::QuantSettings& settings, const std::string& original,
                 const std::string& report_file) {
  const mrc::CompressedBundle bundle = mrc::load_compressed(compressed);
  const mrc::CompressedBundle quantized = mrc::quantize_bundle(bundle, settings);
  mrc::save_compressed(quantized, out);

  std::string report = "bits: " + std::to_string(settings.bits) + "\n";
  report += "mode: " + std::string(mrc::to_string(settings.mode)) + "\n";
  report += "channel_axis: " + std::string(mrc::to_string(settings.axis)) + "\n";
  report += mrc::size_summary(mrc::size_report(quantized));
  if (!original.empty()) {
    const mrc::ModelBundle model = mrc::load_bundle(original);
    const mrc::EvaluationReport before = mrc::evaluate(model, bundle);
    const mrc::EvaluationReport after = mrc::evaluate(model, quantized);
    char buf[128];
    std::snprintf(buf, sizeof buf, "error_sum_before_quantization: %.17g\n", before.sum_with);
    report += buf;
    std::snprintf(buf, sizeof buf, "error_sum_after_quantization: %.17g\n", after.sum_with);
    report += buf;
    std::snprintf(buf, sizeof buf, "error_sum_increase: %.17g\n", after.sum_with - before.sum_with);
    report += buf;
  }
  if (!report_file.empty()) mrc::write_file(report_file, report);
  std::cout << report;
  return 0;
}

int run_cost(const std::string& compressed, std::size_t seq_len, const std::string& csv) {
  const mrc::CompressedBundle bundle = mrc::load_compressed(compressed);
  const mrc::CostReport report = mrc::cost_report(bundle, seq_len);
  const std::string table = mrc::cost_csv(report);
  if (!csv.empty()) mrc::write_file(csv, table);
  std::cout << table;
  for (const mrc::LayerCost& c : report.layers) {
    if (c.flagged) std::cout << "warning: layer '" << c.layer << "' is not cheaper factored\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-rank low-rank compression of linear layers"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic model bundle");
  gen_cmd->add_option("--out", gen.out, "Output bundle directory")->required();
  gen_cmd->add_option("--seed", gen.spec.seed, "Random seed");
  gen_cmd->add_option("--layers", gen.spec.layers, "Number of layers");
  gen_cmd->add_option("--n", gen.spec.n, "Input width of even layers");
  gen_cmd->add_option("--d", gen.spec.d, "Output width of even layers");
  gen_cmd->add_option("--tokens", gen.spec.tokens, "Rows per activation sample");
  gen_cmd->add_option("--samples", gen.spec.samples, "Proxy samples per layer");
  gen_cmd->add_option("--decay", gen.spec.spectrum_decay, "Weight singular value decay");

  CompressArgs compress;
  auto* compress_cmd = app.add_subcommand("compress", "Compress a model bundle");
  compress_cmd->add_option("--bundle", compress.bundle, "Input model bundle")->required();
  compress_cmd->add_option("--out", compress.out, "Output compressed bundle")->required();
  compress_cmd->add_option("--config", compress.config_file, "key=value config file");
  for (const std::string& key : mrc::config_keys()) {
    compress_cmd->add_option("--" + dashed(key), compress.overrides[key],
                             "Overrides '" + key + "' from the config file");
  }

  std::string eval_original, eval_compressed, eval_csv;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a compressed bundle");
  eval_cmd->add_option("--original", eval_original, "Original model bundle")->required();
  eval_cmd->add_option("--compressed", eval_compressed, "Compressed bundle")->required();
  eval_cmd->add_option("--csv", eval_csv, "Write the per-layer table here");

  std::string q_in, q_out, q_original, q_report, q_mode = "affine_minmax", q_axis = "column";
  mrc::QuantSettings q_settings;
  auto* quant_cmd = app.add_subcommand("quantize", "Quantize the factors of a compressed bundle");
  quant_cmd->add_option("--compressed", q_in, "Compressed bundle")->required();
  quant_cmd->add_option("--out", q_out, "Output quantized bundle")->required();
  quant_cmd->add_option("--bits", q_settings.bits, "Code width in bits (2..8)");
  quant_cmd->add_option("--mode", q_mode, "affine_minmax or paper_literal");
  quant_cmd->add_option("--channel-axis", q_axis, "column or row");
  quant_cmd->add_option("--original", q_original, "Original bundle, to report the error change");
  quant_cmd->add_option("--report", q_report, "Write the size report here");

  std::string cost_in, cost_csv;
  std::size_t seq_len = 0;
  auto* cost_cmd = app.add_subcommand("cost", "Multiplication-count report");
  cost_cmd->add_option("--compressed", cost_in, "Compressed bundle")->required();
  cost_cmd->add_option("--seq-len", seq_len, "Rows of the layer input")->required();
  cost_cmd->add_option("--csv", cost_csv, "Write the table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(mrc::ErrorCategory::Argument, e.what());
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*compress_cmd) return run_compress(compress);
    if (*eval_cmd) return run_evaluate(eval_original, eval_compressed, eval_csv);
    if (*quant_cmd) {
      q_settings.mode = mrc::parse_quant_mode(q_mode);
      q_settings.axis = mrc::parse_channel_axis(q_axis);
      return run_quantize(q_in, q_out, q_settings, q_original, q_report);
    }
    if (*cost_cmd) return run_cost(cost_in, seq_len, cost_csv);
  } catch (const mrc::Error& e) {
    return report_error(e.category(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(mrc::ErrorCategory::Io, e.what());
  }
  return 1;
}
