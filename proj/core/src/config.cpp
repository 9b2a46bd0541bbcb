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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>

#include "mrc/error.hpp"
#include "mrc/pipeline.hpp"

namespace mrc {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ArgumentError("config '" + std::string(key) + "': not a finite number: '" +
                        std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ArgumentError("config '" + std::string(key) + "': not a non-negative integer: '" +
                        std::string(text) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw ArgumentError("config '" + std::string(key) + "': not a boolean: '" + std::string(text) +
                      "'");
}

struct Entry {
  const char* key;
  std::function<void(PipelineConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"alpha", [](auto& c, auto k, auto v) { c.alpha = parse_double(k, v); },
       [](const auto& c) { return fmt(c.alpha); }},
      {"gamma", [](auto& c, auto k, auto v) { c.gamma = parse_double(k, v); },
       [](const auto& c) { return fmt(c.gamma); }},
      {"max_iters", [](auto& c, auto k, auto v) { c.max_iters = parse_unsigned(k, v); },
       [](const auto& c) { return std::to_string(c.max_iters); }},
      {"learning_rate", [](auto& c, auto k, auto v) { c.gd.learning_rate = parse_double(k, v); },
       [](const auto& c) { return fmt(c.gd.learning_rate); }},
      {"gd_iterations", [](auto& c, auto k, auto v) { c.gd.iterations = parse_unsigned(k, v); },
       [](const auto& c) { return std::to_string(c.gd.iterations); }},
      {"batch_size", [](auto& c, auto k, auto v) { c.gd.batch_size = parse_unsigned(k, v); },
       [](const auto& c) { return std::to_string(c.gd.batch_size); }},
      {"checkpoint_every",
       [](auto& c, auto k, auto v) { c.gd.checkpoint_every = parse_unsigned(k, v); },
       [](const auto& c) { return std::to_string(c.gd.checkpoint_every); }},
      {"init_stddev", [](auto& c, auto k, auto v) { c.gd.init_stddev = parse_double(k, v); },
       [](const auto& c) { return fmt(c.gd.init_stddev); }},
      {"compensation", [](auto& c, auto k, auto v) { c.compensation = parse_bool(k, v); },
       [](const auto& c) { return std::string(c.compensation ? "true" : "false"); }},
      {"comp_budget_fraction",
       [](auto& c, auto k, auto v) { c.comp_budget_fraction = parse_double(k, v); },
       [](const auto& c) { return fmt(c.comp_budget_fraction); }},
      {"proxy_cap", [](auto& c, auto k, auto v) { c.proxy_cap = parse_unsigned(k, v); },
       [](const auto& c) { return std::to_string(c.proxy_cap); }},
      {"calibration_fraction",
       [](auto& c, auto k, auto v) { c.calibration_fraction = parse_double(k, v); },
       [](const auto& c) { return fmt(c.calibration_fraction); }},
      {"rcond", [](auto& c, auto k, auto v) { c.rcond = parse_double(k, v); },
       [](const auto& c) { return fmt(c.rcond); }},
      {"bits",
       [](auto& c, auto k, auto v) { c.quant.bits = static_cast<unsigned>(parse_unsigned(k, v)); },
       [](const auto& c) { return std::to_string(c.quant.bits); }},
      {"quant_mode", [](auto& c, auto, auto v) { c.quant.mode = parse_quant_mode(v); },
       [](const auto& c) { return std::string(to_string(c.quant.mode)); }},
      {"channel_axis", [](auto& c, auto, auto v) { c.quant.axis = parse_channel_axis(v); },
       [](const auto& c) { return std::string(to_string(c.quant.axis)); }},
      {"seed", [](auto& c, auto k, auto v) { c.seed = parse_unsigned(k, v); },
       [](const auto& c) { return std::to_string(c.seed); }},
      {"workers", [](auto& c, auto k, auto v) { c.workers = parse_unsigned(k, v); },
       [](const auto& c) { return std::to_string(c.workers); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const Entry& e : entries()) out.emplace_back(e.key);
    return out;
  }();
  return keys;
}

void apply_config_entry(PipelineConfig& config, std::string_view key, std::string_view value) {
  for (const Entry& e : entries()) {
    if (key == e.key) {
      e.set(config, key, value);
      return;
    }
  }
  throw ArgumentError("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(PipelineConfig& config, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    try {
      apply_config_entry(config, key, value);
    } catch (const ArgumentError& e) {
      throw ArgumentError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string config_to_text(const PipelineConfig& config) {
  std::string out;
  for (const Entry& e : entries()) out += std::string(e.key) + " = " + e.get(config) + "\n";
  return out;
}

void validate(const PipelineConfig& c) {
  auto fail = [](const std::string& what) { throw ArgumentError("config: " + what); };
  if (!(c.alpha > 1.0) || !std::isfinite(c.alpha)) fail("alpha must be a finite value > 1");
  if (!(c.gamma > 0.0)) fail("gamma must be positive");
  if (c.max_iters == 0) fail("max_iters must be positive");
  if (!(c.gd.learning_rate > 0.0)) fail("learning_rate must be positive");
  if (c.gd.iterations == 0) fail("gd_iterations must be positive");
  if (c.gd.batch_size == 0) fail("batch_size must be positive");
  if (c.gd.checkpoint_every == 0) fail("checkpoint_every must be positive");
  if (!(c.gd.init_stddev >= 0.0)) fail("init_stddev must be non-negative");
  if (!(c.comp_budget_fraction > 0.0 && c.comp_budget_fraction < 1.0)) {
    fail("comp_budget_fraction must lie in (0, 1)");
  }
  if (!(c.calibration_fraction > 0.0 && c.calibration_fraction < 1.0)) {
    fail("calibration_fraction must lie in (0, 1)");
  }
  if (c.proxy_cap == 1) fail("proxy_cap must be 0 (no cap) or at least 2");
  if (!(c.rcond > 0.0 && c.rcond < 1.0)) fail("rcond must lie in (0, 1)");
  if (c.quant.bits < 2 || c.quant.bits > 8) fail("bits must lie in [2, 8]");
  if (c.workers == 0) fail("workers must be positive");
}

}  // namespace mrc
