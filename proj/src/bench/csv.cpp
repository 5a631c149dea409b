// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/bench.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace yolopar {
namespace {

constexpr std::array<std::string_view, 22> kColumns{
    "threads",        "schedule",        "chunk",          "affinity",
    "prob_threshold", "nms_threshold",   "background_threads", "input",
    "warmup_iters",   "measure_iters",   "gen_min_us",     "gen_median_us",
    "gen_mean_us",    "gen_p95_us",      "gen_max_us",     "total_min_us",
    "total_median_us", "total_mean_us",  "total_p95_us",   "total_max_us",
    "proposal_count", "equivalent",
};

std::string format_float(float v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string format_us(double v) {
  std::array<char, 64> buf{};
  const int len = std::snprintf(buf.data(), buf.size(), "%.3f", v);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void append_stats(std::string& row, const LatencyStats& s) {
  for (double v : {s.min_us, s.median_us, s.mean_us, s.p95_us, s.max_us}) {
    row += ',';
    row += format_us(v);
  }
}

// Splits one CSV record; `pos` is advanced past the record terminator.
std::vector<std::string> split_record(std::string_view text, std::size_t& pos) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  while (pos < text.size()) {
    const char ch = text[pos++];
    if (quoted) {
      if (ch == '"') {
        if (pos < text.size() && text[pos] == '"') {
          fields.back() += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch == '\n') {
      break;
    } else if (ch != '\r') {
      fields.back() += ch;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quoted field");
  return fields;
}

template <class T>
T parse_number(const std::string& field, std::string_view column) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::runtime_error("bad value '" + field + "' in column " + std::string(column));
  }
  return value;
}

LatencyStats parse_stats(const std::vector<std::string>& f, std::size_t first,
                         std::size_t samples) {
  LatencyStats s;
  s.min_us = parse_number<double>(f[first], kColumns[first]);
  s.median_us = parse_number<double>(f[first + 1], kColumns[first + 1]);
  s.mean_us = parse_number<double>(f[first + 2], kColumns[first + 2]);
  s.p95_us = parse_number<double>(f[first + 3], kColumns[first + 3]);
  s.max_us = parse_number<double>(f[first + 4], kColumns[first + 4]);
  s.samples = samples;
  return s;
}

BenchResult parse_row(const std::vector<std::string>& f) {
  if (f.size() != kColumns.size()) {
    throw std::runtime_error("expected " + std::to_string(kColumns.size()) + " fields, got " +
                             std::to_string(f.size()));
  }
  BenchResult r;
  BenchCase& c = r.bench_case;
  c.threads = parse_number<std::size_t>(f[0], kColumns[0]);
  const auto policy = parse_schedule_policy(f[1]);
  if (!policy) throw std::runtime_error("bad schedule '" + f[1] + "'");
  c.schedule.policy = *policy;
  if (f[2] != "auto") c.schedule.chunk = parse_number<std::size_t>(f[2], kColumns[2]);
  const auto affinity = parse_affinity_policy(f[3]);
  if (!affinity) throw std::runtime_error("bad affinity '" + f[3] + "'");
  c.affinity = *affinity;
  c.prob_threshold = parse_number<float>(f[4], kColumns[4]);
  c.nms_threshold = parse_number<float>(f[5], kColumns[5]);
  c.background_threads = parse_number<std::size_t>(f[6], kColumns[6]);
  const auto input = parse_input_source(f[7]);
  if (!input) throw std::runtime_error("bad input '" + f[7] + "'");
  c.input = *input;
  c.warmup_iters = parse_number<std::size_t>(f[8], kColumns[8]);
  c.measure_iters = parse_number<std::size_t>(f[9], kColumns[9]);
  r.proposal_gen = parse_stats(f, 10, c.measure_iters);
  r.total = parse_stats(f, 15, c.measure_iters);
  r.proposal_count = parse_number<std::size_t>(f[20], kColumns[20]);
  if (f[21] == "true") {
    r.equivalent = true;
  } else if (f[21] == "false") {
    r.equivalent = false;
  } else {
    throw std::runtime_error("bad equivalent flag '" + f[21] + "'");
  }
  return r;
}

}  // namespace

std::span<const std::string_view> csv_columns() noexcept { return kColumns; }

std::string to_csv(std::span<const BenchResult> results) {
  std::string out;
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (i) out += ',';
    out += kColumns[i];
  }
  out += '\n';
  for (const auto& r : results) {
    const BenchCase& c = r.bench_case;
    std::string row = std::to_string(c.threads);
    row += ',';
    row += to_string(c.schedule.policy);
    row += ',';
    row += c.schedule.chunk ? std::to_string(*c.schedule.chunk) : "auto";
    row += ',';
    row += to_string(c.affinity);
    row += ',' + format_float(c.prob_threshold);
    row += ',' + format_float(c.nms_threshold);
    row += ',' + std::to_string(c.background_threads);
    row += ',' + quote(describe(c.input));
    row += ',' + std::to_string(c.warmup_iters);
    row += ',' + std::to_string(c.measure_iters);
    append_stats(row, r.proposal_gen);
    append_stats(row, r.total);
    row += ',' + std::to_string(r.proposal_count);
    row += r.equivalent ? ",true" : ",false";
    out += row;
    out += '\n';
  }
  return out;
}

void emit_csv(std::span<const BenchResult> results, const std::filesystem::path& path) {
  const std::string text = to_csv(results);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<BenchResult> parse_csv(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line = 1;
  const auto header = split_record(text, pos);
  if (header.size() != kColumns.size() ||
      !std::equal(header.begin(), header.end(), kColumns.begin())) {
    throw std::runtime_error("line 1: unexpected CSV header");
  }
  std::vector<BenchResult> results;
  while (pos < text.size()) {
    ++line;
    const auto fields = split_record(text, pos);
    if (fields.size() == 1 && fields[0].empty()) continue;
    try {
      results.push_back(parse_row(fields));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(line) + ": " + e.what());
    }
  }
  return results;
}

std::vector<BenchResult> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace yolopar
