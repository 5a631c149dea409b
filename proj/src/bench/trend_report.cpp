// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/bench.hpp>

#include <algorithm>
#include <cstdio>
#include <map>

namespace yolopar {
namespace {

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

// Rows measured without affinity pinning or background load.
bool is_baseline(const BenchResult& r) {
  return r.bench_case.affinity == AffinityPolicy::None && r.bench_case.background_threads == 0 &&
         r.proposal_gen.samples > 0;
}

template <class Pred, class Key>
std::optional<double> min_of(std::span<const BenchResult> results, Pred pred, Key key) {
  std::optional<double> best;
  for (const auto& r : results) {
    if (!pred(r)) continue;
    const double v = key(r);
    if (!best || v < *best) best = v;
  }
  return best;
}

GateResult speedup_gate(std::span<const BenchResult> results, const TrendOptions& options) {
  GateResult gate{"speedup", GateStatus::Skipped, ""};
  if (options.host_cores != 0 && options.host_cores < kSpeedupGateMinCores) {
    gate.detail = "host has " + std::to_string(options.host_cores) + " cores; needs >= " +
                  std::to_string(kSpeedupGateMinCores);
    return gate;
  }
  const auto gen_median = [](const BenchResult& r) { return r.proposal_gen.median_us; };
  const auto sequential = min_of(
      results, [](const BenchResult& r) { return is_baseline(r) && r.bench_case.threads == 1; },
      gen_median);
  const auto two_dynamic = min_of(
      results,
      [](const BenchResult& r) {
        return is_baseline(r) && r.bench_case.threads == 2 &&
               r.bench_case.schedule.policy == SchedulePolicy::Dynamic;
      },
      gen_median);
  if (!sequential || !two_dynamic) {
    gate.detail = "needs threads=1 and threads=2/dynamic results";
    return gate;
  }
  const double speedup = *two_dynamic > 0 ? *sequential / *two_dynamic : 0.0;
  gate.status = speedup >= kSpeedupGate ? GateStatus::Pass : GateStatus::Fail;
  gate.detail = fmt("threads=1 %.3f us, threads=2/dynamic best chunk %.3f us, speedup %.3fx",
                    *sequential, *two_dynamic, speedup) +
                fmt(" (>= %.2fx)", kSpeedupGate);
  return gate;
}

GateResult concavity_gate(std::span<const BenchResult> results) {
  GateResult gate{"concavity", GateStatus::Skipped, ""};
  bool evaluated = false;
  bool failed = false;

  for (auto policy : {SchedulePolicy::Static, SchedulePolicy::Dynamic}) {
    // threads -> chunk -> median proposal-generation latency
    std::map<std::size_t, std::map<std::size_t, double>> curves;
    for (const auto& r : results) {
      const auto& c = r.bench_case;
      if (!is_baseline(r) || c.schedule.policy != policy || !c.schedule.chunk || c.threads < 2) {
        continue;
      }
      curves[c.threads][*c.schedule.chunk] = r.proposal_gen.median_us;
    }
    // Prefer 4 threads, else the largest thread count with a usable curve.
    const std::map<std::size_t, double>* curve = nullptr;
    std::size_t threads = 0;
    auto usable = [](const std::map<std::size_t, double>& m) {
      return m.size() >= 3 && m.begin()->first == 1;
    };
    if (auto it = curves.find(4); it != curves.end() && usable(it->second)) {
      curve = &it->second;
      threads = 4;
    } else {
      for (auto it = curves.rbegin(); it != curves.rend(); ++it) {
        if (usable(it->second)) {
          curve = &it->second;
          threads = it->first;
          break;
        }
      }
    }
    if (!curve) continue;

    const auto low = curve->begin();
    const auto high = std::prev(curve->end());
    auto best = std::next(low);
    for (auto it = std::next(low); it != high; ++it) {
      if (it->second < best->second) best = it;
    }
    const bool ok = low->second >= best->second && high->second >= best->second;
    evaluated = true;
    failed |= !ok;
    if (!gate.detail.empty()) gate.detail += "; ";
    gate.detail += std::string(to_string(policy)) + " threads=" + std::to_string(threads) +
                   ": chunk " + std::to_string(low->first) + fmt(" %.3f us", low->second) +
                   ", best chunk " + std::to_string(best->first) + fmt(" %.3f us", best->second) +
                   ", chunk " + std::to_string(high->first) + fmt(" %.3f us", high->second) +
                   (ok ? "" : " (not concave)");
  }
  if (!evaluated) {
    gate.detail = "needs chunk=1, an interior chunk and a maximal chunk at threads >= 2";
    return gate;
  }
  gate.status = failed ? GateStatus::Fail : GateStatus::Pass;
  return gate;
}

GateResult oversubscription_gate(std::span<const BenchResult> results) {
  GateResult gate{"oversubscription", GateStatus::Skipped, ""};
  const auto p95 = [](const BenchResult& r) { return r.proposal_gen.p95_us; };
  const auto at = [&](std::size_t threads) {
    return min_of(
        results,
        [threads](const BenchResult& r) { return is_baseline(r) && r.bench_case.threads == threads; },
        p95);
  };
  const auto two = at(2);
  const auto thirty_two = at(32);
  if (!two || !thirty_two) {
    gate.detail = "needs threads=2 and threads=32 results";
    return gate;
  }
  gate.status = *thirty_two >= *two ? GateStatus::Pass : GateStatus::Fail;
  gate.detail = fmt("best p95 threads=32 %.3f us vs threads=2 %.3f us", *thirty_two, *two);
  return gate;
}

GateResult contention_gate(std::span<const BenchResult> results) {
  GateResult gate{"contention", GateStatus::Skipped, ""};
  std::size_t max_background = 0;
  for (const auto& r : results) {
    if (r.bench_case.threads == 4 && r.total.samples > 0) {
      max_background = std::max(max_background, r.bench_case.background_threads);
    }
  }
  if (max_background == 0) {
    gate.detail = "needs threads=4 results with background load";
    return gate;
  }

  std::optional<double> worst_ratio;
  for (const auto& loaded : results) {
    const auto& lc = loaded.bench_case;
    if (lc.threads != 4 || lc.background_threads != max_background || loaded.total.samples == 0) {
      continue;
    }
    for (const auto& idle : results) {
      const auto& ic = idle.bench_case;
      if (ic.threads != 4 || ic.background_threads != 0 || idle.total.samples == 0 ||
          ic.schedule != lc.schedule || ic.affinity != lc.affinity ||
          describe(ic.input) != describe(lc.input) || ic.prob_threshold != lc.prob_threshold) {
        continue;
      }
      const double ratio = idle.total.median_us > 0 ? loaded.total.median_us / idle.total.median_us : 0;
      if (!worst_ratio || ratio < *worst_ratio) {
        worst_ratio = ratio;
        gate.detail = fmt("threads=4 end-to-end median %.3f us unloaded, %.3f us with ",
                          idle.total.median_us, loaded.total.median_us) +
                      std::to_string(max_background) + fmt(" load threads: %.3fx", ratio) +
                      fmt(" (>= %.2fx)", kContentionGate);
      }
    }
  }
  if (!worst_ratio) {
    gate.detail = "no unloaded threads=4 result matches the loaded one";
    return gate;
  }
  gate.status = *worst_ratio >= kContentionGate ? GateStatus::Pass : GateStatus::Fail;
  return gate;
}

}  // namespace

const char* to_string(GateStatus status) noexcept {
  switch (status) {
    case GateStatus::Pass:
      return "pass";
    case GateStatus::Fail:
      return "fail";
    case GateStatus::Skipped:
      return "skipped";
  }
  return "?";
}

bool TrendReport::any_failed() const noexcept {
  return std::any_of(gates.begin(), gates.end(),
                     [](const GateResult& g) { return g.status == GateStatus::Fail; });
}

TrendReport trend_report(std::span<const BenchResult> results, const TrendOptions& options) {
  TrendReport report;
  report.gates.push_back(speedup_gate(results, options));
  report.gates.push_back(concavity_gate(results));
  report.gates.push_back(oversubscription_gate(results));
  report.gates.push_back(contention_gate(results));

  std::size_t inequivalent = 0;
  for (const auto& r : results) inequivalent += r.equivalent ? 0 : 1;

  report.text = "trend report over " + std::to_string(results.size()) + " results";
  if (inequivalent) report.text += " (" + std::to_string(inequivalent) + " not equivalent)";
  report.text += "\n";
  for (const auto& g : report.gates) {
    char line[64];
    std::snprintf(line, sizeof line, "  [%-7s] %-16s ", to_string(g.status), g.name.c_str());
    report.text += line + g.detail + "\n";
  }
  return report;
}

}  // namespace yolopar
