#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uclab {

/// Monte Carlo plan: path i draws from counter-based stream (seed, i), so the
/// sample set is a pure function of the spec, independent of scheduling.
struct EnsembleSpec {
  int paths = 1;
  std::uint64_t seed = 0;
};

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  int m = 0;
  bool se_defined = false;
};

/// Vector-valued estimate over a shared index (usually the time grid).
struct TraceEstimate {
  std::vector<double> mean;
  std::vector<double> se;
  int m = 0;
  bool se_defined = false;
};

/// Failures collected across paths; carries the first failing path index.
class EnsembleError : public std::runtime_error {
 public:
  EnsembleError(std::string msg, std::vector<int> failed)
      : std::runtime_error(std::move(msg)), failed_paths(std::move(failed)) {}
  std::vector<int> failed_paths;
};

// Process-wide worker pool size (0 = hardware concurrency). The reduction is a
// fixed-shape pairwise tree over path indices, so results do not depend on it.
void set_worker_count(int workers);
int worker_count();

// Per-path sample writer: fills `out` (length fixed by the caller) for one path.
using PathSampler = std::function<void(int path_index, std::span<double> out)>;
// Called once per worker thread; the returned sampler may own scratch state.
using WorkerFactory = std::function<PathSampler()>;

/// Raw per-path samples, row r = path r. Retained when callers need
/// common-random-number reuse or delta-method standard errors.
struct SampleMatrix {
  int paths = 0;
  int width = 0;
  std::vector<double> data; // paths x width, row-major

  double at(int path, int col) const { return data[static_cast<std::size_t>(path) * width + col]; }
  // Column mean by fixed-shape pairwise reduction.
  double col_mean(int col) const;
  // Standard error of the column mean (sample stdev / sqrt(paths)).
  double col_se(int col, double mean) const;
};

// Evaluates `width` samples per path in parallel; deterministic for a fixed spec.
SampleMatrix sample_paths(const EnsembleSpec& spec, int width, const WorkerFactory& make_worker);

TraceEstimate reduce(const SampleMatrix& samples);

Estimate expect(const EnsembleSpec& spec, const WorkerFactory& make_worker);
TraceEstimate expect_trace(const EnsembleSpec& spec, int length, const WorkerFactory& make_worker);

// Single-sampler conveniences (the sampler must be safe to call concurrently).
Estimate expect(const EnsembleSpec& spec, const std::function<double(int)>& per_path);

} // namespace uclab
