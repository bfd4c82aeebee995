#include "uclab/ensemble.hpp"

#include "uclab/grid.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace uclab {

namespace {
std::atomic<int> g_workers{0};
}

void set_worker_count(int workers) { g_workers.store(workers < 0 ? 0 : workers); }

int worker_count() {
  int w = g_workers.load();
  if (w > 0) return w;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace {
bool column_constant(const SampleMatrix& m, int col) {
  for (int r = 1; r < m.paths; ++r)
    if (m.at(r, col) != m.at(0, col)) return false;
  return true;
}
} // namespace

double SampleMatrix::col_mean(int col) const {
  // Path-independent integrands reproduce the single deterministic value
  // exactly, with no roundoff from the reduction.
  if (column_constant(*this, col)) return at(0, col);
  std::vector<double> column(paths);
  for (int r = 0; r < paths; ++r) column[r] = at(r, col);
  return pairwise_sum(column) / paths;
}

double SampleMatrix::col_se(int col, double mean) const {
  if (paths < 2 || column_constant(*this, col)) return 0.0;
  std::vector<double> dev(paths);
  for (int r = 0; r < paths; ++r) {
    const double d = at(r, col) - mean;
    dev[r] = d * d;
  }
  const double var = pairwise_sum(dev) / (paths - 1);
  return std::sqrt(var / paths);
}

SampleMatrix sample_paths(const EnsembleSpec& spec, int width, const WorkerFactory& make_worker) {
  if (spec.paths < 1) throw std::invalid_argument("sample_paths: need at least one path");
  if (width < 1) throw std::invalid_argument("sample_paths: need at least one sample per path");
  SampleMatrix out;
  out.paths = spec.paths;
  out.width = width;
  out.data.assign(static_cast<std::size_t>(spec.paths) * width, 0.0);

  const int workers = std::min(worker_count(), spec.paths);
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::vector<std::pair<int, std::string>> failures;

  auto run = [&]() {
    PathSampler sampler = make_worker();
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= spec.paths) break;
      try {
        sampler(i, std::span<double>(out.data.data() + static_cast<std::size_t>(i) * width,
                                     static_cast<std::size_t>(width)));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        failures.emplace_back(i, e.what());
      }
    }
  };

  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }

  if (!failures.empty()) {
    std::vector<int> idx;
    std::string msg = "ensemble: " + std::to_string(failures.size()) + " path(s) failed;";
    for (auto& [i, what] : failures) idx.push_back(i);
    msg += " first: path " + std::to_string(failures.front().first) + ": " + failures.front().second;
    throw EnsembleError(msg, std::move(idx));
  }
  return out;
}

TraceEstimate reduce(const SampleMatrix& samples) {
  TraceEstimate est;
  est.m = samples.paths;
  est.se_defined = samples.paths >= 2;
  est.mean.resize(samples.width);
  est.se.resize(samples.width);
  for (int c = 0; c < samples.width; ++c) {
    est.mean[c] = samples.col_mean(c);
    est.se[c] = samples.col_se(c, est.mean[c]);
  }
  return est;
}

Estimate expect(const EnsembleSpec& spec, const WorkerFactory& make_worker) {
  const auto samples = sample_paths(spec, 1, make_worker);
  Estimate e;
  e.m = spec.paths;
  e.se_defined = spec.paths >= 2;
  e.mean = samples.col_mean(0);
  e.se = samples.col_se(0, e.mean);
  return e;
}

TraceEstimate expect_trace(const EnsembleSpec& spec, int length, const WorkerFactory& make_worker) {
  return reduce(sample_paths(spec, length, make_worker));
}

Estimate expect(const EnsembleSpec& spec, const std::function<double(int)>& per_path) {
  return expect(spec, WorkerFactory([&per_path]() {
                  return PathSampler(
                      [&per_path](int i, std::span<double> out) { out[0] = per_path(i); });
                }));
}

} // namespace uclab
