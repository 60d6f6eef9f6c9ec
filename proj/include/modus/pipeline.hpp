#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modus/datagen.hpp"
#include "modus/evalkit.hpp"
#include "modus/strategies.hpp"

namespace modus {

struct SolveOptions {
  StrategyKind strategy = StrategyKind::GoalDirected;
  std::optional<int> budget;
  // Per-question seeds are derived from this and the question's position.
  std::optional<std::uint64_t> shuffle_seed;
};

struct TraceRecord {
  std::string question_id;
  InferenceTrace trace;
};

Prediction predict(const Theory& theory, const Question& question, const SolveOptions& options,
                   std::optional<std::uint64_t> shuffle_seed = std::nullopt,
                   InferenceTrace* trace = nullptr);

// Predictions in dataset order regardless of `jobs`.
std::vector<Prediction> predict_dataset(std::span<const Instance> dataset, const SolveOptions& options,
                                        int jobs = 1, std::vector<TraceRecord>* traces = nullptr);

// Calls fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace modus
