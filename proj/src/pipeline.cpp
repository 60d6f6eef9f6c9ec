#include "modus/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace modus {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

Prediction predict(const Theory& theory, const Question& question, const SolveOptions& options,
                   std::optional<std::uint64_t> shuffle_seed, InferenceTrace* trace_out) {
  auto strategy = make_strategy(options.strategy, shuffle_seed);
  auto trace = run(theory, question.statement, *strategy, options.budget);
  const auto verdict = solve(theory, question.statement, trace);
  Prediction p;
  p.question_id = question.id;
  p.label = verdict.label;
  if (verdict.proof) p.proof = verdict.proof->canonical_form();
  for (const auto& s : trace.steps) p.generated.push_back(render(s.conclusion.atom));
  p.composer_calls = trace.composer_calls;
  if (trace_out) *trace_out = std::move(trace);
  return p;
}

std::vector<Prediction> predict_dataset(std::span<const Instance> dataset, const SolveOptions& options,
                                        int jobs, std::vector<TraceRecord>* traces) {
  std::vector<std::pair<const Instance*, const Question*>> items;
  for (const auto& in : dataset) {
    for (const auto& q : in.questions) items.emplace_back(&in, &q);
  }
  std::vector<Prediction> preds(items.size());
  std::vector<TraceRecord> recs(traces ? items.size() : 0);
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    std::optional<std::uint64_t> seed;
    if (options.shuffle_seed) seed = mix_seed(*options.shuffle_seed, i);
    InferenceTrace trace;
    preds[i] = predict(items[i].first->theory, *items[i].second, options, seed,
                       traces ? &trace : nullptr);
    if (traces) recs[i] = {items[i].second->id, std::move(trace)};
  });
  if (traces) *traces = std::move(recs);
  return preds;
}

}  // namespace modus
