#pragma once

// Canonical acceptance checks. Each criterion builds its own configs, runs
// them and reports a single measured value against a pinned tolerance.

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adascale/engine.hpp"
#include "adascale/parallel.hpp"

namespace adascale::acceptance {

inline constexpr int kCriteria = 12;

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  std::string relation;  ///< how measured compares with threshold, e.g. "<=" or ">="
  double threshold = 0.0;
  std::size_t seeds = 0;
  std::string detail;
};

/// Iteration count of one AdaScale run, kept for the iteration-count contract.
struct IterationRecord {
  std::int64_t T_SI = 0;
  int max_S = 1;
  std::int64_t iterations = 0;
  bool diverged = false;
};

class Context {
 public:
  explicit Context(ThreadPool* pool = nullptr) : pool_(pool) {}

  ThreadPool* pool() const { return pool_; }

  /// Records AdaScale traces; other traces are ignored.
  void note(const Trace& trace);
  void note(std::span<const Trace> traces);
  void note(std::int64_t T_SI, int max_S, std::int64_t iterations, bool diverged);
  std::vector<IterationRecord> records() const;

 private:
  ThreadPool* pool_;
  mutable std::mutex mu_;
  std::vector<IterationRecord> records_;
};

/// Throws ConfigError for ids outside 1..kCriteria.
Result run_criterion(int id, Context& ctx);
std::string_view criterion_name(int id);

/// Criteria in a suite: thm1 | thm2 | thm3 | prop1 | prop2 | gain | alignment | all.
/// The iteration-count contract (7) closes every suite. Throws ConfigError on
/// unknown names.
std::vector<int> suite_criteria(std::string_view suite);

/// "PASS c05 bound_satisfaction measured=... <= ... seeds=200 | detail"
std::string format_result(const Result& r);

}  // namespace adascale::acceptance
