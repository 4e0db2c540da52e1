#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <optional>
#include <queue>
#include <thread>
#include <vector>

#include "scopf/solution_io.hpp"

namespace scopf {

struct TaskMessage {
  int seq = 0;          // dispatch position in the ranked order
  int contingency = 0;  // index into nc.contingencies
  int attempt = 0;
};

struct ResultMessage {
  int seq = 0;
  int contingency = 0;
  int attempt = 0;
  int worker = -1;
  bool crashed = false;  // worker died mid-solve; no usable record
  CtgRecord record;
  double wall = 0.0;
};

// Fixed set of solver threads fed from a shared queue. Results come back in
// completion order; callers that need a deterministic layout must reduce in
// task order themselves.
class WorkerPool {
public:
  using WorkFn = std::function<ResultMessage(const TaskMessage&, int worker)>;

  WorkerPool(int workers, WorkFn fn);
  ~WorkerPool();

  void submit(const TaskMessage& task);
  std::optional<ResultMessage> wait_result(double timeout_seconds);
  void stop();

private:
  void worker_main(int id);

  WorkFn fn_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable task_cv_, result_cv_;
  std::queue<TaskMessage> tasks_;
  std::queue<ResultMessage> results_;
  bool stop_ = false;
};

// Dedicated writer thread behind the incremental solutions file. The manager
// offers finished records; the writer batches whatever arrived while it was
// busy and rewrites the file once per cycle.
class SolutionWriter {
public:
  using WriteFn = std::function<void(std::vector<CtgRecord>&& batch)>;

  SolutionWriter(WriteFn fn, int delay_ms = 0);
  ~SolutionWriter();

  void offer(CtgRecord record);
  // Block until every offered record has been written, then stop the thread.
  void finish();

  int cycles() const;

private:
  void writer_main();

  WriteFn fn_;
  int delay_ms_ = 0;
  std::thread thread_;
  mutable std::mutex mu_;
  std::condition_variable cv_, idle_cv_;
  std::vector<CtgRecord> pending_;
  bool busy_ = false;
  bool stop_ = false;
  int cycles_ = 0;
};

}  // namespace scopf
