#include "scopf/pool.hpp"

#include <chrono>

namespace scopf {

WorkerPool::WorkerPool(int workers, WorkFn fn) : fn_(std::move(fn)) {
  threads_.reserve(workers);
  for (int i = 0; i < workers; ++i)
    threads_.emplace_back([this, i] { worker_main(i); });
}

WorkerPool::~WorkerPool() { stop(); }

void WorkerPool::submit(const TaskMessage& task) {
  {
    std::lock_guard<std::mutex> lk(mu_);
    tasks_.push(task);
  }
  task_cv_.notify_one();
}

std::optional<ResultMessage> WorkerPool::wait_result(double timeout_seconds) {
  std::unique_lock<std::mutex> lk(mu_);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeout_seconds));
  if (!result_cv_.wait_until(lk, deadline, [this] { return !results_.empty(); }))
    return std::nullopt;
  ResultMessage r = std::move(results_.front());
  results_.pop();
  return r;
}

void WorkerPool::stop() {
  {
    std::lock_guard<std::mutex> lk(mu_);
    if (stop_) return;
    stop_ = true;
  }
  task_cv_.notify_all();
  for (auto& t : threads_)
    if (t.joinable()) t.join();
}

void WorkerPool::worker_main(int id) {
  while (true) {
    TaskMessage task;
    {
      std::unique_lock<std::mutex> lk(mu_);
      task_cv_.wait(lk, [this] { return stop_ || !tasks_.empty(); });
      if (stop_) return;
      task = tasks_.front();
      tasks_.pop();
    }
    ResultMessage res = fn_(task, id);
    res.seq = task.seq;
    res.contingency = task.contingency;
    res.attempt = task.attempt;
    res.worker = id;
    {
      std::lock_guard<std::mutex> lk(mu_);
      results_.push(std::move(res));
    }
    result_cv_.notify_all();
  }
}

SolutionWriter::SolutionWriter(WriteFn fn, int delay_ms)
    : fn_(std::move(fn)), delay_ms_(delay_ms) {
  thread_ = std::thread([this] { writer_main(); });
}

SolutionWriter::~SolutionWriter() { finish(); }

void SolutionWriter::offer(CtgRecord record) {
  {
    std::lock_guard<std::mutex> lk(mu_);
    pending_.push_back(std::move(record));
  }
  cv_.notify_one();
}

void SolutionWriter::finish() {
  {
    std::unique_lock<std::mutex> lk(mu_);
    if (stop_ && !thread_.joinable()) return;
    idle_cv_.wait(lk, [this] { return pending_.empty() && !busy_; });
    stop_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

int SolutionWriter::cycles() const {
  std::lock_guard<std::mutex> lk(mu_);
  return cycles_;
}

void SolutionWriter::writer_main() {
  while (true) {
    std::vector<CtgRecord> batch;
    {
      std::unique_lock<std::mutex> lk(mu_);
      cv_.wait(lk, [this] { return stop_ || !pending_.empty(); });
      if (pending_.empty() && stop_) return;
      batch.swap(pending_);
      busy_ = true;
    }
    if (delay_ms_ > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
    fn_(std::move(batch));
    {
      std::lock_guard<std::mutex> lk(mu_);
      busy_ = false;
      ++cycles_;
    }
    idle_cv_.notify_all();
  }
}

}  // namespace scopf
