#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dsekl {

/// Fixed set of threads that execute indexed task batches to completion.
///
/// run() blocks until every task of the batch has finished; the first
/// exception thrown by any task is rethrown from run() after the batch drains.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t threads);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    std::size_t size() const { return threads_.empty() ? 1 : threads_.size(); }

    void run(std::size_t tasks, const std::function<void(std::size_t)>& fn);

private:
    void worker_loop();

    std::vector<std::jthread> threads_;
    std::mutex mutex_;
    std::condition_variable work_cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t)>* fn_ = nullptr;
    std::size_t next_task_ = 0;
    std::size_t task_count_ = 0;
    std::size_t finished_ = 0;
    std::size_t generation_ = 0;
    bool stopping_ = false;
    std::exception_ptr error_;
};

}  // namespace dsekl
