#include "dsekl/worker_pool.hpp"

namespace dsekl {

WorkerPool::WorkerPool(std::size_t threads) {
    // A single worker runs tasks inline on the caller's thread.
    if (threads <= 1) return;
    threads_.reserve(threads);
    for (std::size_t k = 0; k < threads; ++k) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    work_cv_.notify_all();
    threads_.clear();  // joins before the mutex is destroyed
}

void WorkerPool::run(std::size_t tasks, const std::function<void(std::size_t)>& fn) {
    if (tasks == 0) return;
    if (threads_.empty()) {
        for (std::size_t k = 0; k < tasks; ++k) fn(k);
        return;
    }
    std::unique_lock lock(mutex_);
    fn_ = &fn;
    next_task_ = 0;
    task_count_ = tasks;
    finished_ = 0;
    error_ = nullptr;
    ++generation_;
    work_cv_.notify_all();
    done_cv_.wait(lock, [&] { return finished_ == task_count_; });
    fn_ = nullptr;
    if (error_) std::rethrow_exception(error_);
}

void WorkerPool::worker_loop() {
    std::size_t seen_generation = 0;
    std::unique_lock lock(mutex_);
    while (true) {
        work_cv_.wait(lock, [&] { return stopping_ || (generation_ != seen_generation && next_task_ < task_count_); });
        if (stopping_) return;
        while (next_task_ < task_count_) {
            const std::size_t task = next_task_++;
            const auto* fn = fn_;
            lock.unlock();
            std::exception_ptr err;
            try {
                (*fn)(task);
            } catch (...) {
                err = std::current_exception();
            }
            lock.lock();
            if (err && !error_) error_ = err;
            if (++finished_ == task_count_) done_cv_.notify_all();
        }
        seen_generation = generation_;
    }
}

}  // namespace dsekl
