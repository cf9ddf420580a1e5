#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "asap/errors.hpp"
#include "asap/rng.hpp"

namespace asap::rl {

struct Transition {
  std::vector<double> s;
  std::vector<double> a;
  double r = 0.0;
  std::vector<double> s_next;
  bool done = false;
};

/* Batch assembled for an update, one sample per column. */
struct Batch {
  Eigen::MatrixXd s, a, s_next;
  Eigen::VectorXd r, done;
  Eigen::Index size() const { return s.cols(); }
};

/* Ring buffer over flat storage with FIFO eviction. */
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim)
      : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
    if (capacity == 0) throw Error("replay capacity must be positive");
    s_.resize(capacity * state_dim);
    a_.resize(capacity * action_dim);
    s_next_.resize(capacity * state_dim);
    r_.resize(capacity);
    done_.resize(capacity);
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  void push(const Transition& tr) {
    if (tr.s.size() != state_dim_ || tr.s_next.size() != state_dim_ ||
        tr.a.size() != action_dim_)
      throw DimensionError("transition dimensions do not match buffer");
    for (double v : tr.s)
      if (!std::isfinite(v)) throw Error("non-finite transition state");
    if (!std::isfinite(tr.r)) throw Error("non-finite transition reward");
    const std::size_t i = head_;
    std::copy(tr.s.begin(), tr.s.end(), s_.begin() + static_cast<std::ptrdiff_t>(i * state_dim_));
    std::copy(tr.a.begin(), tr.a.end(), a_.begin() + static_cast<std::ptrdiff_t>(i * action_dim_));
    std::copy(tr.s_next.begin(), tr.s_next.end(),
              s_next_.begin() + static_cast<std::ptrdiff_t>(i * state_dim_));
    r_[i] = tr.r;
    done_[i] = tr.done ? 1.0 : 0.0;
    head_ = (head_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
  }

  Transition get(std::size_t index) const {
    if (index >= size_) throw Error("replay index out of range");
    const std::size_t i = physical(index);
    Transition tr;
    tr.s.assign(s_.begin() + static_cast<std::ptrdiff_t>(i * state_dim_),
                s_.begin() + static_cast<std::ptrdiff_t>((i + 1) * state_dim_));
    tr.a.assign(a_.begin() + static_cast<std::ptrdiff_t>(i * action_dim_),
                a_.begin() + static_cast<std::ptrdiff_t>((i + 1) * action_dim_));
    tr.s_next.assign(s_next_.begin() + static_cast<std::ptrdiff_t>(i * state_dim_),
                     s_next_.begin() + static_cast<std::ptrdiff_t>((i + 1) * state_dim_));
    tr.r = r_[i];
    tr.done = done_[i] != 0.0;
    return tr;
  }

  /* Uniform sample of n distinct transitions (Floyd's algorithm), gathered
   * into a column-per-sample batch. Requires size >= n. */
  Batch sample(std::size_t n, Rng& rng) const {
    if (n == 0) throw Error("cannot sample an empty batch");
    if (size_ < n)
      throw Error("replay buffer holds " + std::to_string(size_) + " transitions, need " +
                  std::to_string(n));
    std::vector<std::size_t> picked;
    picked.reserve(n);
    std::vector<char> taken(size_, 0);
    for (std::size_t j = size_ - n; j < size_; ++j) {
      const auto t = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(j)));
      if (taken[t]) {
        picked.push_back(j);
        taken[j] = 1;
      } else {
        picked.push_back(t);
        taken[t] = 1;
      }
    }
    Batch batch;
    batch.s.resize(static_cast<Eigen::Index>(state_dim_), static_cast<Eigen::Index>(n));
    batch.a.resize(static_cast<Eigen::Index>(action_dim_), static_cast<Eigen::Index>(n));
    batch.s_next.resize(static_cast<Eigen::Index>(state_dim_), static_cast<Eigen::Index>(n));
    batch.r.resize(static_cast<Eigen::Index>(n));
    batch.done.resize(static_cast<Eigen::Index>(n));
    for (std::size_t col = 0; col < n; ++col) {
      const std::size_t i = physical(picked[col]);
      for (std::size_t d = 0; d < state_dim_; ++d) {
        batch.s(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(col)) =
            s_[i * state_dim_ + d];
        batch.s_next(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(col)) =
            s_next_[i * state_dim_ + d];
      }
      for (std::size_t d = 0; d < action_dim_; ++d)
        batch.a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(col)) =
            a_[i * action_dim_ + d];
      batch.r(static_cast<Eigen::Index>(col)) = r_[i];
      batch.done(static_cast<Eigen::Index>(col)) = done_[i];
    }
    return batch;
  }

 private:
  /* Logical index 0 = oldest stored transition. */
  std::size_t physical(std::size_t logical) const {
    if (size_ < capacity_) return logical;
    return (head_ + logical) % capacity_;
  }

  std::size_t capacity_, state_dim_, action_dim_;
  std::size_t head_ = 0, size_ = 0;
  std::vector<double> s_, a_, s_next_, r_, done_;
};

} // namespace asap::rl
