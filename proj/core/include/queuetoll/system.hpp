#pragma once

#include <span>
#include <vector>

#include "queuetoll/cost_model.hpp"

namespace queuetoll {

// One traffic class: Poisson arrivals at `rate`, delay sensitivity
// `sensitivity` (the per-unit-time cost the class attaches to congestion),
// and mean job size `mean_job_size` in units of work.
struct ClassSpec {
  double rate = 0.0;
  double sensitivity = 0.0;
  double mean_job_size = 1.0;
};

// Immutable problem instance: M classes routed to N queues.  Classes must be
// ordered by strictly decreasing sensitivity (ties are rejected: classes with
// equal sensitivity should be merged by the caller), and the total offered
// work must fit strictly inside the total service capacity.
class SystemSpec {
 public:
  SystemSpec(std::vector<ClassSpec> classes, std::vector<CostModel> queues);

  [[nodiscard]] int num_classes() const { return static_cast<int>(classes_.size()); }
  [[nodiscard]] int num_queues() const { return static_cast<int>(queues_.size()); }
  [[nodiscard]] const std::vector<ClassSpec>& classes() const { return classes_; }
  [[nodiscard]] const std::vector<CostModel>& queues() const { return queues_; }
  [[nodiscard]] const ClassSpec& cls(int i) const { return classes_[i]; }
  [[nodiscard]] const CostModel& queue(int j) const { return queues_[j]; }

  // Work arrival rate of class i (rate * mean_job_size).
  [[nodiscard]] double work_rate(int i) const {
    return classes_[i].rate * classes_[i].mean_job_size;
  }
  [[nodiscard]] double total_work_rate() const;
  [[nodiscard]] double total_capacity() const;

 private:
  std::vector<ClassSpec> classes_;
  std::vector<CostModel> queues_;
};

// Row-stochastic M x N routing matrix; p(i, j) is the fraction of class i
// sent to queue j.  Rows must sum to 1 within 1e-12.
class RoutingMatrix {
 public:
  RoutingMatrix(std::vector<double> data, int num_classes, int num_queues);
  explicit RoutingMatrix(const std::vector<std::vector<double>>& rows);

  static RoutingMatrix uniform(int num_classes, int num_queues);
  static RoutingMatrix single_queue(int num_classes, int num_queues, int queue);

  [[nodiscard]] double operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }
  [[nodiscard]] int num_classes() const { return rows_; }
  [[nodiscard]] int num_queues() const { return cols_; }
  [[nodiscard]] const std::vector<double>& data() const { return data_; }
  [[nodiscard]] std::span<const double> row(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)};
  }

 private:
  void validate() const;

  std::vector<double> data_;
  int rows_ = 0;
  int cols_ = 0;
};

// Aggregate work flow per queue.
struct FlowVector {
  std::vector<double> gamma;

  [[nodiscard]] double operator[](int j) const { return gamma[j]; }
  [[nodiscard]] int size() const { return static_cast<int>(gamma.size()); }
};

// Admission prices indexed by queue, normalized so that c_1 > c_2 > ... >= 0.
// Ties are rejected; queues with equal prices should be merged upstream.
class PriceVector {
 public:
  explicit PriceVector(std::vector<double> values);

  [[nodiscard]] double operator[](int j) const { return values_[j]; }
  [[nodiscard]] int size() const { return static_cast<int>(values_.size()); }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

}  // namespace queuetoll
