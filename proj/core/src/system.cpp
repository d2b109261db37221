#include "queuetoll/system.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace queuetoll {

namespace {
constexpr double kRowSumTol = 1e-12;
}

SystemSpec::SystemSpec(std::vector<ClassSpec> classes, std::vector<CostModel> queues)
    : classes_(std::move(classes)), queues_(std::move(queues)) {
  if (classes_.empty()) throw std::invalid_argument("SystemSpec: need at least one class");
  if (queues_.empty()) throw std::invalid_argument("SystemSpec: need at least one queue");
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    const auto& c = classes_[i];
    if (!(c.rate > 0.0))
      throw std::invalid_argument("SystemSpec: class " + std::to_string(i) + " rate must be > 0");
    if (!(c.sensitivity > 0.0))
      throw std::invalid_argument("SystemSpec: class " + std::to_string(i) +
                                  " sensitivity must be > 0");
    if (!(c.mean_job_size > 0.0))
      throw std::invalid_argument("SystemSpec: class " + std::to_string(i) +
                                  " mean job size must be > 0");
    if (i > 0 && !(classes_[i - 1].sensitivity > c.sensitivity))
      throw std::invalid_argument(
          "SystemSpec: sensitivities must be strictly decreasing with class index; merge "
          "classes with equal sensitivity");
  }
  if (!(total_work_rate() < total_capacity()))
    throw std::invalid_argument("infeasible: total load exceeds capacity (offered work " +
                                std::to_string(total_work_rate()) + " vs " +
                                std::to_string(total_capacity()) + ")");
}

double SystemSpec::total_work_rate() const {
  double s = 0.0;
  for (int i = 0; i < num_classes(); ++i) s += work_rate(i);
  return s;
}

double SystemSpec::total_capacity() const {
  double s = 0.0;
  for (const auto& q : queues_) s += q.capacity();
  return s;
}

RoutingMatrix::RoutingMatrix(std::vector<double> data, int num_classes, int num_queues)
    : data_(std::move(data)), rows_(num_classes), cols_(num_queues) {
  if (rows_ <= 0 || cols_ <= 0 ||
      data_.size() != static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_))
    throw std::invalid_argument("RoutingMatrix: dimension mismatch");
  validate();
}

RoutingMatrix::RoutingMatrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty())
    throw std::invalid_argument("RoutingMatrix: empty matrix");
  rows_ = static_cast<int>(rows.size());
  cols_ = static_cast<int>(rows.front().size());
  data_.reserve(static_cast<std::size_t>(rows_) * cols_);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_)
      throw std::invalid_argument("RoutingMatrix: ragged rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  validate();
}

void RoutingMatrix::validate() const {
  for (int i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (int j = 0; j < cols_; ++j) {
      const double p = (*this)(i, j);
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("RoutingMatrix: entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") outside [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw std::invalid_argument("RoutingMatrix: row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum) + ", expected 1");
  }
}

RoutingMatrix RoutingMatrix::uniform(int num_classes, int num_queues) {
  std::vector<double> d(static_cast<std::size_t>(num_classes) * num_queues,
                        1.0 / num_queues);
  // Make each row sum exactly 1 in floating point.
  for (int i = 0; i < num_classes; ++i) {
    double s = 0.0;
    for (int j = 0; j + 1 < num_queues; ++j) s += d[static_cast<std::size_t>(i) * num_queues + j];
    d[static_cast<std::size_t>(i) * num_queues + num_queues - 1] = 1.0 - s;
  }
  return {std::move(d), num_classes, num_queues};
}

RoutingMatrix RoutingMatrix::single_queue(int num_classes, int num_queues, int queue) {
  if (queue < 0 || queue >= num_queues)
    throw std::invalid_argument("RoutingMatrix: queue index out of range");
  std::vector<double> d(static_cast<std::size_t>(num_classes) * num_queues, 0.0);
  for (int i = 0; i < num_classes; ++i) d[static_cast<std::size_t>(i) * num_queues + queue] = 1.0;
  return {std::move(d), num_classes, num_queues};
}

PriceVector::PriceVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("PriceVector: empty");
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!(values_[j] >= 0.0))
      throw std::invalid_argument("PriceVector: prices must be >= 0");
    if (j > 0 && !(values_[j - 1] > values_[j]))
      throw std::invalid_argument(
          "PriceVector: prices must be strictly decreasing with queue index; merge queues "
          "with equal prices");
  }
}

}  // namespace queuetoll
