#pragma once
#include <memory>
#include <vector>

#include "touchline/errors.hpp"

namespace touchline {

/// Dense row-major matrix of doubles with cheap shared copies. Scalars are
/// 1x1, vectors 1xN. Treated as immutable once built; mutation goes through
/// mutable_data() which unshares the buffer.
class Tensor {
public:
    Tensor() : rows_(0), cols_(0), data_(std::make_shared<std::vector<double>>()) {}
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols),
          data_(std::make_shared<std::vector<double>>(rows * cols, fill)) {}
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols),
          data_(std::make_shared<std::vector<double>>(std::move(values))) {
        if (data_->size() != rows_ * cols_)
            throw ShapeMismatch("tensor data length does not match shape");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t numel() const { return rows_ * cols_; }

    const std::vector<double>& data() const { return *data_; }
    double at(std::size_t r, std::size_t c) const { return (*data_)[r * cols_ + c]; }
    double operator[](std::size_t i) const { return (*data_)[i]; }

    std::vector<double>& mutable_data() {
        if (data_.use_count() > 1)
            data_ = std::make_shared<std::vector<double>>(*data_);
        return *data_;
    }

    void set(std::size_t i, double v) { mutable_data()[i] = v; }

    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t rows_, cols_;
    std::shared_ptr<std::vector<double>> data_;
};

} // namespace touchline
