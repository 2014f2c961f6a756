#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hwforest/errors.hpp"

namespace hwforest {

/// Dense row-major matrix of doubles. Rows are instances, columns features.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Column-major copy of a training matrix. Built once per fit so that
/// split search walks each feature's values contiguously.
class ColMatrix {
public:
    ColMatrix() = default;

    explicit ColMatrix(const Matrix& m) : rows_(m.rows()), cols_(m.cols()), data_(m.rows() * m.cols()) {
        for (std::size_t r = 0; r < rows_; ++r) {
            const double* src = m.row(r);
            for (std::size_t c = 0; c < cols_; ++c) data_[c * rows_ + r] = src[c];
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    const double* col(std::size_t c) const { return data_.data() + c * rows_; }
    double at(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace hwforest
