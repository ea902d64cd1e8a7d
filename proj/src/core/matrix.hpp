#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rankkit {

// Dense row-major matrix of doubles. Rows are samples; columns are feature
// dimensions or class scores depending on context.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) {
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        return data_[r * cols_ + c];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    // Throws errc::not_finite naming the first offending (row, col).
    void validate_finite(const char* what = "matrix") const;

    // Bitwise equality (shape and every stored double).
    friend bool operator==(const Matrix& a, const Matrix& b);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Labels = std::vector<std::int64_t>;

// Full invariant check for matrices crossing an API boundary: at least one
// row and column, every value finite. Throws with `what` in the message.
void validate_matrix(const Matrix& m, const char* what = "matrix");

// Throws errc::dimension_mismatch unless labels.size() == m.rows().
void check_labels_match(const Matrix& m, const Labels& labels);

} // namespace rankkit
