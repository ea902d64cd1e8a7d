#include "core/matrix.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "core/error.hpp"

namespace rankkit {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows * cols) {
        std::ostringstream msg;
        msg << "matrix storage size " << data_.size() << " does not match "
            << rows << "x" << cols;
        throw_error(errc::dimension_mismatch, msg.str());
    }
}

void Matrix::validate_finite(const char* what) const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            std::ostringstream msg;
            msg << what << " contains a non-finite value at row "
                << (cols_ ? i / cols_ : 0) << ", col " << (cols_ ? i % cols_ : 0);
            throw_error(errc::not_finite, msg.str());
        }
    }
}

bool operator==(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    if (a.data_.empty()) return b.data_.empty();
    return std::memcmp(a.data_.data(), b.data_.data(),
                       a.data_.size() * sizeof(double)) == 0;
}

void validate_matrix(const Matrix& m, const char* what) {
    if (m.rows() == 0 || m.cols() == 0) {
        std::ostringstream msg;
        msg << what << " must have at least one row and one column, got "
            << m.rows() << "x" << m.cols();
        throw_error(errc::dimension_mismatch, msg.str());
    }
    m.validate_finite(what);
}

void check_labels_match(const Matrix& m, const Labels& labels) {
    if (labels.size() != m.rows()) {
        std::ostringstream msg;
        msg << "label count " << labels.size() << " does not match row count "
            << m.rows();
        throw_error(errc::dimension_mismatch, msg.str());
    }
}

} // namespace rankkit
