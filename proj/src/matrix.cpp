#include "gaussot/matrix.hpp"

#include "gaussot/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gaussot {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        fail(ErrorCode::ShapeError,
             std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                 std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                 std::to_string(b.cols()));
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows * cols) {
        fail(ErrorCode::ShapeError, "matrix: value count " + std::to_string(data_.size()) +
                                        " does not match " + std::to_string(rows) + "x" +
                                        std::to_string(cols));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            fail(ErrorCode::ShapeError, "matrix: ragged initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    }
    return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other, "add");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other, "subtract");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        fail(ErrorCode::ShapeError, "multiply: inner dimensions " + std::to_string(a.cols()) +
                                        " and " + std::to_string(b.rows()) + " differ");
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto b_row = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        fail(ErrorCode::ShapeError, "matvec: dimension mismatch");
    }
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        auto r = a.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) acc += r[j] * x[j];
        out[i] = acc;
    }
    return out;
}

double trace(const Matrix& a) {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
    return t;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

bool all_finite(const Matrix& a) {
    return std::all_of(a.values().begin(), a.values().end(),
                       [](double v) { return std::isfinite(v); });
}

Matrix symmetrized(const Matrix& a) {
    if (!a.square()) {
        fail(ErrorCode::ShapeError, "symmetrize: matrix is not square");
    }
    Matrix s(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        s(i, i) = a(i, i);
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return s;
}

Matrix select_columns(const Matrix& a, std::span<const std::size_t> columns) {
    Matrix out(a.rows(), columns.size());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto src = a.row(r);
        auto dst = out.row(r);
        for (std::size_t k = 0; k < columns.size(); ++k) dst[k] = src[columns[k]];
    }
    return out;
}

}  // namespace gaussot
