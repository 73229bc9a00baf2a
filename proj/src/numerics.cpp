#include "heatcast/numerics.hpp"

#include <cmath>
#include <string>

#include "heatcast/errors.hpp"

namespace heatcast {

namespace {

[[noreturn]] void throw_mismatch(const char* op, std::size_t a, std::size_t b) {
    throw DimensionError(std::string(op) + ": size mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
}

} // namespace

Matrix::Matrix(std::size_t n_rows, std::size_t n_cols, double fill)
    : rows(n_rows), cols(n_cols), data(n_rows * n_cols, fill) {
    if (n_rows == 0 || n_cols == 0) {
        throw DimensionError("matrix dimensions must be at least 1x1");
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Vector mat_vec(const Matrix& m, const Vector& v) {
    if (m.cols != v.size()) {
        throw_mismatch("mat_vec", m.cols, v.size());
    }
    Vector out(m.rows, 0.0);
    const double* row = m.data.data();
    for (std::size_t i = 0; i < m.rows; ++i, row += m.cols) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            acc += row[j] * v[j];
        }
        out[i] = acc;
    }
    return out;
}

Vector mat_vec_transposed(const Matrix& m, const Vector& v) {
    if (m.rows != v.size()) {
        throw_mismatch("mat_vec_transposed", m.rows, v.size());
    }
    Vector out(m.cols, 0.0);
    const double* row = m.data.data();
    for (std::size_t i = 0; i < m.rows; ++i, row += m.cols) {
        const double vi = v[i];
        for (std::size_t j = 0; j < m.cols; ++j) {
            out[j] += row[j] * vi;
        }
    }
    return out;
}

Vector tanh_sigmoid(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::tanh(v[i]);
    }
    return out;
}

Vector tanh_sigmoid_deriv(const Vector& activation) {
    Vector out(activation.size());
    for (std::size_t i = 0; i < activation.size(); ++i) {
        out[i] = 1.0 - activation[i] * activation[i];
    }
    return out;
}

Vector linear_transfer(const Vector& v) {
    return v;
}

Vector linear_deriv(const Vector& v) {
    return Vector(v.size(), 1.0);
}

void outer_update(Matrix& target, double scale, const Vector& left, const Vector& right) {
    if (target.rows != left.size()) {
        throw_mismatch("outer_update rows", target.rows, left.size());
    }
    if (target.cols != right.size()) {
        throw_mismatch("outer_update cols", target.cols, right.size());
    }
    double* row = target.data.data();
    for (std::size_t i = 0; i < target.rows; ++i, row += target.cols) {
        const double li = scale * left[i];
        for (std::size_t j = 0; j < target.cols; ++j) {
            row[j] += li * right[j];
        }
    }
}

} // namespace heatcast
