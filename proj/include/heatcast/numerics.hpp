#pragma once

#include <cstddef>
#include <vector>

namespace heatcast {

using Vector = std::vector<double>;

/// Dense row-major matrix. Network sizes here are tens of nodes, so a flat
/// double buffer is all that is needed.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // row-major, rows * cols entries

    Matrix() = default;
    Matrix(std::size_t n_rows, std::size_t n_cols, double fill = 0.0);

    static Matrix identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool operator==(const Matrix&) const = default;
};

/// result[i] = sum_j m(i,j) * v[j]
Vector mat_vec(const Matrix& m, const Vector& v);

/// result[j] = sum_i m(i,j) * v[i], i.e. m^T * v without materializing the transpose.
Vector mat_vec_transposed(const Matrix& m, const Vector& v);

/// Elementwise tanh.
Vector tanh_sigmoid(const Vector& v);

/// Derivative of tanh expressed in the activation value: 1 - a^2.
Vector tanh_sigmoid_deriv(const Vector& activation);

/// Identity map.
Vector linear_transfer(const Vector& v);

/// All-ones vector of the same length.
Vector linear_deriv(const Vector& v);

/// target(i,j) += scale * left[i] * right[j]
void outer_update(Matrix& target, double scale, const Vector& left, const Vector& right);

} // namespace heatcast
