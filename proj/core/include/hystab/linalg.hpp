#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace hystab {

/// Dense row-major matrix of doubles. Everything here targets the small
/// problems of this library (n <= 16), so the implementation favors clarity
/// and determinism over asymptotics.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix col(const std::vector<double>& v);
    static Matrix row(const std::vector<double>& v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Matrix transpose() const;
    double frobenius() const;
    /// ||M - M^T||_F, zero for symmetric matrices.
    double asymmetry() const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

/// 0.5 * (M + M^T)
Matrix symmetrize(const Matrix& m);

/// v^T M v for a column vector v.
double quadratic_form(const Matrix& m, const std::vector<double>& v);

Matrix outer(const std::vector<double>& a, const std::vector<double>& b);

std::vector<double> matvec(const Matrix& m, const std::vector<double>& v);

struct EigResult {
    std::vector<double> values;  // ascending
    Matrix vectors;              // columns are eigenvectors, same order
};

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
/// The input is symmetrized first; sizes up to ~16 converge in a few sweeps.
EigResult eig_symmetric(const Matrix& m);

double min_eigenvalue(const Matrix& m);
double max_eigenvalue(const Matrix& m);

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Throws ShapeError on dimension mismatch or (numerically) singular A.
std::vector<double> solve(const Matrix& a, const std::vector<double>& b);

/// Singular values of an arbitrary matrix via eig of M^T M (small sizes).
std::vector<double> singular_values(const Matrix& m);

/// Numerical rank with a relative threshold on singular values.
std::size_t rank(const Matrix& m, double rel_threshold = 1e-10);

}  // namespace hystab
