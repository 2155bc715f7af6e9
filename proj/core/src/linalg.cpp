#include "hystab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hystab/errors.hpp"

namespace hystab {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("ragged initializer for Matrix");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::col(const std::vector<double>& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

Matrix Matrix::row(const std::vector<double>& v) {
    Matrix m(1, v.size());
    for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = v[j];
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::frobenius() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
}

double Matrix::asymmetry() const {
    if (rows_ != cols_) throw ShapeError("asymmetry requires a square matrix");
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) {
            double d = (*this)(i, j) - (*this)(j, i);
            s += d * d;
        }
    return std::sqrt(s);
}

Matrix& Matrix::operator+=(const Matrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeError("matrix size mismatch in +");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeError("matrix size mismatch in -");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matrix size mismatch in *");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Matrix symmetrize(const Matrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("symmetrize requires a square matrix");
    Matrix s(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

double quadratic_form(const Matrix& m, const std::vector<double>& v) {
    if (m.rows() != v.size() || m.cols() != v.size())
        throw ShapeError("quadratic_form size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) row += m(i, j) * v[j];
        s += v[i] * row;
    }
    return s;
}

Matrix outer(const std::vector<double>& a, const std::vector<double>& b) {
    Matrix m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
}

std::vector<double> matvec(const Matrix& m, const std::vector<double>& v) {
    if (m.cols() != v.size()) throw ShapeError("matvec size mismatch");
    std::vector<double> r(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r[i] += m(i, j) * v[j];
    return r;
}

EigResult eig_symmetric(const Matrix& input) {
    if (input.rows() != input.cols()) throw ShapeError("eig_symmetric requires square matrix");
    const std::size_t n = input.rows();
    Matrix a = symmetrize(input);
    Matrix v = Matrix::identity(n);
    if (n == 0) return {{}, v};

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(2.0 * s);
    };
    const double scale = std::max(a.frobenius(), 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (off_norm() <= 1e-15 * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double tau = s / (1.0 + c);

                double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        double arp = a(r, p), arq = a(r, q);
                        a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                        a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                    }
                    double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    EigResult r;
    r.values.resize(n);
    r.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        r.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) r.vectors(i, k) = v(i, order[k]);
    }
    return r;
}

double min_eigenvalue(const Matrix& m) { return eig_symmetric(m).values.front(); }
double max_eigenvalue(const Matrix& m) { return eig_symmetric(m).values.back(); }

std::vector<double> solve(const Matrix& a, const std::vector<double>& b) {
    if (a.rows() != a.cols() || a.rows() != b.size()) throw ShapeError("solve size mismatch");
    const std::size_t n = a.rows();
    Matrix m = a;
    std::vector<double> x = b;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
        if (std::abs(m(piv, k)) < 1e-300) throw ShapeError("singular system in solve");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            std::swap(x[k], x[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = m(i, k) / m(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
            x[i] -= f * x[k];
        }
    }
    for (std::size_t ik = n; ik-- > 0;) {
        double s = x[ik];
        for (std::size_t j = ik + 1; j < n; ++j) s -= m(ik, j) * x[j];
        x[ik] = s / m(ik, ik);
    }
    return x;
}

std::vector<double> singular_values(const Matrix& m) {
    Matrix gram = m.transpose() * m;
    EigResult e = eig_symmetric(gram);
    std::vector<double> s;
    s.reserve(e.values.size());
    for (auto it = e.values.rbegin(); it != e.values.rend(); ++it)
        s.push_back(std::sqrt(std::max(0.0, *it)));
    return s;  // descending
}

std::size_t rank(const Matrix& m, double rel_threshold) {
    auto s = singular_values(m);
    if (s.empty() || s.front() == 0.0) return 0;
    double cut = rel_threshold * s.front();
    std::size_t r = 0;
    for (double x : s)
        if (x > cut) ++r;
    return r;
}

}  // namespace hystab
