#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace levy {

using Vec = std::vector<double>;

/// Dense square matrix, row-major. Only small dimensions (state space d <= 3
/// for simulation, arbitrary d for exponent evaluation) are used in practice.
struct Mat {
    int n = 0;
    std::vector<double> a;

    Mat() = default;
    explicit Mat(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim, 0.0) {}
    Mat(int dim, std::vector<double> entries) : n(dim), a(std::move(entries)) {
        if (a.size() != static_cast<std::size_t>(n) * n)
            throw std::invalid_argument("Mat: entry count does not match dimension");
    }

    double& operator()(int i, int k) { return a[static_cast<std::size_t>(i) * n + k]; }
    double operator()(int i, int k) const { return a[static_cast<std::size_t>(i) * n + k]; }

    static Mat identity(int dim) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat zero(int dim) { return Mat(dim); }
    static Mat scalar(int dim, double v) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = v;
        return m;
    }
};

inline double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

inline double norm_l1(const Vec& x) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
}

inline double norm_l1(const Mat& m) {
    double s = 0.0;
    for (double v : m.a) s += std::abs(v);
    return s;
}

inline Vec add(const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
    return r;
}

inline Vec sub(const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

inline Vec scale(const Vec& x, double s) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = s * x[i];
    return r;
}

inline Vec negate(const Vec& x) { return scale(x, -1.0); }

inline Vec matvec(const Mat& m, const Vec& x) {
    Vec r(static_cast<std::size_t>(m.n), 0.0);
    for (int i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (int k = 0; k < m.n; ++k) s += m(i, k) * x[k];
        r[i] = s;
    }
    return r;
}

/// x . M x  (quadratic form)
inline double quad_form(const Mat& m, const Vec& x) {
    double s = 0.0;
    for (int i = 0; i < m.n; ++i)
        for (int k = 0; k < m.n; ++k) s += x[i] * m(i, k) * x[k];
    return s;
}

inline double trace_product(const Mat& a, const Mat& b) {
    double s = 0.0;
    for (int i = 0; i < a.n; ++i)
        for (int k = 0; k < a.n; ++k) s += a(i, k) * b(k, i);
    return s;
}

/// Eigenvalues (and optionally eigenvectors, columns of V) of a symmetric
/// matrix by cyclic Jacobi rotations. Dimensions stay tiny, so no pivoting
/// heuristics are needed.
inline Vec sym_eigen(const Mat& m, Mat* vectors = nullptr) {
    const int n = m.n;
    Mat a = m;
    Mat v = Mat::identity(n);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    Vec eig(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) eig[i] = a(i, i);
    if (vectors) *vectors = v;
    return eig;
}

/// Symmetric positive-semidefinite square root; tiny negative eigenvalues
/// (roundoff) are clamped to zero.
inline Mat sym_sqrt(const Mat& m) {
    Mat v;
    Vec eig = sym_eigen(m, &v);
    Mat r(m.n);
    for (int i = 0; i < m.n; ++i)
        for (int k = 0; k < m.n; ++k) {
            double s = 0.0;
            for (int j = 0; j < m.n; ++j) {
                const double lam = eig[j] > 0.0 ? std::sqrt(eig[j]) : 0.0;
                s += v(i, j) * lam * v(k, j);
            }
            r(i, k) = s;
        }
    return r;
}

}  // namespace levy
