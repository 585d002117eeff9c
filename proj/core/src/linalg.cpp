#include "msk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace msk {

SymMatrix::SymMatrix(int dim) : dim_(dim), a_(static_cast<size_t>(dim) * dim, 0.0) {
    if (dim < 1) throw InvalidMatrix("SymMatrix: dim must be >= 1");
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const int m = static_cast<int>(rows.size());
    SymMatrix out(m);
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(rows[i].size()) != m)
            throw InvalidMatrix("SymMatrix: rows must form a square matrix");
        for (int j = 0; j < m; ++j) {
            if (!std::isfinite(rows[i][j]))
                throw InvalidMatrix("SymMatrix: non-finite entry");
            out.a_[i * m + j] = rows[i][j];
        }
    }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (out.a_[i * m + j] != out.a_[j * m + i])
                throw InvalidMatrix("SymMatrix: matrix is not symmetric as stored");
    return out;
}

double SymMatrix::max_abs() const {
    double v = 0.0;
    for (double x : a_) v = std::max(v, std::fabs(x));
    return v;
}

// Cyclic Jacobi rotations. Converges when the off-diagonal Frobenius mass
// drops below 1e-14 * ||A||_F, hard cap 100 sweeps.
EigenDecomp sym_eigen(const SymMatrix& in) {
    const int m = in.dim();
    for (double x : in.data())
        if (!std::isfinite(x)) throw InvalidMatrix("sym_eigen: non-finite entry");

    std::vector<double> a = in.data();
    std::vector<double> q(static_cast<size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) q[i * m + i] = 1.0;

    double frob = 0.0;
    for (double x : a) frob += x * x;
    frob = std::sqrt(frob);
    const double stop = 1e-14 * frob;

    auto off_mass = [&]() {
        double s = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) s += 2.0 * a[i * m + j] * a[i * m + j];
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && off_mass() > stop; ++sweep) {
        for (int p = 0; p < m - 1; ++p) {
            for (int r = p + 1; r < m; ++r) {
                const double apr = a[p * m + r];
                if (apr == 0.0) continue;
                const double app = a[p * m + p];
                const double arr = a[r * m + r];
                const double theta = (arr - app) / (2.0 * apr);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < m; ++k) {
                    const double akp = a[k * m + p];
                    const double akr = a[k * m + r];
                    a[k * m + p] = c * akp - s * akr;
                    a[k * m + r] = s * akp + c * akr;
                }
                for (int k = 0; k < m; ++k) {
                    const double apk = a[p * m + k];
                    const double ark = a[r * m + k];
                    a[p * m + k] = c * apk - s * ark;
                    a[r * m + k] = s * apk + c * ark;
                }
                for (int k = 0; k < m; ++k) {
                    const double qkp = q[k * m + p];
                    const double qkr = q[k * m + r];
                    q[k * m + p] = c * qkp - s * qkr;
                    q[k * m + r] = s * qkp + c * qkr;
                }
            }
        }
    }

    // Sort eigenpairs descending by eigenvalue.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return a[x * m + x] > a[y * m + y]; });

    EigenDecomp out;
    out.dim = m;
    out.eigenvalues.resize(m);
    out.eigenvectors.resize(static_cast<size_t>(m) * m);
    for (int k = 0; k < m; ++k) {
        out.eigenvalues[k] = a[order[k] * m + order[k]];
        for (int i = 0; i < m; ++i) out.eigenvectors[i * m + k] = q[i * m + order[k]];
    }
    return out;
}

double spectral_radius(const SymMatrix& a) {
    const EigenDecomp d = sym_eigen(a);
    double r = 0.0;
    for (double v : d.eigenvalues) r = std::max(r, std::fabs(v));
    return r;
}

SymMatrix matrix_abs(const SymMatrix& a) {
    const int m = a.dim();
    const EigenDecomp d = sym_eigen(a);
    SymMatrix out(m);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            double s = 0.0;
            for (int k = 0; k < m; ++k)
                s += d.vec(i, k) * std::fabs(d.eigenvalues[k]) * d.vec(j, k);
            out.set(i, j, s);
        }
    }
    return out;
}

Definiteness classify_definiteness(const SymMatrix& a, double tol) {
    const EigenDecomp d = sym_eigen(a);
    double min_ev = d.eigenvalues.back();
    double rho = 0.0;
    for (double v : d.eigenvalues) rho = std::max(rho, std::fabs(v));
    return min_ev < -tol * std::max(1.0, rho) ? Definiteness::Indefinite
                                              : Definiteness::PSD;
}

std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b,
                                 double pivot_tol) {
    const int m = static_cast<int>(b.size());
    double scale = 0.0;
    for (double x : a) scale = std::max(scale, std::fabs(x));
    scale = std::max(scale, 1.0);

    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
            if (std::fabs(a[r * m + col]) > std::fabs(a[piv * m + col])) piv = r;
        if (std::fabs(a[piv * m + col]) < pivot_tol * scale)
            throw SensitivitySingular("solve_linear: matrix singular to working tolerance");
        if (piv != col) {
            for (int k = 0; k < m; ++k) std::swap(a[col * m + k], a[piv * m + k]);
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < m; ++r) {
            const double f = a[r * m + col] / a[col * m + col];
            for (int k = col; k < m; ++k) a[r * m + k] -= f * a[col * m + k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(m);
    for (int r = m - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < m; ++k) s -= a[r * m + k] * x[k];
        x[r] = s / a[r * m + r];
    }
    return x;
}

} // namespace msk
