#pragma once

// Small dense symmetric linear algebra for the species-level matrices
// (m is the number of species, typically 2..16). Everything here is
// self-contained: a cyclic Jacobi eigensolver plus the few derived
// operations the rest of the code needs.

#include <vector>

#include "msk/errors.hpp"

namespace msk {

class SymMatrix {
public:
    explicit SymMatrix(int dim);
    // Validates squareness and exact symmetry of the given rows.
    static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return a_[i * dim_ + j]; }
    // Writes both (i,j) and (j,i) so symmetry holds by construction.
    void set(int i, int j, double v) {
        a_[i * dim_ + j] = v;
        a_[j * dim_ + i] = v;
    }

    const std::vector<double>& data() const { return a_; }
    double max_abs() const;

private:
    int dim_;
    std::vector<double> a_; // row-major dim x dim
};

struct EigenDecomp {
    std::vector<double> eigenvalues;   // sorted descending
    std::vector<double> eigenvectors;  // row-major m x m; column k = k-th eigenvector
    double vec(int i, int k) const { return eigenvectors[i * dim + k]; }
    int dim = 0;
};

enum class Definiteness { PSD, Indefinite };

EigenDecomp sym_eigen(const SymMatrix& a);
double spectral_radius(const SymMatrix& a);
SymMatrix matrix_abs(const SymMatrix& a);
Definiteness classify_definiteness(const SymMatrix& a, double tol = 1e-10);

// Dense m x m solve with partial pivoting; throws SensitivitySingular
// when a pivot falls below pivot_tol relative to the matrix scale.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b,
                                 double pivot_tol = 1e-12);

} // namespace msk
