#pragma once

#include <complex>
#include <vector>

#include "setmem/linalg.hpp"

namespace setmem {

struct EigenvalueResult {
    std::vector<std::complex<double>> values;
    int iterations = 0;  // QR sweeps
    bool converged = true;
};

struct SpectralReport {
    double radius = 0.0;
    double norm = 0.0;
    std::vector<double> eigen_moduli;  // ascending
    int iterations = 0;
    bool converged = true;
};

// All eigenvalues of a square matrix: Householder reduction to Hessenberg
// form followed by Francis double-shift QR. At most 100*d sweeps; on
// non-convergence the undeflated block contributes its diagonal and
// converged is false.
EigenvalueResult eigenvalues(const Matrix& a);

// max |lambda_i(A)|. Throws DimensionError on non-square or non-finite input.
double spectral_radius(const Matrix& a);

// Largest singular value, from a cyclic Jacobi eigensolve of A^T A.
double spectral_norm(const Matrix& a);

SpectralReport spectral_report(const Matrix& a);

}  // namespace setmem
