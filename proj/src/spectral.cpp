#include "setmem/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "setmem/errors.hpp"

namespace setmem {
namespace {

constexpr double kDeflationTol = 1e-12;

void check_input(const Matrix& a) {
    require_dim(a.rows() == a.cols() && a.rows() > 0, "spectral input must be square and nonempty");
    if (!a.allFinite()) throw DimensionError("spectral input has non-finite entries");
}

// In-place Householder reduction to upper Hessenberg form.
void to_hessenberg(Matrix& h) {
    const Eigen::Index n = h.rows();
    for (Eigen::Index k = 0; k + 2 < n; ++k) {
        Vector v = h.col(k).tail(n - k - 1);
        const double alpha = v.norm();
        if (alpha == 0.0) continue;
        v(0) += (v(0) >= 0.0 ? alpha : -alpha);
        const double vnorm = v.norm();
        if (vnorm == 0.0) continue;
        v /= vnorm;
        // H <- P H P with P = I - 2 v v^T acting on rows/cols k+1..n-1.
        auto rows = h.bottomRows(n - k - 1);
        rows -= 2.0 * v * (v.transpose() * rows);
        auto cols = h.rightCols(n - k - 1);
        cols -= 2.0 * (cols * v) * v.transpose();
        h.col(k).tail(n - k - 2).setZero();
    }
}

double sign_of(double magnitude, double s) { return s >= 0.0 ? std::fabs(magnitude) : -std::fabs(magnitude); }

// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
// Works on a 1-based copy to keep the index arithmetic of the classical
// formulation readable.
EigenvalueResult hessenberg_qr(const Matrix& hess) {
    const int n = static_cast<int>(hess.rows());
    Matrix a = Matrix::Zero(n + 1, n + 1);
    a.bottomRightCorner(n, n) = hess;

    std::vector<double> wr(n + 1, 0.0), wi(n + 1, 0.0);
    EigenvalueResult out;
    const int max_sweeps = 100 * n;

    double anorm = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::fabs(a(i, j));

    int nn = n;
    double t = 0.0;
    int total = 0;
    while (nn >= 1) {
        int its = 0;
        int l;
        do {
            for (l = nn; l >= 2; --l) {
                double s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::fabs(a(l, l - 1)) <= kDeflationTol * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = a(nn, nn);
            if (l == nn) {
                wr[nn] = x + t;
                wi[nn--] = 0.0;
            } else {
                double y = a(nn - 1, nn - 1);
                double w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    const double p = 0.5 * (y - x);
                    const double q = p * p + w;
                    double z = std::sqrt(std::fabs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        wr[nn - 1] = wr[nn] = x + z;
                        if (z != 0.0) wr[nn] = x - w / z;
                        wi[nn - 1] = wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = wr[nn] = x + p;
                        wi[nn - 1] = -(wi[nn] = z);
                    }
                    nn -= 2;
                } else {
                    if (total >= max_sweeps) {
                        // Give up: report the undeflated block's diagonal.
                        out.converged = false;
                        for (int i = 1; i <= nn; ++i) {
                            wr[i] = a(i, i) + t;
                            wi[i] = 0.0;
                        }
                        nn = 0;
                        break;
                    }
                    if (its == 10 || its == 20) {
                        // Exceptional shift.
                        t += x;
                        for (int i = 1; i <= nn; ++i) a(i, i) -= x;
                        const double s = std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    ++total;
                    int m;
                    double p = 0.0, q = 0.0, r = 0.0, z;
                    for (m = nn - 2; m >= l; --m) {
                        z = a(m, m);
                        r = x - z;
                        double s = y - z;
                        p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::fabs(p) + std::fabs(q) + std::fabs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
                        const double v = std::fabs(p) * (std::fabs(a(m - 1, m - 1)) + std::fabs(z) + std::fabs(a(m + 1, m + 1)));
                        if (u <= kDeflationTol * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = 0.0;
                            if (k != nn - 1) r = a(k + 2, k - 1);
                            if ((x = std::fabs(p) + std::fabs(q) + std::fabs(r)) != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                        if (s != 0.0) {
                            if (k == m) {
                                if (l != m) a(k, k - 1) = -a(k, k - 1);
                            } else {
                                a(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                p = a(k, j) + q * a(k + 1, j);
                                if (k != nn - 1) {
                                    p += r * a(k + 2, j);
                                    a(k + 2, j) -= p * z;
                                }
                                a(k + 1, j) -= p * y;
                                a(k, j) -= p * x;
                            }
                            const int mmin = nn < k + 3 ? nn : k + 3;
                            for (int i = l; i <= mmin; ++i) {
                                p = x * a(i, k) + y * a(i, k + 1);
                                if (k != nn - 1) {
                                    p += z * a(i, k + 2);
                                    a(i, k + 2) -= p * r;
                                }
                                a(i, k + 1) -= p * q;
                                a(i, k) -= p;
                            }
                        }
                    }
                }
            }
        } while (nn >= 1 && l < nn - 1);
    }

    out.iterations = total;
    out.values.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) out.values.emplace_back(wr[i], wi[i]);
    return out;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
Vector symmetric_eigenvalues(Matrix s) {
    const Eigen::Index n = s.rows();
    const double scale = s.norm();
    if (scale == 0.0) return Vector::Zero(n);
    for (int sweep = 0; sweep < 100 * static_cast<int>(n); ++sweep) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
        if (std::sqrt(off) <= 1e-17 * scale) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (s(p, q) == 0.0) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
                const double t = sign_of(1.0, theta) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
            }
        }
    }
    return s.diagonal();
}

}  // namespace

EigenvalueResult eigenvalues(const Matrix& a) {
    check_input(a);
    Matrix h = a;
    to_hessenberg(h);
    return hessenberg_qr(h);
}

double spectral_radius(const Matrix& a) {
    const auto eig = eigenvalues(a);
    double r = 0.0;
    for (const auto& z : eig.values) r = std::max(r, std::abs(z));
    return r;
}

double spectral_norm(const Matrix& a) {
    if (!a.allFinite()) throw DimensionError("spectral input has non-finite entries");
    if (a.size() == 0) return 0.0;
    const Vector ev = symmetric_eigenvalues(a.transpose() * a);
    return std::sqrt(std::max(0.0, ev.maxCoeff()));
}

SpectralReport spectral_report(const Matrix& a) {
    const auto eig = eigenvalues(a);
    SpectralReport rep;
    rep.iterations = eig.iterations;
    rep.converged = eig.converged;
    for (const auto& z : eig.values) rep.eigen_moduli.push_back(std::abs(z));
    std::sort(rep.eigen_moduli.begin(), rep.eigen_moduli.end());
    rep.radius = rep.eigen_moduli.back();
    rep.norm = spectral_norm(a);
    return rep;
}

}  // namespace setmem
