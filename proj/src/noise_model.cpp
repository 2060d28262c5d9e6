#include "setmem/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "setmem/errors.hpp"
#include "setmem/qp.hpp"

namespace setmem {
namespace {

bool same(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

// {u : H u <= h} is bounded iff the rows of H positively span R^d, i.e.
// rank(H) = d and some strictly positive combination of the rows vanishes.
bool positively_spanning(const Matrix& h) {
    const Eigen::Index m = h.rows();
    const Eigen::Index d = h.cols();
    if (m <= d) return false;
    Eigen::ColPivHouseholderQR<Matrix> rank_qr(h);
    rank_qr.setThreshold(1e-12);
    if (rank_qr.rank() < d) return false;

    // min || H^T (1 + mu) ||^2 over mu >= 0; zero iff a positive combination exists.
    const Matrix ht = h.transpose();
    qp::SqrtObjective obj = qp::reduce(ht, -ht * Vector::Ones(m));
    qp::Constraints cons{Matrix::Identity(m, m), Vector::Zero(m),
                         Vector::Constant(m, std::numeric_limits<double>::infinity())};
    const qp::Solution sol = qp::solve(obj, cons);
    const Vector combo = ht * (Vector::Ones(m) + sol.x);
    const double scale = h.cwiseAbs().sum() * (1.0 + sol.x.cwiseAbs().maxCoeff());
    return combo.norm() <= 1e-9 * scale;
}

}  // namespace

NoiseSet NoiseSet::box(Vector lower, Vector upper) {
    require_dim(lower.size() == upper.size() && lower.size() > 0, "box bounds");
    for (Eigen::Index j = 0; j < lower.size(); ++j) {
        if (!(lower(j) < upper(j))) {
            throw DimensionError("noise box needs lower < upper in coordinate " + std::to_string(j));
        }
        if (lower(j) > 0.0 || upper(j) < 0.0) {
            throw DimensionError("noise box must contain the origin (coordinate " + std::to_string(j) + ")");
        }
    }
    NoiseSet s;
    s.kind_ = Kind::Box;
    s.dim_ = lower.size();
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
}

NoiseSet NoiseSet::cube(Eigen::Index d, double half_width) {
    return box(Vector::Constant(d, -half_width), Vector::Constant(d, half_width));
}

NoiseSet NoiseSet::zero(Eigen::Index d) {
    require_dim(d > 0, "zero noise set dimension");
    NoiseSet s;
    s.kind_ = Kind::Box;
    s.dim_ = d;
    s.lower_ = Vector::Zero(d);
    s.upper_ = Vector::Zero(d);
    return s;
}

NoiseSet NoiseSet::polytope(Matrix h_matrix, Vector h_vector) {
    require_dim(h_matrix.rows() == h_vector.size() && h_matrix.cols() > 0, "polytope H vs h");
    if (!h_matrix.allFinite() || !h_vector.allFinite()) throw DimensionError("polytope data must be finite");
    if (!positively_spanning(h_matrix)) throw DimensionError("polytope is unbounded");
    NoiseSet s;
    s.kind_ = Kind::Polytope;
    s.dim_ = h_matrix.cols();
    s.h_ = std::move(h_matrix);
    s.offsets_ = std::move(h_vector);
    return s;
}

const Vector& NoiseSet::lower() const {
    if (kind_ != Kind::Box) throw UnsupportedError("lower(): noise set is not a box");
    return lower_;
}

const Vector& NoiseSet::upper() const {
    if (kind_ != Kind::Box) throw UnsupportedError("upper(): noise set is not a box");
    return upper_;
}

const Matrix& NoiseSet::halfspace_normals() const {
    if (kind_ != Kind::Polytope) throw UnsupportedError("halfspace_normals(): noise set is a box");
    return h_;
}

const Vector& NoiseSet::halfspace_offsets() const {
    if (kind_ != Kind::Polytope) throw UnsupportedError("halfspace_offsets(): noise set is a box");
    return offsets_;
}

bool operator==(const NoiseSet& a, const NoiseSet& b) {
    if (a.kind_ != b.kind_ || a.dim_ != b.dim_) return false;
    if (a.kind_ == NoiseSet::Kind::Box) return same(a.lower_, b.lower_) && same(a.upper_, b.upper_);
    return same(a.h_, b.h_) && same(a.offsets_, b.offsets_);
}

bool contains(const NoiseSet& set, const Vector& u, double tol) {
    require_dim(u.size() == set.dim(), "contains(): vector vs noise set");
    if (set.is_box()) {
        return ((u.array() >= set.lower().array() - tol) && (u.array() <= set.upper().array() + tol)).all();
    }
    return ((set.halfspace_normals() * u).array() <= set.halfspace_offsets().array() + tol).all();
}

Vector project(const NoiseSet& set, const Vector& u) {
    require_dim(u.size() == set.dim(), "project(): vector vs noise set");
    if (set.is_box()) return u.cwiseMax(set.lower()).cwiseMin(set.upper());
    if (contains(set, u, 0.0)) return u;

    const Eigen::Index d = set.dim();
    qp::SqrtObjective obj{Matrix::Identity(d, d), u};
    const auto m = set.halfspace_normals().rows();
    qp::Constraints cons{set.halfspace_normals(),
                         Vector::Constant(m, -std::numeric_limits<double>::infinity()),
                         set.halfspace_offsets()};
    const qp::Solution sol = qp::solve(obj, cons);
    if (sol.status == qp::SolveStatus::Infeasible) throw NumericalError("project(): polytope is empty");
    return sol.x;
}

double distance(const NoiseSet& set, const Vector& u) {
    if (contains(set, u, 0.0)) return 0.0;
    return (u - project(set, u)).norm();
}

NoiseSampler::NoiseSampler(NoiseSet set, std::uint64_t seed)
    : set_(std::move(set)), seed_(seed), stream_(seed) {}

Vector NoiseSampler::sample() {
    if (!set_.is_box()) throw UnsupportedError("uniform sampling is only available for box noise sets");
    const Vector& lo = set_.lower();
    const Vector& hi = set_.upper();
    Vector w(set_.dim());
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double v = lo(j) + (hi(j) - lo(j)) * stream_.uniform01();
        w(j) = std::clamp(v, lo(j), hi(j));
    }
    return w;
}

}  // namespace setmem
