#include "setmem/dynamics.hpp"

#include <charconv>
#include <sstream>
#include <string>

#include "setmem/csv.hpp"
#include "setmem/errors.hpp"

namespace setmem {

SwitchedSystem::SwitchedSystem(std::vector<Matrix> matrices) : matrices_(std::move(matrices)) {
    if (matrices_.empty()) throw DimensionError("switched system needs at least one matrix");
    dim_ = matrices_.front().rows();
    for (const auto& m : matrices_) {
        require_dim(m.rows() == dim_ && m.cols() == dim_ && dim_ > 0, "subsystem matrices must be square and equal-sized");
    }
}

const Matrix& SwitchedSystem::matrix(std::size_t p) const {
    if (p >= matrices_.size()) throw DimensionError("subsystem index " + std::to_string(p) + " out of range");
    return matrices_[p];
}

Matrix MeasurementGroup::regressors() const {
    const Eigen::Index d = pairs.empty() ? 0 : pairs.front().x.size();
    Matrix out(static_cast<Eigen::Index>(pairs.size()), d);
    for (std::size_t i = 0; i < pairs.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pairs[i].x.transpose();
    return out;
}

Matrix MeasurementGroup::successors() const {
    const Eigen::Index d = pairs.empty() ? 0 : pairs.front().y.size();
    Matrix out(static_cast<Eigen::Index>(pairs.size()), d);
    for (std::size_t i = 0; i < pairs.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pairs[i].y.transpose();
    return out;
}

MeasurementGroup MeasurementGroup::prefix(std::size_t n) const {
    MeasurementGroup out{system, {}};
    const std::size_t m = std::min(n, pairs.size());
    out.pairs.assign(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(m));
    return out;
}

Vector step(const Matrix& a, const Vector& x, const Vector& w) {
    require_dim(a.cols() == x.size() && a.rows() == w.size(), "step(): A, x, w");
    return a * x + w;
}

Trajectory simulate(const SwitchedSystem& sys, const std::vector<std::size_t>& switches, const Vector& x0,
                    NoiseSampler& sampler, bool record_noise) {
    require_dim(x0.size() == sys.dim(), "simulate(): x0 vs system");
    require_dim(sampler.set().dim() == sys.dim(), "simulate(): noise set vs system");
    for (std::size_t s : switches) {
        if (s >= sys.q()) throw DimensionError("switch index " + std::to_string(s) + " out of range");
    }

    Trajectory traj;
    traj.states.reserve(switches.size() + 1);
    traj.states.push_back(x0);
    traj.switches = switches;
    if (record_noise) traj.noises.reserve(switches.size());

    for (std::size_t t = 0; t < switches.size(); ++t) {
        Vector w = sampler.sample();
        Vector next = step(sys.matrix(switches[t]), traj.states.back(), w);
        const double mag = next.cwiseAbs().maxCoeff();
        if (!(mag <= kExplosionThreshold)) throw ExplosionError(t + 1, mag);
        traj.states.push_back(std::move(next));
        if (record_noise) traj.noises.push_back(std::move(w));
    }
    return traj;
}

void validate(const Trajectory& traj, std::optional<std::size_t> q) {
    require_dim(traj.states.size() == traj.switches.size() + 1, "trajectory needs length(states) = length(switches) + 1");
    const Eigen::Index d = traj.dim();
    require_dim(d > 0, "trajectory states must be nonempty vectors");
    for (const auto& x : traj.states) require_dim(x.size() == d, "trajectory state dimension");
    require_dim(traj.noises.empty() || traj.noises.size() == traj.switches.size(), "recorded noise length");
    if (q) {
        for (std::size_t s : traj.switches) {
            if (s >= *q) throw DimensionError("switch index " + std::to_string(s + 1) + " exceeds q");
        }
    }
}

std::vector<MeasurementGroup> group(const Trajectory& traj, std::size_t q) {
    validate(traj, q);
    std::vector<MeasurementGroup> groups(q);
    for (std::size_t p = 0; p < q; ++p) groups[p].system = p;
    for (std::size_t t = 0; t < traj.switches.size(); ++t) {
        groups[traj.switches[t]].pairs.push_back({traj.states[t], traj.states[t + 1]});
    }
    return groups;
}

std::string trajectory_csv(const Trajectory& traj) {
    validate(traj);
    std::ostringstream out;
    out << "t,alpha_t";
    for (Eigen::Index j = 0; j < traj.dim(); ++j) out << ",x_" << (j + 1);
    out << '\n';
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
        out << t << ',';
        if (t < traj.switches.size()) out << (traj.switches[t] + 1);
        for (Eigen::Index j = 0; j < traj.dim(); ++j) out << ',' << csv::format_double(traj.states[t](j));
        out << '\n';
    }
    return out.str();
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    csv::write_file(path, trajectory_csv(traj));
}

namespace {

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw IoError("trajectory CSV line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

}  // namespace

Trajectory parse_trajectory_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("trajectory CSV is empty");
    const auto header = csv::split_line(line);
    if (header.size() < 3 || header[0] != "t" || header[1] != "alpha_t") {
        throw IoError("trajectory CSV header must start with t,alpha_t,x_1");
    }
    const auto d = static_cast<Eigen::Index>(header.size() - 2);

    Trajectory traj;
    bool ended = false;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (ended) throw IoError("trajectory CSV: rows after the final (empty alpha) row");
        const auto fields = csv::split_line(line);
        if (static_cast<Eigen::Index>(fields.size()) != d + 2) {
            throw IoError("trajectory CSV line " + std::to_string(lineno) + ": expected " + std::to_string(d + 2) + " fields");
        }
        if (parse_double(fields[0], lineno) != static_cast<double>(traj.states.size())) {
            throw IoError("trajectory CSV line " + std::to_string(lineno) + ": t out of sequence");
        }
        Vector x(d);
        for (Eigen::Index j = 0; j < d; ++j) x(j) = parse_double(fields[static_cast<std::size_t>(j) + 2], lineno);
        traj.states.push_back(std::move(x));
        if (fields[1].empty()) {
            ended = true;
        } else {
            const double alpha = parse_double(fields[1], lineno);
            if (alpha < 1.0 || alpha != static_cast<double>(static_cast<std::size_t>(alpha))) {
                throw IoError("trajectory CSV line " + std::to_string(lineno) + ": alpha_t must be a positive integer");
            }
            traj.switches.push_back(static_cast<std::size_t>(alpha) - 1);
        }
    }
    if (!ended) throw IoError("trajectory CSV: final row must have an empty alpha_t");
    validate(traj);
    return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    return parse_trajectory_csv(csv::read_file(path));
}

}  // namespace setmem
