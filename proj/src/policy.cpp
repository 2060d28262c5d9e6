#include "setmem/policy.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "setmem/errors.hpp"
#include "setmem/spectral.hpp"

namespace setmem {

Environment::Environment(SwitchedSystem system, NoiseSampler sampler, Vector x0)
    : system_(std::move(system)), sampler_(std::move(sampler)), state_(std::move(x0)) {
    require_dim(state_.size() == system_.dim(), "environment x0 vs system");
    require_dim(sampler_.set().dim() == system_.dim(), "environment noise vs system");
}

MeasurementPair Environment::step(std::size_t arm) {
    const Vector w = sampler_.sample();
    Vector next = setmem::step(system_.matrix(arm), state_, w);
    const double mag = next.cwiseAbs().maxCoeff();
    if (!(mag <= kExplosionThreshold)) throw ExplosionError(time_ + 1, mag);
    MeasurementPair pair{state_, next};
    state_ = std::move(next);
    ++time_;
    return pair;
}

std::size_t choose_arm(std::span<const double> radii, RandomStream& rng) {
    for (std::size_t p = 0; p < radii.size(); ++p) {
        if (radii[p] < 1.0) return p;
    }
    return static_cast<std::size_t>(rng.uniform_index(radii.size()));
}

BanditState::BanditState(std::size_t q, NoiseSet noise, std::uint64_t exploration_seed, EstimateOptions options)
    : noise_(std::move(noise)), options_(options), exploration_(exploration_seed) {
    if (q == 0) throw DimensionError("bandit needs at least one arm");
    const Eigen::Index d = noise_.dim();
    groups_.resize(q);
    for (std::size_t p = 0; p < q; ++p) groups_[p].system = p;
    estimates_.assign(q, Matrix::Zero(d, d));
    radii_.assign(q, 0.0);
    statuses_.assign(q, EstimateStatus::Underdetermined);
}

std::vector<std::size_t> BanditState::init_sweep(Environment& env, const StepObserver& observe) {
    if (phase_ != BanditPhase::InitSweep) throw std::logic_error("init_sweep() on a running bandit");
    std::vector<std::size_t> played;
    for (std::size_t p = 0; p < q(); ++p) {
        const double norm = env.state().norm();
        update(p, env.step(p));
        played.push_back(p);
        if (observe) observe(p, norm);
    }
    phase_ = BanditPhase::Running;
    return played;
}

std::size_t BanditState::choose_arm() {
    if (phase_ != BanditPhase::Running) throw std::logic_error("choose_arm() before the initial sweep");
    return setmem::choose_arm(radii_, exploration_);
}

void BanditState::update(std::size_t arm, MeasurementPair pair) {
    if (arm >= q()) throw DimensionError("arm index out of range");
    auto& g = groups_[arm];
    g.pairs.push_back(std::move(pair));
    const EstimateResult est = sme_estimate(g, noise_, options_);
    if (est.status == EstimateStatus::Infeasible) {
        throw NumericalError("arm " + std::to_string(arm + 1) + ": set-membership estimate is infeasible (n=" +
                             std::to_string(g.size()) + ")");
    }
    estimates_[arm] = est.a_hat;
    radii_[arm] = spectral_radius(est.a_hat);
    statuses_[arm] = est.status;
}

PolicyTrace run_policy(const SwitchedSystem& system, const NoiseSet& noise, std::size_t horizon, std::uint64_t seed,
                       const PolicyOptions& options) {
    const std::size_t q = system.q();
    if (horizon <= q) throw DimensionError("policy horizon must exceed the number of arms");
    require_dim(noise.dim() == system.dim(), "policy noise vs system");

    Vector x0 = options.x0.size() == 0 ? Vector::Zero(system.dim()) : options.x0;
    Environment env(system, NoiseSampler(noise, derive_seed(seed, kNoiseStream)), std::move(x0));
    BanditState bandit(q, noise, derive_seed(seed, kExplorationStream), options.estimate);

    PolicyTrace trace;
    trace.seed = seed;
    auto record = [&](std::size_t t, std::size_t arm, double norm) {
        PolicyStep s;
        s.t = t;
        s.arm = arm;
        s.state_norm = norm;
        s.radii = bandit.radii();
        for (std::size_t p = 0; p < q; ++p) {
            s.errors.push_back(estimation_error(bandit.estimates()[p], system.matrix(p), options.metric));
        }
        trace.steps.push_back(std::move(s));
    };

    try {
        bandit.init_sweep(env, [&](std::size_t arm, double norm) { record(arm, arm, norm); });
        for (std::size_t t = q; t < horizon; ++t) {
            const std::size_t arm = bandit.choose_arm();
            const double norm = env.state().norm();
            bandit.update(arm, env.step(arm));
            record(t, arm, norm);
        }
    } catch (const ExplosionError&) {
        trace.status = "exploded";
    }
    return trace;
}

}  // namespace setmem
