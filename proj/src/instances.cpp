#include "valagg/instances.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "valagg/rng.hpp"

namespace valagg {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

class CounterexampleInstance final : public ProblemInstance {
public:
    explicit CounterexampleInstance(const CounterexampleSpec& spec) : spec_(spec) {
        if (!(spec.theta >= 0.0))
            throw std::invalid_argument("counterexample: theta must be >= 0");
        if (!(spec.reference_radius > 0.0))
            throw std::invalid_argument("counterexample: reference radius must be > 0");
        domain_ = Domain::unbounded(1);
        box_ = Domain::centered_box(1, spec.reference_radius);
        const double r = spec.reference_radius;
        constants_ = StructuralConstants::make(2.0, 2.0 * spec.theta, 2.0 * r * (1.0 + spec.theta),
                                               0.0);
    }

    std::size_t dimension() const override { return 1; }
    const Domain& domain() const override { return domain_; }
    const Domain& reference_box() const override { return box_; }
    const StructuralConstants& constants() const override { return constants_; }
    long horizon() const override { return 2; }

    double value(const Vec& y, const Vec& x) const override {
        const double r = x[0] - spec_.theta * y[0];
        return r * r;
    }

    Vec grad_x(const Vec& y, const Vec& x) const override {
        return {2.0 * (x[0] - spec_.theta * y[0])};
    }

    std::optional<QuadraticCost> quadratic_cost(const Vec& y) const override {
        return QuadraticCost::from_target(2.0, {spec_.theta * y[0]}, 0.0);
    }

    double curvature_bound() const override { return 2.0; }

    double value_bound() const override {
        const double r = spec_.reference_radius;
        const double span = r * (1.0 + spec_.theta);
        return span * span;
    }

    std::optional<Vec> expert_parameter() const override { return Vec{0.0}; }

    bool supports_mixing() const override { return true; }
    std::shared_ptr<const ProblemInstance> mixed(double q) const override;

    std::string describe() const override { return "counterexample(theta=" + fmt(spec_.theta) + ")"; }

    double performance_index(double x) const {
        const double d = spec_.theta - 1.0;
        return d * d * x * x;
    }

private:
    CounterexampleSpec spec_;
    Domain domain_;
    Domain box_;
    StructuralConstants constants_;
};

class AffineQuadraticInstance final : public ProblemInstance {
public:
    explicit AffineQuadraticInstance(const AffineQuadraticSpec& spec) : spec_(spec) {
        if (!spec.M.square() || spec.M.rows == 0)
            throw std::invalid_argument("affine-quadratic: M must be square and nonempty");
        if (spec.b.size() != spec.M.rows)
            throw std::invalid_argument("affine-quadratic: b must match the dimension of M");
        if (!(spec.alpha > 0.0)) throw std::invalid_argument("affine-quadratic: alpha must be > 0");
        if (!(spec.offset >= 0.0))
            throw std::invalid_argument("affine-quadratic: offset must be >= 0");
        const std::size_t d = spec.M.rows;
        domain_ = Domain::unbounded(d);
        box_ = Domain::centered_box(d, spec.reference_radius);
        op_norm_ = operator_norm(spec.M);
        const double r = spec.reference_radius;
        const double span = r * std::sqrt(static_cast<double>(d)) * (1.0 + op_norm_) +
                            vec::norm(spec.b);
        constants_ = StructuralConstants::make(spec.alpha, spec.alpha * op_norm_,
                                               spec.alpha * span, spec.offset);
        value_bound_ = 0.5 * spec.alpha * span * span + spec.offset;
        try {
            Matrix i_minus_m = Matrix::identity(d);
            for (std::size_t r2 = 0; r2 < d; ++r2)
                for (std::size_t c2 = 0; c2 < d; ++c2) i_minus_m.at(r2, c2) -= spec.M.at(r2, c2);
            expert_ = solve_linear(i_minus_m, spec.b);
        } catch (const std::runtime_error&) {
            expert_.reset();  // no fixed point; mixing unavailable
        }
    }

    std::size_t dimension() const override { return spec_.M.rows; }
    const Domain& domain() const override { return domain_; }
    const Domain& reference_box() const override { return box_; }
    const StructuralConstants& constants() const override { return constants_; }

    Vec target(const Vec& y) const {
        Vec t = spec_.M.apply(y);
        vec::axpy(t, 1.0, spec_.b);
        return t;
    }

    double value(const Vec& y, const Vec& x) const override {
        const Vec r = vec::sub(x, target(y));
        return 0.5 * spec_.alpha * vec::dot(r, r) + spec_.offset;
    }

    Vec grad_x(const Vec& y, const Vec& x) const override {
        return vec::scaled(vec::sub(x, target(y)), spec_.alpha);
    }

    std::optional<QuadraticCost> quadratic_cost(const Vec& y) const override {
        return QuadraticCost::from_target(spec_.alpha, target(y), spec_.offset);
    }

    double curvature_bound() const override { return spec_.alpha; }
    double value_bound() const override { return value_bound_; }

    std::optional<Vec> expert_parameter() const override { return expert_; }

    bool supports_mixing() const override { return expert_.has_value(); }
    std::shared_ptr<const ProblemInstance> mixed(double q) const override;

    std::string describe() const override {
        return "affine-quadratic(d=" + std::to_string(spec_.M.rows) + ",opnorm=" + fmt(op_norm_) +
               ",alpha=" + fmt(spec_.alpha) + ")";
    }

private:
    AffineQuadraticSpec spec_;
    Domain domain_;
    Domain box_;
    StructuralConstants constants_;
    double op_norm_ = 0.0;
    double value_bound_ = 0.0;
    std::optional<Vec> expert_;
};

class LinearImitationInstance final : public ProblemInstance {
public:
    LinearImitationInstance(const LinearImitationSpec& spec, double mix_q)
        : spec_(spec), mix_q_(mix_q) {
        if (!(spec.sigma0_sq > 0.0))
            throw std::invalid_argument("linear-imitation: sigma0_sq must be > 0");
        if (spec.horizon < 1) throw std::invalid_argument("linear-imitation: horizon must be >= 1");
        if (!(spec.gain_lo < spec.gain_hi))
            throw std::invalid_argument("linear-imitation: gain box requires lo < hi");
        if (spec.expert_gain < spec.gain_lo || spec.expert_gain > spec.gain_hi)
            throw std::invalid_argument("linear-imitation: expert gain must lie in the gain box");
        if (mix_q < 0.0 || mix_q > 1.0)
            throw std::invalid_argument("linear-imitation: mixing rate must be in [0, 1]");
        domain_ = Domain::unbounded(1);
        box_ = Domain::box({spec.gain_lo}, {spec.gain_hi});

        // Suprema over the gain box. The closed-loop gain a + g·y is affine in
        // y, so its magnitude peaks at an endpoint.
        const double amp_lo = std::fabs(spec.a + spec.action_gain * spec.gain_lo);
        const double amp_hi = std::fabs(spec.a + spec.action_gain * spec.gain_hi);
        const double amp_max = std::max(amp_lo, amp_hi);
        const double rho_star = closed_loop_rho(spec.expert_gain);
        // Bound on the (possibly mixed) per-step moment ratio over the box.
        const double rho_bound =
            mix_q_ * rho_star + (1.0 - mix_q_) * amp_max * amp_max;

        double w_max = 0.0;
        double dw_max = 0.0;  // bound on |d/dy Σ m_t(y)|
        double pow_t = 1.0;   // rho_bound^t
        for (long t = 0; t < spec.horizon; ++t) {
            w_max += pow_t;
            if (t >= 1) {
                // |d/dy rho_bound^t contribution| <= t·rho^{t-1}·(1-q)·2·amp·|g|
                dw_max += static_cast<double>(t) * std::pow(rho_bound, t - 1) * (1.0 - mix_q_) *
                          2.0 * amp_max * std::fabs(spec.action_gain);
            }
            pow_t *= rho_bound;
        }
        w_max *= spec.sigma0_sq;
        dw_max *= spec.sigma0_sq;
        const double x_max =
            std::max(std::fabs(spec.gain_lo - spec.expert_gain), std::fabs(spec.gain_hi - spec.expert_gain));

        const double alpha = 2.0 * spec.sigma0_sq;
        double beta;
        if (mix_q_ == 0.0) {
            beta = 2.0 * dw_max * x_max;
        } else {
            // Declared modulus of the mixed problem: (1 - q^T)·beta of the base.
            LinearImitationSpec base = spec;
            const LinearImitationInstance unmixed(base, 0.0);
            beta = (1.0 - std::pow(mix_q_, static_cast<double>(spec.horizon))) *
                   unmixed.constants().beta;
        }
        const double g2 = 2.0 * w_max * x_max;
        constants_ = StructuralConstants::make(alpha, beta, g2, 0.0);
        curvature_bound_ = 2.0 * w_max;
        value_bound_ = w_max * x_max * x_max;
    }

    std::size_t dimension() const override { return 1; }
    const Domain& domain() const override { return domain_; }
    const Domain& reference_box() const override { return box_; }
    const StructuralConstants& constants() const override { return constants_; }
    long horizon() const override { return spec_.horizon; }

    double closed_loop_rho(double gain) const {
        const double amp = spec_.a + spec_.action_gain * gain;
        return amp * amp;
    }

    /// Total moment weight w(y) = Σ_{t<T} m_t(y), with per-step mixing at rate q.
    double moment_weight(double y) const {
        const double rho_star = closed_loop_rho(spec_.expert_gain);
        const double rho = mix_q_ * rho_star + (1.0 - mix_q_) * closed_loop_rho(y);
        double m_t = spec_.sigma0_sq;
        double sum = 0.0;
        for (long t = 0; t < spec_.horizon; ++t) {
            sum += m_t;
            m_t *= rho;
        }
        return sum;
    }

    double value(const Vec& y, const Vec& x) const override {
        const double d = x[0] - spec_.expert_gain;
        return moment_weight(y[0]) * d * d;
    }

    Vec grad_x(const Vec& y, const Vec& x) const override {
        return {2.0 * moment_weight(y[0]) * (x[0] - spec_.expert_gain)};
    }

    std::optional<QuadraticCost> quadratic_cost(const Vec& y) const override {
        return QuadraticCost::from_target(2.0 * moment_weight(y[0]), {spec_.expert_gain}, 0.0);
    }

    double curvature_bound() const override { return curvature_bound_; }
    double value_bound() const override { return value_bound_; }

    std::optional<Vec> expert_parameter() const override { return Vec{spec_.expert_gain}; }

    bool supports_mixing() const override { return true; }
    std::shared_ptr<const ProblemInstance> mixed(double q) const override {
        return std::make_shared<LinearImitationInstance>(spec_, q);
    }

    std::string describe() const override {
        std::string s = "linear-imitation(a=" + fmt(spec_.a) + ",ab=" + fmt(spec_.action_gain) +
                        ",kstar=" + fmt(spec_.expert_gain) + ",T=" + std::to_string(spec_.horizon) + ")";
        if (mix_q_ > 0.0) s += "+mixing(q=" + fmt(mix_q_) + ")";
        return s;
    }

private:
    LinearImitationSpec spec_;
    double mix_q_ = 0.0;
    Domain domain_;
    Domain box_;
    StructuralConstants constants_;
    double curvature_bound_ = 0.0;
    double value_bound_ = 0.0;
};

/// Synthetic mixing for families without trajectories: the distribution
/// argument is contracted toward the expert parameter,
/// F̂(y, x) = F((1−κ)y + κ·y*, x) with κ = q^T, which carries exactly the
/// (1 − q^T)·beta modulus of per-step mixing.
class ContractedInstance final : public ProblemInstance {
public:
    ContractedInstance(InstancePtr base, double q) : base_(std::move(base)), q_(q) {
        if (q < 0.0 || q > 1.0)
            throw std::invalid_argument("mixing: rate q must be in [0, 1]");
        auto expert = base_->expert_parameter();
        if (!expert)
            throw std::runtime_error(base_->describe() +
                                     ": mixing requires an expert parameter to contract toward");
        expert_ = *expert;
        if (!base_->reference_box().contains(expert_, 1e-12))
            throw std::runtime_error(base_->describe() +
                                     ": expert parameter lies outside the reference box");
        kappa_ = std::pow(q, static_cast<double>(base_->horizon()));
        const StructuralConstants& c = base_->constants();
        constants_ = StructuralConstants::make(c.alpha, (1.0 - kappa_) * c.beta, c.g2, c.eps_tilde);
    }

    std::size_t dimension() const override { return base_->dimension(); }
    const Domain& domain() const override { return base_->domain(); }
    const Domain& reference_box() const override { return base_->reference_box(); }
    const StructuralConstants& constants() const override { return constants_; }
    long horizon() const override { return base_->horizon(); }

    Vec blend(const Vec& y) const {
        Vec z = vec::scaled(y, 1.0 - kappa_);
        vec::axpy(z, kappa_, expert_);
        return z;
    }

    double value(const Vec& y, const Vec& x) const override { return base_->value(blend(y), x); }
    Vec grad_x(const Vec& y, const Vec& x) const override { return base_->grad_x(blend(y), x); }

    std::optional<QuadraticCost> quadratic_cost(const Vec& y) const override {
        return base_->quadratic_cost(blend(y));
    }

    double curvature_bound() const override { return base_->curvature_bound(); }
    double value_bound() const override { return base_->value_bound(); }
    std::optional<Vec> expert_parameter() const override { return expert_; }

    bool supports_sampling() const override { return base_->supports_sampling(); }
    PerRoundCost sample_cost(const Vec& anchor, long count, std::uint64_t seed) const override {
        return base_->sample_cost(blend(anchor), count, seed);
    }

    std::string describe() const override {
        return base_->describe() + "+mixing(q=" + fmt(q_) + ")";
    }

private:
    InstancePtr base_;
    double q_ = 0.0;
    double kappa_ = 0.0;
    Vec expert_;
    StructuralConstants constants_;
};

class StochasticInstance final : public ProblemInstance {
public:
    explicit StochasticInstance(const StochasticWrapperSpec& spec) : spec_(spec) {
        if (!spec.base) throw std::invalid_argument("stochastic wrapper: base instance required");
        if (!(spec.sigma >= 0.0))
            throw std::invalid_argument("stochastic wrapper: sigma must be >= 0");
        if (spec.noise == NoiseKind::gaussian && !spec.allow_unbounded)
            throw std::invalid_argument(
                "stochastic wrapper: gaussian noise has no almost-sure gradient bound; pass "
                "allow_unbounded to use it on unchecked runs");
        const StructuralConstants& c = spec.base->constants();
        const double d = std::sqrt(static_cast<double>(spec.base->dimension()));
        // Bounded noises shift sampled gradients by at most curvature·sigma·sqrt(d).
        constants_ = StructuralConstants::make(
            c.alpha, c.beta, c.g2 + spec.base->curvature_bound() * spec.sigma * d, c.eps_tilde);
    }

    std::size_t dimension() const override { return spec_.base->dimension(); }
    const Domain& domain() const override { return spec_.base->domain(); }
    const Domain& reference_box() const override { return spec_.base->reference_box(); }
    const StructuralConstants& constants() const override { return constants_; }
    long horizon() const override { return spec_.base->horizon(); }

    double value(const Vec& y, const Vec& x) const override { return spec_.base->value(y, x); }
    Vec grad_x(const Vec& y, const Vec& x) const override { return spec_.base->grad_x(y, x); }
    std::optional<QuadraticCost> quadratic_cost(const Vec& y) const override {
        return spec_.base->quadratic_cost(y);
    }
    double curvature_bound() const override { return spec_.base->curvature_bound(); }
    double value_bound() const override { return spec_.base->value_bound(); }
    std::optional<Vec> expert_parameter() const override { return spec_.base->expert_parameter(); }

    bool supports_mixing() const override { return spec_.base->supports_mixing(); }
    std::shared_ptr<const ProblemInstance> mixed(double q) const override {
        StochasticWrapperSpec rewrapped = spec_;
        rewrapped.base = spec_.base->mixed(q);
        return std::make_shared<StochasticInstance>(rewrapped);
    }

    bool supports_sampling() const override { return true; }

    PerRoundCost sample_cost(const Vec& anchor, long count, std::uint64_t seed) const override {
        if (count < 1) throw std::invalid_argument("sample_cost: count must be >= 1");
        auto quad = spec_.base->quadratic_cost(anchor);
        if (!quad)
            throw std::runtime_error(describe() +
                                     ": sampling requires a canonical quadratic per-round cost");
        const std::size_t d = dimension();
        Rng rng(seed);
        // Each sample shifts the target of the canonical quadratic by a
        // zero-mean draw; the average of the samples is again an exact
        // quadratic with the mean shift and a value-only spread term
        // (1/m)Σ‖ω_k − ω̄‖² = mean‖ω‖² − ‖ω̄‖².
        Vec sum = vec::zeros(d);
        double sum_sq = 0.0;
        for (long k = 0; k < count; ++k) {
            for (std::size_t i = 0; i < d; ++i) {
                const double w = draw_noise(rng);
                sum[i] += w;
                sum_sq += w * w;
            }
        }
        const Vec mean = vec::scaled(sum, 1.0 / static_cast<double>(count));
        const double spread =
            std::max(0.0, sum_sq / static_cast<double>(count) - vec::dot(mean, mean));

        const Vec base_target = quad->minimizer();
        const double base_min = quad->value(base_target);
        const double h = quad->curvature;
        QuadraticCost g = QuadraticCost::from_target(h, vec::add(base_target, mean),
                                                     base_min + 0.5 * h * spread);
        return PerRoundCost::from_quadratic(ParameterPoint(anchor), g, count);
    }

    std::string describe() const override {
        const char* kind = spec_.noise == NoiseKind::uniform          ? "uniform"
                           : spec_.noise == NoiseKind::scaled_bernoulli ? "bernoulli"
                                                                        : "gaussian";
        return spec_.base->describe() + "+noise(" + kind + ",sigma=" + fmt(spec_.sigma) + ")";
    }

private:
    double draw_noise(Rng& rng) const {
        switch (spec_.noise) {
            case NoiseKind::uniform:
                return spec_.sigma * (2.0 * rng.uniform01() - 1.0);
            case NoiseKind::scaled_bernoulli:
                return (rng.next_u64() & 1u) ? spec_.sigma : -spec_.sigma;
            case NoiseKind::gaussian: {
                const double u1 = rng.uniform01();
                const double u2 = rng.uniform01();
                return spec_.sigma * std::sqrt(-2.0 * std::log1p(-u1)) *
                       std::cos(6.283185307179586476925286766559 * u2);
            }
        }
        return 0.0;
    }

    StochasticWrapperSpec spec_;
    StructuralConstants constants_;
};

std::shared_ptr<const ProblemInstance> CounterexampleInstance::mixed(double q) const {
    return std::make_shared<ContractedInstance>(
        std::make_shared<CounterexampleInstance>(spec_), q);
}

std::shared_ptr<const ProblemInstance> AffineQuadraticInstance::mixed(double q) const {
    return std::make_shared<ContractedInstance>(
        std::make_shared<AffineQuadraticInstance>(spec_), q);
}

}  // namespace

InstancePtr make_counterexample(const CounterexampleSpec& spec) {
    return std::make_shared<CounterexampleInstance>(spec);
}

double counterexample_performance_index(const ProblemInstance& inst, double x) {
    const auto* ce = dynamic_cast<const CounterexampleInstance*>(&inst);
    if (!ce)
        throw std::invalid_argument("performance index is defined for counterexample instances");
    return ce->performance_index(x);
}

InstancePtr make_affine_quadratic(const AffineQuadraticSpec& spec) {
    return std::make_shared<AffineQuadraticInstance>(spec);
}

InstancePtr make_linear_imitation(const LinearImitationSpec& spec) {
    return std::make_shared<LinearImitationInstance>(spec, 0.0);
}

InstancePtr make_stochastic(const StochasticWrapperSpec& spec) {
    return std::make_shared<StochasticInstance>(spec);
}

PerRoundCost sample_cost(const InstancePtr& inst, const ParameterPoint& anchor, long count,
                         std::uint64_t seed) {
    require_dimension(inst->dimension(), anchor.dim(), "sample_cost(anchor)");
    if (count < 1) throw std::invalid_argument("sample_cost: count must be >= 1");
    return inst->sample_cost(anchor.coords, count, seed);
}

}  // namespace valagg
