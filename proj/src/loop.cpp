#include "valagg/loop.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "valagg/rng.hpp"

namespace valagg {

namespace {

std::string fmt_num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

long SamplingSchedule::samples_at(long n) const {
    if (n < 1) throw std::invalid_argument("SamplingSchedule: round index must be >= 1");
    const double m = std::ceil(static_cast<double>(m0) *
                               std::pow(static_cast<double>(n), growth_exponent));
    return std::max(1L, static_cast<long>(m));
}

namespace {

/// Base problem with λ·R(x) added to every per-round cost. Strong convexity
/// inflates to alpha + λ·alpha_R while the cross-argument modulus is
/// unchanged, so the stability ratio shrinks accordingly.
class WeightedInstance final : public ProblemInstance {
public:
    WeightedInstance(InstancePtr base, Regularizer reg, double lambda)
        : base_(std::move(base)), reg_(std::move(reg)), lambda_(lambda) {
        if (!(lambda >= 0.0)) throw std::invalid_argument("weighted regularization: lambda must be >= 0");
        if (!(reg_.strong_convexity > 0.0))
            throw std::invalid_argument(
                "weighted regularization: regularizer must declare positive strong convexity");
        const StructuralConstants& c = base_->constants();
        constants_ = StructuralConstants::make(c.alpha + lambda_ * reg_.strong_convexity, c.beta,
                                               c.g2 + lambda_ * reg_.grad_bound,
                                               estimate_floor());
    }

    std::size_t dimension() const override { return base_->dimension(); }
    const Domain& domain() const override { return base_->domain(); }
    const Domain& reference_box() const override { return base_->reference_box(); }
    const StructuralConstants& constants() const override { return constants_; }
    long horizon() const override { return base_->horizon(); }

    double value(const Vec& y, const Vec& x) const override {
        return base_->value(y, x) + lambda_ * reg_.value(x);
    }

    Vec grad_x(const Vec& y, const Vec& x) const override {
        Vec g = base_->grad_x(y, x);
        vec::axpy(g, lambda_, reg_.gradient(x));
        return g;
    }

    std::optional<QuadraticCost> quadratic_cost(const Vec& y) const override {
        auto q = base_->quadratic_cost(y);
        if (!q || !reg_.quadratic) return std::nullopt;
        QuadraticCost sum = *q;
        QuadraticCost r = *reg_.quadratic;
        r.curvature *= lambda_;
        r.linear = vec::scaled(r.linear, lambda_);
        r.offset *= lambda_;
        sum += r;
        return sum;
    }

    double curvature_bound() const override {
        const double rc = reg_.quadratic ? reg_.quadratic->curvature : reg_.strong_convexity;
        return base_->curvature_bound() + lambda_ * rc;
    }

    double value_bound() const override { return base_->value_bound() + lambda_ * reg_value_bound(); }

    std::optional<Vec> expert_parameter() const override { return base_->expert_parameter(); }

    bool supports_sampling() const override {
        return base_->supports_sampling() && reg_.quadratic.has_value();
    }

    PerRoundCost sample_cost(const Vec& anchor, long count, std::uint64_t seed) const override {
        PerRoundCost g = base_->sample_cost(anchor, count, seed);
        if (!g.quadratic || !reg_.quadratic)
            throw std::runtime_error(describe() + ": sampled weighted costs need quadratic forms");
        QuadraticCost sum = *g.quadratic;
        QuadraticCost r = *reg_.quadratic;
        r.curvature *= lambda_;
        r.linear = vec::scaled(r.linear, lambda_);
        r.offset *= lambda_;
        sum += r;
        return PerRoundCost::from_quadratic(ParameterPoint(anchor), sum, count);
    }

    std::string describe() const override {
        return base_->describe() + "+weighted(lambda=" + fmt_num(lambda_) + ",R=" + reg_.name +
               ")";
    }

private:
    double reg_value_bound() const {
        if (reg_.name == "expert") return base_->value_bound();
        // quadratic regularizer peaks at the farthest corner of the box
        const Domain& box = base_->reference_box();
        double corner_sq = 0.0;
        for (std::size_t i = 0; i < box.dimension; ++i) {
            const double m = std::max(std::fabs(box.lower[i]), std::fabs(box.upper[i]));
            corner_sq += m * m;
        }
        return 0.5 * reg_.strong_convexity * corner_sq;
    }

    // Probe estimate of sup_y min_x [F(y,x) + λR(x)]; the transformed floor
    // has no generic closed form.
    double estimate_floor() const {
        const Domain& box = base_->reference_box();
        Rng rng(17);
        double floor = base_->constants().eps_tilde;
        for (int p = 0; p < 64; ++p) {
            const Vec y = rng.uniform_in_box(box.lower, box.upper);
            auto q = quadratic_cost(y);
            if (!q) break;
            const Vec xmin = domain().project(q->minimizer());
            floor = std::max(floor, q->value(xmin));
        }
        return floor;
    }

    InstancePtr base_;
    Regularizer reg_;
    double lambda_;
    StructuralConstants constants_;
};

RunTrace run_loop(const InstancePtr& base, const LoopConfig& config) {
    if (config.iterations < 1) throw std::invalid_argument("loop: iterations must be >= 1");
    if (config.variant == LoopVariant::stochastic && !config.sampling)
        throw std::invalid_argument("loop: stochastic runs need a sampling schedule");
    if (!(config.abort_magnitude > 0.0))
        throw std::invalid_argument("loop: abort magnitude must be > 0");

    InstancePtr effective =
        config.transformer ? apply_transformer(base, *config.transformer) : base;
    require_dimension(effective->dimension(), config.x1.dim(), "loop(x1)");
    if (!effective->domain().contains(config.x1.coords))
        throw std::invalid_argument("loop: x1 lies outside the run domain");
    if (config.variant == LoopVariant::stochastic && !effective->supports_sampling())
        throw std::runtime_error(effective->describe() + ": instance does not provide a sampler");

    RunTrace trace;
    trace.base_constants = base->constants();
    trace.effective_constants = effective->constants();
    if (config.transformer) {
        TransformEcho echo;
        echo.kind = config.transformer->kind == TransformKind::mixing ? "mixing" : "weighted";
        echo.q = config.transformer->mixing_q;
        echo.lambda = config.transformer->lambda;
        echo.horizon = base->horizon();
        echo.value_bound = base->value_bound();
        echo.r_nonneg = config.transformer->r_nonneg;
        trace.transform = echo;
    }

    const Domain& domain = effective->domain();
    const long n_rounds = config.iterations;
    CostAggregate aggregate;
    Vec x = config.x1.coords;

    for (long n = 1; n <= n_rounds; ++n) {
        ParameterPoint current(x);
        if (n >= 2) {
            double sum = 0.0;
            for (long k = 0; k + 1 < n; ++k) sum += vec::dist(x, trace.iterates[k].coords);
            trace.s_values.push_back(sum / static_cast<double>(n - 1));
        }
        trace.iterates.push_back(current);
        trace.self_values.push_back(base->value(x, x));
        trace.self_values_effective.push_back(
            effective.get() == base.get() ? trace.self_values.back() : effective->value(x, x));

        PerRoundCost cost =
            config.variant == LoopVariant::stochastic
                ? effective->sample_cost(x, config.sampling->samples_at(n),
                                         substream_seed(config.sampling->noise_seed,
                                                        static_cast<std::uint64_t>(n)))
                : freeze_cost(effective, current);
        trace.per_round_values.push_back(cost.value(x));
        aggregate.add(std::move(cost));

        const SolveReport report = ftl_step(aggregate, domain, current, config.tol_inner);
        if (n < n_rounds) {
            const Vec& next = report.minimizer.coords;
            if (!vec::all_finite(next) || vec::max_abs(next) > config.abort_magnitude) {
                trace.aborted = true;
                trace.abort_reason = "iterate magnitude exceeded " +
                                     fmt_num(config.abort_magnitude) + " at round " +
                                     std::to_string(n + 1);
                break;
            }
            trace.step_norms.push_back(vec::dist(x, next));
            x = next;
        } else {
            trace.batch_min_avg = report.value / static_cast<double>(n_rounds);
        }
    }

    if (!trace.aborted) {
        double played = 0.0;
        for (double v : trace.per_round_values) played += v;
        trace.regret_avg = played / static_cast<double>(n_rounds) - trace.batch_min_avg;
    }
    trace.best_index = select_best(trace).first;
    return trace;
}

}  // namespace

RunTrace run_deterministic(const InstancePtr& instance, const LoopConfig& config) {
    if (config.variant != LoopVariant::deterministic)
        throw std::invalid_argument("run_deterministic: config variant mismatch");
    return run_loop(instance, config);
}

RunTrace run_stochastic(const InstancePtr& instance, const LoopConfig& config) {
    if (config.variant != LoopVariant::stochastic)
        throw std::invalid_argument("run_stochastic: config variant mismatch");
    return run_loop(instance, config);
}

InstancePtr apply_transformer(const InstancePtr& instance, const CostTransformer& transformer) {
    if (transformer.kind == TransformKind::mixing) {
        if (transformer.mixing_q < 0.0 || transformer.mixing_q > 1.0)
            throw std::invalid_argument("mixing: rate q must be in [0, 1]");
        if (!instance->supports_mixing())
            throw std::runtime_error(instance->describe() +
                                     ": mixing requires a mixed-first-argument evaluation "
                                     "capability (not exposed by this instance)");
        return instance->mixed(transformer.mixing_q);
    }
    if (!transformer.regularizer)
        throw std::invalid_argument(
            "weighted regularization requires a regularizer with declared strong convexity");
    return std::make_shared<WeightedInstance>(instance, *transformer.regularizer,
                                              transformer.lambda);
}

std::pair<std::size_t, double> select_best(const RunTrace& trace) {
    if (trace.self_values.empty()) throw std::invalid_argument("select_best: empty trace");
    std::size_t best = 0;
    for (std::size_t i = 1; i < trace.self_values.size(); ++i)
        if (trace.self_values[i] < trace.self_values[best]) best = i;
    return {best + 1, trace.self_values[best]};
}

}  // namespace valagg
