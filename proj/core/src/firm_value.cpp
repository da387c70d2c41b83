#include "growth/firm_value.hpp"

#include <cmath>

namespace growth {

void Environment::validate(const Primitives& p) const {
    if (!(r + tau + p.varphi > 0)) throw DomainError("environment: r + tau + varphi must be > 0");
    if (!(g > 0)) throw DomainError("environment: g must be > 0");
    if (!(w > 0)) throw DomainError("environment: wage must be > 0");
    for (double c : q_min)
        if (c < 0) throw DomainError("environment: negative exit threshold");
}

ValueCurve::ValueCurve(ResearchType k, const Environment& env, const Primitives& p)
    : type_(k),
      em1_(p.epsilon - 1),
      g_(env.g),
      psi_(env.r + env.tau + p.varphi),
      iota_(p.transition_rate(k)),
      c_(env.q_min[idx(k)]),
      c_al_(env.q_min[idx(ResearchType::AppliedLow)]) {
    env.validate(p);
    const double pi = profit_constant(p);
    const double fixed = env.w * p.phi;
    a0_ = pi / (psi_ + g_ * em1_);
    b0_ = (env.omega[idx(ResearchType::AppliedLow)] - fixed) / psi_;
    a_ = pi / (psi_ + iota_ + g_ * em1_);
    b_ = (env.omega[idx(k)] - fixed) / (psi_ + iota_);
    b_shadow_ = (env.omega[idx(ResearchType::AppliedLow)] - fixed) / (psi_ + iota_);
    if (k == ResearchType::AppliedLow) {
        k_ = a0_ * std::pow(c_, em1_) + b0_;
    } else {
        k_ = a_ * std::pow(c_, em1_) + b_ + tail(c_);
    }
}

double ValueCurve::low_raw(double q) const {
    if (q <= c_al_) return 0.0;
    const double head = a0_ * std::pow(q, em1_) + b0_;
    const double at_c = a0_ * std::pow(c_al_, em1_) + b0_;
    return head - at_c * pow_ratio(c_al_, q, psi_ / g_);
}

double ValueCurve::low_shadow(double q) const {
    const double head = a_ * std::pow(q, em1_) + b_shadow_;
    const double at_c = a_ * std::pow(c_al_, em1_) + b_shadow_;
    return head - at_c * pow_ratio(c_al_, q, (psi_ + iota_) / g_);
}

double ValueCurve::tail(double q) const {
    if (q <= c_al_) return 0.0;
    return low_raw(q) - low_shadow(q);
}

double ValueCurve::raw(double q) const {
    if (q <= c_) return 0.0;
    if (type_ == ResearchType::AppliedLow) return low_raw(q);
    const double head = a_ * std::pow(q, em1_) + b_ + tail(q);
    return head - k_ * pow_ratio(c_, q, (psi_ + iota_) / g_);
}

double ValueCurve::operator()(double q) const {
    const double v = raw(q);
    return v > 0 ? v : 0.0;
}

double value_applied_low(double q, const Environment& env, const Primitives& p) {
    return ValueCurve(ResearchType::AppliedLow, env, p)(q);
}

double value_transitioning(double q, ResearchType k, const Environment& env,
                           const Primitives& p) {
    if (k == ResearchType::AppliedLow)
        throw DomainError("value_transitioning: type must be applied-high or basic");
    return ValueCurve(k, env, p)(q);
}

double exit_threshold_value(double omega, double w, const Primitives& p) {
    const double num = w * p.phi - omega;
    if (num <= 0) return 0.0;
    return std::pow(num / profit_constant(p), 1.0 / (p.epsilon - 1));
}

Threshold exit_threshold(ResearchType k, const Environment& env, const Primitives& p) {
    const double c = exit_threshold_value(env.omega[idx(k)], env.w, p);
    return {c, c == 0.0};
}

double optimal_innovation_rate(double expected_gain, double theta, double w,
                               const Primitives& p) {
    if (!(w > 0)) throw DomainError("wage must be > 0");
    if (expected_gain < 0) throw DomainError("expected gain must be >= 0");
    if (expected_gain == 0) return 0.0;
    const double ex = (1 - p.gamma) / p.gamma;
    return theta * std::pow((1 - p.gamma) * expected_gain / w, ex);
}

double rd_option_value(double expected_gain, double theta, double w, const Primitives& p) {
    const double x = optimal_innovation_rate(expected_gain, theta, w, p);
    return x * expected_gain - w * rd_labor_demand(x, theta, p);
}

double expected_innovation_value(const ValueCurve& curve, std::span<const double> grid,
                                 std::span<const double> F, const Environment& env,
                                 const Primitives& p) {
    const double shift = innovation_step(curve.type(), env.xi, p) * env.q_bar;
    return stieltjes_expectation(grid, F, shift, [&](double q) { return curve(q); });
}

EntrantChoice entrant_rate(const PerType& expected_values, double w, const Primitives& p) {
    const PerType pr = entry_type_probabilities(p);
    double ev = 0.0;
    for (auto k : kAllTypes) ev += pr[idx(k)] * expected_values[idx(k)];
    return {ev, optimal_innovation_rate(ev, p.theta_e, w, p)};
}

}  // namespace growth
