#include "growth/model_core.hpp"

#include <cmath>

namespace growth {

const char* type_name(ResearchType k) {
    switch (k) {
        case ResearchType::AppliedLow: return "al";
        case ResearchType::AppliedHigh: return "ah";
        case ResearchType::Basic: return "b";
    }
    return "?";
}

double Primitives::theta(ResearchType k) const {
    switch (k) {
        case ResearchType::AppliedLow: return theta_al;
        case ResearchType::AppliedHigh: return theta_ah;
        case ResearchType::Basic: return theta_b;
    }
    return 0.0;
}

double Primitives::transition_rate(ResearchType k) const {
    switch (k) {
        case ResearchType::AppliedLow: return 0.0;
        case ResearchType::AppliedHigh: return nu;
        case ResearchType::Basic: return mu;
    }
    return 0.0;
}

namespace {
void require(bool ok, const char* key, const char* what) {
    if (!ok) throw DomainError(std::string(key) + ": " + what);
}
}  // namespace

void Primitives::validate() const {
    require(alpha >= 0 && alpha <= 1, "alpha", "must lie in [0,1]");
    require(beta >= 0 && beta <= 1, "beta", "must lie in [0,1]");
    require(phi >= 0, "phi", "must be >= 0");
    require(varphi >= 0, "varphi", "must be >= 0");
    require(nu >= 0, "nu", "must be >= 0");
    require(mu >= 0, "mu", "must be >= 0");
    require(lambda > 0, "lambda", "must be > 0");
    require(eta > lambda, "eta", "must exceed lambda");
    require(theta_b > 0, "theta_b", "must be > 0");
    require(theta_al > theta_b, "theta_al", "must exceed theta_b");
    require(theta_ah > theta_al, "theta_ah", "must exceed theta_al");
    require(theta_e > 0, "theta_e", "must be > 0");
    require(epsilon > 1, "epsilon", "must be > 1");
    require(gamma > 0 && gamma < 1, "gamma", "must lie in (0,1)");
    require(rho > 0, "rho", "must be > 0");
    require(vartheta > 0, "vartheta", "must be > 0");
    require(L_s > 0, "L_s", "must be > 0");
    require(varsigma >= 1, "varsigma", "must be >= 1");
}

double profit_constant(const Primitives& p) {
    const double e = p.epsilon;
    if (!(e > 1)) throw DomainError("epsilon: must be > 1");
    return std::pow((e - 1) / e, e) / (e - 1);
}

double spillover_share(double phi_al, double phi_ah, double phi_b, double varsigma) {
    if (phi_al < 0 || phi_ah < 0 || phi_b < 0) throw DomainError("negative active share");
    const double den = phi_al + phi_ah + varsigma * phi_b;
    if (!(den > 0)) throw DegenerateEconomy("no active firms");
    return varsigma * phi_b / den;
}

double applied_step(double xi, const Primitives& p) {
    if (xi < 0 || xi > 1) throw DomainError("spillover share outside [0,1]");
    return xi * p.eta + (1 - xi) * p.lambda;
}

double innovation_step(ResearchType k, double xi, const Primitives& p) {
    return k == ResearchType::Basic ? p.eta : applied_step(xi, p);
}

double economy_step_average(double phi_al, double phi_ah, double phi_b, double xi,
                            const Primitives& p) {
    const double act = phi_al + phi_ah + phi_b;
    if (!(act > 0)) throw DegenerateEconomy("no active firms");
    return ((phi_al + phi_ah) * applied_step(xi, p) + phi_b * p.eta) / act;
}

double rd_labor_demand(double x, double theta, const Primitives& p) {
    if (!(theta > 0)) throw DomainError("theta: must be > 0");
    if (x < 0) throw DomainError("innovation rate must be >= 0");
    if (x == 0) return 0.0;
    const double g = p.gamma;
    return std::exp((std::log(x) - g * std::log(theta)) / (1 - g));
}

PerType entry_type_probabilities(const Primitives& p) {
    const double b = p.alpha;
    const double ah = (1 - p.alpha) * p.beta;
    return {1.0 - b - ah, ah, b};
}

double subsidized_capacity(double theta, double s, const Primitives& p) {
    if (s < 0 || s >= 1) throw DomainError("subsidy rate must lie in [0,1)");
    if (!(theta > 0)) throw DomainError("theta: must be > 0");
    return theta * std::pow(1 - s, -(1 - p.gamma) / p.gamma);
}

double pow_ratio(double base, double q, double e) {
    if (base <= 0) return 0.0;
    const double l = e * (std::log(base) - std::log(q));
    if (l < -690.0) return 0.0;
    return std::exp(l);
}

}  // namespace growth
