#include "stationary/kernel.hpp"

#include "stationary/errors.hpp"

#include <charconv>
#include <cmath>
#include <vector>

namespace stationary {

InfStrategy InfStrategy::sampled(int n) {
    if (n < 2) throw ValidationError("sampled infimum needs at least 2 points");
    return {Kind::Sampled, n};
}

InfStrategy InfStrategy::parse(std::string_view text) {
    if (text == "endpoint") return endpoint_min();
    if (text.starts_with("sampled:")) {
        const auto digits = text.substr(8);
        int n = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
        if (ec == std::errc() && ptr == digits.data() + digits.size()) return sampled(n);
    }
    throw ValidationError("unknown infimum strategy '" + std::string(text) + "'");
}

std::string InfStrategy::name() const {
    if (kind == Kind::EndpointMin) return "endpoint";
    return "sampled:" + std::to_string(samples);
}

// ---------------------------------------------------------------------------

KernelModel KernelModel::ar1(double rho, InnovationDensity innovation) {
    if (!(std::abs(rho) < 1.0)) throw DomainError("AR(1) requires |rho| < 1");
    const double m = innovation.moment_order();
    return KernelModel(Ar1{rho, std::move(innovation)}, true, m);
}

KernelModel KernelModel::iterated_ar1(double rho, const InnovationDensity& base, int steps, double mesh) {
    if (!(std::abs(rho) < 1.0)) throw DomainError("AR(1) requires |rho| < 1");
    if (steps < 1) throw ValidationError("iterated AR(1) needs steps >= 1");
    if (rho == 0.0) throw DomainError("iterated AR(1) needs rho != 0 (use ar1 instead)");
    // theta_steps = sum_{k=1..steps} rho^(steps-k) theta_k
    std::vector<double> scales;
    for (int k = steps - 1; k >= 0; --k) scales.push_back(std::pow(rho, k));
    const Interval support = scaled_sum_support(base, scales);
    auto table = std::make_shared<const TabulatedDensity>(convolve_scaled(base, scales, mesh, support));
    IteratedAr1 it{std::pow(rho, steps), std::move(table), rho, base, steps};
    return KernelModel(std::move(it), true, base.moment_order());
}

KernelModel KernelModel::iterated_ar1(double rho_eff, std::shared_ptr<const TabulatedDensity> innovation,
                                      double drift_exponent) {
    if (!(std::abs(rho_eff) < 1.0)) throw DomainError("iterated AR(1) requires |rho_eff| < 1");
    if (!innovation) throw ValidationError("null innovation table");
    if (!(drift_exponent > 0.0)) throw DomainError("drift exponent must be positive");
    return KernelModel(IteratedAr1{rho_eff, std::move(innovation), 0.0, std::nullopt, 1}, true, drift_exponent);
}

KernelModel KernelModel::arch1(double alpha, double beta, double lambda, InnovationDensity innovation,
                               double drift_exponent) {
    if (!(beta > 0.0)) throw DomainError("ARCH(1) requires beta > 0");
    if (!(lambda > 0.0)) throw DomainError("ARCH(1) requires lambda > 0");
    if (!std::isfinite(alpha)) throw DomainError("ARCH(1) alpha must be finite");
    if (!(drift_exponent > 0.0)) throw DomainError("drift exponent must be positive");
    return KernelModel(Arch1{alpha, beta, lambda, std::move(innovation)}, false, drift_exponent);
}

KernelModel KernelModel::constant(InnovationDensity innovation) {
    const double m = innovation.moment_order();
    return KernelModel(Constant{std::move(innovation)}, true, m);
}

KernelModel KernelModel::custom(std::function<double(double, double)> density, double drift_exponent,
                                bool monotone_hint, std::string name) {
    if (!density) throw ValidationError("custom kernel needs an evaluator");
    if (!(drift_exponent > 0.0)) throw DomainError("drift exponent must be positive");
    return KernelModel(Custom{std::move(density), std::move(name)}, monotone_hint, drift_exponent);
}

KernelModel KernelModel::with_drift_exponent(double e) const {
    if (!(e > 0.0)) throw DomainError("drift exponent must be positive");
    KernelModel copy = *this;
    copy.drift_exponent_ = e;
    return copy;
}

std::string KernelModel::name() const {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Ar1>) return "ar1";
            else if constexpr (std::is_same_v<K, IteratedAr1>) return "ar1_iter" + std::to_string(k.steps);
            else if constexpr (std::is_same_v<K, Arch1>) return "arch1";
            else if constexpr (std::is_same_v<K, Constant>) return "constant";
            else return k.name;
        },
        kind_);
}

InfStrategy KernelModel::default_inf_strategy() const {
    return monotone_hint_ ? InfStrategy::endpoint_min() : InfStrategy::sampled(9);
}

double KernelModel::operator()(double x, double y) const {
    return visit_kernel([x, y](const auto& p) { return p(x, y); });
}

double drift_eval(const KernelModel& model, double x) { return drift_value(model.drift_exponent(), x); }

double cell_inf(const KernelModel& model, double a, double b, double y, const InfStrategy& strategy) {
    return model.visit_kernel([&](const auto& p) { return cell_inf_with(p, a, b, y, strategy); });
}

Interval support_heuristic(double a, double rho_eff, bool one_sided) {
    if (!(a > 0.0)) throw DomainError("support half-width must be positive");
    if (!(std::abs(rho_eff) < 1.0)) throw DomainError("support heuristic requires |rho| < 1");
    if (one_sided) return {0.0, std::floor(a / (1.0 - rho_eff)) + 1.0};
    const double s = std::ceil(a / (1.0 - std::abs(rho_eff)));
    return {-s, s};
}

}  // namespace stationary
