#pragma once

#include "stationary/innovation.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace stationary {

/// How inf_{t in [a,b)} p(t, y) is approximated over a source cell.
struct InfStrategy {
    enum class Kind { EndpointMin, Sampled };

    Kind kind = Kind::EndpointMin;
    int samples = 2;

    static InfStrategy endpoint_min() { return {Kind::EndpointMin, 2}; }
    static InfStrategy sampled(int n);
    /// "endpoint" or "sampled:<n>".
    static InfStrategy parse(std::string_view text);
    std::string name() const;

    bool operator==(const InfStrategy&) const = default;
};

/// Transition density p(x, y) of a one-dimensional chain.
class KernelModel {
public:
    /// X' = rho X + theta.
    struct Ar1 {
        double rho;
        InnovationDensity innovation;
    };
    /// Chain subsampled every `steps` steps: X' = rho^steps X + theta_steps,
    /// theta_steps tabulated by numerical convolution.
    struct IteratedAr1 {
        double rho_eff;
        std::shared_ptr<const TabulatedDensity> innovation;
        double base_rho = 0.0;
        std::optional<InnovationDensity> base;
        int steps = 1;
    };
    /// X' = alpha X + sqrt(beta + lambda X^2) theta.
    struct Arch1 {
        double alpha, beta, lambda;
        InnovationDensity innovation;
    };
    /// p(x, y) = nu(y), no dependence on x.
    struct Constant {
        InnovationDensity innovation;
    };
    struct Custom {
        std::function<double(double, double)> density;
        std::string name;
    };
    using Kind = std::variant<Ar1, IteratedAr1, Arch1, Constant, Custom>;

    static KernelModel ar1(double rho, InnovationDensity innovation);
    /// Builds nu_steps = law of sum_{k<steps} rho^k theta_k with convolve_scaled.
    static KernelModel iterated_ar1(double rho, const InnovationDensity& base, int steps, double mesh = 1e-3);
    static KernelModel iterated_ar1(double rho_eff, std::shared_ptr<const TabulatedDensity> innovation,
                                    double drift_exponent = 2.0);
    static KernelModel arch1(double alpha, double beta, double lambda, InnovationDensity innovation,
                             double drift_exponent = 1.0);
    static KernelModel constant(InnovationDensity innovation);
    static KernelModel custom(std::function<double(double, double)> density, double drift_exponent,
                              bool monotone_hint, std::string name = "custom");

    const Kind& kind() const noexcept { return kind_; }
    std::string name() const;
    /// True when t -> p(t, y) has no interior minimum on a small cell.
    bool monotone_hint() const noexcept { return monotone_hint_; }
    double drift_exponent() const noexcept { return drift_exponent_; }
    KernelModel with_drift_exponent(double e) const;
    InfStrategy default_inf_strategy() const;

    double operator()(double x, double y) const;

    /// Calls f with a concretely typed callable double(double x, double y).
    template <class F>
    decltype(auto) visit_kernel(F&& f) const;

private:
    KernelModel(Kind kind, bool monotone, double drift)
        : kind_(std::move(kind)), monotone_hint_(monotone), drift_exponent_(drift) {}

    Kind kind_;
    bool monotone_hint_;
    double drift_exponent_;
};

inline double kernel_eval(const KernelModel& model, double x, double y) { return model(x, y); }

/// V(x) = 1 + |x|^e with e the model's drift exponent.
double drift_eval(const KernelModel& model, double x);
inline double drift_value(double exponent, double x) { return 1.0 + std::pow(std::abs(x), exponent); }

template <class P>
double cell_inf_with(const P& p, double a, double b, double y, const InfStrategy& s) {
    if (s.kind == InfStrategy::Kind::EndpointMin) return std::min(p(a, y), p(b, y));
    double m = p(a, y);
    const double step = (b - a) / (s.samples - 1);
    for (int k = 1; k < s.samples; ++k) {
        const double t = k + 1 == s.samples ? b : a + k * step;
        m = std::min(m, p(t, y));
    }
    return m;
}

double cell_inf(const KernelModel& model, double a, double b, double y, const InfStrategy& strategy);

/// Truncated support for the stationary law of an autoregression whose
/// innovation lives in [-a, a] (two-sided) or [0, a] (one-sided).
Interval support_heuristic(double a, double rho_eff, bool one_sided);

// ---------------------------------------------------------------------------

template <class F>
decltype(auto) KernelModel::visit_kernel(F&& f) const {
    return std::visit(
        [&](const auto& k) -> decltype(auto) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Ar1>) {
                const double rho = k.rho;
                return k.innovation.visit_pdf([&](const auto& nu) -> decltype(auto) {
                    return f([rho, nu](double x, double y) { return nu(y - rho * x); });
                });
            } else if constexpr (std::is_same_v<K, IteratedAr1>) {
                const double rho = k.rho_eff;
                const TabulatedDensity* nu = k.innovation.get();
                return f([rho, nu](double x, double y) { return (*nu)(y - rho * x); });
            } else if constexpr (std::is_same_v<K, Arch1>) {
                const double alpha = k.alpha, beta = k.beta, lambda = k.lambda;
                return k.innovation.visit_pdf([&](const auto& nu) -> decltype(auto) {
                    return f([alpha, beta, lambda, nu](double x, double y) {
                        const double inv = 1.0 / std::sqrt(beta + lambda * x * x);
                        return inv * nu((y - alpha * x) * inv);
                    });
                });
            } else if constexpr (std::is_same_v<K, Constant>) {
                return k.innovation.visit_pdf([&](const auto& nu) -> decltype(auto) {
                    return f([nu](double, double y) { return nu(y); });
                });
            } else {
                const auto* density = &k.density;
                return f([density](double x, double y) {
                    const double v = (*density)(x, y);
                    return v > 0.0 ? v : 0.0;
                });
            }
        },
        kind_);
}

}  // namespace stationary
