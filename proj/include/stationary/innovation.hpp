#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace stationary {

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool finite() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }
    double width() const noexcept { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

/// Piecewise-linear density on a strictly increasing grid, zero outside it.
class TabulatedDensity {
public:
    /// With `normalize`, values are rescaled so the trapezoid mass is 1; the
    /// applied factor is kept in renormalization_factor().
    TabulatedDensity(std::vector<double> xs, std::vector<double> values, bool normalize = true);

    double operator()(double x) const noexcept;
    /// Exact integral of the interpolant over [a, b].
    double mass(double a, double b) const noexcept;
    double trapezoid_mass() const noexcept { return cumulative_.back(); }

    const std::vector<double>& xs() const noexcept { return xs_; }
    const std::vector<double>& values() const noexcept { return values_; }
    Interval support() const noexcept { return {xs_.front(), xs_.back()}; }
    double renormalization_factor() const noexcept { return renormalization_; }

    /// Where the tails were cut when this table came out of convolve_scaled.
    const std::optional<Interval>& truncation() const noexcept { return truncation_; }
    void set_truncation(Interval cut) { truncation_ = cut; }

    /// `x,value` rows with 15 significant digits.
    void write_csv(std::ostream& out) const;

private:
    std::size_t segment(double x) const noexcept;
    double cdf(double x) const noexcept;

    std::vector<double> xs_;
    std::vector<double> values_;
    std::vector<double> cumulative_;
    double renormalization_ = 1.0;
    bool uniform_ = false;
    double step_ = 0.0;
    std::optional<Interval> truncation_;
};

double eval_exponential3(double rho, double x);

/// Law of the innovation driving an autoregression. Immutable value type;
/// tabulated and custom payloads are shared, so copies are cheap.
class InnovationDensity {
public:
    struct Gaussian {
        double sigma;
    };
    struct Exponential {
        double rate;
    };
    struct Uniform {
        double lo, hi;
    };
    /// Closed-form density of rho^2 E1 + rho E2 + E3 with E_i ~ Exp(1).
    struct Exponential3 {
        double rho;
    };
    struct Tabulated {
        std::shared_ptr<const TabulatedDensity> table;
    };
    struct Custom {
        std::function<double(double)> pdf;
        Interval support;
        std::string name;
    };
    using Kind = std::variant<Gaussian, Exponential, Uniform, Exponential3, Tabulated, Custom>;

    static InnovationDensity gaussian(double sigma = 1.0);
    static InnovationDensity exponential(double rate = 1.0);
    static InnovationDensity uniform(double lo = 0.0, double hi = 1.0);
    static InnovationDensity exponential3(double rho);
    static InnovationDensity tabulated(TabulatedDensity table);
    static InnovationDensity tabulated(std::shared_ptr<const TabulatedDensity> table);
    static InnovationDensity custom(std::function<double(double)> pdf, Interval support, std::string name = "custom");

    /// Order m of the absolute moment used by the drift function |x|^m.
    double moment_order() const noexcept { return moment_order_; }
    InnovationDensity with_moment_order(double m) const;

    const Kind& kind() const noexcept { return kind_; }
    Interval support_hint() const;
    std::string name() const;

    double operator()(double y) const;
    /// Probability of [a, b]; closed form where a CDF is known.
    double mass(double a, double b) const;

    /// Calls f with a concretely typed callable double(double) so hot loops
    /// avoid per-evaluation dispatch.
    template <class F>
    decltype(auto) visit_pdf(F&& f) const;

private:
    explicit InnovationDensity(Kind kind) : kind_(std::move(kind)) {}

    Kind kind_;
    double moment_order_ = 2.0;
};

inline double eval_density(const InnovationDensity& d, double y) { return d(y); }

/// Integrates the density over its support hint; throws ValidationError when
/// the mass is off by more than `tol`. Returns the mass.
double validate_density(const InnovationDensity& d, double tol = 1e-6);

/// Smallest interval whose two tails each carry at most `eps` mass.
Interval tail_bounds(const InnovationDensity& d, double eps);

/// Density of sum_k scales[k] * theta_k for i.i.d. theta_k ~ base, tabulated
/// with step `mesh` on `support` and renormalized. Tails carrying less than
/// 1e-8 mass are cut; the cut is recorded on the result.
TabulatedDensity convolve_scaled(const InnovationDensity& base, std::span<const double> scales, double mesh,
                                 Interval support);

/// Support covering sum_k scales[k] * theta_k up to tail mass `eps` per term.
Interval scaled_sum_support(const InnovationDensity& base, std::span<const double> scales, double eps = 1e-12);

// ---------------------------------------------------------------------------

namespace detail {
inline double exponential3_unchecked(double rho, double x) noexcept {
    if (x < 0.0) return 0.0;
    const double e1 = std::exp(-x);
    const double e2 = std::exp(-x / rho);
    const double e3 = std::exp(-x / (rho * rho));
    const double one_minus = 1.0 - rho;
    const double v = (e1 - e2 + rho * (e3 - e1) / (1.0 + rho)) / (one_minus * one_minus);
    return v > 0.0 ? v : 0.0;
}
}  // namespace detail

template <class F>
decltype(auto) InnovationDensity::visit_pdf(F&& f) const {
    return std::visit(
        [&](const auto& k) -> decltype(auto) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Gaussian>) {
                const double c = 1.0 / (k.sigma * std::sqrt(2.0 * std::numbers::pi));
                const double s = 0.5 / (k.sigma * k.sigma);
                return f([c, s](double y) { return c * std::exp(-y * y * s); });
            } else if constexpr (std::is_same_v<K, Exponential>) {
                const double r = k.rate;
                return f([r](double y) { return y < 0.0 ? 0.0 : r * std::exp(-r * y); });
            } else if constexpr (std::is_same_v<K, Uniform>) {
                const double lo = k.lo, hi = k.hi, v = 1.0 / (k.hi - k.lo);
                return f([lo, hi, v](double y) { return (y >= lo && y < hi) ? v : 0.0; });
            } else if constexpr (std::is_same_v<K, Exponential3>) {
                const double rho = k.rho;
                return f([rho](double y) { return detail::exponential3_unchecked(rho, y); });
            } else if constexpr (std::is_same_v<K, Tabulated>) {
                const TabulatedDensity* t = k.table.get();
                return f([t](double y) { return (*t)(y); });
            } else {
                const auto* pdf = &k.pdf;
                return f([pdf](double y) {
                    const double v = (*pdf)(y);
                    return v > 0.0 ? v : 0.0;
                });
            }
        },
        kind_);
}

}  // namespace stationary
