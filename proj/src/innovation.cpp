#include "stationary/innovation.hpp"

#include "stationary/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace stationary {

namespace {

double gk_integrate(const std::function<double(double)>& f, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    if (!(a < b)) return 0.0;
    // keep the origin as a breakpoint so peaked densities are not skipped
    if (!std::isfinite(a) && !std::isfinite(b)) {
        return gauss_kronrod<double, 31>::integrate(f, a, 0.0, 15, 1e-13) +
               gauss_kronrod<double, 31>::integrate(f, 0.0, b, 15, 1e-13);
    }
    return gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13);
}

double gaussian_mass(double sigma, double a, double b) {
    const double s = sigma * std::numbers::sqrt2;
    if (a >= 0.0) return 0.5 * (std::erfc(a / s) - std::erfc(b / s));
    if (b <= 0.0) return 0.5 * (std::erfc(-b / s) - std::erfc(-a / s));
    return 1.0 - 0.5 * std::erfc(-a / s) - 0.5 * std::erfc(b / s);
}

double exponential3_survival(double rho, double x) {
    if (x <= 0.0) return 1.0;
    const double one_minus = 1.0 - rho;
    const double e1 = std::exp(-x);
    return (e1 - rho * std::exp(-x / rho) + rho * (rho * rho * std::exp(-x / (rho * rho)) - e1) / (1.0 + rho)) /
           (one_minus * one_minus);
}

}  // namespace

// ---------------------------------------------------------------------------
// TabulatedDensity

TabulatedDensity::TabulatedDensity(std::vector<double> xs, std::vector<double> values, bool normalize)
    : xs_(std::move(xs)), values_(std::move(values)) {
    if (xs_.size() < 2 || xs_.size() != values_.size())
        throw ValidationError("tabulated density needs at least two nodes and matching value count");
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
        if (!(xs_[i] < xs_[i + 1])) throw ValidationError("tabulated grid must be strictly increasing");
    for (double v : values_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("tabulated values must be finite and nonnegative");

    const std::size_t n = xs_.size();
    step_ = (xs_.back() - xs_.front()) / static_cast<double>(n - 1);
    uniform_ = true;
    for (std::size_t i = 0; i + 1 < n && uniform_; ++i)
        uniform_ = std::abs((xs_[i + 1] - xs_[i]) - step_) <= 1e-7 * step_;

    cumulative_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
        cumulative_[i + 1] = cumulative_[i] + 0.5 * (values_[i] + values_[i + 1]) * (xs_[i + 1] - xs_[i]);

    if (normalize) {
        const double total = cumulative_.back();
        if (!(total > 0.0)) throw ValidationError("tabulated density has zero mass");
        renormalization_ = 1.0 / total;
        for (double& v : values_) v *= renormalization_;
        for (double& c : cumulative_) c *= renormalization_;
    }
}

std::size_t TabulatedDensity::segment(double x) const noexcept {
    const std::size_t last = xs_.size() - 2;
    std::size_t i;
    if (uniform_) {
        const double r = std::floor((x - xs_.front()) / step_);
        i = r <= 0.0 ? 0 : std::min(static_cast<std::size_t>(r), last);
        while (i > 0 && x < xs_[i]) --i;
        while (i < last && x >= xs_[i + 1]) ++i;
    } else {
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        i = it == xs_.begin() ? 0 : std::min(static_cast<std::size_t>(it - xs_.begin()) - 1, last);
    }
    return i;
}

double TabulatedDensity::operator()(double x) const noexcept {
    if (!(x >= xs_.front() && x <= xs_.back())) return 0.0;
    const std::size_t i = segment(x);
    const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
    return values_[i] + t * (values_[i + 1] - values_[i]);
}

double TabulatedDensity::cdf(double x) const noexcept {
    if (x <= xs_.front()) return 0.0;
    if (x >= xs_.back()) return cumulative_.back();
    const std::size_t i = segment(x);
    const double d = x - xs_[i];
    const double slope = (values_[i + 1] - values_[i]) / (xs_[i + 1] - xs_[i]);
    return cumulative_[i] + d * values_[i] + 0.5 * slope * d * d;
}

double TabulatedDensity::mass(double a, double b) const noexcept {
    if (!(a < b)) return 0.0;
    return cdf(b) - cdf(a);
}

void TabulatedDensity::write_csv(std::ostream& out) const {
    out << "x,value\n";
    for (std::size_t i = 0; i < xs_.size(); ++i) fmt::print(out, "{:.15g},{:.15g}\n", xs_[i], values_[i]);
}

// ---------------------------------------------------------------------------
// InnovationDensity

double eval_exponential3(double rho, double x) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("exponential3 requires rho in (0,1)");
    return detail::exponential3_unchecked(rho, x);
}

InnovationDensity InnovationDensity::gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("gaussian sigma must be positive");
    return InnovationDensity(Gaussian{sigma});
}

InnovationDensity InnovationDensity::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential rate must be positive");
    return InnovationDensity(Exponential{rate});
}

InnovationDensity InnovationDensity::uniform(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("uniform requires lo < hi");
    return InnovationDensity(Uniform{lo, hi});
}

InnovationDensity InnovationDensity::exponential3(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("exponential3 requires rho in (0,1)");
    return InnovationDensity(Exponential3{rho});
}

InnovationDensity InnovationDensity::tabulated(TabulatedDensity table) {
    return tabulated(std::make_shared<const TabulatedDensity>(std::move(table)));
}

InnovationDensity InnovationDensity::tabulated(std::shared_ptr<const TabulatedDensity> table) {
    if (!table) throw ValidationError("null tabulated density");
    return InnovationDensity(Tabulated{std::move(table)});
}

InnovationDensity InnovationDensity::custom(std::function<double(double)> pdf, Interval support, std::string name) {
    if (!pdf) throw ValidationError("custom density needs an evaluator");
    if (!(support.lo < support.hi)) throw ValidationError("custom density support must be nonempty");
    return InnovationDensity(Custom{std::move(pdf), support, std::move(name)});
}

InnovationDensity InnovationDensity::with_moment_order(double m) const {
    if (!(m > 0.0)) throw DomainError("moment order must be positive");
    InnovationDensity copy = *this;
    copy.moment_order_ = m;
    return copy;
}

Interval InnovationDensity::support_hint() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(
        [&](const auto& k) -> Interval {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Gaussian>) return {-inf, inf};
            else if constexpr (std::is_same_v<K, Exponential> || std::is_same_v<K, Exponential3>) return {0.0, inf};
            else if constexpr (std::is_same_v<K, Uniform>) return {k.lo, k.hi};
            else if constexpr (std::is_same_v<K, Tabulated>) return k.table->support();
            else return k.support;
        },
        kind_);
}

std::string InnovationDensity::name() const {
    return std::visit(
        [&](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Gaussian>) return "gaussian";
            else if constexpr (std::is_same_v<K, Exponential>) return "exponential";
            else if constexpr (std::is_same_v<K, Uniform>) return "uniform";
            else if constexpr (std::is_same_v<K, Exponential3>) return "exponential3";
            else if constexpr (std::is_same_v<K, Tabulated>) return "tabulated";
            else return k.name;
        },
        kind_);
}

double InnovationDensity::operator()(double y) const {
    return visit_pdf([y](const auto& pdf) { return pdf(y); });
}

double InnovationDensity::mass(double a, double b) const {
    if (!(a < b)) return 0.0;
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Gaussian>) {
                return gaussian_mass(k.sigma, a, b);
            } else if constexpr (std::is_same_v<K, Exponential>) {
                return std::exp(-k.rate * std::max(a, 0.0)) - std::exp(-k.rate * std::max(b, 0.0));
            } else if constexpr (std::is_same_v<K, Uniform>) {
                const double lo = std::max(a, k.lo), hi = std::min(b, k.hi);
                return hi > lo ? (hi - lo) / (k.hi - k.lo) : 0.0;
            } else if constexpr (std::is_same_v<K, Exponential3>) {
                return std::max(0.0, exponential3_survival(k.rho, a) - exponential3_survival(k.rho, b));
            } else if constexpr (std::is_same_v<K, Tabulated>) {
                return k.table->mass(a, b);
            } else {
                const double lo = std::max(a, k.support.lo), hi = std::min(b, k.support.hi);
                std::function<double(double)> f = [&](double y) { return std::max(0.0, k.pdf(y)); };
                return gk_integrate(f, lo, hi);
            }
        },
        kind_);
}

double validate_density(const InnovationDensity& d, double tol) {
    double total;
    if (const auto* t = std::get_if<InnovationDensity::Tabulated>(&d.kind())) {
        total = t->table->trapezoid_mass();
    } else {
        const Interval s = d.support_hint();
        std::function<double(double)> f = [&](double y) { return d(y); };
        total = gk_integrate(f, s.lo, s.hi);
    }
    if (!(std::abs(total - 1.0) <= tol))
        throw ValidationError(fmt::format("density '{}' integrates to {:.10g}, not 1", d.name(), total));
    return total;
}

Interval tail_bounds(const InnovationDensity& d, double eps) {
    const Interval s = d.support_hint();
    Interval out = s;
    auto search = [&](bool upper) {
        // doubling then bisection on the tail mass
        double near = 0.0, far = 1.0;
        auto tail = [&](double x) {
            return upper ? d.mass(x, std::numeric_limits<double>::infinity())
                         : d.mass(-std::numeric_limits<double>::infinity(), -x);
        };
        while (tail(far) > eps) {
            near = far;
            far *= 2.0;
            if (far > 1e12) throw NumericalError("tail bound search diverged for '" + d.name() + "'");
        }
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (near + far);
            (tail(mid) > eps ? near : far) = mid;
        }
        return far;
    };
    if (!std::isfinite(s.hi)) out.hi = search(true);
    if (!std::isfinite(s.lo)) out.lo = -search(false);
    if (std::isfinite(s.lo) && !std::isfinite(s.hi)) out.hi = std::max(out.hi, s.lo + 1.0);
    if (std::isfinite(s.hi) && !std::isfinite(s.lo)) out.lo = std::min(out.lo, s.hi - 1.0);
    return out;
}

Interval scaled_sum_support(const InnovationDensity& base, std::span<const double> scales, double eps) {
    const Interval b = tail_bounds(base, eps);
    Interval out{0.0, 0.0};
    for (double s : scales) {
        out.lo += std::min(s * b.lo, s * b.hi);
        out.hi += std::max(s * b.lo, s * b.hi);
    }
    return out;
}

TabulatedDensity convolve_scaled(const InnovationDensity& base, std::span<const double> scales, double mesh,
                                 Interval support) {
    if (scales.empty()) throw ValidationError("convolve_scaled needs at least one scale");
    for (double s : scales)
        if (s == 0.0 || !std::isfinite(s)) throw ValidationError("convolution scales must be finite and nonzero");
    if (!support.finite() || !(support.lo < support.hi)) throw ValidationError("convolution support must be finite");
    if (!(mesh > 0.0) || mesh > support.width() / 100.0)
        throw ValidationError("convolution mesh must be positive and at most support width / 100");

    // Each scaled term s*theta is represented by its cell masses on the
    // lattice mesh*Z (cell [(m-1/2)h, (m+1/2)h] for node m); the lattice
    // convolution of these mass vectors is the composite quadrature of the
    // convolution integral.
    const Interval core = tail_bounds(base, 1e-13);
    long offset = 0;
    std::vector<double> acc;
    for (std::size_t k = 0; k < scales.size(); ++k) {
        const double s = scales[k];
        const double lo = std::min(s * core.lo, s * core.hi);
        const double hi = std::max(s * core.lo, s * core.hi);
        const long m_lo = static_cast<long>(std::floor(lo / mesh)) - 1;
        const long m_hi = static_cast<long>(std::ceil(hi / mesh)) + 1;
        std::vector<double> term(static_cast<std::size_t>(m_hi - m_lo + 1));
        for (long m = m_lo; m <= m_hi; ++m) {
            const double a = (static_cast<double>(m) - 0.5) * mesh / s;
            const double b = (static_cast<double>(m) + 0.5) * mesh / s;
            term[static_cast<std::size_t>(m - m_lo)] = s > 0.0 ? base.mass(a, b) : base.mass(b, a);
        }
        if (k == 0) {
            acc = std::move(term);
            offset = m_lo;
            continue;
        }
        std::vector<double> next(acc.size() + term.size() - 1, 0.0);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            const double u = acc[i];
            if (u == 0.0) continue;
            double* out = next.data() + i;
            for (std::size_t j = 0; j < term.size(); ++j) out[j] += u * term[j];
        }
        acc = std::move(next);
        offset += m_lo;
    }

    // restrict to the requested support
    const long first = std::max(offset, static_cast<long>(std::ceil(support.lo / mesh - 1e-9)));
    const long last = std::min(offset + static_cast<long>(acc.size()) - 1,
                               static_cast<long>(std::floor(support.hi / mesh + 1e-9)));
    if (last - first < 2) throw SupportTooSmall("convolution support does not overlap the mass of the sum");
    double inside = 0.0;
    for (long m = first; m <= last; ++m) inside += acc[static_cast<std::size_t>(m - offset)];
    if (std::abs(inside - 1.0) > 1e-2)
        throw SupportTooSmall(fmt::format("support too small: it carries mass {:.6g} of the convolution", inside));

    // cut tails below 1e-8
    long lo_cut = first, hi_cut = last;
    for (double tail = 0.0; lo_cut < hi_cut - 2;) {
        tail += acc[static_cast<std::size_t>(lo_cut - offset)];
        if (tail >= 1e-8) break;
        ++lo_cut;
    }
    for (double tail = 0.0; hi_cut > lo_cut + 2;) {
        tail += acc[static_cast<std::size_t>(hi_cut - offset)];
        if (tail >= 1e-8) break;
        --hi_cut;
    }
    // keep one trimmed node per side so trapezoid mass matches the lattice mass
    lo_cut = std::max(first, lo_cut - 1);
    hi_cut = std::min(last, hi_cut + 1);

    std::vector<double> xs, vals;
    xs.reserve(static_cast<std::size_t>(hi_cut - lo_cut + 1));
    vals.reserve(xs.capacity());
    for (long m = lo_cut; m <= hi_cut; ++m) {
        xs.push_back(static_cast<double>(m) * mesh);
        vals.push_back(acc[static_cast<std::size_t>(m - offset)] / mesh);
    }
    TabulatedDensity out(std::move(xs), std::move(vals), true);
    out.set_truncation(out.support());
    return out;
}

}  // namespace stationary
