#include "stationary/density.hpp"

#include "stationary/errors.hpp"
#include "stationary/parallel.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <ostream>

namespace stationary {

namespace {

template <class P>
double eval_at(const P& p, const Partition& part, std::span<const double> w, const InfStrategy& s, double y,
               std::vector<double>& column) {
    if (!(y >= part.k_minus() && y < part.k_plus())) return 0.0;
    const std::size_t q = part.q_max();
    double acc = 0.0;
    if (s.kind == InfStrategy::Kind::EndpointMin) {
        for (std::size_t i = 0; i <= q; ++i) column[i] = p(part.point(i), y);
        for (std::size_t i = 0; i < q; ++i)
            if (w[i] != 0.0) acc += w[i] * std::min(column[i], column[i + 1]);
    } else {
        for (std::size_t i = 0; i < q; ++i)
            if (w[i] != 0.0) acc += w[i] * cell_inf_with(p, part.cell_lo(i), part.cell_hi(i), y, s);
    }
    return acc;
}

}  // namespace

double ApproxDensity::operator()(double y) const {
    std::vector<double> column(partition_.q_max() + 1);
    return model_.visit_kernel(
        [&](const auto& p) { return eval_at(p, partition_, weights_, strategy_, y, column); });
}

std::vector<double> ApproxDensity::evaluate(std::span<const double> ys, unsigned threads) const {
    std::vector<double> out(ys.size());
    parallel_chunks(ys.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> column(partition_.q_max() + 1);
        model_.visit_kernel([&](const auto& p) {
            for (std::size_t k = begin; k < end; ++k) out[k] = eval_at(p, partition_, weights_, strategy_, ys[k], column);
        });
    });
    return out;
}

std::vector<double> ApproxDensity::grid_values(unsigned threads) const {
    const auto& pts = partition_.points();
    return evaluate(std::span<const double>(pts.data(), partition_.q_max()), threads);
}

ApproxDensity build_density(const DiscretizedChain& chain, const InvariantVector& pi) {
    const std::size_t q = chain.q_max();
    if (pi.weights.size() != q + 1 || chain.row_totals.size() != q)
        throw DimensionMismatch(fmt::format("invariant vector has {} entries, chain needs {}", pi.weights.size(), q + 1));
    std::vector<double> w(pi.weights.begin(), pi.weights.begin() + static_cast<std::ptrdiff_t>(q));
    double inside = 0.0;
    for (std::size_t i = 0; i < q; ++i) inside += w[i] * chain.row_totals[i];
    const double dirac = std::clamp(1.0 - inside, 0.0, 1.0);
    return ApproxDensity(chain.partition, std::move(w), chain.model, chain.strategy, chain.quadrature, dirac, chain.x0);
}

double measure_integrate(const ApproxDensity& pk, const std::function<double(double)>& f,
                         const std::optional<QuadratureRule>& quad, unsigned threads) {
    const QuadratureRule& rule = quad ? *quad : pk.quadrature();
    double acc = weighted_row_integral(pk.model(), pk.partition(), pk.weights(), f, rule, pk.strategy(), threads);
    if (pk.dirac_weight() != 0.0) acc += f(pk.x0()) * pk.dirac_weight();
    return acc;
}

void write_density_csv(const ApproxDensity& pk, std::ostream& out, const std::function<double(double)>* exact,
                       unsigned threads) {
    const std::vector<double> values = pk.grid_values(threads);
    out << (exact ? "x,p_k,p_exact,diff\n" : "x,p_k\n");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = pk.partition().point(i);
        if (exact) {
            const double e = (*exact)(x);
            fmt::print(out, "{:.15g},{:.15g},{:.15g},{:.15g}\n", x, values[i], e, values[i] - e);
        }
        else {
            fmt::print(out, "{:.15g},{:.15g}\n", x, values[i]);
        }
    }
    fmt::print(out, "# dirac_weight={:.15g}, x0={:.15g}\n", pk.dirac_weight(), pk.x0());
}

}  // namespace stationary
