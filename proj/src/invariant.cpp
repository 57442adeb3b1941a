#include "stationary/invariant.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <cmath>
#include <numeric>

namespace stationary {

SolverMethod SolverMethod::parse(std::string_view text) {
    if (text == "auto") return automatic();
    if (text == "direct") return direct();
    if (text == "power") return power();
    if (text.starts_with("power:")) {
        const std::string value(text.substr(6));
        std::size_t used = 0;
        double tol = 0.0;
        try {
            tol = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == value.size() && tol > 0.0) return power(tol);
    }
    throw ValidationError("unknown solver '" + std::string(text) + "'");
}

std::string SolverMethod::name() const {
    switch (kind) {
        case Kind::Auto: return "auto";
        case Kind::Direct: return "direct";
        case Kind::Power: return fmt::format("power:{:g}", tol);
    }
    return "auto";
}

NoConvergence::NoConvergence(InvariantVector best, long iterations, double residual)
    : NumericalError(fmt::format("power iteration did not converge: {} iterations, residual {:.3e}", iterations,
                                 residual)),
      best_(std::move(best)) {}

double invariance_l1(const StochasticMatrix& b, std::span<const double> v, unsigned threads) {
    std::vector<double> w(v.size());
    b.left_multiply(v, w, threads);
    double r = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) r += std::abs(w[j] - v[j]);
    return r;
}

std::vector<double> direct_solve(const StochasticMatrix& b) {
    const std::size_t n = b.size();
    if (n == 0) throw DimensionMismatch("empty matrix");
    if (n > 5000) throw ValidationError("direct solve limited to 5000 states");
    Eigen::MatrixXd a(n, n);
    const std::vector<double> dense = b.to_dense();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = dense[i * n + j];
    a -= Eigen::MatrixXd::Identity(n, n);
    a.row(static_cast<Eigen::Index>(n - 1)).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(static_cast<Eigen::Index>(n - 1)) = 1.0;

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (diag.minCoeff() <= 1e-13 * scale || lu.rcond() < 1e-14)
        throw SingularSystem("invariant vector is not unique (reducible chain)");
    const Eigen::VectorXd x = lu.solve(rhs);
    std::vector<double> out(x.data(), x.data() + n);
    for (double v : out)
        if (!std::isfinite(v)) throw SingularSystem("direct solve produced non-finite values");
    return out;
}

InvariantVector power_iterate(const StochasticMatrix& b, std::vector<double> start, double tol, long max_iter,
                              unsigned threads, bool record_history) {
    const std::size_t n = b.size();
    if (start.size() != n) throw DimensionMismatch("start vector length does not match matrix size");
    InvariantVector out;
    std::vector<double> v = std::move(start), w(n);
    double residual = 0.0;
    for (long it = 0;; ++it) {
        b.left_multiply(v, w, threads);
        residual = 0.0;
        double mass = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            residual += std::abs(w[j] - v[j]);
            mass += w[j];
        }
        if (record_history) out.residual_history.push_back(residual);
        if (residual <= tol) {
            out.iterations = it;
            break;
        }
        if (it >= max_iter) {
            out.weights = std::move(v);
            out.residual = residual;
            out.iterations = it;
            throw NoConvergence(std::move(out), it, residual);
        }
        for (std::size_t j = 0; j < n; ++j) v[j] = w[j] / mass;
    }
    out.weights = std::move(v);
    out.residual = residual;
    return out;
}

InvariantVector stationary_vector(const DiscretizedChain& chain, const SolveOptions& options) {
    const std::size_t q = chain.q_max();
    const std::size_t n = q + 1;
    if (chain.matrix.size() != n) throw DimensionMismatch("chain matrix does not match its partition");

    SolverMethod::Kind kind = options.method.kind;
    if (kind == SolverMethod::Kind::Auto) kind = q <= options.direct_max_q ? SolverMethod::Kind::Direct : SolverMethod::Kind::Power;

    InvariantVector out;
    if (kind == SolverMethod::Kind::Direct) {
        out.weights = direct_solve(chain.matrix);
    } else {
        std::vector<double> start(n, 1.0 / static_cast<double>(q));
        start[q] = 0.0;
        out = power_iterate(chain.matrix, std::move(start), options.method.tol, options.method.max_iter, options.threads,
                            options.record_history);
    }

    // the escape coordinate carries no mass: its column in B is zero
    out.weights[q] = 0.0;
    for (double& v : out.weights) v = std::max(v, 0.0);
    const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
    if (!(total > 0.0)) throw NumericalError("invariant vector has no mass");
    for (double& v : out.weights) v /= total;
    out.residual = invariance_l1(chain.matrix, out.weights, options.threads);
    return out;
}

}  // namespace stationary
