#pragma once

#include "stationary/discretize.hpp"
#include "stationary/errors.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace stationary {

struct SolverMethod {
    enum class Kind { Auto, Power, Direct };

    Kind kind = Kind::Auto;
    double tol = 1e-12;
    long max_iter = 1'000'000;

    static SolverMethod automatic() { return {}; }
    static SolverMethod power(double tol = 1e-12, long max_iter = 1'000'000) { return {Kind::Power, tol, max_iter}; }
    static SolverMethod direct() { return {Kind::Direct, 1e-12, 0}; }
    /// "auto", "direct", "power" or "power:<tol>".
    static SolverMethod parse(std::string_view text);
    std::string name() const;
};

/// Left fixed point of a row-stochastic matrix, normalized to a probability vector.
struct InvariantVector {
    std::vector<double> weights;
    /// ||pi B - pi||_1 at the returned vector.
    double residual = 0.0;
    long iterations = 0;
    /// Power iteration residuals, one per iterate, when requested.
    std::vector<double> residual_history;
};

class NoConvergence : public NumericalError {
public:
    NoConvergence(InvariantVector best, long iterations, double residual);
    const InvariantVector& best() const noexcept { return best_; }

private:
    InvariantVector best_;
};

struct SolveOptions {
    SolverMethod method;
    unsigned threads = 0;
    bool record_history = false;
    /// Auto switches from Direct to Power above this q_max.
    std::size_t direct_max_q = 2000;
};

/// Weights sum to 1, are nonnegative, and the escape coordinate is zero.
InvariantVector stationary_vector(const DiscretizedChain& chain, const SolveOptions& options = {});

/// Solves (B^T - I) pi = 0 with the last equation replaced by sum(pi) = 1,
/// by LU with partial pivoting. Throws SingularSystem when the fixed point is
/// not unique.
std::vector<double> direct_solve(const StochasticMatrix& b);

/// Plain power iteration v <- vB from `start`.
InvariantVector power_iterate(const StochasticMatrix& b, std::vector<double> start, double tol, long max_iter,
                              unsigned threads = 1, bool record_history = false);

/// ||v B - v||_1.
double invariance_l1(const StochasticMatrix& b, std::span<const double> v, unsigned threads = 1);

}  // namespace stationary
