#include "stationary/pipeline.hpp"

#include <chrono>

namespace stationary {

PipelineResult run_pipeline(const KernelModel& model, const Partition& partition, const PipelineOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    SolveOptions solve = options.solve;
    if (solve.threads == 0) solve.threads = options.assembly.threads;
    DiscretizedChain chain = assemble_matrix(model, partition, options.assembly);
    InvariantVector pi = stationary_vector(chain, solve);
    ApproxDensity density = build_density(chain, pi);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return PipelineResult{std::move(chain), std::move(pi), std::move(density), elapsed.count()};
}

}  // namespace stationary
