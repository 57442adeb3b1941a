#pragma once

#include "stationary/density.hpp"
#include "stationary/discretize.hpp"
#include "stationary/invariant.hpp"

namespace stationary {

struct PipelineOptions {
    AssemblyOptions assembly;
    SolveOptions solve;
};

struct PipelineResult {
    DiscretizedChain chain;
    InvariantVector pi;
    ApproxDensity density;
    double runtime_seconds;
};

/// Assemble B_k on the partition, solve for its invariant vector and build p_k.
PipelineResult run_pipeline(const KernelModel& model, const Partition& partition, const PipelineOptions& options = {});

}  // namespace stationary
