#pragma once

#include "stationary/kernel.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stationary {

/// Resolved command-line configuration; unset optionals mean "not given".
struct RunConfig {
    std::string command;

    std::string model;
    std::optional<double> rho;
    std::optional<double> alpha;
    double beta = 1.0;
    std::optional<double> lambda;
    std::string innovation = "gaussian";
    double sigma = 1.0;
    double rate = 1.0;
    double uniform_lo = 0.0;
    double uniform_hi = 1.0;
    std::optional<double> m;
    double conv_mesh = 1e-3;

    std::optional<double> k_minus;
    std::optional<double> k_plus;
    std::optional<double> delta;
    std::vector<double> deltas;

    std::string quadrature = "gauss5";
    std::optional<std::string> inf_strategy;
    std::string solver = "auto";
    std::optional<std::size_t> j0;

    std::string output_dir = ".";
    std::uint64_t seed = 1;
    unsigned threads = 0;
    int n_iters = 30;
    std::int64_t n_samples = 1'000'000;
    std::int64_t mc_samples = 100'000;
    bool dump_matrix = false;
};

/// Builds the kernel described by the model keys; throws ValidationError on
/// missing or out-of-domain values.
KernelModel build_model(const RunConfig& config);

/// Every key with its resolved value, defaults included.
nlohmann::json to_json(const RunConfig& config);

/// Runs one command and writes its artifacts under output_dir. Throws
/// ValidationError or NumericalError.
void run_command(const RunConfig& config, std::ostream& out);

/// Entry point: `<command> --config <file> [--key value]...`. Returns 0 on
/// success, 1 on bad input or I/O failure, 2 on numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stationary
