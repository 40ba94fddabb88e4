#pragma once

#include <cstdint>
#include <optional>

#include "qv/path.hpp"

namespace qv {

/// Counter-based generator: value i of stream `seed` is
/// splitmix64(seed + i * 0x9E3779B97F4A7C15). Fully specified so other
/// implementations can reproduce paths bit-exactly.
uint64_t rng_at(uint64_t seed, uint64_t counter);
/// (rng_at >> 11) * 2^-53, in [0, 1[.
double uniform01(uint64_t seed, uint64_t counter);
/// Standard normal via Box-Muller on counters (2*i, 2*i + 1) of the stream.
double gaussian(uint64_t seed, uint64_t pair_index);

enum class RecipeKind { ScaledRandomWalk, FBM, StepFV, SmoothFV, JumpDiffusion };

struct PathRecipe {
    RecipeKind kind = RecipeKind::ScaledRandomWalk;
    uint64_t seed = 0;
    double horizon = 1.0;
    int dim = 1;
    int level = 10;  // grid of ~2^level * horizon intervals

    Eigen::MatrixXd sigma;  // d x k volatility (walk); identity when empty
    double hurst = 0.8;     // FBM, in ]0,1[
    std::vector<Jump> jumps;  // StepFV / JumpDiffusion

    // SmoothFV coordinate i: poly_i(t) + sin_amp[i] * sin(sin_freq[i] * t).
    std::vector<std::vector<double>> poly;
    std::vector<double> sin_amp, sin_freq;
};

CadlagPath generate(const PathRecipe& recipe);

/// Closed-form QV when one is registered: tensor QV(t) = t * linear_rate +
/// sum of jump outer products up to t.
struct ExpectedQV {
    Eigen::MatrixXd linear_rate;  // d x d
    std::vector<Jump> tensor_jumps;  // deltas flattened row-major (d*d)

    Eigen::MatrixXd tensor_at(double t) const;
    double scalar_at(double t) const;  // trace (Euclidean scalar QV)
};
std::optional<ExpectedQV> expected_qv(const PathRecipe& recipe);

/// max over grid increments of |dX| / mesh^exponent (Holder diagnostic).
double holder_quotient(const CadlagPath& path, double exponent);

}  // namespace qv
