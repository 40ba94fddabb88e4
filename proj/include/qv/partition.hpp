#pragma once

#include <string>
#include <vector>

#include "qv/path.hpp"

namespace qv {

/// Finite dissection 0 = t_0 < ... < t_N = T of [0,T]; intervals are the
/// half-open pieces ]t_i, t_{i+1}].
struct Partition {
    std::vector<double> points;

    Partition() = default;
    explicit Partition(std::vector<double> pts);

    double horizon() const { return points.back(); }
    size_t intervals() const { return points.size() - 1; }
    double mesh() const;

    /// Index i of the interval ]points[i], points[i+1]] containing t; t in ]0,T].
    size_t locate(double t) const;
    double lower(double t) const { return points[locate(t)]; }      // underline pi(t)
    double upper(double t) const { return points[locate(t) + 1]; }  // overline pi(t)

    static Partition uniform(double T, size_t n_intervals);
    static Partition dyadic(double T, int level);  // 2^level intervals
};

/// A refining sequence of partitions of [0,T]. Levels are materialized; labels
/// keep the generator parameter (e.g. the dyadic exponent) for reporting.
struct PartitionSequence {
    std::string kind;
    double horizon = 0.0;
    std::vector<Partition> levels;
    std::vector<int> labels;

    size_t size() const { return levels.size(); }
    const Partition& level(size_t i) const { return levels[i]; }
};

PartitionSequence dyadic_sequence(double T, int n_max);                // levels 0..n_max
PartitionSequence dyadic_range(double T, int n_min, int n_max);        // levels n_min..n_max
PartitionSequence uniform_mesh_sequence(double T, const std::vector<size_t>& counts);
PartitionSequence explicit_sequence(std::vector<Partition> levels);

enum class Side { Plus, Minus };

/// O^+_t(X,pi) = max over intervals of osc on ]r,s] cap [0,t];
/// O^-_t uses [r,s[ instead.
double osc_along(const CadlagPath& path, const Partition& pi, double t, Side side,
                 Norm norm = Norm::Euclidean);

/// Greedy left-to-right construction: each level k satisfies
/// max over the family of O^-_T(f, pi_k) < eps[k].
/// Throws std::runtime_error when eps is below the resolution the
/// discretized paths can support.
PartitionSequence oscillation_controlled_sequence(const std::vector<CadlagPath>& family,
                                                  const std::vector<double>& eps_schedule,
                                                  Norm norm = Norm::Euclidean);

}  // namespace qv
