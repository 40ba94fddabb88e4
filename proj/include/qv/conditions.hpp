#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qv/partition.hpp"
#include "qv/path.hpp"

namespace qv {

enum class Condition { C1, C2, C3, LeftApprox, UC1, UC2, UC3 };
enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Condition c);
std::string to_string(Verdict v);

struct Witness {
    int level = -1;            // sequence label of the offending level
    double time_a = 0.0;       // interval left end, or the time in question
    double time_b = 0.0;       // interval right end (when applicable)
    double value = 0.0;        // measured quantity
    std::string note;
};

/// Numerical certification of an asymptotic condition on a finite level range.
/// Fail always carries a witness; Inconclusive means the finite prefix did not
/// settle the question at the given tolerance.
struct ConditionReport {
    Condition condition;
    Verdict verdict = Verdict::Inconclusive;
    std::optional<Witness> witness;
    std::vector<double> eps_grid;
    std::vector<double> t_grid;
    double tolerance = 0.0;
};

struct ConditionOptions {
    double tolerance = 1e-9;
    Norm norm = Norm::Euclidean;
};

/// Checks (C1),(C2),(C3) of Condition (C) for `path` along `seq`, sampled on
/// the given time and threshold grids.
std::array<ConditionReport, 3> check_condition_C(const PartitionSequence& seq,
                                                 const CadlagPath& path,
                                                 const std::vector<double>& t_grid,
                                                 const std::vector<double>& eps_grid,
                                                 const ConditionOptions& opts = {});

/// Checks X(underline{pi_n}(t)) -> X(t-) on the time grid.
ConditionReport check_left_approximation(const PartitionSequence& seq, const CadlagPath& path,
                                         const std::vector<double>& t_grid,
                                         const ConditionOptions& opts = {});

/// Family version (Condition (UC)): jump sets are unions over the family and
/// all measurements take the sup over the family.
std::array<ConditionReport, 3> check_UC(const PartitionSequence& seq,
                                        const std::vector<CadlagPath>& family,
                                        const std::vector<double>& t_grid,
                                        const std::vector<double>& eps_grid,
                                        const ConditionOptions& opts = {});

}  // namespace qv
