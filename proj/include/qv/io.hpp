#pragma once

#include <json.hpp>
#include <string>

#include "qv/conditions.hpp"
#include "qv/quadratic.hpp"
#include "qv/transform.hpp"

namespace qv {

/// binary64 -> shortest-round-trip-safe text (17 significant digits).
std::string fmt17(double x);

/// Path CSV: a `# interp=linear|constant` comment, header `t,x1..xd,jump1..jumpd`,
/// one row per grid or jump time; x columns hold the continuous part, jump
/// columns are zero except at jump rows. Round-trips binary64 exactly.
void write_path_csv(const CadlagPath& path, const std::string& file);
CadlagPath read_path_csv(const std::string& file);

/// QV table CSV: `t,level,value_1..value_m` per level per reporting time plus
/// `limit` pseudo-level rows.
void write_qv_csv(const ConvergenceEstimate& est, const std::string& file);

/// Itô report CSV: level,t,component,lhs,term_a,term_x,term_qv,term_jump,residual.
void write_ito_csv(const ItoReport& rep, const std::string& file);

nlohmann::json to_json(const ConvergenceEstimate& est);
nlohmann::json to_json(const ConditionReport& rep);
nlohmann::json to_json(const AbsContinuityReport& rep);
nlohmann::json to_json(const DensityEstimate& d);
nlohmann::json to_json(const UnitDensityReport& rep);

/// One level of an explicit partition sequence per CSV line.
std::vector<Partition> read_partition_levels_csv(const std::string& file);

}  // namespace qv
