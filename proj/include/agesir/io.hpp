#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agesir/finalsize.hpp"
#include "agesir/ivp_optimizer.hpp"
#include "agesir/ovp_harness.hpp"
#include "agesir/spectral.hpp"

namespace agesir {

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trippable decimal form of a double.
std::string fmt(double x);

/// Header row followed by one row per entry of the columns (all equal length).
std::string csv_columns(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

std::vector<double> to_std(const Eigen::VectorXd& v);

nlohmann::json to_json(const EigenResult& r);
nlohmann::json to_json(const ScalarSummary& s);
nlohmann::json to_json(const BathtubAllocation& b);
nlohmann::json to_json(const OptimizerReport& r);
nlohmann::json to_json(const UpperBoundCheck& c);
nlohmann::json to_json(const EquivalenceReport& r);

/// Columns m, objective.
std::string sweep_csv(const std::vector<BudgetPoint>& sweep);
/// Columns epsilon, N, gap.
std::string gap_csv(const EquivalenceReport& r);

}  // namespace agesir
