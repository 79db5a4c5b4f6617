#include "agesir/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

namespace agesir {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string csv_columns(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + fmt(columns[c][r]);
    out += '\n';
  }
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

nlohmann::json to_json(const EigenResult& r) {
  return {{"lambda1", r.lambda1},
          {"spectral_radius", r.spectral_radius},
          {"iterations", r.iterations},
          {"residual", r.residual}};
}

nlohmann::json to_json(const ScalarSummary& s) {
  return {{"sigma0", s.sigma0}, {"sigma_inf", s.sigma_inf}, {"eta", s.eta}};
}

nlohmann::json to_json(const BathtubAllocation& b) {
  nlohmann::json order = nlohmann::json::array();
  for (auto i : b.order) order.push_back(i);
  return {{"s_threshold", b.s_threshold},
          {"budget_used", b.budget_used},
          {"boundary_fraction", b.boundary_fraction},
          {"cut_node", b.cut_node},
          {"tie_break", "ascending age index"},
          {"order", order},
          {"warnings", b.warnings}};
}

nlohmann::json to_json(const OptimizerReport& r) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [it, obj] : r.history) hist.push_back({{"iteration", it}, {"objective", obj}});
  return {{"objective", r.objective},
          {"iterations", r.iterations},
          {"kkt_residual", r.kkt_residual},
          {"converged", r.converged},
          {"stalled", r.stalled},
          {"stop_reason", r.stop_reason},
          {"allocation", to_std(r.allocation.values())},
          {"history", hist}};
}

nlohmann::json to_json(const UpperBoundCheck& c) {
  return {{"plan", c.id},        {"N", c.n},
          {"N_star", c.n_star},  {"slack", c.slack},
          {"pointwise_excess", c.pointwise_excess}, {"passed", c.passed}};
}

nlohmann::json to_json(const EquivalenceReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.upper_bound_checks) checks.push_back(to_json(c));
  return {{"v", to_std(r.v.values())},
          {"N_star", r.n_star},
          {"epsilons", r.epsilons},
          {"N_values", r.n_values},
          {"gaps", r.gaps},
          {"rescaled_deviation", r.rescaled_deviation},
          {"admissible", r.admissible},
          {"upper_bound_checks", checks}};
}

std::string sweep_csv(const std::vector<BudgetPoint>& sweep) {
  std::vector<double> m, obj;
  for (const auto& p : sweep) {
    m.push_back(p.m);
    obj.push_back(p.objective);
  }
  return csv_columns({"m", "objective"}, {m, obj});
}

std::string gap_csv(const EquivalenceReport& r) {
  return csv_columns({"epsilon", "N", "gap"}, {r.epsilons, r.n_values, r.gaps});
}

}  // namespace agesir
