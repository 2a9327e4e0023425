#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "lyapctl/backtrack.hpp"

namespace lyapctl {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view s);

/// Trajectory CSV. Fixed header:
///   iter,eta,n_rejections,V_before,V_after,Vdot_before,armijo_gap,state_norm,y0..y{m-1}
/// State columns are blank on rows without a snapshot.
void write_trajectory_csv(std::ostream& out, const RunLog& log, Index dim);
void write_trajectory_csv(const std::string& path, const RunLog& log, Index dim);

/// Parses the records back. Only `records` is populated.
RunLog read_trajectory_csv(std::istream& in);
RunLog read_trajectory_csv(const std::string& path);

/// Summary fields: status, iterations, eta_sum, final_vdot_abs,
/// final_grad_norm, eta_min_seen, eta_max_seen, config_echo.
nlohmann::json run_summary(const RunLog& log, const FlowSystem& fs,
                           const nlohmann::json& config_echo);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace lyapctl
