#include "lyapctl/trajectory_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lyapctl {
namespace {

constexpr const char* kFixedColumns[] = {"iter",        "eta",       "n_rejections",
                                         "V_before",    "V_after",   "Vdot_before",
                                         "armijo_gap",  "state_norm"};
constexpr std::size_t kNumFixed = std::size(kFixedColumns);

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

long parse_long(std::string_view s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("bad integer field '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("bad numeric field '" + std::string(s) + "'");
  }
  return v;
}

void write_trajectory_csv(std::ostream& out, const RunLog& log, Index dim) {
  for (std::size_t i = 0; i < kNumFixed; ++i) {
    out << (i ? "," : "") << kFixedColumns[i];
  }
  for (Index j = 0; j < dim; ++j) out << ",y" << j;
  out << '\n';
  for (const StepRecord& r : log.records) {
    out << r.iter << ',' << format_double(r.eta) << ',' << r.n_rejections << ','
        << format_double(r.V_before) << ',' << format_double(r.V_after) << ','
        << format_double(r.Vdot_before) << ',' << format_double(r.armijo_gap) << ','
        << format_double(r.state_norm);
    for (Index j = 0; j < dim; ++j) {
      out << ',';
      if (r.state) out << format_double((*r.state)[j]);
    }
    out << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const RunLog& log, Index dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_trajectory_csv(out, log, dim);
  if (!out) throw IoError("write to '" + path + "' failed");
}

RunLog read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trajectory file");
  const auto header = split_commas(line);
  if (header.size() < kNumFixed) throw IoError("trajectory header too short");
  for (std::size_t i = 0; i < kNumFixed; ++i) {
    if (header[i] != kFixedColumns[i]) {
      throw IoError("unexpected column '" + std::string(header[i]) + "'");
    }
  }
  const Index dim = static_cast<Index>(header.size() - kNumFixed);

  RunLog log;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() != header.size()) {
      throw IoError("line " + std::to_string(lineno) + ": expected " +
                    std::to_string(header.size()) + " fields");
    }
    StepRecord r;
    r.iter = parse_long(f[0]);
    r.eta = parse_double(f[1]);
    r.n_rejections = static_cast<int>(parse_long(f[2]));
    r.V_before = parse_double(f[3]);
    r.V_after = parse_double(f[4]);
    r.Vdot_before = parse_double(f[5]);
    r.armijo_gap = parse_double(f[6]);
    r.state_norm = parse_double(f[7]);
    const bool blank = std::all_of(f.begin() + kNumFixed, f.end(),
                                   [](std::string_view s) { return s.empty(); });
    if (dim > 0 && !blank) {
      Vector y(dim);
      for (Index j = 0; j < dim; ++j) y[j] = parse_double(f[kNumFixed + j]);
      r.state = std::move(y);
    }
    log.eta_sum += r.eta;
    log.records.push_back(std::move(r));
  }
  log.wall_iterations = static_cast<long>(log.records.size());
  return log;
}

RunLog read_trajectory_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_trajectory_csv(in);
}

nlohmann::json run_summary(const RunLog& log, const FlowSystem& fs,
                           const nlohmann::json& config_echo) {
  nlohmann::json j;
  j["status"] = std::string(to_string(log.termination));
  j["iterations"] = log.wall_iterations;
  j["eta_sum"] = log.eta_sum;
  const Vector& y = log.final_state;
  const bool sane = y.size() == fs.dim && y.allFinite();
  const double vdot = sane ? std::abs(fs.lyapunov_rate(y)) : std::nan("");
  j["final_vdot_abs"] = std::isfinite(vdot) ? nlohmann::json(vdot) : nlohmann::json();
  const double gn = sane ? fs.grad_norm(y) : std::nan("");
  j["final_grad_norm"] = std::isfinite(gn) ? nlohmann::json(gn) : nlohmann::json();
  if (log.records.empty()) {
    j["eta_min_seen"] = nullptr;
    j["eta_max_seen"] = nullptr;
  } else {
    double lo = log.records.front().eta, hi = lo;
    for (const StepRecord& r : log.records) {
      lo = std::min(lo, r.eta);
      hi = std::max(hi, r.eta);
    }
    j["eta_min_seen"] = lo;
    j["eta_max_seen"] = hi;
  }
  j["config_echo"] = config_echo;
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace lyapctl
