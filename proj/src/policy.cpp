#include "pitransfer/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "pitransfer/parallel.hpp"

namespace pitransfer {
namespace {

constexpr char kPolicyMagic[8] = {'P', 'I', 'P', 'O', 'L', 'I', 'C', 'Y'};
constexpr char kValueMagic[8] = {'P', 'I', 'V', 'A', 'L', 'G', 'R', 'D'};
constexpr std::uint32_t kFormatVersion = 1;

struct BilinearCell {
  std::size_t row0 = 0;  // i0 * n_theta_dot + j
  std::size_t row1 = 0;  // i1 * n_theta_dot + j
  double f_theta = 0.0;
  double f_theta_dot = 0.0;
  bool clamped = false;
};

BilinearCell locate(const GridAxes& axes, double theta, double theta_dot) {
  BilinearCell c;
  const double h = axes.theta_spacing();
  const double u = (wrap_angle(theta) - axes.theta_node(0)) / h;
  double fi = std::floor(u);
  c.f_theta = u - fi;
  long i = static_cast<long>(fi);
  const long n = axes.n_theta;
  long i0 = ((i % n) + n) % n;
  long i1 = (i0 + 1) % n;
  c.row0 = static_cast<std::size_t>(i0) * axes.n_theta_dot;
  c.row1 = static_cast<std::size_t>(i1) * axes.n_theta_dot;

  const double lo = -axes.theta_dot_max;
  const double hi = axes.theta_dot_max;
  double td = theta_dot;
  if (td < lo) {
    td = lo;
    c.clamped = true;
  } else if (td > hi) {
    td = hi;
    c.clamped = true;
  }
  const double v = (td - lo) / axes.theta_dot_spacing();
  long j = static_cast<long>(std::floor(v));
  j = std::clamp<long>(j, 0, axes.n_theta_dot - 2);
  c.f_theta_dot = std::clamp(v - j, 0.0, 1.0);
  c.row0 += static_cast<std::size_t>(j);
  c.row1 += static_cast<std::size_t>(j);
  return c;
}

inline double bilinear(const std::vector<double>& grid, const BilinearCell& c) {
  const double a = grid[c.row0] + c.f_theta_dot * (grid[c.row0 + 1] - grid[c.row0]);
  const double b = grid[c.row1] + c.f_theta_dot * (grid[c.row1 + 1] - grid[c.row1]);
  return a + c.f_theta * (b - a);
}

void validate_axes(const GridAxes& axes) {
  if (axes.n_theta < 3 || axes.n_theta_dot < 3) {
    throw InvalidConfig("grid axes need at least 3 nodes per dimension");
  }
  if (!(axes.theta_dot_max > 0.0) || !std::isfinite(axes.theta_dot_max)) {
    throw InvalidConfig("theta_dot_max must be strictly positive and finite");
  }
}

void validate_table(const GridAxes& axes, double tau_max,
                    const std::vector<double>& table, bool bounded) {
  if (table.size() != axes.cells()) {
    throw InvalidConfig("table size does not match the grid axes");
  }
  if (!(tau_max > 0.0) || !std::isfinite(tau_max)) {
    throw InvalidConfig("tau_max must be strictly positive and finite");
  }
  for (double v : table) {
    if (!std::isfinite(v)) throw InvalidConfig("table contains non-finite values");
    if (bounded && std::abs(v) > tau_max) {
      throw InvalidConfig("table entry exceeds tau_max");
    }
  }
}

// --- little-endian binary helpers ---

void put_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void get_bytes(std::istream& in, void* data, std::size_t n, const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw CorruptTable(std::string("truncated file while reading ") + what);
  }
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  get_bytes(in, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  unsigned char b[8];
  get_bytes(in, b, 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(get_u64(in, what));
}

struct GridPayload {
  GridAxes axes;
  double tau_max = 0.0;
  std::vector<double> table;
  std::uint64_t fingerprint = 0;
};

void save_grid(const char magic[8], const GridAxes& axes, double tau_max,
               const std::vector<double>& table, std::uint64_t fingerprint,
               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  put_bytes(out, magic, 8);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(axes.n_theta));
  put_u32(out, static_cast<std::uint32_t>(axes.n_theta_dot));
  put_f64(out, axes.theta_node(0));
  put_f64(out, axes.theta_node(axes.n_theta - 1));
  put_f64(out, -axes.theta_dot_max);
  put_f64(out, axes.theta_dot_max);
  put_f64(out, tau_max);
  for (double v : table) put_f64(out, v);
  put_u64(out, fingerprint);
  if (!out) throw IoError("failed writing file: " + path.string());
}

GridPayload load_grid(const char magic[8], const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  char got[8];
  get_bytes(in, got, 8, "magic");
  if (std::memcmp(got, magic, 8) != 0) {
    throw CorruptTable("bad magic in " + path.string());
  }
  const std::uint32_t version = get_u32(in, "version");
  if (version != kFormatVersion) {
    throw FormatVersionMismatch("unsupported format version " + std::to_string(version) +
                                " in " + path.string());
  }
  GridPayload p;
  p.axes.n_theta = static_cast<int>(get_u32(in, "n_theta"));
  p.axes.n_theta_dot = static_cast<int>(get_u32(in, "n_theta_dot"));
  if (p.axes.n_theta < 3 || p.axes.n_theta > 1000000 || p.axes.n_theta_dot < 3 ||
      p.axes.n_theta_dot > 1000000) {
    throw CorruptTable("implausible grid shape in " + path.string());
  }
  const double theta_lo = get_f64(in, "theta_lo");
  const double theta_hi = get_f64(in, "theta_hi");
  const double theta_dot_lo = get_f64(in, "theta_dot_lo");
  const double theta_dot_hi = get_f64(in, "theta_dot_hi");
  p.tau_max = get_f64(in, "tau_max");
  p.axes.theta_dot_max = theta_dot_hi;
  if (std::abs(theta_lo - p.axes.theta_node(0)) > 1e-9 ||
      std::abs(theta_hi - p.axes.theta_node(p.axes.n_theta - 1)) > 1e-9 ||
      std::abs(theta_dot_lo + theta_dot_hi) > 1e-12 || !(theta_dot_hi > 0.0)) {
    throw CorruptTable("axis metadata is inconsistent in " + path.string());
  }
  p.table.resize(p.axes.cells());
  for (double& v : p.table) v = get_f64(in, "table");
  p.fingerprint = get_u64(in, "fingerprint");
  return p;
}

}  // namespace

void GridSpec::validate() const {
  if (n_theta < 3 || n_theta_dot < 3) {
    throw InvalidConfig("grid resolutions must be at least 3");
  }
  if (!(theta_dot_max_dimensionless > 0.0) ||
      !std::isfinite(theta_dot_max_dimensionless)) {
    throw InvalidConfig("theta_dot_max_dimensionless must be strictly positive");
  }
  if (n_actions < 1 || n_actions % 2 == 0) {
    throw InvalidConfig("action count must be odd so tau = 0 is representable");
  }
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw InvalidConfig("discount gamma must lie in (0, 1)");
  }
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
    throw InvalidConfig("tolerance must be strictly positive");
  }
  if (max_sweeps < 1) throw InvalidConfig("max_sweeps must be at least 1");
}

PolicyGrid::PolicyGrid(GridAxes axes, double tau_max, std::vector<double> table,
                       std::uint64_t fingerprint)
    : axes_(axes), tau_max_(tau_max), table_(std::move(table)),
      fingerprint_(fingerprint) {
  validate_axes(axes_);
  validate_table(axes_, tau_max_, table_, /*bounded=*/true);
}

PolicyGrid::Query PolicyGrid::query(double theta, double theta_dot) const {
  const BilinearCell c = locate(axes_, theta, theta_dot);
  Query q;
  q.tau = std::clamp(bilinear(table_, c), -tau_max_, tau_max_);
  q.input_clamped = c.clamped;
  return q;
}

ValueGrid::ValueGrid(GridAxes axes, double tau_max, std::vector<double> values,
                     std::uint64_t fingerprint)
    : axes_(axes), tau_max_(tau_max), values_(std::move(values)),
      fingerprint_(fingerprint) {
  validate_axes(axes_);
  validate_table(axes_, tau_max_, values_, /*bounded=*/false);
}

double ValueGrid::interpolate(double theta, double theta_dot) const {
  return bilinear(values_, locate(axes_, theta, theta_dot));
}

SynthesisResult value_iteration(const PendulumParams& params, const GridSpec& spec) {
  params.validate();
  spec.validate();

  GridAxes axes{spec.n_theta, spec.n_theta_dot,
                spec.theta_dot_max_dimensionless * std::sqrt(params.g / params.l)};
  const std::size_t n_states = axes.cells();
  const int n_actions = spec.n_actions;
  const int threads = resolve_threads(spec.threads);

  // Actions in argmax preference order: |tau| ascending, negative before
  // positive. Scanning them in this order with a strict > comparison makes
  // tie-breaking deterministic.
  std::vector<double> actions(n_actions);
  const double action_spacing =
      n_actions > 1 ? 2.0 * params.tau_max / (n_actions - 1) : 0.0;
  for (int a = 0; a < n_actions; ++a) actions[a] = -params.tau_max + a * action_spacing;
  std::sort(actions.begin(), actions.end(), [](double x, double y) {
    if (std::abs(x) != std::abs(y)) return std::abs(x) < std::abs(y);
    return x < y;
  });

  // Successor cache: the RK4 step and stage reward of every (state, action)
  // pair are fixed, so each sweep reduces to bilinear gathers.
  const std::size_t n_pairs = n_states * static_cast<std::size_t>(n_actions);
  std::vector<std::uint32_t> row0(n_pairs), row1(n_pairs);
  std::vector<double> f_theta(n_pairs), f_theta_dot(n_pairs), stage(n_pairs);
  parallel_chunks(n_states, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      const int i = static_cast<int>(s) / axes.n_theta_dot;
      const int j = static_cast<int>(s) % axes.n_theta_dot;
      const PendulumState state{axes.theta_node(i), axes.theta_dot_node(j)};
      for (int a = 0; a < n_actions; ++a) {
        const std::size_t k = static_cast<std::size_t>(a) * n_states + s;
        const PendulumState next = step(params, state, actions[a]);
        const BilinearCell c = locate(axes, next.theta, next.theta_dot);
        row0[k] = static_cast<std::uint32_t>(c.row0);
        row1[k] = static_cast<std::uint32_t>(c.row1);
        f_theta[k] = c.f_theta;
        f_theta_dot[k] = c.f_theta_dot;
        stage[k] = instantaneous_reward(params, state, actions[a]) * params.dt;
      }
    }
  });

  const double gamma = spec.gamma;
  auto backup = [&](const std::vector<double>& value, std::size_t lo, std::size_t hi,
                    std::vector<double>& out, double* argmax_tau) {
    for (int a = 0; a < n_actions; ++a) {
      const std::size_t base = static_cast<std::size_t>(a) * n_states;
      for (std::size_t s = lo; s < hi; ++s) {
        const std::size_t k = base + s;
        const std::size_t r0 = row0[k];
        const std::size_t r1 = row1[k];
        const double fd = f_theta_dot[k];
        const double va = value[r0] + fd * (value[r0 + 1] - value[r0]);
        const double vb = value[r1] + fd * (value[r1 + 1] - value[r1]);
        const double q = stage[k] + gamma * (va + f_theta[k] * (vb - va));
        if (a == 0 || q > out[s]) {
          out[s] = q;
          if (argmax_tau) argmax_tau[s] = actions[a];
        }
      }
    }
  };

  std::vector<double> value(n_states, 0.0);
  std::vector<double> next_value(n_states, 0.0);
  std::vector<double> residual_history;
  int sweeps = 0;
  double residual = std::numeric_limits<double>::infinity();
  while (sweeps < spec.max_sweeps) {
    parallel_chunks(n_states, threads, [&](std::size_t lo, std::size_t hi) {
      backup(value, lo, hi, next_value, nullptr);
    });
    residual = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) {
      residual = std::max(residual, std::abs(next_value[s] - value[s]));
    }
    residual_history.push_back(residual);
    value.swap(next_value);
    ++sweeps;
    if (residual < spec.tolerance) break;
  }
  if (!(residual < spec.tolerance)) {
    throw NoConvergence("value iteration residual " + std::to_string(residual) +
                        " above tolerance after " + std::to_string(sweeps) + " sweeps");
  }

  std::vector<double> table(n_states, 0.0);
  parallel_chunks(n_states, threads, [&](std::size_t lo, std::size_t hi) {
    backup(value, lo, hi, next_value, table.data());
  });

  const std::uint64_t fingerprint = params.to_context().fingerprint();
  SynthesisResult result{
      PolicyGrid(axes, params.tau_max, std::move(table), fingerprint),
      ValueGrid(axes, params.tau_max, std::move(value), fingerprint),
      sweeps,
      residual,
      std::move(residual_history),
  };
  return result;
}

void save_policy(const PolicyGrid& policy, const std::filesystem::path& path) {
  save_grid(kPolicyMagic, policy.axes(), policy.tau_max(), policy.table(),
            policy.fingerprint(), path);
}

PolicyGrid load_policy(const std::filesystem::path& path) {
  GridPayload p = load_grid(kPolicyMagic, path);
  try {
    return PolicyGrid(p.axes, p.tau_max, std::move(p.table), p.fingerprint);
  } catch (const InvalidConfig& e) {
    throw CorruptTable("invalid policy table in " + path.string() + ": " + e.what());
  }
}

void save_value(const ValueGrid& value, const std::filesystem::path& path) {
  save_grid(kValueMagic, value.axes(), value.tau_max(), value.values(),
            value.fingerprint(), path);
}

ValueGrid load_value(const std::filesystem::path& path) {
  GridPayload p = load_grid(kValueMagic, path);
  try {
    return ValueGrid(p.axes, p.tau_max, std::move(p.table), p.fingerprint);
  } catch (const InvalidConfig& e) {
    throw CorruptTable("invalid value table in " + path.string() + ": " + e.what());
  }
}

}  // namespace pitransfer
