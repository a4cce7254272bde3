#include "pitransfer/dimension.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

namespace pitransfer {
namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

/// Determinant of a 3x3 matrix given as columns.
double det3(const std::array<std::array<double, 3>, 3>& col) {
  return col[0][0] * (col[1][1] * col[2][2] - col[2][1] * col[1][2]) -
         col[1][0] * (col[0][1] * col[2][2] - col[2][1] * col[0][2]) +
         col[2][0] * (col[0][1] * col[1][2] - col[1][1] * col[0][2]);
}

std::array<double, 3> dim_vec(const Dimension& d) {
  return {d.mass_exp, d.length_exp, d.time_exp};
}

/// value * prod(v_b^{e_b}). Exponents 0 and +-1 take exact paths so that
/// basis members nondimensionalize to exactly 1 (x/x == 1 in IEEE arithmetic).
double apply_exponents(double value, const Basis& basis, const ExponentTriple& exps) {
  double out = value;
  for (std::size_t i = 0; i < 3; ++i) {
    const double e = exps[i];
    const double v = basis.member(i).value;
    if (e == 0.0) continue;
    if (e == 1.0) {
      out *= v;
    } else if (e == -1.0) {
      out /= v;
    } else {
      out *= std::pow(v, e);
    }
  }
  return out;
}

ExponentTriple negate(const ExponentTriple& e) { return {-e[0], -e[1], -e[2]}; }

}  // namespace

bool Dimension::is_dimensionless() const { return *this == dimensionless(); }

bool Dimension::operator==(const Dimension& o) const {
  return close(mass_exp, o.mass_exp, kExponentTol) &&
         close(length_exp, o.length_exp, kExponentTol) &&
         close(time_exp, o.time_exp, kExponentTol);
}

Quantity::Quantity(std::string name_, double value_, Dimension dim_)
    : name(std::move(name_)), value(value_), dim(dim_) {
  if (!std::isfinite(value)) {
    throw InvalidConfig("quantity '" + name + "' has non-finite value");
  }
  if (!std::isfinite(dim.mass_exp) || !std::isfinite(dim.length_exp) ||
      !std::isfinite(dim.time_exp)) {
    throw InvalidConfig("quantity '" + name + "' has non-finite dimension exponents");
  }
}

Quantity Quantity::operator+(const Quantity& o) const {
  if (dim != o.dim) {
    throw DimensionMismatch("cannot add '" + name + "' and '" + o.name +
                            "': dimensions differ");
  }
  return Quantity(name, value + o.value, dim);
}

Quantity Quantity::operator-(const Quantity& o) const {
  if (dim != o.dim) {
    throw DimensionMismatch("cannot subtract '" + o.name + "' from '" + name +
                            "': dimensions differ");
  }
  return Quantity(name, value - o.value, dim);
}

Quantity Quantity::operator*(const Quantity& o) const {
  return Quantity(name + "*" + o.name, value * o.value, dim + o.dim);
}

Quantity Quantity::operator/(const Quantity& o) const {
  return Quantity(name + "/" + o.name, value / o.value, dim - o.dim);
}

Basis::Basis(std::array<Quantity, 3> members) : members_(std::move(members)) {
  std::array<std::array<double, 3>, 3> cols{dim_vec(members_[0].dim),
                                            dim_vec(members_[1].dim),
                                            dim_vec(members_[2].dim)};
  det_ = det3(cols);
  if (std::abs(det_) < kDeterminantTol) {
    throw SingularBasis("basis {" + members_[0].name + ", " + members_[1].name + ", " +
                        members_[2].name + "} does not span the dimension space");
  }
  for (const Quantity& q : members_) {
    if (!(q.value > 0.0)) {
      throw NonPositiveBasisValue("basis member '" + q.name +
                                  "' must be strictly positive");
    }
  }
}

ExponentTriple pi_exponents(const Dimension& target, const Basis& basis) {
  // Cramer's rule on  A m = -target  with A's columns the basis dimensions.
  std::array<std::array<double, 3>, 3> cols{dim_vec(basis.member(0).dim),
                                            dim_vec(basis.member(1).dim),
                                            dim_vec(basis.member(2).dim)};
  const std::array<double, 3> rhs{-target.mass_exp, -target.length_exp,
                                  -target.time_exp};
  const double det = basis.determinant();
  ExponentTriple out{};
  for (std::size_t i = 0; i < 3; ++i) {
    auto sub = cols;
    sub[i] = rhs;
    out[i] = det3(sub) / det;
  }
  // Snap float fuzz onto the exact fast-path values.
  for (double& e : out) {
    if (std::abs(e) < 1e-12) e = 0.0;
    else if (std::abs(e - 1.0) < 1e-12) e = 1.0;
    else if (std::abs(e + 1.0) < 1e-12) e = -1.0;
  }
  return out;
}

double to_dimensionless(const Quantity& q, const Basis& basis) {
  return apply_exponents(q.value, basis, pi_exponents(q.dim, basis));
}

Quantity from_dimensionless(double value, const Dimension& target_dim,
                            const Basis& basis) {
  const ExponentTriple exps = negate(pi_exponents(target_dim, basis));
  return Quantity("", apply_exponents(value, basis, exps), target_dim);
}

std::vector<double> PiSignature::apply(const Context& ctx) const {
  if (ctx.basis_names() != basis_names || ctx.entries().size() != entries.size()) {
    throw SchemaMismatch("signature does not match context schema");
  }
  const Basis basis = ctx.basis();
  std::vector<double> out;
  out.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Quantity& q = ctx.entries()[i];
    if (q.name != entries[i].first) {
      throw SchemaMismatch("signature entry '" + entries[i].first +
                           "' does not match context entry '" + q.name + "'");
    }
    if (ctx.is_basis_member(q.name)) {
      out.push_back(1.0);
    } else {
      out.push_back(apply_exponents(q.value, basis, entries[i].second));
    }
  }
  return out;
}

Context::Context(std::string name, std::vector<Quantity> entries,
                 std::array<std::string, 3> basis_names)
    : name_(std::move(name)), entries_(std::move(entries)),
      basis_names_(std::move(basis_names)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (std::size_t j = i + 1; j < entries_.size(); ++j) {
      if (entries_[i].name == entries_[j].name) {
        throw InvalidConfig("context '" + name_ + "' has duplicate entry '" +
                            entries_[i].name + "'");
      }
    }
  }
  basis();  // validates resolvability, rank and positivity
}

bool Context::has(const std::string& entry_name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Quantity& q) { return q.name == entry_name; });
}

const Quantity& Context::at(const std::string& entry_name) const {
  for (const Quantity& q : entries_) {
    if (q.name == entry_name) return q;
  }
  throw InvalidConfig("context '" + name_ + "' has no entry '" + entry_name + "'");
}

bool Context::is_basis_member(const std::string& entry_name) const {
  return std::find(basis_names_.begin(), basis_names_.end(), entry_name) !=
         basis_names_.end();
}

Basis Context::basis() const {
  return Basis({at(basis_names_[0]), at(basis_names_[1]), at(basis_names_[2])});
}

PiSignature Context::signature() const {
  const Basis b = basis();
  PiSignature sig;
  sig.basis_names = basis_names_;
  sig.entries.reserve(entries_.size());
  for (const Quantity& q : entries_) {
    sig.entries.emplace_back(q.name, pi_exponents(q.dim, b));
  }
  return sig;
}

std::uint64_t Context::fingerprint() const {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix_byte = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  auto mix_str = [&](const std::string& s) {
    for (unsigned char c : s) mix_byte(c);
    mix_byte(0);
  };
  auto mix_f64 = [&](double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(bits >> (8 * i)));
  };
  for (const Quantity& q : entries_) {
    mix_str(q.name);
    mix_f64(q.value);
    mix_f64(q.dim.mass_exp);
    mix_f64(q.dim.length_exp);
    mix_f64(q.dim.time_exp);
  }
  for (const std::string& b : basis_names_) mix_str(b);
  return h;
}

Context Context::renamed(std::string new_name) const {
  return Context(std::move(new_name), entries_, basis_names_);
}

std::vector<double> context_to_dimensionless(const Context& ctx) {
  const Basis basis = ctx.basis();
  std::vector<double> out;
  out.reserve(ctx.entries().size());
  for (const Quantity& q : ctx.entries()) {
    if (ctx.is_basis_member(q.name)) {
      out.push_back(1.0);
    } else {
      out.push_back(to_dimensionless(q, basis));
    }
  }
  return out;
}

double context_distance(const Context& c1, const Context& c2) {
  if (c1.entries().size() != c2.entries().size() ||
      c1.basis_names() != c2.basis_names()) {
    throw SchemaMismatch("contexts '" + c1.name() + "' and '" + c2.name() +
                         "' have different schemas");
  }
  for (std::size_t i = 0; i < c1.entries().size(); ++i) {
    if (c1.entries()[i].name != c2.entries()[i].name) {
      throw SchemaMismatch("contexts '" + c1.name() + "' and '" + c2.name() +
                           "' have different schemas (entry " + std::to_string(i) +
                           ": '" + c1.entries()[i].name + "' vs '" +
                           c2.entries()[i].name + "')");
    }
  }
  const std::vector<double> v1 = context_to_dimensionless(c1);
  const std::vector<double> v2 = context_to_dimensionless(c2);
  double sum = 0.0;
  for (std::size_t i = 0; i < v1.size(); ++i) {
    const double d = v2[i] - v1[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

Context generate_similar_context(const Context& original,
                                 const std::map<std::string, double>& basis_overrides,
                                 const std::map<std::string, double>& raw_overrides) {
  for (const auto& [name, value] : basis_overrides) {
    if (!original.is_basis_member(name)) {
      throw InvalidConfig("similar override '" + name + "' is not a basis member of '" +
                          original.name() + "'");
    }
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw NonPositiveBasisValue("override for basis member '" + name +
                                  "' must be strictly positive");
    }
  }
  for (const auto& [name, value] : raw_overrides) {
    if (!original.has(name)) {
      throw InvalidConfig("raw override '" + name + "' is not an entry of '" +
                          original.name() + "'");
    }
    if (original.is_basis_member(name)) {
      throw InvalidConfig("raw override '" + name +
                          "' targets a basis member; use a similar override");
    }
    if (!std::isfinite(value)) {
      throw InvalidConfig("raw override '" + name + "' is not finite");
    }
  }

  auto overridden = [&](const Quantity& q) {
    auto it = basis_overrides.find(q.name);
    return it == basis_overrides.end() ? q.value : it->second;
  };

  bool basis_changed = false;
  std::array<Quantity, 3> new_basis_members{};
  const Basis old_basis = original.basis();
  for (std::size_t i = 0; i < 3; ++i) {
    const Quantity& q = old_basis.member(i);
    const double v = overridden(q);
    if (v != q.value) basis_changed = true;
    new_basis_members[i] = Quantity(q.name, v, q.dim);
  }

  std::vector<Quantity> entries;
  entries.reserve(original.entries().size());
  if (!basis_changed) {
    entries = original.entries();
  } else {
    const Basis new_basis(new_basis_members);
    for (const Quantity& q : original.entries()) {
      if (original.is_basis_member(q.name)) {
        entries.push_back(Quantity(q.name, overridden(q), q.dim));
      } else {
        // Same dimensions on both sides, so one exponent solve serves both
        // the forward and the inverse transform.
        const ExponentTriple exps = pi_exponents(q.dim, old_basis);
        const double dimensionless = apply_exponents(q.value, old_basis, exps);
        const double rescaled = apply_exponents(dimensionless, new_basis, negate(exps));
        entries.push_back(Quantity(q.name, rescaled, q.dim));
      }
    }
  }
  for (Quantity& q : entries) {
    auto it = raw_overrides.find(q.name);
    if (it != raw_overrides.end()) q = Quantity(q.name, it->second, q.dim);
  }
  return Context(original.name(), std::move(entries), original.basis_names());
}

}  // namespace pitransfer
