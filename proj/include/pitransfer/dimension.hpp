#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pitransfer/errors.hpp"

namespace pitransfer {

/// Exponent triple (a, b, c) of a physical dimension M^a L^b T^c.
///
/// Exponents are real-valued; half-integer powers occur routinely once
/// quantities are expressed against a basis (e.g. frequencies scale with
/// sqrt(g/l)). Comparisons use an absolute tolerance of kExponentTol.
struct Dimension {
  double mass_exp = 0.0;
  double length_exp = 0.0;
  double time_exp = 0.0;

  static constexpr double kExponentTol = 1e-9;

  static constexpr Dimension dimensionless() { return {}; }

  bool is_dimensionless() const;

  /// Dimension of a product of quantities: componentwise sum.
  Dimension operator+(const Dimension& o) const {
    return {mass_exp + o.mass_exp, length_exp + o.length_exp, time_exp + o.time_exp};
  }
  /// Dimension of a quotient.
  Dimension operator-(const Dimension& o) const {
    return {mass_exp - o.mass_exp, length_exp - o.length_exp, time_exp - o.time_exp};
  }
  Dimension operator-() const { return {-mass_exp, -length_exp, -time_exp}; }
  /// Dimension of q^power.
  Dimension operator*(double power) const {
    return {mass_exp * power, length_exp * power, time_exp * power};
  }

  bool operator==(const Dimension& o) const;
  bool operator!=(const Dimension& o) const { return !(*this == o); }
};

/// A numerical value coupled with a dimension and a name label.
struct Quantity {
  std::string name;
  double value = 0.0;
  Dimension dim;

  Quantity() = default;
  /// Throws InvalidConfig unless value is finite.
  Quantity(std::string name, double value, Dimension dim);

  /// Quantities are addable only when their dimensions are equal.
  Quantity operator+(const Quantity& o) const;
  Quantity operator-(const Quantity& o) const;
  Quantity operator*(const Quantity& o) const;
  Quantity operator/(const Quantity& o) const;
};

/// Exponents (m_b1, m_b2, m_b3), one per basis member, in basis order.
using ExponentTriple = std::array<double, 3>;

/// An ordered choice of three quantities whose dimension vectors span M L T.
///
/// Construction validates invertibility of the 3x3 dimension matrix (columns
/// are the members' dimension vectors) and strict positivity of the member
/// values, so every operation downstream can assume a usable basis.
class Basis {
 public:
  static constexpr double kDeterminantTol = 1e-12;

  explicit Basis(std::array<Quantity, 3> members);

  const std::array<Quantity, 3>& members() const { return members_; }
  const Quantity& member(std::size_t i) const { return members_[i]; }
  double determinant() const { return det_; }

 private:
  std::array<Quantity, 3> members_;
  double det_ = 0.0;
};

/// Solves the linear system making target * prod(q_b^{m_b}) dimensionless:
/// target + sum_b m_b * [q_b] = 0 componentwise.
ExponentTriple pi_exponents(const Dimension& target, const Basis& basis);

/// value * prod(q_b^{m_b}) with exponents from pi_exponents(dim).
double to_dimensionless(const Quantity& q, const Basis& basis);

/// Exact inverse of to_dimensionless; returns a quantity carrying target_dim.
Quantity from_dimensionless(double value, const Dimension& target_dim, const Basis& basis);

class Context;

/// Per-name exponent triples describing how each entry of a context is
/// nondimensionalized against the context's basis.
struct PiSignature {
  std::array<std::string, 3> basis_names;
  std::vector<std::pair<std::string, ExponentTriple>> entries;

  /// Applies the signature to a context with the same schema. Basis entries
  /// map to the constant 1.
  std::vector<double> apply(const Context& ctx) const;
};

/// The set of named quantities that are implicit parameters embedded in a
/// policy: plant parameters, cost weights, episode structure. Entries keep
/// their insertion order so the dimensionless vector has deterministic
/// coordinates. Immutable after construction.
class Context {
 public:
  Context(std::string name, std::vector<Quantity> entries,
          std::array<std::string, 3> basis_names);

  const std::string& name() const { return name_; }
  const std::vector<Quantity>& entries() const { return entries_; }
  const std::array<std::string, 3>& basis_names() const { return basis_names_; }

  bool has(const std::string& entry_name) const;
  const Quantity& at(const std::string& entry_name) const;
  double value(const std::string& entry_name) const { return at(entry_name).value; }
  bool is_basis_member(const std::string& entry_name) const;

  /// Basis built from the three designated entries, in basis_names order.
  Basis basis() const;

  PiSignature signature() const;

  /// FNV-1a hash over entry names, values, dimensions and basis names.
  /// Stable across runs and platforms with IEEE doubles.
  std::uint64_t fingerprint() const;

  Context renamed(std::string new_name) const;

 private:
  std::string name_;
  std::vector<Quantity> entries_;
  std::array<std::string, 3> basis_names_;
};

/// phi_beta(C): entrywise dimensionless values in entry order; basis entries
/// contribute the constant 1.
std::vector<double> context_to_dimensionless(const Context& ctx);

/// Euclidean norm of the difference of the two dimensionless context vectors.
/// Both contexts must share the same entry-name schema and basis names.
double context_distance(const Context& c1, const Context& c2);

/// Builds a context with overridden basis values in which every remaining
/// entry keeps the pi group it had in the original. Entries in raw_overrides
/// keep the given raw value instead (deliberately non-similar).
Context generate_similar_context(const Context& original,
                                 const std::map<std::string, double>& basis_overrides,
                                 const std::map<std::string, double>& raw_overrides = {});

}  // namespace pitransfer
