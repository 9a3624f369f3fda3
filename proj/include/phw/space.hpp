#pragma once

#include <cctype>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "phw/coordinate.hpp"
#include "phw/errors.hpp"

namespace phw {

/// Declared range of a parameter, used when sampling numeric certificates.
/// Open/closed distinction matters only at finite endpoints.
struct Range {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = true;
  bool hi_open = true;

  static Range positive() { return Range{0.0, Range().hi, true, true}; }
  static Range nonnegative() { return Range{0.0, Range().hi, false, true}; }
};

/// A named parameter symbol: a function of the listed coordinates.
/// An empty dependency list at declaration time means "all independent
/// coordinates" (the common case, e.g. a material coefficient P(X)).
/// Formal partial derivatives with respect to entries of `deps` produce
/// named derivative symbols; everything else differentiates to zero.
struct ParamSpec {
  std::string name;
  std::vector<Coordinate> deps;
  std::optional<double> value;  // numeric binding used by simulations
  Range range;
};

/// Symbol table of one model: base dimension, independent coordinate
/// names, fields (state, then inputs, then auxiliary), parameters, and
/// the maximum admissible jet order.
///
/// Field indices are stable under extension, so expressions built over a
/// space remain valid over any extension of it.  Auxiliary fields exist
/// so that operator checks can introduce generic covector components
/// without touching the model's own state.
class ModelSpace {
 public:
  ModelSpace() = default;

  /// Independent coordinate names must be single letters: derivative
  /// coordinates are written with letter suffixes (w_XY).
  void set_independent(std::vector<std::string> names) {
    if (names.empty()) throw ShapeError("model needs at least one independent coordinate");
    for (const auto& n : names)
      if (n.size() != 1 || !std::isalpha(static_cast<unsigned char>(n[0])))
        throw ShapeError("independent coordinate name must be a single letter: " + n);
    indep_ = std::move(names);
  }

  int dim() const { return static_cast<int>(indep_.size()); }

  int max_jet_order() const { return max_jet_; }
  void set_max_jet_order(int m) {
    if (m < 1) throw ShapeError("maximum jet order must be at least 1");
    max_jet_ = m;
  }

  int add_field(const std::string& name) { return add(name, FieldRole::State); }
  int add_input(const std::string& name) { return add(name, FieldRole::Input); }
  int add_aux_field(const std::string& name) { return add(name, FieldRole::Aux); }

  int field_count() const { return static_cast<int>(fields_.size()); }
  int state_count() const { return n_state_; }
  int input_count() const { return n_input_; }
  bool is_state(int alpha) const { return fields_.at(alpha).role == FieldRole::State; }
  bool is_input(int alpha) const { return fields_.at(alpha).role == FieldRole::Input; }
  bool is_aux(int alpha) const { return fields_.at(alpha).role == FieldRole::Aux; }
  /// Input field indices in declaration order.
  std::vector<int> input_indices() const {
    std::vector<int> out;
    for (int i = 0; i < field_count(); ++i)
      if (is_input(i)) out.push_back(i);
    return out;
  }

  const std::string& field_name(int alpha) const { return fields_.at(alpha).name; }
  const std::string& independent_name(int a) const { return indep_.at(a); }

  void add_param(ParamSpec spec) {
    if (find_param(spec.name) || find_field(spec.name) || find_independent(spec.name))
      throw ShapeError("duplicate symbol: " + spec.name);
    if (spec.deps.empty())
      for (int a = 0; a < dim(); ++a) spec.deps.push_back(Coordinate::independent(a));
    params_.push_back(std::move(spec));
  }

  const std::vector<ParamSpec>& params() const { return params_; }
  const ParamSpec* find_param(const std::string& name) const {
    for (const auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }
  const ParamSpec& param(const std::string& name) const {
    if (const ParamSpec* p = find_param(name)) return *p;
    throw ShapeError("unknown parameter: " + name);
  }

  std::optional<int> find_field(const std::string& name) const {
    for (int i = 0; i < field_count(); ++i)
      if (fields_[i].name == name) return i;
    return std::nullopt;
  }
  std::optional<int> find_independent(const std::string& name) const {
    for (int a = 0; a < dim(); ++a)
      if (indep_[a] == name) return a;
    return std::nullopt;
  }

 private:
  enum class FieldRole : std::uint8_t { State, Input, Aux };
  struct Field {
    std::string name;
    FieldRole role;
  };

  int add(const std::string& name, FieldRole role) {
    if (find_field(name) || find_param(name) || find_independent(name))
      throw ShapeError("duplicate symbol: " + name);
    if (role == FieldRole::State && (n_input_ > 0 || n_aux_ > 0))
      throw ShapeError("state fields must be declared before inputs");
    if (role == FieldRole::Input && n_aux_ > 0)
      throw ShapeError("inputs must be declared before auxiliary fields");
    fields_.push_back(Field{name, role});
    if (role == FieldRole::State) ++n_state_;
    if (role == FieldRole::Input) ++n_input_;
    if (role == FieldRole::Aux) ++n_aux_;
    return field_count() - 1;
  }

  std::vector<std::string> indep_{"X"};
  std::vector<Field> fields_;
  int n_state_ = 0;
  int n_input_ = 0;
  int n_aux_ = 0;
  std::vector<ParamSpec> params_;
  int max_jet_ = 2;
};

}  // namespace phw
