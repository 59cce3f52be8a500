#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace flatlog {

struct Term {
  enum class Kind { Variable, Constant };
  Kind kind = Kind::Variable;
  std::string text;  // variable name, or the constant's unquoted text

  bool is_variable() const { return kind == Kind::Variable; }
  bool is_constant() const { return kind == Kind::Constant; }
  static Term variable(std::string name) { return {Kind::Variable, std::move(name)}; }
  static Term constant(std::string value) { return {Kind::Constant, std::move(value)}; }
  friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
  std::string relation;
  std::vector<Term> args;
  bool negated = false;
  std::size_t line = 0;
  std::size_t column = 0;

  std::size_t arity() const { return args.size(); }
  // Distinct variables in argument order.
  std::vector<std::string> variables() const;
  bool has_variable(const std::string& v) const;
};

// `lhs != rhs` filter between two terms.
struct Inequality {
  Term lhs;
  Term rhs;
};

struct Rule {
  std::string label;  // optional, used by .split
  Atom head;
  std::vector<Atom> body;
  std::vector<Inequality> inequalities;
  std::size_t line = 0;

  bool is_fact() const { return body.empty(); }
  // Variables bound by positive body atoms, first-occurrence order.
  std::vector<std::string> positive_variables() const;
  std::string to_string() const;
};

struct RelationDecl {
  std::string name;
  std::vector<std::string> attributes;
  bool input = false;
  bool output = false;
  bool helper = false;  // introduced by .split, never an output

  std::size_t arity() const { return attributes.size(); }
};

// `.split Label { Rel, Rel } -> Helper(v1, ...)`
struct SplitDirective {
  std::string rule_label;
  std::vector<std::string> atoms;  // relation names of the isolated body atoms
  std::string helper;
  std::vector<std::string> helper_variables;
  std::size_t line = 0;
};

struct Program {
  std::vector<RelationDecl> relations;
  std::vector<Rule> rules;  // facts (bodiless ground rules) included
  std::vector<SplitDirective> splits;

  const RelationDecl* find(const std::string& name) const;
  RelationDecl* find(const std::string& name);
};

std::string to_string(const Atom& atom);

}  // namespace flatlog
