#include "flatlog/parser.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "flatlog/error.hpp"

namespace flatlog {

// ---------------------------------------------------------------------------
// AST helpers

std::vector<std::string> Atom::variables() const {
  std::vector<std::string> out;
  for (const auto& t : args) {
    if (t.is_variable() && std::find(out.begin(), out.end(), t.text) == out.end()) out.push_back(t.text);
  }
  return out;
}

bool Atom::has_variable(const std::string& v) const {
  for (const auto& t : args) {
    if (t.is_variable() && t.text == v) return true;
  }
  return false;
}

std::vector<std::string> Rule::positive_variables() const {
  std::vector<std::string> out;
  for (const auto& a : body) {
    if (a.negated) continue;
    for (auto& v : a.variables()) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }
  return out;
}

namespace {

std::string term_text(const Term& t) {
  if (t.is_variable()) return t.text;
  bool numeric = !t.text.empty() && (std::isdigit(static_cast<unsigned char>(t.text[0])) || t.text[0] == '-');
  for (std::size_t i = 1; numeric && i < t.text.size(); ++i) {
    numeric = std::isdigit(static_cast<unsigned char>(t.text[i])) != 0;
  }
  if (numeric && t.text != "-") return t.text;
  std::string out = "\"";
  for (char c : t.text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(const Atom& atom) {
  std::string out = atom.negated ? "!" : "";
  out += atom.relation + "(";
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    if (i) out += ", ";
    out += term_text(atom.args[i]);
  }
  return out + ")";
}

std::string Rule::to_string() const {
  std::string out = flatlog::to_string(head);
  if (body.empty() && inequalities.empty()) return out + ".";
  out += " :- ";
  bool first = true;
  for (const auto& a : body) {
    if (!first) out += ", ";
    out += flatlog::to_string(a);
    first = false;
  }
  for (const auto& q : inequalities) {
    if (!first) out += ", ";
    out += term_text(q.lhs) + " != " + term_text(q.rhs);
    first = false;
  }
  return out + ".";
}

const RelationDecl* Program::find(const std::string& name) const {
  for (const auto& r : relations) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

RelationDecl* Program::find(const std::string& name) {
  for (auto& r : relations) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { Ident, String, Number, Directive, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (c == '.' && pos_ + 1 < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]))) {
      advance();
      t.kind = Tok::Directive;
      t.text = ident();
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Tok::Ident;
      t.text = ident();
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      t.kind = Tok::Number;
      t.text += c;
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        t.text += src_[pos_];
        advance();
      }
      return t;
    }
    if (c == '"') {
      t.kind = Tok::String;
      advance();
      while (true) {
        if (pos_ >= src_.size() || src_[pos_] == '\n') throw ProgramError("unterminated string", t.line, t.column);
        char d = src_[pos_];
        advance();
        if (d == '"') break;
        if (d == '\\' && pos_ < src_.size()) {
          char e = src_[pos_];
          advance();
          t.text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
          continue;
        }
        t.text += d;
      }
      return t;
    }
    t.kind = Tok::Punct;
    for (std::string_view two : {":-", "!=", "->"}) {
      if (src_.substr(pos_, 2) == two) {
        t.text = std::string(two);
        advance();
        advance();
        return t;
      }
    }
    if (std::string_view("(),.:!{}").find(c) == std::string_view::npos) {
      throw ProgramError(std::string("unexpected character '") + c + "'", t.line, t.column);
    }
    t.text = std::string(1, c);
    advance();
    return t;
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (src_.substr(pos_, 2) == "//" || c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (src_.substr(pos_, 2) == "/*") {
        std::size_t l = line_, k = col_;
        advance();
        advance();
        while (pos_ < src_.size() && src_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= src_.size()) throw ProgramError("unterminated comment", l, k);
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  std::string ident() {
    std::string out;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      out += src_[pos_];
      advance();
    }
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { bump(); }

  Program run() {
    while (cur_.kind != Tok::End) {
      if (cur_.kind == Tok::Directive) {
        directive();
      } else {
        rule();
      }
    }
    return std::move(prog_);
  }

 private:
  void bump() {
    cur_ = has_peeked_ ? std::move(peeked_) : lex_.next();
    has_peeked_ = false;
  }
  const Token& peek() {
    if (!has_peeked_) {
      peeked_ = lex_.next();
      has_peeked_ = true;
    }
    return peeked_;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ProgramError(msg, cur_.line, cur_.column); }

  bool is_punct(std::string_view p) const { return cur_.kind == Tok::Punct && cur_.text == p; }

  void expect(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'" + found());
    bump();
  }

  std::string found() const {
    if (cur_.kind == Tok::End) return ", found end of input";
    return ", found '" + cur_.text + "'";
  }

  std::string expect_ident(const char* what) {
    if (cur_.kind != Tok::Ident) fail(std::string("expected ") + what + found());
    std::string s = cur_.text;
    bump();
    return s;
  }

  void directive() {
    std::string name = cur_.text;
    std::size_t line = cur_.line, col = cur_.column;
    bump();
    if (name == "decl") {
      RelationDecl d;
      d.name = expect_ident("relation name");
      if (prog_.find(d.name)) throw ProgramError("relation '" + d.name + "' declared twice", line, col);
      expect("(");
      while (!is_punct(")")) {
        d.attributes.push_back(expect_ident("attribute name"));
        expect(":");
        expect_ident("attribute type");
        if (!is_punct(")")) expect(",");
      }
      bump();
      if (d.attributes.empty()) throw ProgramError("relation '" + d.name + "' must have at least one column", line, col);
      prog_.relations.push_back(std::move(d));
    } else if (name == "input" || name == "output") {
      do {
        if (is_punct(",")) bump();
        std::string rel = expect_ident("relation name");
        RelationDecl* d = prog_.find(rel);
        if (!d) throw ProgramError("." + name + " of undeclared relation '" + rel + "'", line, col);
        (name == "input" ? d->input : d->output) = true;
        if (is_punct("(")) skip_parenthesized();
      } while (is_punct(","));
    } else if (name == "split") {
      SplitDirective s;
      s.line = line;
      s.rule_label = expect_ident("rule label");
      expect("{");
      while (!is_punct("}")) {
        s.atoms.push_back(expect_ident("relation name"));
        if (!is_punct("}")) expect(",");
      }
      bump();
      expect("->");
      s.helper = expect_ident("helper relation name");
      expect("(");
      while (!is_punct(")")) {
        s.helper_variables.push_back(expect_ident("variable"));
        if (!is_punct(")")) expect(",");
      }
      bump();
      prog_.splits.push_back(std::move(s));
    } else {
      throw ProgramError("unknown directive '." + name + "'", line, col);
    }
  }

  void skip_parenthesized() {
    int depth = 0;
    do {
      if (cur_.kind == Tok::End) fail("unbalanced parentheses");
      if (is_punct("(")) ++depth;
      if (is_punct(")")) --depth;
      bump();
    } while (depth > 0);
  }

  Term term() {
    switch (cur_.kind) {
      case Tok::Ident: {
        std::string v = cur_.text;
        bump();
        if (v == "_") return Term::variable("$anon" + std::to_string(anon_++));
        return Term::variable(std::move(v));
      }
      case Tok::String:
      case Tok::Number: {
        std::string c = cur_.text;
        bump();
        return Term::constant(std::move(c));
      }
      default:
        fail("expected a variable or constant" + found());
    }
  }

  Atom atom() {
    Atom a;
    a.line = cur_.line;
    a.column = cur_.column;
    if (is_punct("!")) {
      a.negated = true;
      bump();
    }
    a.relation = expect_ident("relation name");
    expect("(");
    while (!is_punct(")")) {
      a.args.push_back(term());
      if (!is_punct(")")) expect(",");
    }
    bump();
    return a;
  }

  void rule() {
    Rule r;
    r.line = cur_.line;
    if (cur_.kind == Tok::Ident && peek().kind == Tok::Punct && peek().text == ":") {
      r.label = cur_.text;
      bump();
      bump();
    }
    r.head = atom();
    if (r.head.negated) throw ProgramError("rule head cannot be negated", r.head.line, r.head.column);
    if (is_punct(":-")) {
      bump();
      while (true) {
        if (cur_.kind != Tok::Punct && (peek().kind == Tok::Punct && peek().text == "!=")) {
          Inequality q;
          q.lhs = term();
          expect("!=");
          q.rhs = term();
          r.inequalities.push_back(std::move(q));
        } else {
          r.body.push_back(atom());
        }
        if (is_punct(".")) break;
        expect(",");
      }
    }
    expect(".");
    if (!r.label.empty()) {
      for (const auto& other : prog_.rules) {
        if (other.label == r.label) throw ProgramError("duplicate rule label '" + r.label + "'", r.line, 1);
      }
    }
    prog_.rules.push_back(std::move(r));
  }

  Lexer lex_;
  Token cur_;
  Token peeked_;
  bool has_peeked_ = false;
  Program prog_;
  std::size_t anon_ = 0;
};

void check_atom(const Program& p, const Atom& a) {
  const RelationDecl* d = p.find(a.relation);
  if (!d) throw ProgramError("undeclared relation '" + a.relation + "'", a.line, a.column);
  if (d->arity() != a.arity()) {
    throw ProgramError("arity mismatch for '" + a.relation + "': declared " + std::to_string(d->arity()) +
                           ", used with " + std::to_string(a.arity()),
                       a.line, a.column);
  }
}

}  // namespace

void validate(const Program& program) {
  for (const auto& r : program.rules) {
    check_atom(program, r.head);
    for (const auto& a : r.body) check_atom(program, a);
    auto bound = r.positive_variables();
    auto is_bound = [&](const std::string& v) { return std::find(bound.begin(), bound.end(), v) != bound.end(); };
    for (const auto& t : r.head.args) {
      if (!t.is_variable()) continue;
      if (t.text.starts_with("$anon")) {
        throw ProgramError("anonymous variable in rule head", r.head.line, r.head.column);
      }
      if (!is_bound(t.text)) {
        throw ProgramError("head variable '" + t.text + "' is not bound by a positive body atom", r.head.line,
                           r.head.column);
      }
    }
    for (const auto& a : r.body) {
      if (!a.negated) continue;
      for (const auto& t : a.args) {
        // anonymous variables under negation are existential within the probe
        if (t.is_variable() && !t.text.starts_with("$anon") && !is_bound(t.text)) {
          throw ProgramError("unsafe negation: variable '" + t.text + "' of " + to_string(a) +
                                 " does not occur in a positive atom",
                             a.line, a.column);
        }
      }
    }
    for (const auto& q : r.inequalities) {
      for (const Term* t : {&q.lhs, &q.rhs}) {
        if (t->is_variable() && !is_bound(t->text)) {
          throw ProgramError("variable '" + t->text + "' in inequality is not bound by a positive atom", r.line, 1);
        }
      }
    }
    if (r.body.empty() && !r.inequalities.empty()) throw ProgramError("inequality without body atoms", r.line, 1);
  }
}

Program parse(std::string_view source) {
  Program p = Parser(source).run();
  validate(p);
  return p;
}

}  // namespace flatlog
