#pragma once

// Recursive-descent parser for `.sleec` documents: declarations, rules with
// defeaters and fallbacks, capability relations, concerns and purposes.

#include "sleec/model.hpp"
#include "sleec/text.hpp"

#include <cctype>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sleec {

class ParseError : public std::runtime_error {
public:
  enum class Kind { syntax, undeclared, semantic };

  ParseError(Kind kind, const std::string& msg, std::size_t line, std::size_t column, SourceSpan span,
             std::set<std::string> expected = {})
      : std::runtime_error(format(msg, line, column, expected)),
        kind_(kind),
        line_(line),
        column_(column),
        span_(span),
        expected_(std::move(expected)) {}

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  SourceSpan span() const { return span_; }
  const std::set<std::string>& expected() const { return expected_; }

private:
  static std::string format(const std::string& msg, std::size_t line, std::size_t col,
                            const std::set<std::string>& expected) {
    std::string s = std::to_string(line) + ":" + std::to_string(col) + ": " + msg;
    if (!expected.empty()) {
      s += " (expected ";
      bool first = true;
      for (const auto& e : expected) {
        if (!first) s += ", ";
        s += e;
        first = false;
      }
      s += ")";
    }
    return s;
  }

  Kind kind_;
  std::size_t line_;
  std::size_t column_;
  SourceSpan span_;
  std::set<std::string> expected_;
};

/// What a defeater without an alternative response does to its branch.
enum class Preemption {
  no_obligation,   // the branch imposes nothing
  negated_response // the branch imposes the negated main response
};

struct SurfaceDefeater {
  Proposition condition;
  std::optional<ObligationChain> response;
  SourceSpan span;
};

struct SurfaceRule {
  std::string id;
  std::string trigger_event;
  Proposition trigger_cond = Proposition::truth();
  ObligationChain response;
  std::vector<SurfaceDefeater> defeaters;
  SourceSpan span;
};

struct SurfaceDocument {
  Signature signature;
  Preemption preemption = Preemption::no_obligation;
  std::vector<SurfaceRule> rules;
  std::vector<Relation> relations;
  std::vector<Fact> facts;
};

namespace detail {

struct Token {
  enum class Kind { ident, number, symbol, end };
  Kind kind = Kind::end;
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.begin = i;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Token::Kind::ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Token::Kind::number;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '>' && i + 1 < src.size() && src[i + 1] == '=') {
      t.kind = Token::Kind::symbol;
      t.text = ">=";
      advance(2);
    } else if (std::string_view("=()+-*!:,").find(c) != std::string_view::npos) {
      t.kind = Token::Kind::symbol;
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw ParseError(ParseError::Kind::syntax, std::string("unexpected character '") + c + "'", line, col,
                       {i, i + 1});
    }
    t.end = i;
    out.push_back(std::move(t));
  }
  Token eof;
  eof.begin = eof.end = src.size();
  eof.line = line;
  eof.column = col;
  out.push_back(eof);
  return out;
}

class Parser {
public:
  explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

  SurfaceDocument document() {
    while (!at_end()) {
      const Token& t = peek();
      if (is("def_start")) {
        next();
        declarations();
      } else if (is("rule_start")) {
        next();
        while (!is("rule_end")) {
          if (at_end()) fail({"rule_end"});
          doc_.rules.push_back(rule());
        }
        next();
      } else if (is("relation_start")) {
        next();
        while (!is("relation_end")) {
          if (at_end()) fail({"relation_end"});
          doc_.relations.push_back(relation());
        }
        next();
      } else if (is("concern_start") || is("purpose_start")) {
        const bool concern = is("concern_start");
        next();
        const std::string close = concern ? "concern_end" : "purpose_end";
        while (!is(close)) {
          if (at_end()) fail({close});
          doc_.facts.push_back(fact(concern ? FactRole::concern : FactRole::purpose));
        }
        next();
      } else {
        (void)t;
        fail({"concern_start", "def_start", "purpose_start", "relation_start", "rule_start"});
      }
    }
    return std::move(doc_);
  }

  // Standalone entry points used by the relation and verdict readers.
  void set_signature(const Signature& sig) { doc_.signature = sig; }
  Proposition standalone_proposition() {
    Proposition p = proposition();
    expect_end();
    return p;
  }
  Relation standalone_relation() {
    Relation r = relation();
    expect_end();
    return r;
  }

private:
  // ---- token helpers ----
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
  bool at_end() const { return peek().kind == Token::Kind::end; }
  bool is(std::string_view text, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind != Token::Kind::end && t.text == text;
  }
  std::size_t last_end() const { return pos_ == 0 ? 0 : tokens_[pos_ - 1].end; }

  [[noreturn]] void fail(std::set<std::string> expected, const std::string& what = {}) const {
    const Token& t = peek();
    std::string msg = what.empty() ? (t.kind == Token::Kind::end ? "unexpected end of input"
                                                                   : "unexpected token '" + t.text + "'")
                                   : what;
    throw ParseError(ParseError::Kind::syntax, msg, t.line, t.column, {t.begin, t.end}, std::move(expected));
  }
  [[noreturn]] void fail_at(const Token& t, ParseError::Kind kind, const std::string& msg) const {
    throw ParseError(kind, msg, t.line, t.column, {t.begin, t.end});
  }
  void expect(std::string_view text) {
    if (!is(text)) fail({std::string(text)});
    next();
  }
  void expect_end() {
    if (!at_end()) fail({"end of input"});
  }
  const Token& ident(const std::string& what) {
    if (peek().kind != Token::Kind::ident) fail({what});
    return next();
  }

  const Signature& sig() const { return doc_.signature; }

  std::string event_ref() {
    const Token& t = peek();
    if (t.kind != Token::Kind::ident || is_keyword(t.text)) fail({"event"});
    if (!sig().has_event(t.text)) {
      if (sig().has_measure(t.text)) fail({"event"}, "'" + t.text + "' is a measure, not an event");
      fail_at(t, ParseError::Kind::undeclared, "undeclared event '" + t.text + "'");
    }
    return next().text;
  }

  // ---- declarations ----
  void declarations() {
    while (!is("def_end")) {
      if (at_end()) fail({"def_end"});
      if (is("event")) {
        next();
        const Token& t = ident("event name");
        if (!std::isupper(static_cast<unsigned char>(t.text[0])))
          fail_at(t, ParseError::Kind::syntax, "event names start with an uppercase letter: '" + t.text + "'");
        declare(t, [&] { doc_.signature.add_event(t.text); });
      } else if (is("measure")) {
        next();
        const Token& t = ident("measure name");
        if (!std::islower(static_cast<unsigned char>(t.text[0])))
          fail_at(t, ParseError::Kind::syntax, "measure names start with a lowercase letter: '" + t.text + "'");
        MeasureSort sort = MeasureSort::boolean;
        if (is(":")) {
          next();
          if (is("boolean") || is("bool")) {
            sort = MeasureSort::boolean;
          } else if (is("numeric")) {
            sort = MeasureSort::numeric;
          } else {
            fail({"boolean", "numeric"});
          }
          next();
        }
        declare(t, [&] { doc_.signature.add_measure(t.text, sort); });
      } else if (is("constant")) {
        next();
        const Token& t = ident("constant name");
        expect("=");
        if (peek().kind != Token::Kind::number) fail({"number"});
        const Value v = std::stoll(next().text);
        if (sig().has_event(t.text) || sig().has_measure(t.text) || sig().constants.count(t.text))
          fail_at(t, ParseError::Kind::semantic, "symbol '" + t.text + "' already declared");
        doc_.signature.constants[t.text] = v;
      } else if (is("option")) {
        next();
        expect("preemption");
        expect("=");
        if (is("none")) {
          doc_.preemption = Preemption::no_obligation;
        } else if (is("negate")) {
          doc_.preemption = Preemption::negated_response;
        } else {
          fail({"negate", "none"});
        }
        next();
      } else {
        fail({"constant", "def_end", "event", "measure", "option"});
      }
    }
    next();
  }

  template <class F>
  void declare(const Token& t, F add) {
    try {
      add();
    } catch (const EvalError& e) {
      fail_at(t, ParseError::Kind::semantic, e.what());
    }
  }

  // ---- terms ----
  Term term() {
    Term t = product();
    while (is("+")) {
      next();
      t = Term::sum(std::move(t), product());
    }
    return t;
  }

  Term product() {
    if (is("-")) {
      next();
      return Term::negate(product());
    }
    const Token& t = peek();
    if (t.kind == Token::Kind::number || (t.kind == Token::Kind::ident && sig().constants.count(t.text))) {
      const Value v = t.kind == Token::Kind::number ? std::stoll(t.text) : sig().constants.at(t.text);
      next();
      if (is("*")) {
        next();
        return Term::scale(v, product());
      }
      return Term::constant(v);
    }
    if (t.kind == Token::Kind::ident) {
      if (sig().has_measure(t.text)) return Term::measure_ref(next().text);
      if (sig().has_event(t.text)) fail({"term"}, "event '" + t.text + "' used where a term is expected");
      if (is_keyword(t.text)) fail({"term"});
      fail_at(t, ParseError::Kind::undeclared, "undeclared measure or constant '" + t.text + "'");
    }
    if (is("(")) {
      next();
      Term inner = term();
      expect(")");
      return inner;
    }
    fail({"term"});
  }

  static bool is_keyword(std::string_view w) {
    static const std::set<std::string, std::less<>> kws = {
        "when", "then", "within", "unless", "otherwise", "not", "and", "or", "exists", "while", "if", "true",
        "false", "until", "for", "hypernym", "isContradictoryWith", "happensBefore", "equal", "imply",
        "mutuallyExclusive", "oppositeTo", "forbids", "induces"};
    return kws.count(w) != 0;
  }

  // ---- propositions ----
  Proposition proposition() {
    std::vector<Proposition> parts{conjunction()};
    while (is("or")) {
      next();
      parts.push_back(conjunction());
    }
    return parts.size() == 1 ? std::move(parts.front()) : Proposition::disjunction(std::move(parts));
  }

  Proposition conjunction() {
    std::vector<Proposition> parts{negation()};
    while (is("and")) {
      next();
      parts.push_back(negation());
    }
    return parts.size() == 1 ? std::move(parts.front()) : Proposition::conjunction(std::move(parts));
  }

  Proposition negation() {
    if (is("not")) {
      next();
      return Proposition::negation(negation());
    }
    return atom();
  }

  Proposition atom() {
    if (is("true")) {
      next();
      return Proposition::truth();
    }
    if (is("false")) {
      next();
      return Proposition::falsity();
    }
    if (is("(")) {
      // Either a parenthesised proposition or a term starting a comparison.
      const std::size_t save = pos_;
      try {
        Term lhs = term();
        if (is("=") || is(">=")) return comparison(std::move(lhs));
      } catch (const ParseError&) {
      }
      pos_ = save;
      next();
      Proposition p = proposition();
      expect(")");
      return p;
    }
    const Token& start = peek();
    Term lhs = term();
    if (is("=") || is(">=")) return comparison(std::move(lhs));
    if (lhs.kind == Term::Kind::measure) {
      if (sig().is_boolean(lhs.measure)) return Proposition::holds(lhs.measure);
      fail_at(start, ParseError::Kind::semantic,
              "non-boolean condition: numeric measure '" + lhs.measure + "' needs a comparison");
    }
    fail({"=", ">="});
  }

  Proposition comparison(Term lhs) {
    const bool eq = is("=");
    next();
    Term rhs = term();
    return eq ? Proposition::equal(std::move(lhs), std::move(rhs))
              : Proposition::greater_equal(std::move(lhs), std::move(rhs));
  }

  // ---- obligations ----
  Term duration() {
    Term amount = term();
    const Token& u = peek();
    const Seconds factor = u.kind == Token::Kind::ident ? unit_factor(u.text) : 0;
    if (factor == 0) fail({"days", "hours", "minutes", "seconds"});
    next();
    if (factor == 1) return amount;
    if (amount.is_constant()) return Term::constant(amount.value * factor);
    return Term::scale(factor, std::move(amount));
  }

  Obligation obligation() {
    Obligation ob;
    if (is("not")) {
      next();
      ob.polarity = Polarity::negative;
    }
    ob.event = event_ref();
    if (is("within")) {
      next();
      ob.deadline = duration();
    }
    return ob;
  }

  CondObligation cond_obligation() {
    CondObligation c;
    if (is("if")) {
      next();
      c.guard = proposition();
      expect("then");
    }
    c.obligation = obligation();
    return c;
  }

  ObligationChain chain() {
    const Token& start = peek();
    ObligationChain oc;
    oc.items.push_back(cond_obligation());
    while (is("otherwise")) {
      next();
      oc.items.push_back(cond_obligation());
    }
    if (!oc.well_formed())
      fail_at(start, ParseError::Kind::semantic, "only the last obligation of a chain may be negative");
    return oc;
  }

  // ---- rules ----
  std::string optional_id(std::string_view keyword) {
    if (peek().kind == Token::Kind::ident && !is(keyword) && is(keyword, 1)) return next().text;
    return {};
  }

  SurfaceRule rule() {
    SurfaceRule r;
    const std::size_t begin = peek().begin;
    r.id = optional_id("when");
    if (r.id.empty()) r.id = "R" + std::to_string(doc_.rules.size() + 1);
    expect("when");
    r.trigger_event = event_ref();
    if (is("and")) {
      next();
      r.trigger_cond = proposition();
    }
    expect("then");
    r.response = chain();
    while (is("unless")) {
      SurfaceDefeater d;
      d.span.begin = next().begin;
      d.condition = proposition();
      if (is("then")) {
        next();
        d.response = chain();
      }
      d.span.end = last_end();
      r.defeaters.push_back(std::move(d));
    }
    r.span = {begin, last_end()};
    return r;
  }

  // ---- relations ----
  Relation relation() {
    const std::size_t begin = peek().begin;
    Relation r;
    r.provenance = Provenance::stakeholder;
    if (is("!")) {
      next();
      r.sign = Sign::negative;
    }
    if (is("when")) {
      next();
      r.event_a = event_ref();
      expect("then");
      r.prop_a = proposition();
      if (is("until")) {
        next();
        r.kind = RelationKind::when_then_until;
        r.event_b = event_ref();
      } else if (is("for")) {
        next();
        r.kind = RelationKind::when_then_for;
        r.duration = duration();
      } else {
        fail({"for", "until"});
      }
    } else if (peek().kind == Token::Kind::ident && sig().has_event(peek().text)) {
      r.event_a = next().text;
      if (is("induces")) {
        next();
        r.kind = RelationKind::induces;
        r.prop_a = proposition();
      } else {
        if (is("hypernym")) {
          r.kind = RelationKind::hypernym;
        } else if (is("isContradictoryWith")) {
          r.kind = RelationKind::contradictory;
        } else if (is("happensBefore")) {
          r.kind = RelationKind::happens_before;
        } else if (is("equal")) {
          r.kind = RelationKind::event_equal;
        } else {
          fail({"equal", "happensBefore", "hypernym", "induces", "isContradictoryWith"});
        }
        next();
        r.event_b = event_ref();
      }
    } else {
      r.prop_a = proposition();
      if (is("forbids")) {
        next();
        r.kind = RelationKind::forbids;
        r.event_a = event_ref();
      } else {
        if (is("imply")) {
          r.kind = RelationKind::imply;
        } else if (is("mutuallyExclusive")) {
          r.kind = RelationKind::mutually_exclusive;
        } else if (is("oppositeTo")) {
          r.kind = RelationKind::opposite;
        } else if (is("equal")) {
          r.kind = RelationKind::measure_equal;
        } else {
          fail({"equal", "forbids", "imply", "mutuallyExclusive", "oppositeTo"});
        }
        next();
        r.prop_b = proposition();
      }
    }
    r.span = SourceSpan{begin, last_end()};
    return r;
  }

  // ---- facts ----
  bool chain_ahead(std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    if (t.kind != Token::Kind::ident) return false;
    if (t.text == "if") return true;
    if (t.text == "not") return peek(ahead + 1).kind == Token::Kind::ident && sig().has_event(peek(ahead + 1).text);
    return sig().has_event(t.text);
  }

  Fact fact(FactRole role) {
    Fact f;
    f.role = role;
    const std::size_t begin = peek().begin;
    f.id = optional_id("exists");
    if (f.id.empty()) {
      std::size_t n = 1;
      for (const auto& g : doc_.facts) n += g.role == role ? 1 : 0;
      f.id = (role == FactRole::concern ? "C" : "P") + std::to_string(n);
    }
    expect("exists");
    f.trigger_event = event_ref();
    if (is("and")) {
      next();
      f.trigger_cond = proposition();
    }
    if (is("while")) {
      next();
      if (is("not") && is("(", 1) && chain_ahead(2)) {
        next();
        next();
        f.chain = chain();
        f.mode = FactMode::negated;
        expect(")");
      } else if (chain_ahead()) {
        f.chain = chain();
      } else {
        f.trigger_cond = Proposition::conjunction({f.trigger_cond, proposition()});
      }
    }
    f.span = SourceSpan{begin, last_end()};
    return f;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  SurfaceDocument doc_;
};

}  // namespace detail

/// Parses a `.sleec` document. Throws ParseError on syntax errors and undeclared symbols.
inline SurfaceDocument parse(std::string_view text) {
  detail::Parser p(text);
  return p.document();
}

/// Parses a single proposition over the given signature.
inline Proposition parse_proposition(std::string_view text, const Signature& sig) {
  detail::Parser p(text);
  p.set_signature(sig);
  return p.standalone_proposition();
}

/// Parses one relation line in keyword syntax (`A hypernym B`, `! p imply q`, ...).
inline Relation parse_relation(std::string_view text, const Signature& sig) {
  detail::Parser p(text);
  p.set_signature(sig);
  return p.standalone_relation();
}

}  // namespace sleec
