#include "informon/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <span>
#include <string>

#include "informon/errors.hpp"

namespace informon::algebra {

namespace {

struct Operator {
  Kind kind;
  bool free = false;
  std::string rule;
  std::size_t position = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Expr parse() {
    skip();
    if (pos_ == s_.size()) fail("empty expression");
    Expr e = concat_level();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(pos_ == s_.size() ? msg + " at end of input" : msg, pos_);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool starts_with(std::string_view lit) const { return s_.substr(pos_, lit.size()) == lit; }

  // Operators are recognised by their full bracketed spelling, so "(x)" is
  // always the product operator and never a parenthesised primitive x.
  std::optional<Operator> peek_operator(bool sums) {
    skip();
    struct Spelling {
      std::string_view text;
      Kind kind;
      bool free;
    };
    static constexpr Spelling sum_ops[] = {{"(+)", Kind::SumExcl, false},
                                           {"(^+)", Kind::SumFree, false},
                                           {"[+]", Kind::SumInter, false},
                                           {"[^+]", Kind::SumInter, true}};
    static constexpr Spelling prod_ops[] = {{"(x)", Kind::ProdExcl, false},
                                            {"(^x)", Kind::ProdFree, false},
                                            {"[x]", Kind::ProdInter, false},
                                            {"[^x]", Kind::ProdInter, true}};
    for (const auto& op : sums ? std::span<const Spelling>(sum_ops) : std::span<const Spelling>(prod_ops))
      if (starts_with(op.text)) return Operator{op.kind, op.free, std::string(op.text), pos_};
    return std::nullopt;
  }

  Operator take_operator(Operator op) {
    pos_ += op.rule.size();  // the spelling is parked in `rule` until here
    op.rule.clear();
    if (is_interactive(op.kind)) {
      if (pos_ >= s_.size() || s_[pos_] != '@') fail("interactive operator needs an @rule suffix");
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      if (start == pos_) fail("missing rule name after '@'");
      op.rule = std::string(s_.substr(start, pos_ - start));
      if (!has_rule(op.rule)) throw UnknownRule(op.rule);
    }
    return op;
  }

  Expr build(const Operator& op, std::vector<Expr> children) {
    switch (op.kind) {
      case Kind::SumExcl: return sum_excl(std::move(children));
      case Kind::SumFree: return sum_free(std::move(children));
      case Kind::SumInter: return sum_inter(std::move(children), op.rule, op.free);
      case Kind::ProdExcl: return prod_excl(std::move(children));
      case Kind::ProdFree: return prod_free(std::move(children));
      default: return prod_inter(std::move(children), op.rule, op.free);
    }
  }

  Expr chain(bool sums) {
    Expr left = sums ? chain(false) : unary();
    std::optional<Operator> current;
    std::vector<Expr> operands;
    while (auto peeked = peek_operator(sums)) {
      Operator op = take_operator(*peeked);
      Expr right = sums ? chain(false) : unary();
      if (current && current->kind == op.kind && current->free == op.free && current->rule == op.rule) {
        operands.push_back(right);
      } else {
        if (current) left = build(*current, std::move(operands));
        operands = {left, right};
        current = op;
      }
    }
    return current ? build(*current, std::move(operands)) : left;
  }

  Expr concat_level() {
    Expr left = chain(true);
    while (true) {
      skip();
      if (pos_ >= s_.size() || s_[pos_] != '.') return left;
      ++pos_;
      left = concat(left, chain(true));
    }
  }

  Expr unary() {
    skip();
    if (pos_ == s_.size()) fail("expected an operand");
    const char c = s_[pos_];
    const bool signed_number =
        (c == '-' || c == '+') && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]));
    if (std::isdigit(static_cast<unsigned char>(c)) || signed_number) {
      double w = 0;
      const char* first = s_.data() + pos_ + (c == '+' ? 1 : 0);
      auto [end, ec] = std::from_chars(first, s_.data() + s_.size(), w);
      if (ec != std::errc()) fail("malformed number");
      pos_ = static_cast<std::size_t>(end - s_.data());
      skip();
      if (pos_ >= s_.size() || s_[pos_] != '*') fail("expected '*' after scalar");
      ++pos_;
      return scalar(w, unary());
    }
    if (c == '(') {
      if (peek_operator(true) || peek_operator(false)) fail("expected an operand");
      ++pos_;
      Expr inner = concat_level();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    if (ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      const std::string id(s_.substr(start, pos_ - start));
      return id == "O" ? zero() : primitive(id);
    }
    fail("expected an operand");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_process_expr(std::string_view text) { return Parser(text).parse(); }

}  // namespace informon::algebra
