#pragma once

// Surface syntax for process expressions.
//
//   expr    := sum ("." sum)*
//   sum     := product (sumop product)*
//   product := unary (prodop unary)*
//   unary   := number "*" unary | primary
//   primary := identifier | "O" | "(" expr ")"
//
// Sum operators: "(+)" "(^+)" "[+]@rule" "[^+]@rule". Product operators:
// "(x)" "(^x)" "[x]@rule" "[^x]@rule". Chains of one operator become a single
// n-ary node; everything is left associative.

#include <string_view>

#include "informon/algebra.hpp"

namespace informon::algebra {

/// Throws ParseError (with the byte offset) or UnknownRule.
Expr parse_process_expr(std::string_view text);

}  // namespace informon::algebra
