#include "uniqlab/expr.hpp"
#include "uniqlab/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

namespace uniqlab {

struct Expr::Node {
  enum Kind { num, coord, add, sub, mul, div, neg, pow_, exp_, log_, sqrt_, abs_, min_, max_ } kind;
  double value = 0;  // num
  int axis = 0;      // coord
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Expr::Node n) { return std::make_shared<const Expr::Node>(std::move(n)); }

struct Parser {
  const std::string& s;
  size_t pos = 0;
  int dim;

  [[noreturn]] void err(const std::string& what) const {
    fail(ErrorCode::expr_parse,
         "expression error at offset " + std::to_string(pos) + " in \"" + s + "\": " + what);
  }

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) { ++pos; return true; }
    return false;
  }
  char peek() {
    skip();
    return pos < s.size() ? s[pos] : '\0';
  }

  NodePtr expr() {
    NodePtr t = term();
    for (;;) {
      if (eat('+')) t = make({Expr::Node::add, 0, 0, t, term()});
      else if (eat('-')) t = make({Expr::Node::sub, 0, 0, t, term()});
      else return t;
    }
  }
  NodePtr term() {
    NodePtr t = factor();
    for (;;) {
      if (eat('*')) t = make({Expr::Node::mul, 0, 0, t, factor()});
      else if (eat('/')) t = make({Expr::Node::div, 0, 0, t, factor()});
      else return t;
    }
  }
  // '^' binds tighter than unary minus and is right-associative: -x^2 = -(x^2)
  NodePtr factor() {
    if (eat('-')) return make({Expr::Node::neg, 0, 0, factor(), nullptr});
    NodePtr base = primary();
    if (eat('^')) return make({Expr::Node::pow_, 0, 0, base, factor()});
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos >= s.size()) err("unexpected end of input");
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      double v = std::strtod(s.c_str() + pos, &end);
      if (end == s.c_str() + pos) err("bad number");
      pos = static_cast<size_t>(end - s.c_str());
      return make({Expr::Node::num, v, 0, nullptr, nullptr});
    }
    if (c == '(') {
      ++pos;
      NodePtr inner = expr();
      if (!eat(')')) err("missing ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    err(std::string("unexpected character '") + c + "'");
  }

  NodePtr identifier() {
    size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    std::string name = s.substr(start, pos - start);

    // coordinates
    auto coordinate = [&](int axis) -> NodePtr {
      if (dim > 0 && axis >= dim) {
        pos = start;
        fail(ErrorCode::dimension_mismatch,
             "coordinate \"" + name + "\" not available in dimension " + std::to_string(dim) +
                 " (expression \"" + s + "\")");
      }
      return make({Expr::Node::coord, 0, axis, nullptr, nullptr});
    };
    if (name == "x" || name == "x1") return coordinate(0);
    if (name == "y" || name == "x2") return coordinate(1);
    if (name == "z" || name == "x3") return coordinate(2);
    if (name == "r" && dim == 0) return coordinate(0);  // radial laws use r

    static const std::map<std::string, std::pair<Expr::Node::Kind, int>> fns = {
        {"pow", {Expr::Node::pow_, 2}},  {"exp", {Expr::Node::exp_, 1}},
        {"log", {Expr::Node::log_, 1}},  {"sqrt", {Expr::Node::sqrt_, 1}},
        {"abs", {Expr::Node::abs_, 1}},  {"min", {Expr::Node::min_, 2}},
        {"max", {Expr::Node::max_, 2}},
    };
    auto it = fns.find(name);
    if (it == fns.end()) err("unknown symbol \"" + name + "\"");
    if (!eat('(')) err("expected '(' after " + name);
    NodePtr a = expr();
    NodePtr b = nullptr;
    if (it->second.second == 2) {
      if (!eat(',')) err("expected ',' in " + name + "()");
      b = expr();
    }
    if (!eat(')')) err("missing ')' after " + name + "()");
    return make({it->second.first, 0, 0, a, b});
  }
};

double eval_node(const Expr::Node* n, const std::array<double, 3>& x) {
  using K = Expr::Node::Kind;
  switch (n->kind) {
    case K::num:   return n->value;
    case K::coord: return x[static_cast<size_t>(n->axis)];
    case K::add:   return eval_node(n->a.get(), x) + eval_node(n->b.get(), x);
    case K::sub:   return eval_node(n->a.get(), x) - eval_node(n->b.get(), x);
    case K::mul:   return eval_node(n->a.get(), x) * eval_node(n->b.get(), x);
    case K::div:   return eval_node(n->a.get(), x) / eval_node(n->b.get(), x);
    case K::neg:   return -eval_node(n->a.get(), x);
    case K::pow_:  return std::pow(eval_node(n->a.get(), x), eval_node(n->b.get(), x));
    case K::exp_:  return std::exp(eval_node(n->a.get(), x));
    case K::log_:  return std::log(eval_node(n->a.get(), x));
    case K::sqrt_: return std::sqrt(eval_node(n->a.get(), x));
    case K::abs_:  return std::fabs(eval_node(n->a.get(), x));
    case K::min_:  return std::fmin(eval_node(n->a.get(), x), eval_node(n->b.get(), x));
    case K::max_:  return std::fmax(eval_node(n->a.get(), x), eval_node(n->b.get(), x));
  }
  return 0;  // unreachable
}

} // namespace

Expr Expr::parse(const std::string& text, int dim) {
  Parser p{text, 0, dim};
  Expr e;
  e.root_ = p.expr();
  p.skip();
  if (p.pos != text.size()) p.err("trailing input");
  e.text_ = text;
  return e;
}

Expr& Expr::operator=(const Expr& o) {
  root_ = o.root_;  // nodes are immutable, sharing is safe
  text_ = o.text_;
  return *this;
}

double Expr::eval(const std::array<double, 3>& x) const { return eval_node(root_.get(), x); }
double Expr::eval1(double r) const { return eval_node(root_.get(), {r, 0, 0}); }

} // namespace uniqlab
