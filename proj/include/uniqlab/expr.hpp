#pragma once
#include <array>
#include <memory>
#include <string>
#include <vector>

namespace uniqlab {

// Arithmetic expressions over the coordinates, used for coefficient entries,
// analytic volume laws and expression masks.  Grammar: numeric literals,
// + - * / ^, parentheses, pow/exp/log/sqrt/abs/min/max, and the coordinate
// symbols x1..xd (x, y, z accepted as aliases).  Parsed once into a small
// tree; evaluation is allocation-free.
class Expr {
public:
  // throws Error(expr_parse) on bad syntax, Error(dimension_mismatch) if a
  // coordinate beyond dim appears (dim = 0 allows only x1, for radial laws)
  static Expr parse(const std::string& text, int dim);

  double eval(const std::array<double, 3>& x) const;
  double eval1(double r) const;  // convenience for 1-variable laws
  const std::string& text() const { return text_; }
  bool empty() const { return root_ == nullptr; }

  Expr() = default;
  Expr(Expr&&) noexcept = default;
  Expr& operator=(Expr&&) noexcept = default;
  Expr(const Expr& o) { *this = o; }
  Expr& operator=(const Expr& o);

  struct Node;

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

} // namespace uniqlab
