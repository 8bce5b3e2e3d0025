#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace gsnell {

struct ExprError : std::runtime_error {
    ExprError(const std::string& message, std::size_t position)
        : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

/// Variables available to scenario process definitions.
struct ExprEnv {
    double k = 0.0;  // step index
    double t = 0.0;  // grid time
    double B = 0.0;  // Brownian value at the node
    double S = 0.0;  // exponential price s0 * exp(sigma * B - sigma^2 t / 2)
};

/// Parsed arithmetic expression over {k, t, B, S} with +, -, *, /, unary
/// minus, parentheses, numeric literals and exp/abs/max/min.
class Expression {
public:
    static Expression parse(const std::string& text);

    Expression();
    Expression(Expression&&) noexcept;
    Expression& operator=(Expression&&) noexcept;
    Expression(const Expression&);
    Expression& operator=(const Expression&);
    ~Expression();

    bool empty() const { return root_ == nullptr; }
    double eval(const ExprEnv& env) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::unique_ptr<Node> root_;
    std::string text_;
};

}  // namespace gsnell
