#include "gsnell/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

namespace gsnell {

struct Expression::Node {
    enum class Op {
        number,
        var_k,
        var_t,
        var_b,
        var_s,
        add,
        sub,
        mul,
        div,
        neg,
        fn_exp,
        fn_abs,
        fn_max,
        fn_min,
    };
    Op op = Op::number;
    double value = 0.0;
    std::unique_ptr<Node> lhs;
    std::unique_ptr<Node> rhs;

    static std::unique_ptr<Node> clone(const Node* node) {
        if (!node) return nullptr;
        auto out = std::make_unique<Node>();
        out->op = node->op;
        out->value = node->value;
        out->lhs = clone(node->lhs.get());
        out->rhs = clone(node->rhs.get());
        return out;
    }
};

namespace {

using Node = Expression::Node;
using Op = Node::Op;

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    std::unique_ptr<Node> run() {
        auto node = parse_sum();
        skip_spaces();
        if (pos_ != text_.size()) throw ExprError("unexpected trailing input", pos_);
        return node;
    }

private:
    void skip_spaces() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        skip_spaces();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> lhs = nullptr,
                               std::unique_ptr<Node> rhs = nullptr) {
        auto node = std::make_unique<Node>();
        node->op = op;
        node->lhs = std::move(lhs);
        node->rhs = std::move(rhs);
        return node;
    }

    std::unique_ptr<Node> parse_sum() {
        auto node = parse_product();
        while (true) {
            if (consume('+'))
                node = make(Op::add, std::move(node), parse_product());
            else if (consume('-'))
                node = make(Op::sub, std::move(node), parse_product());
            else
                return node;
        }
    }

    std::unique_ptr<Node> parse_product() {
        auto node = parse_unary();
        while (true) {
            if (consume('*'))
                node = make(Op::mul, std::move(node), parse_unary());
            else if (consume('/'))
                node = make(Op::div, std::move(node), parse_unary());
            else
                return node;
        }
    }

    std::unique_ptr<Node> parse_unary() {
        if (consume('-')) return make(Op::neg, parse_unary());
        return parse_primary();
    }

    std::unique_ptr<Node> parse_primary() {
        skip_spaces();
        if (pos_ >= text_.size()) throw ExprError("unexpected end of expression", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto node = parse_sum();
            if (!consume(')')) throw ExprError("missing ')'", pos_);
            return node;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        throw ExprError(std::string("unexpected character '") + c + "'", pos_);
    }

    std::unique_ptr<Node> parse_number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double value = std::strtod(begin, &end);
        if (end == begin) throw ExprError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        auto node = make(Op::number);
        node->value = value;
        return node;
    }

    std::unique_ptr<Node> parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               std::isalnum(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "k") return make(Op::var_k);
        if (name == "t") return make(Op::var_t);
        if (name == "B") return make(Op::var_b);
        if (name == "S") return make(Op::var_s);

        Op op;
        int arity;
        if (name == "exp") {
            op = Op::fn_exp;
            arity = 1;
        } else if (name == "abs") {
            op = Op::fn_abs;
            arity = 1;
        } else if (name == "max") {
            op = Op::fn_max;
            arity = 2;
        } else if (name == "min") {
            op = Op::fn_min;
            arity = 2;
        } else {
            throw ExprError("unknown identifier '" + name + "'", start);
        }
        if (!consume('(')) throw ExprError("expected '(' after '" + name + "'", pos_);
        auto first = parse_sum();
        std::unique_ptr<Node> second;
        if (arity == 2) {
            if (!consume(',')) throw ExprError("expected ',' in '" + name + "(...)'", pos_);
            second = parse_sum();
        }
        if (!consume(')')) throw ExprError("missing ')'", pos_);
        return make(op, std::move(first), std::move(second));
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

double eval_node(const Node* node, const ExprEnv& env) {
    switch (node->op) {
        case Op::number: return node->value;
        case Op::var_k: return env.k;
        case Op::var_t: return env.t;
        case Op::var_b: return env.B;
        case Op::var_s: return env.S;
        case Op::add: return eval_node(node->lhs.get(), env) + eval_node(node->rhs.get(), env);
        case Op::sub: return eval_node(node->lhs.get(), env) - eval_node(node->rhs.get(), env);
        case Op::mul: return eval_node(node->lhs.get(), env) * eval_node(node->rhs.get(), env);
        case Op::div: return eval_node(node->lhs.get(), env) / eval_node(node->rhs.get(), env);
        case Op::neg: return -eval_node(node->lhs.get(), env);
        case Op::fn_exp: return std::exp(eval_node(node->lhs.get(), env));
        case Op::fn_abs: return std::abs(eval_node(node->lhs.get(), env));
        case Op::fn_max:
            return std::max(eval_node(node->lhs.get(), env), eval_node(node->rhs.get(), env));
        case Op::fn_min:
            return std::min(eval_node(node->lhs.get(), env), eval_node(node->rhs.get(), env));
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
    Expression expr;
    expr.root_ = Parser(text).run();
    expr.text_ = text;
    return expr;
}

Expression::Expression() = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;
Expression::~Expression() = default;

Expression::Expression(const Expression& other)
    : root_(Node::clone(other.root_.get())), text_(other.text_) {}

Expression& Expression::operator=(const Expression& other) {
    root_ = Node::clone(other.root_.get());
    text_ = other.text_;
    return *this;
}

double Expression::eval(const ExprEnv& env) const {
    if (!root_) throw std::logic_error("Expression: eval on an empty expression");
    return eval_node(root_.get(), env);
}

}  // namespace gsnell
