#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hopfield {

class error : public std::runtime_error {
public:
    explicit error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Syntax error with the 0-based offset of the offending token.
class parse_error : public error {
public:
    parse_error(const std::string& what_arg, std::size_t position)
        : error(what_arg + " (at position " + std::to_string(position + 1) + ")"),
          position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Runtime failure while evaluating an expression (division by zero,
/// sqrt of a negative, overflow to a non-finite value).
class eval_error : public error {
    using error::error;
};

enum class builtin_fn : std::uint8_t {
    sin, cos, tan, arctan, tanh, exp, sqrt, abs, floor, sign,  // unary
    min, max, pow                                              // binary
};

namespace detail {

inline constexpr struct {
    const char* name;
    builtin_fn fn;
    int arity;
} builtin_table[] = {
    {"sin", builtin_fn::sin, 1},     {"cos", builtin_fn::cos, 1},
    {"tan", builtin_fn::tan, 1},     {"arctan", builtin_fn::arctan, 1},
    {"tanh", builtin_fn::tanh, 1},   {"exp", builtin_fn::exp, 1},
    {"sqrt", builtin_fn::sqrt, 1},   {"abs", builtin_fn::abs, 1},
    {"floor", builtin_fn::floor, 1}, {"sign", builtin_fn::sign, 1},
    {"min", builtin_fn::min, 2},     {"max", builtin_fn::max, 2},
    {"pow", builtin_fn::pow, 2},
};

inline const char* builtin_name(builtin_fn f) {
    for (const auto& e : builtin_table)
        if (e.fn == f) return e.name;
    return "?";
}

struct expr_node {
    enum class kind : std::uint8_t { constant, variable, negate, binary, call };
    enum class binop : std::uint8_t { add, sub, mul, div, pow };

    kind k = kind::constant;
    binop op = binop::add;
    builtin_fn fn = builtin_fn::sin;
    double value = 0.0;
    std::int32_t lhs = -1;
    std::int32_t rhs = -1;
};

}  // namespace detail

/// Parsed arithmetic expression in one free variable. Immutable after
/// construction; evaluation is deterministic and safe to call concurrently.
class expr {
public:
    expr() : nodes_{detail::expr_node{}}, root_(0), var_("m") {}

    /// Parse `source` with `var_name` as the single free variable.
    /// Grammar: expr := term (("+"|"-") term)*; term := factor (("*"|"/") factor)*;
    /// factor := "-" factor | power; power := atom ("^" factor)?;
    /// atom := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")".
    static expr parse(std::string_view source, std::string_view var_name);

    /// Substitute `value` for the free variable and reduce to a finite real.
    double eval(double value) const;

    /// Serialized form; parsing it back yields an expression that evaluates
    /// bit-identically at every point.
    std::string to_string() const;

    const std::string& variable_name() const noexcept { return var_; }

    /// True when the tree contains no reference to the free variable.
    bool references_variable() const;
    bool is_constant() const { return !references_variable(); }

    // Programmatic construction, used for activation shifting/rescaling.
    static expr constant(double v, std::string var_name = "u");
    static expr variable(std::string var_name);
    static expr negate(expr e);
    static expr binary(detail::expr_node::binop op, expr a, expr b);
    static expr call(builtin_fn f, expr a);
    static expr call(builtin_fn f, expr a, expr b);

    /// Expression with every occurrence of the variable replaced by
    /// scale*var + shift (scale/shift become constant nodes).
    expr substitute_affine(double scale, double shift) const;

private:
    std::vector<detail::expr_node> nodes_;
    std::int32_t root_;
    std::string var_;

    double eval_node(std::int32_t idx, double x) const;
    void print_node(std::int32_t idx, int parent_prec, bool rhs_of_left_assoc,
                    std::string& out) const;
    std::int32_t copy_into(std::vector<detail::expr_node>& dst, std::int32_t idx,
                           std::int32_t var_replacement) const;

    friend class expr_parser;
};

// --- parsing ---------------------------------------------------------------

class expr_parser {
public:
    expr_parser(std::string_view src, std::string_view var) : src_(src), var_(var) {}

    expr run() {
        expr e;
        e.nodes_.clear();
        e.var_ = std::string(var_);
        nodes_ = &e.nodes_;
        skip_ws();
        e.root_ = parse_expr(0);
        skip_ws();
        if (pos_ != src_.size())
            throw parse_error("unexpected trailing input", pos_);
        if (e.nodes_.empty()) throw parse_error("empty expression", 0);
        return e;
    }

private:
    std::string_view src_;
    std::string_view var_;
    std::size_t pos_ = 0;
    std::vector<detail::expr_node>* nodes_ = nullptr;

    static constexpr int max_depth = 200;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool eof() const { return pos_ >= src_.size(); }
    char peek() const { return eof() ? '\0' : src_[pos_]; }
    bool accept(char c) {
        skip_ws();
        if (!eof() && src_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    void expect(char c, const char* what) {
        skip_ws();
        if (eof() || src_[pos_] != c)
            throw parse_error(std::string("expected ") + what, pos_);
        ++pos_;
    }

    std::int32_t add(detail::expr_node n) {
        nodes_->push_back(n);
        return static_cast<std::int32_t>(nodes_->size() - 1);
    }

    std::int32_t parse_expr(int depth) {
        check_depth(depth);
        std::int32_t left = parse_term(depth + 1);
        for (;;) {
            skip_ws();
            if (accept('+')) left = make_bin(detail::expr_node::binop::add, left, parse_term(depth + 1));
            else if (accept('-')) left = make_bin(detail::expr_node::binop::sub, left, parse_term(depth + 1));
            else return left;
        }
    }

    std::int32_t parse_term(int depth) {
        check_depth(depth);
        std::int32_t left = parse_factor(depth + 1);
        for (;;) {
            skip_ws();
            if (accept('*')) left = make_bin(detail::expr_node::binop::mul, left, parse_factor(depth + 1));
            else if (accept('/')) left = make_bin(detail::expr_node::binop::div, left, parse_factor(depth + 1));
            else return left;
        }
    }

    std::int32_t parse_factor(int depth) {
        check_depth(depth);
        skip_ws();
        if (accept('-')) {
            detail::expr_node n;
            n.k = detail::expr_node::kind::negate;
            n.lhs = parse_factor(depth + 1);
            return add(n);
        }
        return parse_power(depth + 1);
    }

    std::int32_t parse_power(int depth) {
        check_depth(depth);
        std::int32_t base = parse_atom(depth + 1);
        skip_ws();
        if (accept('^'))
            return make_bin(detail::expr_node::binop::pow, base, parse_factor(depth + 1));
        return base;
    }

    std::int32_t parse_atom(int depth) {
        check_depth(depth);
        skip_ws();
        if (eof()) throw parse_error("expected number, identifier or '('", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            std::int32_t inner = parse_expr(depth + 1);
            expect(')', "')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident(depth);
        throw parse_error(std::string("unexpected character '") + c + "'", pos_);
    }

    std::int32_t parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            } else {
                pos_ = mark;  // "2e" where e is the constant: not an exponent
            }
        }
        std::string text(src_.substr(start, pos_ - start));
        char* end = nullptr;
        double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size() || !std::isfinite(v))
            throw parse_error("malformed number literal '" + text + "'", start);
        detail::expr_node n;
        n.k = detail::expr_node::kind::constant;
        n.value = v;
        return add(n);
    }

    std::int32_t parse_ident(int depth) {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string_view name = src_.substr(start, pos_ - start);
        skip_ws();
        if (!eof() && src_[pos_] == '(') {
            ++pos_;
            for (const auto& entry : detail::builtin_table) {
                if (name == entry.name) return parse_call(entry.fn, entry.arity, start, depth);
            }
            throw parse_error("unknown function '" + std::string(name) + "'", start);
        }
        if (name == var_) {
            detail::expr_node n;
            n.k = detail::expr_node::kind::variable;
            return add(n);
        }
        if (name == "pi") return add_const(3.14159265358979323846264338327950288);
        if (name == "e") return add_const(2.71828182845904523536028747135266250);
        throw parse_error("unknown identifier '" + std::string(name) + "'", start);
    }

    std::int32_t parse_call(builtin_fn f, int arity, std::size_t name_pos, int depth) {
        std::int32_t a = parse_expr(depth + 1);
        std::int32_t b = -1;
        int given = 1;
        while (accept(',')) {
            std::int32_t arg = parse_expr(depth + 1);
            if (given == 1) b = arg;
            ++given;
        }
        expect(')', "')'");
        if (given != arity)
            throw parse_error("function '" + std::string(detail::builtin_name(f)) + "' takes " +
                                  std::to_string(arity) + " argument(s), got " + std::to_string(given),
                              name_pos);
        detail::expr_node n;
        n.k = detail::expr_node::kind::call;
        n.fn = f;
        n.lhs = a;
        n.rhs = b;
        return add(n);
    }

    std::int32_t add_const(double v) {
        detail::expr_node n;
        n.k = detail::expr_node::kind::constant;
        n.value = v;
        return add(n);
    }

    std::int32_t make_bin(detail::expr_node::binop op, std::int32_t l, std::int32_t r) {
        detail::expr_node n;
        n.k = detail::expr_node::kind::binary;
        n.op = op;
        n.lhs = l;
        n.rhs = r;
        return add(n);
    }

    void check_depth(int depth) const {
        if (depth > max_depth) throw parse_error("expression nested too deeply", pos_);
    }
};

inline expr expr::parse(std::string_view source, std::string_view var_name) {
    return expr_parser(source, var_name).run();
}

// --- evaluation ------------------------------------------------------------

inline double expr::eval_node(std::int32_t idx, double x) const {
    const detail::expr_node& n = nodes_[static_cast<std::size_t>(idx)];
    using K = detail::expr_node::kind;
    switch (n.k) {
        case K::constant: return n.value;
        case K::variable: return x;
        case K::negate: return -eval_node(n.lhs, x);
        case K::binary: {
            double a = eval_node(n.lhs, x);
            double b = eval_node(n.rhs, x);
            double r;
            switch (n.op) {
                case detail::expr_node::binop::add: r = a + b; break;
                case detail::expr_node::binop::sub: r = a - b; break;
                case detail::expr_node::binop::mul: r = a * b; break;
                case detail::expr_node::binop::div:
                    if (b == 0.0) throw eval_error("division by zero");
                    r = a / b;
                    break;
                case detail::expr_node::binop::pow:
                default:
                    r = std::pow(a, b);
                    if (std::isnan(r)) throw eval_error("pow outside real domain");
                    break;
            }
            if (!std::isfinite(r)) throw eval_error("non-finite arithmetic result");
            return r;
        }
        case K::call:
        default: {
            double a = eval_node(n.lhs, x);
            double r;
            switch (n.fn) {
                case builtin_fn::sin: r = std::sin(a); break;
                case builtin_fn::cos: r = std::cos(a); break;
                case builtin_fn::tan: r = std::tan(a); break;
                case builtin_fn::arctan: r = std::atan(a); break;
                case builtin_fn::tanh: r = std::tanh(a); break;
                case builtin_fn::exp: r = std::exp(a); break;
                case builtin_fn::sqrt:
                    if (a < 0.0) throw eval_error("sqrt of negative value");
                    r = std::sqrt(a);
                    break;
                case builtin_fn::abs: r = std::fabs(a); break;
                case builtin_fn::floor: r = std::floor(a); break;
                case builtin_fn::sign: r = static_cast<double>((a > 0.0) - (a < 0.0)); break;
                case builtin_fn::min: r = std::fmin(a, eval_node(n.rhs, x)); break;
                case builtin_fn::max: r = std::fmax(a, eval_node(n.rhs, x)); break;
                case builtin_fn::pow:
                default:
                    r = std::pow(a, eval_node(n.rhs, x));
                    if (std::isnan(r)) throw eval_error("pow outside real domain");
                    break;
            }
            if (!std::isfinite(r))
                throw eval_error(std::string("non-finite result of ") + detail::builtin_name(n.fn));
            return r;
        }
    }
}

inline double expr::eval(double value) const {
    if (!std::isfinite(value)) throw eval_error("evaluation point is not finite");
    return eval_node(root_, value);
}

inline bool expr::references_variable() const {
    for (const auto& n : nodes_)
        if (n.k == detail::expr_node::kind::variable) return true;
    return false;
}

// --- printing --------------------------------------------------------------

namespace detail {
inline int binop_precedence(expr_node::binop op) {
    switch (op) {
        case expr_node::binop::add:
        case expr_node::binop::sub: return 1;
        case expr_node::binop::mul:
        case expr_node::binop::div: return 2;
        case expr_node::binop::pow:
        default: return 4;
    }
}
inline char binop_symbol(expr_node::binop op) {
    switch (op) {
        case expr_node::binop::add: return '+';
        case expr_node::binop::sub: return '-';
        case expr_node::binop::mul: return '*';
        case expr_node::binop::div: return '/';
        case expr_node::binop::pow:
        default: return '^';
    }
}
inline void format_double(double v, std::string& out) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}
}  // namespace detail

inline void expr::print_node(std::int32_t idx, int parent_prec, bool rhs_of_left_assoc,
                             std::string& out) const {
    const detail::expr_node& n = nodes_[static_cast<std::size_t>(idx)];
    using K = detail::expr_node::kind;
    switch (n.k) {
        case K::constant:
            if (n.value < 0.0) {  // avoid "a*-5" style output
                out += '(';
                detail::format_double(n.value, out);
                out += ')';
            } else {
                detail::format_double(n.value, out);
            }
            return;
        case K::variable:
            out += var_;
            return;
        case K::negate: {
            // unary minus sits between mul/div and pow
            bool need = parent_prec > 3 || (parent_prec == 3 && rhs_of_left_assoc) ||
                        (parent_prec == 2 && rhs_of_left_assoc);
            if (need) out += '(';
            out += '-';
            print_node(n.lhs, 3, false, out);
            if (need) out += ')';
            return;
        }
        case K::binary: {
            int prec = detail::binop_precedence(n.op);
            bool need = prec < parent_prec || (prec == parent_prec && rhs_of_left_assoc);
            if (need) out += '(';
            bool pow_op = n.op == detail::expr_node::binop::pow;
            // '^' is right-associative: parenthesize a structurally-left-nested lhs
            print_node(n.lhs, pow_op ? prec + 1 : prec, false, out);
            out += detail::binop_symbol(n.op);
            print_node(n.rhs, prec, !pow_op, out);
            if (need) out += ')';
            return;
        }
        case K::call:
        default:
            out += detail::builtin_name(n.fn);
            out += '(';
            print_node(n.lhs, 0, false, out);
            if (n.rhs >= 0) {
                out += ',';
                print_node(n.rhs, 0, false, out);
            }
            out += ')';
            return;
    }
}

inline std::string expr::to_string() const {
    std::string out;
    print_node(root_, 0, false, out);
    return out;
}

// --- programmatic construction ---------------------------------------------

inline expr expr::constant(double v, std::string var_name) {
    expr e;
    e.var_ = std::move(var_name);
    e.nodes_.clear();
    detail::expr_node n;
    n.k = detail::expr_node::kind::constant;
    n.value = v;
    e.nodes_.push_back(n);
    e.root_ = 0;
    return e;
}

inline expr expr::variable(std::string var_name) {
    expr e;
    e.var_ = std::move(var_name);
    e.nodes_.clear();
    detail::expr_node n;
    n.k = detail::expr_node::kind::variable;
    e.nodes_.push_back(n);
    e.root_ = 0;
    return e;
}

inline std::int32_t expr::copy_into(std::vector<detail::expr_node>& dst, std::int32_t idx,
                                    std::int32_t var_replacement) const {
    const detail::expr_node& n = nodes_[static_cast<std::size_t>(idx)];
    if (n.k == detail::expr_node::kind::variable && var_replacement >= 0)
        return var_replacement;
    detail::expr_node copy = n;
    if (n.lhs >= 0) copy.lhs = copy_into(dst, n.lhs, var_replacement);
    if (n.rhs >= 0) copy.rhs = copy_into(dst, n.rhs, var_replacement);
    dst.push_back(copy);
    return static_cast<std::int32_t>(dst.size() - 1);
}

inline expr expr::negate(expr e) {
    detail::expr_node n;
    n.k = detail::expr_node::kind::negate;
    n.lhs = e.root_;
    e.nodes_.push_back(n);
    e.root_ = static_cast<std::int32_t>(e.nodes_.size() - 1);
    return e;
}

inline expr expr::binary(detail::expr_node::binop op, expr a, expr b) {
    std::int32_t rhs = b.copy_into(a.nodes_, b.root_, -1);
    detail::expr_node n;
    n.k = detail::expr_node::kind::binary;
    n.op = op;
    n.lhs = a.root_;
    n.rhs = rhs;
    a.nodes_.push_back(n);
    a.root_ = static_cast<std::int32_t>(a.nodes_.size() - 1);
    return a;
}

inline expr expr::call(builtin_fn f, expr a) {
    detail::expr_node n;
    n.k = detail::expr_node::kind::call;
    n.fn = f;
    n.lhs = a.root_;
    a.nodes_.push_back(n);
    a.root_ = static_cast<std::int32_t>(a.nodes_.size() - 1);
    return a;
}

inline expr expr::call(builtin_fn f, expr a, expr b) {
    std::int32_t rhs = b.copy_into(a.nodes_, b.root_, -1);
    detail::expr_node n;
    n.k = detail::expr_node::kind::call;
    n.fn = f;
    n.lhs = a.root_;
    n.rhs = rhs;
    a.nodes_.push_back(n);
    a.root_ = static_cast<std::int32_t>(a.nodes_.size() - 1);
    return a;
}

inline expr expr::substitute_affine(double scale, double shift) const {
    expr out;
    out.var_ = var_;
    out.nodes_.clear();

    // build scale*u + shift, dropping identity pieces
    std::int32_t repl;
    {
        detail::expr_node v;
        v.k = detail::expr_node::kind::variable;
        out.nodes_.push_back(v);
        repl = 0;
        if (scale != 1.0) {
            detail::expr_node c;
            c.k = detail::expr_node::kind::constant;
            c.value = scale;
            out.nodes_.push_back(c);
            detail::expr_node mul;
            mul.k = detail::expr_node::kind::binary;
            mul.op = detail::expr_node::binop::mul;
            mul.lhs = 1;
            mul.rhs = 0;
            out.nodes_.push_back(mul);
            repl = 2;
        }
        if (shift != 0.0) {
            detail::expr_node c;
            c.k = detail::expr_node::kind::constant;
            c.value = shift;
            out.nodes_.push_back(c);
            detail::expr_node addn;
            addn.k = detail::expr_node::kind::binary;
            addn.op = detail::expr_node::binop::add;
            addn.lhs = repl;
            addn.rhs = static_cast<std::int32_t>(out.nodes_.size() - 1);
            out.nodes_.push_back(addn);
            repl = static_cast<std::int32_t>(out.nodes_.size() - 1);
        }
    }
    out.root_ = copy_into(out.nodes_, root_, repl);
    return out;
}

// Spec-facing free functions.
inline expr parse(std::string_view source, std::string_view var_name) {
    return expr::parse(source, var_name);
}
inline double eval(const expr& e, double value) { return e.eval(value); }

}  // namespace hopfield
