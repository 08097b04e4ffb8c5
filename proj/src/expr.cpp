#include "qbsde/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace qbsde {

namespace {

double euclidean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* unary_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Abs: return "abs";
        case UnaryOp::Sgn: return "sgn";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Ln: return "ln";
        case UnaryOp::Sqrt: return "sqrt";
    }
    return "?";
}

int binary_prec(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
        default: return 5; // Min/Max print as calls
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double Expr::eval_node(int id, const EvalEnv& env) const {
    const Node& nd = nodes_[static_cast<std::size_t>(id)];
    switch (nd.kind) {
        case Kind::Literal:
        case Kind::Param: return nd.value;
        case Kind::VarT: return env.t;
        case Kind::VarX: return env.x;
        case Kind::VarY: return env.y[static_cast<std::size_t>(nd.i - 1)];
        case Kind::VarB: return env.b[static_cast<std::size_t>(nd.j - 1)];
        case Kind::VarZ:
            return env.z[static_cast<std::size_t>((nd.i - 1) * ctx_.d + (nd.j - 1))];
        case Kind::NormY: return euclidean(env.y);
        case Kind::NormZ: return euclidean(env.z);
        case Kind::NormZRow:
            return euclidean(env.z.subspan(static_cast<std::size_t>((nd.i - 1) * ctx_.d),
                                           static_cast<std::size_t>(ctx_.d)));
        case Kind::Unary: {
            const double v = eval_node(nd.a, env);
            switch (nd.uop) {
                case UnaryOp::Neg: return -v;
                case UnaryOp::Abs: return std::fabs(v);
                case UnaryOp::Sgn: return v > 0.0 ? 1.0 : -1.0;
                case UnaryOp::Sin: return std::sin(v);
                case UnaryOp::Cos: return std::cos(v);
                case UnaryOp::Exp: return std::exp(v);
                case UnaryOp::Ln:
                    if (v <= 0.0) throw ExprEvalError("ln of non-positive value", pretty(id));
                    return std::log(v);
                case UnaryOp::Sqrt:
                    if (v < 0.0) throw ExprEvalError("sqrt of negative value", pretty(id));
                    return std::sqrt(v);
            }
            return 0.0;
        }
        case Kind::Binary: {
            const double l = eval_node(nd.a, env);
            const double r = eval_node(nd.b, env);
            switch (nd.bop) {
                case BinaryOp::Add: return l + r;
                case BinaryOp::Sub: return l - r;
                case BinaryOp::Mul: return l * r;
                case BinaryOp::Div:
                    if (r == 0.0) throw ExprEvalError("division by zero", pretty(id));
                    return l / r;
                case BinaryOp::Pow: {
                    if (l == 0.0 && r < 0.0)
                        throw ExprEvalError("zero raised to a negative power", pretty(id));
                    if (l < 0.0 && r != std::floor(r))
                        throw ExprEvalError("negative base with non-integer exponent",
                                            pretty(id));
                    return std::pow(l, r);
                }
                case BinaryOp::Min: return std::fmin(l, r);
                case BinaryOp::Max: return std::fmax(l, r);
            }
            return 0.0;
        }
    }
    return 0.0;
}

double Expr::evaluate(const EvalEnv& env) const { return eval_node(root_, env); }

// ---------------------------------------------------------------------------
// Printing. Binary +,-,*,/ print as left-associative chains; parentheses are
// emitted exactly where reparsing would otherwise change the tree.
// ---------------------------------------------------------------------------

std::string Expr::pretty(int id) const {
    const Node& nd = nodes_[static_cast<std::size_t>(id)];
    auto prec_of = [&](int child) -> int {
        const Node& c = nodes_[static_cast<std::size_t>(child)];
        if (c.kind == Kind::Binary) return binary_prec(c.bop);
        if (c.kind == Kind::Unary && c.uop == UnaryOp::Neg) return 3;
        return 5;
    };
    switch (nd.kind) {
        case Kind::Literal: return format_double(nd.value);
        case Kind::Param: return nd.name;
        case Kind::VarT: return "t";
        case Kind::VarX: return "x";
        case Kind::VarY: return "y" + std::to_string(nd.i);
        case Kind::VarB: return "b" + std::to_string(nd.j);
        case Kind::VarZ:
            return "z[" + std::to_string(nd.i) + "][" + std::to_string(nd.j) + "]";
        case Kind::NormY: return "norm(y)";
        case Kind::NormZ: return "norm(z)";
        case Kind::NormZRow: return "norm(zrow(" + std::to_string(nd.i) + "))";
        case Kind::Unary: {
            if (nd.uop == UnaryOp::Neg) {
                const bool parens = prec_of(nd.a) < 3;
                return parens ? "-(" + pretty(nd.a) + ")" : "-" + pretty(nd.a);
            }
            return std::string(unary_name(nd.uop)) + "(" + pretty(nd.a) + ")";
        }
        case Kind::Binary: {
            if (nd.bop == BinaryOp::Min || nd.bop == BinaryOp::Max) {
                const char* fn = nd.bop == BinaryOp::Min ? "min" : "max";
                return std::string(fn) + "(" + pretty(nd.a) + ", " + pretty(nd.b) + ")";
            }
            const int p = binary_prec(nd.bop);
            std::string lhs = pretty(nd.a);
            std::string rhs = pretty(nd.b);
            bool lp, rp;
            if (nd.bop == BinaryOp::Pow) {
                lp = prec_of(nd.a) <= p; // (a^b)^c and (-a)^b keep parens
                rp = prec_of(nd.b) < p;  // right-associative chain prints bare
            } else {
                lp = prec_of(nd.a) < p;
                rp = prec_of(nd.b) <= p;
            }
            const char* op = nd.bop == BinaryOp::Add   ? " + "
                             : nd.bop == BinaryOp::Sub ? " - "
                             : nd.bop == BinaryOp::Mul ? "*"
                             : nd.bop == BinaryOp::Div ? "/"
                                                       : "^";
            if (lp) lhs = "(" + lhs + ")";
            if (rp) rhs = "(" + rhs + ")";
            return lhs + op + rhs;
        }
    }
    return "?";
}

bool Expr::structurally_equal(const Expr& a, const Expr& b) {
    struct Cmp {
        const Expr& ea;
        const Expr& eb;
        bool eq(int ia, int ib) const {
            const Node& na = ea.nodes_[static_cast<std::size_t>(ia)];
            const Node& nb = eb.nodes_[static_cast<std::size_t>(ib)];
            if (na.kind != nb.kind) return false;
            switch (na.kind) {
                case Kind::Literal: return na.value == nb.value;
                case Kind::Param: return na.name == nb.name && na.value == nb.value;
                case Kind::VarT:
                case Kind::VarX:
                case Kind::NormY:
                case Kind::NormZ: return true;
                case Kind::VarY:
                case Kind::NormZRow: return na.i == nb.i;
                case Kind::VarB: return na.j == nb.j;
                case Kind::VarZ: return na.i == nb.i && na.j == nb.j;
                case Kind::Unary: return na.uop == nb.uop && eq(na.a, nb.a);
                case Kind::Binary:
                    return na.bop == nb.bop && eq(na.a, nb.a) && eq(na.b, nb.b);
            }
            return false;
        }
    };
    return Cmp{a, b}.eq(a.root_, b.root_);
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over a small token stream.
// ---------------------------------------------------------------------------

class ExprParser {
public:
    ExprParser(const std::string& src, const ExprContext& ctx) : src_(src), ctx_(ctx) {}

    Expr parse() {
        if (src_.find_first_not_of(" \t\r\n") == std::string::npos)
            throw ExprParseError("empty expression", 0);
        Expr e;
        e.ctx_ = ctx_;
        e.source_ = src_;
        nodes_ = &e.nodes_;
        e.root_ = parse_additive();
        skip_ws();
        if (pos_ < src_.size())
            throw ExprParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    int add_node(Expr::Node nd) {
        nodes_->push_back(std::move(nd));
        return static_cast<int>(nodes_->size()) - 1;
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        if (!consume(c)) throw ExprParseError(std::string("expected ") + what, pos_);
    }

    int parse_additive() {
        int lhs = parse_multiplicative();
        for (;;) {
            const char c = peek();
            if (c != '+' && c != '-') return lhs;
            const std::uint32_t at = static_cast<std::uint32_t>(pos_);
            ++pos_;
            const int rhs = parse_multiplicative();
            Expr::Node nd;
            nd.kind = Expr::Kind::Binary;
            nd.bop = c == '+' ? BinaryOp::Add : BinaryOp::Sub;
            nd.a = lhs;
            nd.b = rhs;
            nd.pos = at;
            lhs = add_node(std::move(nd));
        }
    }

    int parse_multiplicative() {
        int lhs = parse_unary();
        for (;;) {
            const char c = peek();
            if (c != '*' && c != '/') return lhs;
            const std::uint32_t at = static_cast<std::uint32_t>(pos_);
            ++pos_;
            const int rhs = parse_unary();
            Expr::Node nd;
            nd.kind = Expr::Kind::Binary;
            nd.bop = c == '*' ? BinaryOp::Mul : BinaryOp::Div;
            nd.a = lhs;
            nd.b = rhs;
            nd.pos = at;
            lhs = add_node(std::move(nd));
        }
    }

    int parse_unary() {
        if (peek() == '-') {
            const std::uint32_t at = static_cast<std::uint32_t>(pos_);
            ++pos_;
            Expr::Node nd;
            nd.kind = Expr::Kind::Unary;
            nd.uop = UnaryOp::Neg;
            nd.a = parse_unary();
            nd.pos = at;
            return add_node(std::move(nd));
        }
        return parse_power();
    }

    int parse_power() {
        const int base = parse_primary();
        if (peek() != '^') return base;
        const std::uint32_t at = static_cast<std::uint32_t>(pos_);
        ++pos_;
        const int expo = parse_unary(); // right-associative; exponent may be signed
        Expr::Node nd;
        nd.kind = Expr::Kind::Binary;
        nd.bop = BinaryOp::Pow;
        nd.a = base;
        nd.b = expo;
        nd.pos = at;
        return add_node(std::move(nd));
    }

    int parse_primary() {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            const int inner = parse_additive();
            expect(')', "')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ExprParseError("expected a number, variable, function call or '('", pos_);
    }

    int parse_number() {
        skip_ws();
        const std::size_t start = pos_;
        double value = 0.0;
        const char* first = src_.data() + pos_;
        const char* last = src_.data() + src_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr == first)
            throw ExprParseError("malformed number", start);
        pos_ = static_cast<std::size_t>(ptr - src_.data());
        Expr::Node nd;
        nd.kind = Expr::Kind::Literal;
        nd.value = value;
        nd.pos = static_cast<std::uint32_t>(start);
        return add_node(std::move(nd));
    }

    std::string read_ident() {
        skip_ws();
        std::size_t end = pos_;
        while (end < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
            ++end;
        std::string id = src_.substr(pos_, end - pos_);
        pos_ = end;
        return id;
    }

    long parse_index(const char* what) {
        skip_ws();
        const std::size_t start = pos_;
        long value = 0;
        const char* first = src_.data() + pos_;
        const char* last = src_.data() + src_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr == first)
            throw ExprParseError(std::string("expected integer index for ") + what, start);
        pos_ = static_cast<std::size_t>(ptr - src_.data());
        return value;
    }

    int parse_norm(std::uint32_t at) {
        expect('(', "'(' after norm");
        skip_ws();
        const std::size_t arg_at = pos_;
        const std::string arg = read_ident();
        Expr::Node nd;
        nd.pos = at;
        if (arg == "y") {
            require(ctx_.allow_y, "norm(y)", arg_at);
            nd.kind = Expr::Kind::NormY;
        } else if (arg == "z") {
            require(ctx_.allow_z, "norm(z)", arg_at);
            nd.kind = Expr::Kind::NormZ;
        } else if (arg == "zrow") {
            require(ctx_.allow_z, "norm(zrow(i))", arg_at);
            expect('(', "'(' after zrow");
            const long i = parse_index("zrow");
            expect(')', "')'");
            if (i < 1 || i > ctx_.n)
                throw ExprParseError("zrow index out of range 1.." + std::to_string(ctx_.n),
                                     arg_at);
            nd.kind = Expr::Kind::NormZRow;
            nd.i = static_cast<int>(i);
        } else {
            throw ExprParseError("norm expects y, z or zrow(i)", arg_at);
        }
        expect(')', "')'");
        return add_node(std::move(nd));
    }

    void require(bool ok, const std::string& what, std::size_t at) {
        if (!ok)
            throw ExprParseError(what + " is not available in this context", at);
    }

    int parse_call(UnaryOp op, std::uint32_t at) {
        expect('(', "'('");
        const int arg = parse_additive();
        expect(')', "')' (exactly one argument expected)");
        Expr::Node nd;
        nd.kind = Expr::Kind::Unary;
        nd.uop = op;
        nd.a = arg;
        nd.pos = at;
        return add_node(std::move(nd));
    }

    int parse_call2(BinaryOp op, std::uint32_t at) {
        expect('(', "'('");
        const int lhs = parse_additive();
        expect(',', "',' (exactly two arguments expected)");
        const int rhs = parse_additive();
        expect(')', "')'");
        Expr::Node nd;
        nd.kind = Expr::Kind::Binary;
        nd.bop = op;
        nd.a = lhs;
        nd.b = rhs;
        nd.pos = at;
        return add_node(std::move(nd));
    }

    int parse_identifier() {
        skip_ws();
        const std::size_t start = pos_;
        const std::string id = read_ident();
        const auto at = static_cast<std::uint32_t>(start);

        if (peek() == '(') {
            if (id == "norm") return parse_norm(at);
            if (id == "abs") return parse_call(UnaryOp::Abs, at);
            if (id == "sgn") return parse_call(UnaryOp::Sgn, at);
            if (id == "sin") return parse_call(UnaryOp::Sin, at);
            if (id == "cos") return parse_call(UnaryOp::Cos, at);
            if (id == "exp") return parse_call(UnaryOp::Exp, at);
            if (id == "ln") return parse_call(UnaryOp::Ln, at);
            if (id == "sqrt") return parse_call(UnaryOp::Sqrt, at);
            if (id == "min") return parse_call2(BinaryOp::Min, at);
            if (id == "max") return parse_call2(BinaryOp::Max, at);
            if (id == "pow") return parse_call2(BinaryOp::Pow, at);
            throw ExprParseError("unknown function `" + id + "`", start);
        }

        Expr::Node nd;
        nd.pos = at;
        if (id == "t") {
            require(ctx_.allow_t, "t", start);
            nd.kind = Expr::Kind::VarT;
            return add_node(std::move(nd));
        }
        if (id == "x") {
            require(ctx_.allow_x, "x", start);
            nd.kind = Expr::Kind::VarX;
            return add_node(std::move(nd));
        }
        if (id == "z") {
            require(ctx_.allow_z, "z[i][j]", start);
            expect('[', "'[' after z");
            const long i = parse_index("z row");
            expect(']', "']'");
            expect('[', "'['");
            const long j = parse_index("z column");
            expect(']', "']'");
            if (i < 1 || i > ctx_.n || j < 1 || j > ctx_.d)
                throw ExprParseError("z index out of range for " + std::to_string(ctx_.n) +
                                         "x" + std::to_string(ctx_.d) + " matrix",
                                     start);
            nd.kind = Expr::Kind::VarZ;
            nd.i = static_cast<int>(i);
            nd.j = static_cast<int>(j);
            return add_node(std::move(nd));
        }
        if (id.size() >= 2 && (id[0] == 'y' || id[0] == 'b') &&
            std::isdigit(static_cast<unsigned char>(id[1]))) {
            long k = 0;
            auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), k);
            if (ec == std::errc() && ptr == id.data() + id.size()) {
                if (id[0] == 'y') {
                    require(ctx_.allow_y, id, start);
                    if (k < 1 || k > ctx_.n)
                        throw ExprParseError("y index out of range 1.." +
                                                 std::to_string(ctx_.n),
                                             start);
                    nd.kind = Expr::Kind::VarY;
                    nd.i = static_cast<int>(k);
                    return add_node(std::move(nd));
                }
                require(ctx_.allow_b, id, start);
                if (k < 1 || k > ctx_.d)
                    throw ExprParseError("b index out of range 1.." + std::to_string(ctx_.d),
                                         start);
                nd.kind = Expr::Kind::VarB;
                nd.j = static_cast<int>(k);
                return add_node(std::move(nd));
            }
        }
        if (auto it = ctx_.params.find(id); it != ctx_.params.end()) {
            nd.kind = Expr::Kind::Param;
            nd.name = id;
            nd.value = it->second;
            return add_node(std::move(nd));
        }
        throw ExprParseError("unknown identifier `" + id + "`", start);
    }

    const std::string& src_;
    const ExprContext& ctx_;
    std::vector<Expr::Node>* nodes_ = nullptr;
    std::size_t pos_ = 0;
};

Expr parse_expr(const std::string& source, const ExprContext& ctx) {
    return ExprParser(source, ctx).parse();
}

} // namespace qbsde
