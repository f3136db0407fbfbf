#include "smartexec/loop_ir.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace smartexec::loop_ir {

ParseError::ParseError(std::string message, SourceLoc loc)
    : std::runtime_error("line " + std::to_string(loc.line) + ", column " +
                         std::to_string(loc.column) + ": " + std::move(message)),
      loc_(loc) {}

namespace {

enum class TokKind {
    KwLoop, KwIf, KwElse, KwCall, KwIassign, KwFassign, KwIvar, KwFvar,
    Ident, Int, Float,
    LBrace, RBrace, LParen, RParen, LBracket, RBracket,
    Assign, Semicolon,
    Plus, Minus, Star, Slash, Lt, Le, Gt, Ge, EqEq, Ne,
    End,
};

struct Token {
    TokKind kind;
    std::string text;
    SourceLoc loc;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_ws_and_comments();
        SourceLoc loc{line_, col_};
        if (pos_ >= text_.size()) return {TokKind::End, "", loc};
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                word += advance();
            }
            static const std::map<std::string, TokKind> keywords = {
                {"loop", TokKind::KwLoop},       {"if", TokKind::KwIf},
                {"else", TokKind::KwElse},       {"call", TokKind::KwCall},
                {"iassign", TokKind::KwIassign}, {"fassign", TokKind::KwFassign},
                {"ivar", TokKind::KwIvar},       {"fvar", TokKind::KwFvar},
            };
            auto it = keywords.find(word);
            if (it != keywords.end()) return {it->second, word, loc};
            return {TokKind::Ident, word, loc};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            bool is_float = false;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                num += advance();
            if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
                std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
                is_float = true;
                num += advance();
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    num += advance();
            }
            return {is_float ? TokKind::Float : TokKind::Int, num, loc};
        }
        switch (c) {
            case '{': advance(); return {TokKind::LBrace, "{", loc};
            case '}': advance(); return {TokKind::RBrace, "}", loc};
            case '(': advance(); return {TokKind::LParen, "(", loc};
            case ')': advance(); return {TokKind::RParen, ")", loc};
            case '[': advance(); return {TokKind::LBracket, "[", loc};
            case ']': advance(); return {TokKind::RBracket, "]", loc};
            case ';': advance(); return {TokKind::Semicolon, ";", loc};
            case '+': advance(); return {TokKind::Plus, "+", loc};
            case '-': advance(); return {TokKind::Minus, "-", loc};
            case '*': advance(); return {TokKind::Star, "*", loc};
            case '/': advance(); return {TokKind::Slash, "/", loc};
            case '<':
                advance();
                if (peek() == '=') { advance(); return {TokKind::Le, "<=", loc}; }
                return {TokKind::Lt, "<", loc};
            case '>':
                advance();
                if (peek() == '=') { advance(); return {TokKind::Ge, ">=", loc}; }
                return {TokKind::Gt, ">", loc};
            case '=':
                advance();
                if (peek() == '=') { advance(); return {TokKind::EqEq, "==", loc}; }
                return {TokKind::Assign, "=", loc};
            case '!':
                advance();
                if (peek() == '=') { advance(); return {TokKind::Ne, "!=", loc}; }
                throw ParseError("stray '!'", loc);
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", loc);
        }
    }

private:
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_ws_and_comments() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) { cur_ = lexer_.next(); }

    LoopAst parse() {
        LoopAst ast;
        expect(TokKind::KwLoop, "expected 'loop'");
        ast.trip_count = parse_outer_trip();
        expect(TokKind::LBrace, "expected '{'");
        ast.body = parse_statements();
        expect(TokKind::RBrace, "expected '}'");
        if (cur_.kind != TokKind::End)
            throw ParseError("trailing input after loop spec", cur_.loc);
        return ast;
    }

private:
    Token take() {
        Token t = cur_;
        cur_ = lexer_.next();
        return t;
    }

    Token expect(TokKind kind, const char* what) {
        if (cur_.kind != kind)
            throw ParseError(std::string(what) + " (got '" + cur_.text + "')", cur_.loc);
        return take();
    }

    TripCount parse_outer_trip() {
        if (cur_.kind == TokKind::Ident && cur_.text == "N") {
            take();
            return {std::nullopt};
        }
        Token t = expect(TokKind::Int, "expected trip count (integer or 'N')");
        std::int64_t n = std::stoll(t.text);
        if (n < 1) throw ParseError("trip count must be >= 1", t.loc);
        return {n};
    }

    std::int64_t parse_inner_trip() {
        if (cur_.kind == TokKind::Ident && cur_.text == "N")
            throw ParseError("inner loop trip count must be a literal", cur_.loc);
        Token t = expect(TokKind::Int, "expected literal trip count for inner loop");
        std::int64_t n = std::stoll(t.text);
        if (n < 1) throw ParseError("trip count must be >= 1", t.loc);
        return n;
    }

    StmtList parse_statements() {
        StmtList stmts;
        while (cur_.kind != TokKind::RBrace && cur_.kind != TokKind::End)
            stmts.push_back(parse_statement());
        return stmts;
    }

    Statement parse_statement() {
        SourceLoc loc = cur_.loc;
        switch (cur_.kind) {
            case TokKind::KwIassign:
            case TokKind::KwFassign: {
                ScalarType t = take().kind == TokKind::KwFassign ? ScalarType::Float
                                                                 : ScalarType::Int;
                Token name = expect(TokKind::Ident, "expected identifier");
                expect(TokKind::Assign, "expected '='");
                ExprPtr rhs = parse_expr();
                expect(TokKind::Semicolon, "expected ';'");
                return {Assign{name.text, t, std::move(rhs)}, loc};
            }
            case TokKind::KwIf: {
                take();
                expect(TokKind::LParen, "expected '('");
                ExprPtr cond = parse_expr();
                expect(TokKind::RParen, "expected ')'");
                expect(TokKind::LBrace, "expected '{'");
                StmtList then_body = parse_statements();
                expect(TokKind::RBrace, "expected '}'");
                StmtList else_body;
                if (cur_.kind == TokKind::KwElse) {
                    take();
                    expect(TokKind::LBrace, "expected '{'");
                    else_body = parse_statements();
                    expect(TokKind::RBrace, "expected '}'");
                }
                return {If{std::move(cond), std::move(then_body), std::move(else_body)}, loc};
            }
            case TokKind::KwCall: {
                take();
                Token name = expect(TokKind::Ident, "expected identifier");
                expect(TokKind::Semicolon, "expected ';'");
                return {Call{name.text}, loc};
            }
            case TokKind::KwLoop: {
                take();
                std::int64_t trip = parse_inner_trip();
                expect(TokKind::LBrace, "expected '{'");
                StmtList body = parse_statements();
                expect(TokKind::RBrace, "expected '}'");
                return {InnerLoop{trip, std::move(body)}, loc};
            }
            case TokKind::KwIvar:
            case TokKind::KwFvar: {
                ScalarType t = take().kind == TokKind::KwFvar ? ScalarType::Float
                                                              : ScalarType::Int;
                Token name = expect(TokKind::Ident, "expected identifier");
                expect(TokKind::Semicolon, "expected ';'");
                return {Decl{name.text, t}, loc};
            }
            default:
                throw ParseError("expected statement (got '" + cur_.text + "')", cur_.loc);
        }
    }

    // expr     := additive (cmp_op additive)*
    // additive := term (('+'|'-') term)*
    // term     := factor (('*'|'/') factor)*
    // factor   := '(' expr ')' | INT | FLOAT | IDENT | IDENT '[' expr ']'
    ExprPtr parse_expr() {
        ExprPtr lhs = parse_additive();
        while (true) {
            BinOpKind op;
            switch (cur_.kind) {
                case TokKind::Lt: op = BinOpKind::Lt; break;
                case TokKind::Le: op = BinOpKind::Le; break;
                case TokKind::Gt: op = BinOpKind::Gt; break;
                case TokKind::Ge: op = BinOpKind::Ge; break;
                case TokKind::EqEq: op = BinOpKind::Eq; break;
                case TokKind::Ne: op = BinOpKind::Ne; break;
                default: return lhs;
            }
            SourceLoc loc = take().loc;
            ExprPtr rhs = parse_additive();
            lhs = make_binop(op, std::move(lhs), std::move(rhs), loc);
        }
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_term();
        while (cur_.kind == TokKind::Plus || cur_.kind == TokKind::Minus) {
            BinOpKind op = cur_.kind == TokKind::Plus ? BinOpKind::Add : BinOpKind::Sub;
            SourceLoc loc = take().loc;
            ExprPtr rhs = parse_term();
            lhs = make_binop(op, std::move(lhs), std::move(rhs), loc);
        }
        return lhs;
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        while (cur_.kind == TokKind::Star || cur_.kind == TokKind::Slash) {
            BinOpKind op = cur_.kind == TokKind::Star ? BinOpKind::Mul : BinOpKind::Div;
            SourceLoc loc = take().loc;
            ExprPtr rhs = parse_factor();
            lhs = make_binop(op, std::move(lhs), std::move(rhs), loc);
        }
        return lhs;
    }

    ExprPtr parse_factor() {
        switch (cur_.kind) {
            case TokKind::LParen: {
                take();
                ExprPtr e = parse_expr();
                expect(TokKind::RParen, "expected ')'");
                return e;
            }
            case TokKind::Int: {
                Token t = take();
                auto e = std::make_unique<Expr>();
                e->node = Literal{std::stod(t.text)};
                e->type = ScalarType::Int;
                e->loc = t.loc;
                return e;
            }
            case TokKind::Float: {
                Token t = take();
                auto e = std::make_unique<Expr>();
                e->node = Literal{std::stod(t.text)};
                e->type = ScalarType::Float;
                e->loc = t.loc;
                return e;
            }
            case TokKind::Ident: {
                Token t = take();
                if (cur_.kind == TokKind::LBracket) {
                    take();
                    ExprPtr idx = parse_expr();
                    expect(TokKind::RBracket, "expected ']'");
                    auto e = std::make_unique<Expr>();
                    e->node = IndexedRef{t.text, std::move(idx)};
                    e->loc = t.loc;
                    return e;
                }
                auto e = std::make_unique<Expr>();
                e->node = VarRef{t.text};
                e->loc = t.loc;
                return e;
            }
            default:
                throw ParseError("expected expression (got '" + cur_.text + "')", cur_.loc);
        }
    }

    static ExprPtr make_binop(BinOpKind op, ExprPtr lhs, ExprPtr rhs, SourceLoc loc) {
        auto e = std::make_unique<Expr>();
        e->node = BinOp{op, std::move(lhs), std::move(rhs)};
        e->loc = loc;
        return e;
    }

    Lexer lexer_;
    Token cur_;
};

// Flow-insensitive name typing over the whole spec: fvar/fassign evidence
// makes a name Float, Float wins over Int on conflicting evidence.  Names
// with no evidence take the type of the context they appear in (Float inside
// an fassign rhs, Int inside an iassign rhs, if conditions and array index
// expressions).
class TypeMap {
public:
    void note(const std::string& name, ScalarType t) {
        auto [it, inserted] = types_.try_emplace(name, t);
        if (!inserted && t == ScalarType::Float) it->second = ScalarType::Float;
    }

    ScalarType lookup(const std::string& name, ScalarType context_default) const {
        auto it = types_.find(name);
        return it == types_.end() ? context_default : it->second;
    }

private:
    std::map<std::string, ScalarType> types_;
};

void collect_types(const StmtList& stmts, TypeMap& map) {
    for (const Statement& s : stmts) {
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    map.note(node.lhs_var, node.decl_type);
                } else if constexpr (std::is_same_v<T, Decl>) {
                    map.note(node.var, node.scalar_type);
                } else if constexpr (std::is_same_v<T, If>) {
                    collect_types(node.then_body, map);
                    collect_types(node.else_body, map);
                } else if constexpr (std::is_same_v<T, InnerLoop>) {
                    collect_types(node.body, map);
                }
            },
            s.node);
    }
}

void resolve_expr_types(Expr& e, const TypeMap& map, ScalarType context) {
    std::visit(
        [&](auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, VarRef>) {
                e.type = map.lookup(node.name, context);
            } else if constexpr (std::is_same_v<T, IndexedRef>) {
                resolve_expr_types(*node.index, map, ScalarType::Int);
                e.type = map.lookup(node.array, context);
            } else if constexpr (std::is_same_v<T, Literal>) {
                // set while parsing
            } else if constexpr (std::is_same_v<T, BinOp>) {
                resolve_expr_types(*node.lhs, map, context);
                resolve_expr_types(*node.rhs, map, context);
                if (is_comparison(node.op)) {
                    e.type = ScalarType::Bool;
                } else {
                    e.type = (node.lhs->type == ScalarType::Float ||
                              node.rhs->type == ScalarType::Float)
                                 ? ScalarType::Float
                                 : ScalarType::Int;
                }
            }
        },
        e.node);
}

void resolve_stmt_types(StmtList& stmts, const TypeMap& map) {
    for (Statement& s : stmts) {
        std::visit(
            [&](auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    resolve_expr_types(*node.rhs, map, node.decl_type);
                } else if constexpr (std::is_same_v<T, If>) {
                    resolve_expr_types(*node.cond, map, ScalarType::Int);
                    resolve_stmt_types(node.then_body, map);
                    resolve_stmt_types(node.else_body, map);
                } else if constexpr (std::is_same_v<T, InnerLoop>) {
                    resolve_stmt_types(node.body, map);
                }
            },
            s.node);
    }
}

// Distinct scalar names in document order; an unevidenced name takes the
// resolved type of its first occurrence.  Array base names are not scalars;
// index variables are.
struct VarCollector {
    const TypeMap* types = nullptr;
    std::map<std::string, ScalarType> seen;

    void note_scalar(const std::string& name, ScalarType context) {
        seen.try_emplace(name, types->lookup(name, context));
    }
};

void collect_vars_expr(const Expr& e, VarCollector& vars, ScalarType context) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, VarRef>) {
                vars.note_scalar(node.name, context);
            } else if constexpr (std::is_same_v<T, IndexedRef>) {
                collect_vars_expr(*node.index, vars, ScalarType::Int);
            } else if constexpr (std::is_same_v<T, BinOp>) {
                collect_vars_expr(*node.lhs, vars, context);
                collect_vars_expr(*node.rhs, vars, context);
            }
        },
        e.node);
}

void collect_vars(const StmtList& stmts, VarCollector& vars) {
    for (const Statement& s : stmts) {
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    vars.note_scalar(node.lhs_var, node.decl_type);
                    collect_vars_expr(*node.rhs, vars, node.decl_type);
                } else if constexpr (std::is_same_v<T, Decl>) {
                    vars.note_scalar(node.var, node.scalar_type);
                } else if constexpr (std::is_same_v<T, If>) {
                    collect_vars_expr(*node.cond, vars, ScalarType::Int);
                    collect_vars(node.then_body, vars);
                    collect_vars(node.else_body, vars);
                } else if constexpr (std::is_same_v<T, InnerLoop>) {
                    collect_vars(node.body, vars);
                } else if constexpr (std::is_same_v<T, Call>) {
                    // callee names are not variables
                }
            },
            s.node);
    }
}

class FeatureCounter {
public:
    StaticFeatures run(const LoopAst& ast) {
        walk(ast.body, 1, 0);
        return features_;
    }

private:
    void walk_expr(const Expr& e, std::uint64_t mult) {
        if (const auto* bin = std::get_if<BinOp>(&e.node)) {
            features_.total_ops += mult;
            if (is_comparison(bin->op)) features_.comparison_ops += mult;
            if (bin->lhs->type == ScalarType::Float || bin->rhs->type == ScalarType::Float)
                features_.float_ops += mult;
            walk_expr(*bin->lhs, mult);
            walk_expr(*bin->rhs, mult);
        } else if (const auto* idx = std::get_if<IndexedRef>(&e.node)) {
            walk_expr(*idx->index, mult);
        }
    }

    void walk(const StmtList& stmts, std::uint64_t mult, std::uint64_t depth) {
        for (const Statement& s : stmts) {
            std::visit(
                [&](const auto& node) {
                    using T = std::decay_t<decltype(node)>;
                    if constexpr (std::is_same_v<T, Assign>) {
                        features_.total_ops += mult;
                        if (node.rhs->type == ScalarType::Float) features_.float_ops += mult;
                        walk_expr(*node.rhs, mult);
                    } else if constexpr (std::is_same_v<T, If>) {
                        features_.num_if += 1;
                        if (depth > 0) features_.num_if_inner += 1;
                        walk_expr(*node.cond, mult);
                        walk(node.then_body, mult, depth);
                        walk(node.else_body, mult, depth);
                    } else if constexpr (std::is_same_v<T, Call>) {
                        features_.num_calls += 1;
                        if (depth > 0) features_.num_calls_inner += 1;
                    } else if constexpr (std::is_same_v<T, InnerLoop>) {
                        features_.deepest_loop_level =
                            std::max(features_.deepest_loop_level, depth + 1);
                        walk(node.body, mult * static_cast<std::uint64_t>(node.trip_count),
                             depth + 1);
                    }
                },
                s.node);
        }
    }

    StaticFeatures features_;
};

}  // namespace

LoopAst parse_loop_spec(const std::string& text) {
    Parser parser(text);
    LoopAst ast = parser.parse();
    TypeMap types;
    collect_types(ast.body, types);
    resolve_stmt_types(ast.body, types);
    return ast;
}

StaticFeatures analyze_statement(const LoopAst& ast) {
    FeatureCounter counter;
    StaticFeatures f = counter.run(ast);

    TypeMap types;
    collect_types(ast.body, types);
    VarCollector vars;
    vars.types = &types;
    collect_vars(ast.body, vars);
    for (const auto& [name, type] : vars.seen) {
        if (type == ScalarType::Float)
            f.num_float_vars += 1;
        else
            f.num_int_vars += 1;
    }
    return f;
}

FeatureVector make_feature_vector(const StaticFeatures& s, const DynamicFeatures& d) {
    return {1.0,
            static_cast<double>(d.num_threads),
            static_cast<double>(d.num_iterations),
            static_cast<double>(s.total_ops),
            static_cast<double>(s.float_ops),
            static_cast<double>(s.comparison_ops),
            static_cast<double>(s.deepest_loop_level)};
}

std::vector<double> make_full_feature_row(const StaticFeatures& s, const DynamicFeatures& d) {
    return {static_cast<double>(d.num_threads),
            static_cast<double>(d.num_iterations),
            static_cast<double>(s.total_ops),
            static_cast<double>(s.float_ops),
            static_cast<double>(s.comparison_ops),
            static_cast<double>(s.deepest_loop_level),
            static_cast<double>(s.num_int_vars),
            static_cast<double>(s.num_float_vars),
            static_cast<double>(s.num_if),
            static_cast<double>(s.num_if_inner),
            static_cast<double>(s.num_calls),
            static_cast<double>(s.num_calls_inner)};
}

}  // namespace smartexec::loop_ir
