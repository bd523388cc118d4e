#include "amlt/parser.hpp"

#include <cctype>
#include <cstdlib>

#include "amlt/errors.hpp"

namespace amlt {

namespace {

enum class Tok {
    Ident, Number, Where, In, And,
    LParen, RParen, LBracket, RBracket, LBrace, RBrace,
    DotDot, Semicolon, Assign, PlusAssign,
    Plus, Minus, Star, Slash, Gt, Ge, Lt, Le, Eq,
    End
};

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_ws();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                advance();
            t.text = std::string(src_.substr(start, pos_ - start));
            if (t.text == "where") t.kind = Tok::Where;
            else if (t.text == "in") t.kind = Tok::In;
            else if (t.text == "and") t.kind = Tok::And;
            else t.kind = Tok::Ident;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                advance();
            // A '.' only continues the number if a digit follows, so "0..M"
            // lexes as 0, '..', M.
            if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
                std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
                advance();
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    advance();
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                size_t save = pos_;
                advance();
                if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
                if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    while (pos_ < src_.size() &&
                           std::isdigit(static_cast<unsigned char>(src_[pos_])))
                        advance();
                } else {
                    pos_ = save;  // not an exponent after all
                }
            }
            t.kind = Tok::Number;
            t.text = std::string(src_.substr(start, pos_ - start));
            t.number = std::strtod(t.text.c_str(), nullptr);
            return t;
        }
        auto two = [&](char a, char b) {
            return c == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
        };
        if (two('.', '.')) { advance(); advance(); t.kind = Tok::DotDot; return t; }
        if (two('+', '=')) { advance(); advance(); t.kind = Tok::PlusAssign; return t; }
        if (two('>', '=')) { advance(); advance(); t.kind = Tok::Ge; return t; }
        if (two('<', '=')) { advance(); advance(); t.kind = Tok::Le; return t; }
        if (two('=', '=')) { advance(); advance(); t.kind = Tok::Eq; return t; }
        advance();
        switch (c) {
            case '(': t.kind = Tok::LParen; return t;
            case ')': t.kind = Tok::RParen; return t;
            case '[': t.kind = Tok::LBracket; return t;
            case ']': t.kind = Tok::RBracket; return t;
            case '{': t.kind = Tok::LBrace; return t;
            case '}': t.kind = Tok::RBrace; return t;
            case ';': t.kind = Tok::Semicolon; return t;
            case '=': t.kind = Tok::Assign; return t;
            case '+': t.kind = Tok::Plus; return t;
            case '-': t.kind = Tok::Minus; return t;
            case '*': t.kind = Tok::Star; return t;
            case '/': t.kind = Tok::Slash; return t;
            case '>': t.kind = Tok::Gt; return t;
            case '<': t.kind = Tok::Lt; return t;
            default:
                throw ParseError(t.line, t.col, std::string("unexpected character '") + c + "'");
        }
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    Parser(std::string_view src, const std::set<std::string>& externals)
        : lex_(src), externals_(externals) {
        cur_ = lex_.next();
    }

    TaskSpec parse_task() {
        expect(Tok::Where, "expected 'where'");
        expect(Tok::LParen, "expected '(' after 'where'");
        parse_binding();
        while (cur_.kind == Tok::And) {
            bump();
            parse_binding();
        }
        expect(Tok::RParen, "expected ')' or 'and' after range");
        expect(Tok::LBrace, "expected '{'");
        parse_statement();
        expect(Tok::RBrace, "expected '}' after statement");
        expect(Tok::End, "unexpected trailing input");
        validate_indices();
        return std::move(task_);
    }

    TaskSpec parse_statement_only(const std::vector<std::string>& loop_var_names) {
        for (const auto& name : loop_var_names) {
            LoopVar lv;
            lv.name = name;
            task_.loop_vars.push_back(lv);
        }
        parse_statement();
        expect(Tok::End, "unexpected trailing input");
        validate_indices();
        return std::move(task_);
    }

private:
    void bump() { cur_ = lex_.next(); }

    void expect(Tok kind, const char* msg) {
        if (cur_.kind != kind) throw ParseError(cur_.line, cur_.col, msg);
        if (kind != Tok::End) bump();
    }

    void parse_binding() {
        if (cur_.kind != Tok::Ident)
            throw ParseError(cur_.line, cur_.col, "expected loop variable name");
        LoopVar lv;
        lv.name = cur_.text;
        lv.line = cur_.line;
        lv.col = cur_.col;
        for (const auto& prev : task_.loop_vars)
            if (prev.name == lv.name)
                throw ParseError(cur_.line, cur_.col,
                                 "duplicate loop variable '" + lv.name + "'");
        bump();
        expect(Tok::In, "expected 'in'");
        expect(Tok::LBracket, "expected '[' to open range");
        lv.start = parse_expr();
        expect(Tok::DotDot, "expected '..' in range");
        lv.end = parse_expr();
        expect(Tok::RBracket, "expected ']' to close range");
        task_.loop_vars.push_back(lv);
    }

    void parse_statement() {
        Token name = cur_;
        NodeId target = parse_primary();
        const AstNode& tn = task_.ast.at(target);
        if (tn.kind != NodeKind::Ref || tn.indices.empty())
            throw ParseError(name.line, name.col,
                             "statement target must be a subscripted array");
        if (cur_.kind == Tok::PlusAssign) {
            task_.statement.accumulate = true;
        } else if (cur_.kind == Tok::Assign) {
            task_.statement.accumulate = false;
        } else {
            throw ParseError(cur_.line, cur_.col, "expected '+=' or '=' after target");
        }
        bump();
        task_.statement.target = target;
        task_.statement.rhs = parse_expr();
        expect(Tok::Semicolon, "expected ';' after statement");
    }

    NodeId parse_expr() { return parse_cmp(); }

    NodeId parse_cmp() {
        NodeId lhs = parse_add();
        for (;;) {
            BinOp op;
            switch (cur_.kind) {
                case Tok::Gt: op = BinOp::Gt; break;
                case Tok::Ge: op = BinOp::Ge; break;
                case Tok::Lt: op = BinOp::Lt; break;
                case Tok::Le: op = BinOp::Le; break;
                case Tok::Eq: op = BinOp::Eq; break;
                default: return lhs;
            }
            Token at = cur_;
            bump();
            lhs = make_binary(op, lhs, parse_add(), at);
        }
    }

    NodeId parse_add() {
        NodeId lhs = parse_mul();
        for (;;) {
            if (cur_.kind != Tok::Plus && cur_.kind != Tok::Minus) return lhs;
            BinOp op = cur_.kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
            Token at = cur_;
            bump();
            lhs = make_binary(op, lhs, parse_mul(), at);
        }
    }

    NodeId parse_mul() {
        NodeId lhs = parse_primary();
        for (;;) {
            if (cur_.kind != Tok::Star && cur_.kind != Tok::Slash) return lhs;
            BinOp op = cur_.kind == Tok::Star ? BinOp::Mul : BinOp::Div;
            Token at = cur_;
            bump();
            lhs = make_binary(op, lhs, parse_primary(), at);
        }
    }

    NodeId parse_primary() {
        if (cur_.kind == Tok::Number) {
            AstNode n;
            n.kind = NodeKind::Number;
            n.number = cur_.number;
            n.line = cur_.line;
            n.col = cur_.col;
            bump();
            return task_.ast.add(std::move(n));
        }
        if (cur_.kind == Tok::LParen) {
            bump();
            NodeId inner = parse_expr();
            expect(Tok::RParen, "expected ')'");
            return inner;
        }
        if (cur_.kind == Tok::Ident) {
            AstNode n;
            n.kind = NodeKind::Ref;
            n.name = cur_.text;
            n.line = cur_.line;
            n.col = cur_.col;
            bump();
            while (cur_.kind == Tok::LBracket) {
                bump();
                n.indices.push_back(parse_expr());
                expect(Tok::RBracket, "expected ']' after subscript");
            }
            return task_.ast.add(std::move(n));
        }
        throw ParseError(cur_.line, cur_.col, "expected expression");
    }

    NodeId make_binary(BinOp op, NodeId lhs, NodeId rhs, const Token& at) {
        AstNode n;
        n.kind = NodeKind::Binary;
        n.op = op;
        n.lhs = lhs;
        n.rhs = rhs;
        n.line = at.line;
        n.col = at.col;
        return task_.ast.add(std::move(n));
    }

    bool is_loop_var(const std::string& name) const {
        for (const auto& lv : task_.loop_vars)
            if (lv.name == name) return true;
        return false;
    }

    // Every bare identifier inside a subscript of the statement must be a
    // loop variable or an externally supplied name.
    void check_index_expr(NodeId id) {
        const AstNode& n = task_.ast.at(id);
        switch (n.kind) {
            case NodeKind::Number:
                return;
            case NodeKind::Ref:
                if (n.indices.empty()) {
                    if (!is_loop_var(n.name) && externals_.find(n.name) == externals_.end())
                        throw UnboundVariable(n.line, n.col, n.name);
                } else {
                    for (NodeId idx : n.indices) check_index_expr(idx);
                }
                return;
            case NodeKind::Binary:
                check_index_expr(n.lhs);
                check_index_expr(n.rhs);
                return;
        }
    }

    void walk_statement_refs(NodeId id) {
        const AstNode& n = task_.ast.at(id);
        switch (n.kind) {
            case NodeKind::Number:
                return;
            case NodeKind::Ref:
                for (NodeId idx : n.indices) check_index_expr(idx);
                return;
            case NodeKind::Binary:
                walk_statement_refs(n.lhs);
                walk_statement_refs(n.rhs);
                return;
        }
    }

    void validate_indices() {
        walk_statement_refs(task_.statement.target);
        walk_statement_refs(task_.statement.rhs);
    }

    Lexer lex_;
    Token cur_;
    std::set<std::string> externals_;
    TaskSpec task_;
};

}  // namespace

TaskSpec parse_task(std::string_view source, const std::set<std::string>& externals) {
    Parser p(source, externals);
    return p.parse_task();
}

TaskSpec parse_statement_with_vars(std::string_view statement,
                                   const std::vector<std::string>& loop_var_names) {
    Parser p(statement, {});
    return p.parse_statement_only(loop_var_names);
}

}  // namespace amlt
