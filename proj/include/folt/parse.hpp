#ifndef FOLT_PARSE_HPP
#define FOLT_PARSE_HPP

// Concrete syntax for sentences (.fol files) and the matching serializer.
//
// Grammar:
//   formula := impl
//   impl    := quantifree ( ("->" | "<->") impl )?      (sugar, right-assoc)
//   quantifree := quant | disj
//   quant   := ("forall" | "exists") VAR+ "." formula
//   disj    := conj ("|" conj)*
//   conj    := unary ("&" unary)*
//   unary   := "~" unary | "(" formula ")" | atom
//   atom    := LPRED ( "(" term ("," term)* ")" )? | term "=" term
//   term    := VAR | LSYM ( "(" term ("," term)* ")" )?
//   VAR     := uppercase-initial identifier
//   LPRED/LSYM := lowercase-initial identifier
// "%" starts a comment running to end of line.

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "folt/ast.hpp"

namespace folt {

struct SyntaxError : FoltError {
    int line, col;
    SyntaxError(int ln, int cl, const std::string& expected)
        : FoltError("syntax error at " + std::to_string(ln) + ":" + std::to_string(cl) +
                    ": expected " + expected),
          line(ln), col(cl) {}
};

namespace detail {

struct Token {
    enum Kind { Ident, UIdent, LParen, RParen, Comma, Dot, Tilde, Amp, Bar,
                Arrow, Iff, Eq, Forall, Exists, End } kind;
    std::string text;
    int line, col;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }
    const Token& peek() const { return tok_; }
    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws();
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::End;
            tok_.text = "<end>";
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                id.push_back(src_[pos_]);
                take();
            }
            if (id == "forall") tok_.kind = Token::Forall;
            else if (id == "exists") tok_.kind = Token::Exists;
            else if (std::isupper(static_cast<unsigned char>(id[0]))) tok_.kind = Token::UIdent;
            else tok_.kind = Token::Ident;
            tok_.text = id;
            return;
        }
        switch (c) {
            case '(': take(); tok_.kind = Token::LParen; tok_.text = "("; return;
            case ')': take(); tok_.kind = Token::RParen; tok_.text = ")"; return;
            case ',': take(); tok_.kind = Token::Comma; tok_.text = ","; return;
            case '.': take(); tok_.kind = Token::Dot; tok_.text = "."; return;
            case '~': take(); tok_.kind = Token::Tilde; tok_.text = "~"; return;
            case '&': take(); tok_.kind = Token::Amp; tok_.text = "&"; return;
            case '|': take(); tok_.kind = Token::Bar; tok_.text = "|"; return;
            case '=': take(); tok_.kind = Token::Eq; tok_.text = "="; return;
            case '-':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
                    take(); take();
                    tok_.kind = Token::Arrow; tok_.text = "->";
                    return;
                }
                break;
            case '<':
                if (pos_ + 2 < src_.size() && src_[pos_ + 1] == '-' && src_[pos_ + 2] == '>') {
                    take(); take(); take();
                    tok_.kind = Token::Iff; tok_.text = "<->";
                    return;
                }
                break;
            default:
                break;
        }
        throw SyntaxError(line_, col_, "a token (got '" + std::string(1, c) + "')");
    }
    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') take();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                take();
            } else {
                break;
            }
        }
    }
    void take() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    FormulaPtr parse_sentence() {
        FormulaPtr f = parse_formula();
        expect(Token::End, "end of input");
        signature_of(*f);  // arity consistency check
        return f;
    }

private:
    FormulaPtr parse_formula() { return parse_impl(); }

    FormulaPtr parse_impl() {
        FormulaPtr lhs = parse_quantifree();
        if (lex_.peek().kind == Token::Arrow) {
            lex_.next();
            FormulaPtr rhs = parse_impl();
            return Formula::disj({Formula::negate(lhs), rhs});
        }
        if (lex_.peek().kind == Token::Iff) {
            lex_.next();
            FormulaPtr rhs = parse_impl();
            return Formula::conj({Formula::disj({Formula::negate(lhs), rhs}),
                                  Formula::disj({Formula::negate(rhs), lhs})});
        }
        return lhs;
    }

    FormulaPtr parse_quantifree() {
        if (lex_.peek().kind == Token::Forall || lex_.peek().kind == Token::Exists) {
            bool is_forall = lex_.next().kind == Token::Forall;
            std::vector<std::string> vs;
            while (lex_.peek().kind == Token::UIdent) vs.push_back(lex_.next().text);
            if (vs.empty())
                throw SyntaxError(lex_.peek().line, lex_.peek().col, "a variable");
            expect(Token::Dot, "'.'");
            FormulaPtr body = parse_formula();
            return Formula::quant(is_forall ? FormulaKind::Forall : FormulaKind::Exists,
                                  std::move(vs), std::move(body));
        }
        return parse_disj();
    }

    FormulaPtr parse_disj() {
        std::vector<FormulaPtr> ds{parse_conj()};
        while (lex_.peek().kind == Token::Bar) {
            lex_.next();
            ds.push_back(parse_conj());
        }
        return ds.size() == 1 ? ds[0] : Formula::disj(std::move(ds));
    }

    FormulaPtr parse_conj() {
        std::vector<FormulaPtr> cs{parse_unary()};
        while (lex_.peek().kind == Token::Amp) {
            lex_.next();
            cs.push_back(parse_unary());
        }
        return cs.size() == 1 ? cs[0] : Formula::conj(std::move(cs));
    }

    FormulaPtr parse_unary() {
        const Token& t = lex_.peek();
        switch (t.kind) {
            case Token::Tilde:
                lex_.next();
                return Formula::negate(parse_unary());
            case Token::LParen: {
                lex_.next();
                FormulaPtr f = parse_formula();
                expect(Token::RParen, "')'");
                return f;
            }
            case Token::UIdent: {
                // must be the left side of an equality
                Term l = parse_term();
                expect(Token::Eq, "'='");
                Term r = parse_term();
                return Formula::equality(std::move(l), std::move(r));
            }
            case Token::Ident: {
                Token id = lex_.next();
                std::vector<Term> args;
                if (lex_.peek().kind == Token::LParen) {
                    lex_.next();
                    args.push_back(parse_term());
                    while (lex_.peek().kind == Token::Comma) {
                        lex_.next();
                        args.push_back(parse_term());
                    }
                    expect(Token::RParen, "')'");
                }
                if (lex_.peek().kind == Token::Eq) {
                    // it was a term after all: constant or application
                    lex_.next();
                    Term l = args.empty() ? Term::cst(id.text) : Term::app(id.text, std::move(args));
                    Term r = parse_term();
                    return Formula::equality(std::move(l), std::move(r));
                }
                return Formula::atom(id.text, std::move(args));
            }
            default:
                throw SyntaxError(t.line, t.col, "a formula");
        }
    }

    Term parse_term() {
        const Token& t = lex_.peek();
        if (t.kind == Token::UIdent) return Term::var(lex_.next().text);
        if (t.kind == Token::Ident) {
            Token id = lex_.next();
            if (lex_.peek().kind == Token::LParen) {
                lex_.next();
                std::vector<Term> args{parse_term()};
                while (lex_.peek().kind == Token::Comma) {
                    lex_.next();
                    args.push_back(parse_term());
                }
                expect(Token::RParen, "')'");
                return Term::app(id.text, std::move(args));
            }
            return Term::cst(id.text);
        }
        throw SyntaxError(t.line, t.col, "a term");
    }

    void expect(Token::Kind k, const std::string& what) {
        const Token& t = lex_.peek();
        if (t.kind != k) throw SyntaxError(t.line, t.col, what);
        lex_.next();
    }

    Lexer lex_;
};

}  // namespace detail

inline FormulaPtr parse(const std::string& text) {
    return detail::Parser(text).parse_sentence();
}

// ---------------------------------------------------------------------------
// Serialization: stable, fully parenthesized for n-ary connectives.

inline void serialize_term(const Term& t, std::ostream& os) {
    os << t.name;
    if (t.kind == TermKind::App) {
        os << "(";
        for (std::size_t i = 0; i < t.args.size(); ++i) {
            if (i) os << ",";
            serialize_term(t.args[i], os);
        }
        os << ")";
    }
}

inline std::string serialize_term(const Term& t) {
    std::ostringstream os;
    serialize_term(t, os);
    return os.str();
}

inline void serialize(const Formula& f, std::ostream& os) {
    switch (f.kind) {
        case FormulaKind::Atom:
            os << f.pred;
            if (!f.args.empty()) {
                os << "(";
                for (std::size_t i = 0; i < f.args.size(); ++i) {
                    if (i) os << ",";
                    serialize_term(f.args[i], os);
                }
                os << ")";
            }
            break;
        case FormulaKind::Equality:
            serialize_term(f.args[0], os);
            os << " = ";
            serialize_term(f.args[1], os);
            break;
        case FormulaKind::Not:
            os << "~";
            if (is_atomic(*f.kids[0]) && f.kids[0]->kind != FormulaKind::Equality) {
                serialize(*f.kids[0], os);
            } else {
                os << "(";
                serialize(*f.kids[0], os);
                os << ")";
            }
            break;
        case FormulaKind::And:
        case FormulaKind::Or: {
            const char* op = f.kind == FormulaKind::And ? " & " : " | ";
            os << "(";
            for (std::size_t i = 0; i < f.kids.size(); ++i) {
                if (i) os << op;
                const Formula* kid = f.kids[i].get();
                while (kid->kind == FormulaKind::Frozen) kid = kid->kids[0].get();
                bool quantified = kid->kind == FormulaKind::Forall ||
                                  kid->kind == FormulaKind::Exists;
                if (quantified) os << "(";
                serialize(*f.kids[i], os);
                if (quantified) os << ")";
            }
            os << ")";
            break;
        }
        case FormulaKind::Forall:
        case FormulaKind::Exists:
            os << (f.kind == FormulaKind::Forall ? "forall" : "exists");
            for (const auto& v : f.vars) os << " " << v;
            os << ". ";
            serialize(*f.kids[0], os);
            break;
        case FormulaKind::Frozen:
            // Frozen markers are internal; serialize transparently.
            serialize(*f.kids[0], os);
            break;
    }
}

inline std::string serialize(const Formula& f) {
    std::ostringstream os;
    serialize(f, os);
    return os.str();
}
inline std::string serialize(const FormulaPtr& f) { return serialize(*f); }
inline std::string serialize(const StandardFormSentence& s) { return serialize(*s.to_formula()); }

}  // namespace folt

#endif  // FOLT_PARSE_HPP
