#include "sheetaudit/error.hpp"
#include "sheetaudit/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace sheetaudit {

namespace {

// Host applications cap nesting at 64 levels; this only guards the stack.
constexpr int kMaxNesting = 256;

enum class TokenKind {
    number, text, boolean, cell, sheet_prefix, function, op, comma, colon, lparen, rparen, end,
};

struct Token {
    TokenKind kind = TokenKind::end;
    std::size_t pos = 0;
    std::string text;  // operator symbol, function name, sheet name or string literal
    double number = 0;
    bool boolean = false;
    A1Address cell;
};

bool is_letter(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
bool is_name_char(char c) { return is_letter(c) || is_digit(c) || c == '_' || c == '.' || c == '$' || c == '\\'; }

std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) { return to_upper(a) == to_upper(b); }

/// Cell reference as written inside formulas: at most three column letters.
std::optional<A1Address> match_cell_ref(std::string_view word) {
    std::size_t i = 0;
    if (i < word.size() && word[i] == '$') ++i;
    const std::size_t letters = i;
    while (i < word.size() && is_letter(word[i])) ++i;
    if (i == letters || i - letters > 3) return std::nullopt;
    if (i < word.size() && word[i] == '$') ++i;
    const std::size_t digits = i;
    while (i < word.size() && is_digit(word[i])) ++i;
    if (i == digits || i != word.size()) return std::nullopt;
    try {
        return parse_a1_address(word);
    } catch (const MalformedAddress&) {
        return std::nullopt;
    }
}

bool is_column_word(std::string_view word) {
    std::size_t i = 0;
    if (i < word.size() && word[i] == '$') ++i;
    const std::size_t letters = i;
    while (i < word.size() && is_letter(word[i])) ++i;
    return i > letters && i - letters <= 3 && i == word.size();
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run(std::size_t start) {
        pos_ = start;
        std::vector<Token> tokens;
        for (;;) {
            skip_space();
            if (pos_ >= text_.size()) {
                tokens.push_back(make(TokenKind::end, pos_));
                return tokens;
            }
            tokens.push_back(next());
        }
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    }

    char peek(std::size_t offset = 0) const {
        return pos_ + offset < text_.size() ? text_[pos_ + offset] : '\0';
    }

    Token make(TokenKind kind, std::size_t start, std::string text = {}) {
        Token t;
        t.kind = kind;
        t.pos = start;
        t.text = std::move(text);
        return t;
    }

    Token next() {
        const std::size_t start = pos_;
        const char c = peek();
        if (is_digit(c) || (c == '.' && is_digit(peek(1)))) return number();
        if (is_letter(c) || c == '_' || c == '$' || c == '\\') return word();
        switch (c) {
            case '"': return string_literal();
            case '\'': return quoted_sheet();
            case '+': case '-': case '*': case '/': case '^': case '&': case '%': case '=':
                ++pos_;
                return make(TokenKind::op, start, std::string(1, c));
            case '<':
                ++pos_;
                if (peek() == '>' || peek() == '=') return make(TokenKind::op, start, std::string{'<', text_[pos_++]});
                return make(TokenKind::op, start, "<");
            case '>':
                ++pos_;
                if (peek() == '=') {
                    ++pos_;
                    return make(TokenKind::op, start, ">=");
                }
                return make(TokenKind::op, start, ">");
            case ',': ++pos_; return make(TokenKind::comma, start);
            case ':': ++pos_; return make(TokenKind::colon, start);
            case '(': ++pos_; return make(TokenKind::lparen, start);
            case ')': ++pos_; return make(TokenKind::rparen, start);
            case '{': throw UnsupportedConstruct("array literal");
            case '[': throw UnsupportedConstruct("external workbook reference");
            case '#': error_literal(); break;
            case ';': throw SyntaxError(start, "',' (the argument separator is a comma)");
            default: break;
        }
        throw SyntaxError(start, "an operand or operator");
    }

    [[noreturn]] void error_literal() {
        const std::string_view rest = text_.substr(pos_);
        for (std::string_view code : kErrorCodes) {
            if (rest.size() >= code.size() && iequals(rest.substr(0, code.size()), code))
                throw UnsupportedConstruct("error literal");
        }
        throw SyntaxError(pos_, "an operand or operator");
    }

    Token number() {
        const std::size_t start = pos_;
        while (is_digit(peek())) ++pos_;
        if (peek() == '.') {
            ++pos_;
            while (is_digit(peek())) ++pos_;
        }
        if (peek() == 'e' || peek() == 'E') {
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (!is_digit(peek())) throw SyntaxError(pos_, "exponent digits");
            while (is_digit(peek())) ++pos_;
        }
        if (peek() == ':' && is_digit(peek(1))) throw UnsupportedConstruct("whole-row range");
        if (is_letter(peek()) || peek() == '_' || peek() == '$') throw SyntaxError(pos_, "an operator after number");
        std::string_view digits = text_.substr(start, pos_ - start);
        // from_chars does not accept a bare leading '.'.
        std::string padded = digits.front() == '.' ? "0" + std::string(digits) : std::string(digits);
        Token t = make(TokenKind::number, start);
        const auto result = std::from_chars(padded.data(), padded.data() + padded.size(), t.number);
        if (result.ec != std::errc{} || !std::isfinite(t.number)) throw UnsupportedConstruct("number out of range");
        return t;
    }

    Token word() {
        const std::size_t start = pos_;
        while (is_name_char(peek())) ++pos_;
        const std::string_view w = text_.substr(start, pos_ - start);
        const char after = peek();

        if (after == '(') {
            if (w.find('$') != std::string_view::npos || w.find('\\') != std::string_view::npos || !(is_letter(w.front()) || w.front() == '_'))
                throw SyntaxError(start, "a function name");
            return make(TokenKind::function, start, to_upper(w));
        }
        if (after == '!') {
            if (w.find('$') != std::string_view::npos) throw SyntaxError(start, "a sheet name");
            ++pos_;
            return make(TokenKind::sheet_prefix, start, std::string(w));
        }
        if (after == '[') throw UnsupportedConstruct("structured reference");
        if (auto cell = match_cell_ref(w)) {
            Token t = make(TokenKind::cell, start);
            t.cell = *cell;
            return t;
        }
        const std::string upper = to_upper(w);
        if (upper == "TRUE" || upper == "FALSE") {
            Token t = make(TokenKind::boolean, start);
            t.boolean = upper == "TRUE";
            return t;
        }
        std::size_t look = pos_;
        while (look < text_.size() && is_space(text_[look])) ++look;
        if (is_column_word(w) && look < text_.size() && text_[look] == ':') throw UnsupportedConstruct("whole-column range");
        throw UnsupportedConstruct("defined name");
    }

    Token string_literal() {
        const std::size_t start = pos_++;
        std::string value;
        for (;;) {
            if (pos_ >= text_.size()) throw SyntaxError(pos_, "closing '\"'");
            const char c = text_[pos_++];
            if (c == '"') {
                if (peek() == '"') {
                    value += '"';
                    ++pos_;
                    continue;
                }
                break;
            }
            value += c;
        }
        return make(TokenKind::text, start, std::move(value));
    }

    Token quoted_sheet() {
        const std::size_t start = pos_++;
        std::string name;
        for (;;) {
            if (pos_ >= text_.size()) throw SyntaxError(pos_, "closing quote of sheet name");
            const char c = text_[pos_++];
            if (c == '\'') {
                if (peek() == '\'') {
                    name += '\'';
                    ++pos_;
                    continue;
                }
                break;
            }
            name += c;
        }
        if (name.empty()) throw SyntaxError(start, "a sheet name");
        if (name.front() == '[') throw UnsupportedConstruct("external workbook reference");
        if (peek() != '!') throw SyntaxError(pos_, "'!' after sheet name");
        ++pos_;
        return make(TokenKind::sheet_prefix, start, std::move(name));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    FormulaAst parse() {
        FormulaAst ast = comparison();
        if (current().kind == TokenKind::colon) throw UnsupportedConstruct("range operator");
        if (current().kind != TokenKind::end) throw SyntaxError(current().pos, "an operator or end of formula");
        return ast;
    }

private:
    const Token& current() const { return tokens_[index_]; }
    const Token& advance() { return tokens_[index_++]; }
    bool at_op(std::string_view symbol) const {
        return current().kind == TokenKind::op && current().text == symbol;
    }

    struct DepthGuard {
        explicit DepthGuard(int& depth) : depth_(depth) {
            if (++depth_ > kMaxNesting) throw UnsupportedConstruct("nesting deeper than " + std::to_string(kMaxNesting));
        }
        ~DepthGuard() { --depth_; }
        int& depth_;
    };

    static FormulaAst binary(BinaryOp op, FormulaAst left, FormulaAst right) {
        return FormulaAst{Binary{op, std::move(left), std::move(right)}};
    }

    FormulaAst comparison() {
        FormulaAst left = concat();
        for (;;) {
            std::optional<BinaryOp> op;
            if (at_op("=")) op = BinaryOp::equal;
            else if (at_op("<>")) op = BinaryOp::not_equal;
            else if (at_op("<")) op = BinaryOp::less;
            else if (at_op("<=")) op = BinaryOp::less_equal;
            else if (at_op(">")) op = BinaryOp::greater;
            else if (at_op(">=")) op = BinaryOp::greater_equal;
            if (!op) return left;
            advance();
            left = binary(*op, std::move(left), concat());
        }
    }

    FormulaAst concat() {
        FormulaAst left = additive();
        while (at_op("&")) {
            advance();
            left = binary(BinaryOp::concat, std::move(left), additive());
        }
        return left;
    }

    FormulaAst additive() {
        FormulaAst left = multiplicative();
        while (at_op("+") || at_op("-")) {
            const BinaryOp op = advance().text == "+" ? BinaryOp::add : BinaryOp::subtract;
            left = binary(op, std::move(left), multiplicative());
        }
        return left;
    }

    FormulaAst multiplicative() {
        FormulaAst left = power();
        while (at_op("*") || at_op("/")) {
            const BinaryOp op = advance().text == "*" ? BinaryOp::multiply : BinaryOp::divide;
            left = binary(op, std::move(left), power());
        }
        return left;
    }

    FormulaAst power() {
        FormulaAst left = prefix();
        while (at_op("^")) {
            advance();
            left = binary(BinaryOp::power, std::move(left), prefix());
        }
        return left;
    }

    FormulaAst prefix() {
        if (at_op("-") || at_op("+")) {
            DepthGuard guard(depth_);
            const UnaryOp op = advance().text == "-" ? UnaryOp::negate : UnaryOp::plus;
            return FormulaAst{Unary{op, prefix()}};
        }
        return postfix();
    }

    FormulaAst postfix() {
        FormulaAst operand = primary();
        while (at_op("%")) {
            advance();
            operand = FormulaAst{Unary{UnaryOp::percent, std::move(operand)}};
        }
        return operand;
    }

    FormulaAst primary() {
        DepthGuard guard(depth_);
        const Token& token = current();
        switch (token.kind) {
            case TokenKind::number: advance(); return FormulaAst{NumberLit{token.number}};
            case TokenKind::text: advance(); return FormulaAst{TextLit{token.text}};
            case TokenKind::boolean: advance(); return FormulaAst{BoolLit{token.boolean}};
            case TokenKind::lparen: {
                advance();
                FormulaAst inner = comparison();
                if (current().kind == TokenKind::colon) throw UnsupportedConstruct("range operator");
                if (current().kind != TokenKind::rparen) throw SyntaxError(current().pos, "')'");
                advance();
                return FormulaAst{Paren{std::move(inner)}};
            }
            case TokenKind::function: return function_call();
            case TokenKind::cell:
            case TokenKind::sheet_prefix: return reference();
            case TokenKind::colon: throw UnsupportedConstruct("range operator");
            default: break;
        }
        throw SyntaxError(token.pos, "an expression");
    }

    FormulaAst function_call() {
        FunctionCall call{advance().text, {}};
        advance();  // '(' is guaranteed by the lexer
        if (current().kind == TokenKind::rparen) {
            advance();
            return FormulaAst{std::move(call)};
        }
        for (;;) {
            if (current().kind == TokenKind::comma || current().kind == TokenKind::rparen)
                throw UnsupportedConstruct("empty argument");
            call.args.push_back(comparison());
            if (current().kind == TokenKind::comma) {
                advance();
                continue;
            }
            if (current().kind == TokenKind::rparen) {
                advance();
                return FormulaAst{std::move(call)};
            }
            if (current().kind == TokenKind::colon) throw UnsupportedConstruct("range operator");
            throw SyntaxError(current().pos, "',' or ')'");
        }
    }

    CellRef cell_with_sheet() {
        std::optional<std::string> sheet;
        if (current().kind == TokenKind::sheet_prefix) sheet = advance().text;
        if (current().kind != TokenKind::cell) throw SyntaxError(current().pos, "a cell reference");
        const A1Address& a = advance().cell;
        return CellRef{std::move(sheet), a.column, a.row, a.column_absolute, a.row_absolute};
    }

    FormulaAst reference() {
        CellRef start = cell_with_sheet();
        if (current().kind != TokenKind::colon) return FormulaAst{Ref{start}};
        advance();
        if (current().kind != TokenKind::cell && current().kind != TokenKind::sheet_prefix)
            throw UnsupportedConstruct("range operator");
        CellRef end = cell_with_sheet();
        if (end.sheet) {
            if (!start.sheet || !iequals(*start.sheet, *end.sheet)) throw UnsupportedConstruct("3-D reference");
        }
        end.sheet = start.sheet;
        if (current().kind == TokenKind::colon) throw UnsupportedConstruct("range operator");
        return FormulaAst{Ref{make_range(start, end)}};
    }

    std::vector<Token> tokens_;
    std::size_t index_ = 0;
    int depth_ = 0;
};

}  // namespace

RangeRef make_range(const CellRef& a, const CellRef& b) {
    RangeRef range{a, b};
    range.end.sheet = range.start.sheet;
    if (range.start.column > range.end.column) {
        std::swap(range.start.column, range.end.column);
        std::swap(range.start.column_absolute, range.end.column_absolute);
    }
    if (range.start.row > range.end.row) {
        std::swap(range.start.row, range.end.row);
        std::swap(range.start.row_absolute, range.end.row_absolute);
    }
    return range;
}

FormulaAst parse_formula(std::string_view text) {
    std::size_t start = 0;
    while (start < text.size() && is_space(text[start])) ++start;
    if (start >= text.size() || text[start] != '=') throw SyntaxError(start, "'=' at the start of a formula");
    return Parser(Lexer(text).run(start + 1)).parse();
}

}  // namespace sheetaudit
