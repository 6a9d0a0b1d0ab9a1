/*
 * Copyright (c) 2026, the portten authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "portten/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace portten::expr {

namespace {

struct Token {
    enum class Kind { Ident, Number, Plus, Minus, Star, Slash, LParen, RParen, Comma, Assign, End };
    Kind kind = Kind::End;
    std::string text;
    float value = 0.0f;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return current_; }

    Token next() {
        Token t = current_;
        advance();
        return t;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    Token current_;

    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ >= src_.size()) {
            current_ = Token{Token::Kind::End, "", 0.0f};
            return;
        }
        const char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                ++pos_;
            }
            current_ = Token{Token::Kind::Ident, std::string(src_.substr(start, pos_ - start)), 0.0f};
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
                ++pos_;
            }
            // optional exponent
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                std::size_t expPos = pos_ + 1;
                if (expPos < src_.size() && (src_[expPos] == '+' || src_[expPos] == '-')) ++expPos;
                if (expPos < src_.size() && std::isdigit(static_cast<unsigned char>(src_[expPos]))) {
                    pos_ = expPos;
                    while (pos_ < src_.size() &&
                           std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                        ++pos_;
                    }
                }
            }
            std::string text(src_.substr(start, pos_ - start));
            float value = 0.0f;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc() || ptr != text.data() + text.size()) {
                throw ValidationError("apply expression: bad numeric literal '" + text + "'");
            }
            current_ = Token{Token::Kind::Number, std::move(text), value};
            return;
        }
        ++pos_;
        switch (c) {
            case '+': current_ = Token{Token::Kind::Plus, "+", 0.0f}; return;
            case '-': current_ = Token{Token::Kind::Minus, "-", 0.0f}; return;
            case '*': current_ = Token{Token::Kind::Star, "*", 0.0f}; return;
            case '/': current_ = Token{Token::Kind::Slash, "/", 0.0f}; return;
            case '(': current_ = Token{Token::Kind::LParen, "(", 0.0f}; return;
            case ')': current_ = Token{Token::Kind::RParen, ")", 0.0f}; return;
            case ',': current_ = Token{Token::Kind::Comma, ",", 0.0f}; return;
            case '=': current_ = Token{Token::Kind::Assign, "=", 0.0f}; return;
            default:
                throw ValidationError(std::string("apply expression: unexpected character '") + c +
                                      "'");
        }
    }
};

constexpr std::array<const char*, 3> kOperandNames = {"x", "y", "z"};

int operandIndex(std::string_view name) {
    for (int i = 0; i < static_cast<int>(kOperandNames.size()); ++i) {
        if (name == kOperandNames[static_cast<std::size_t>(i)]) return i;
    }
    return -1;
}

struct FunctionInfo {
    const char* name;
    const char* kernelName;
    int argc;
};

constexpr std::array<FunctionInfo, 7> kFunctions = {{
    {"abs", "fabs", 1},
    {"exp", "exp", 1},
    {"log", "log", 1},
    {"sqrt", "sqrt", 1},
    {"tanh", "tanh", 1},
    {"max", "fmax", 2},
    {"min", "fmin", 2},
}};

const FunctionInfo* findFunction(std::string_view name) {
    for (const auto& f : kFunctions) {
        if (name == f.name) return &f;
    }
    return nullptr;
}

// Float literal text for the kernel language: integer literals pass through
// (implicit int->float conversion), anything fractional gets an 'f' suffix so
// the arithmetic never widens to double on the device.
std::string kernelLiteral(const std::string& text) {
    if (text.find('.') != std::string::npos || text.find('e') != std::string::npos ||
        text.find('E') != std::string::npos) {
        return text + "f";
    }
    return text;
}

}  // namespace

class ProgramBuilder {
public:
    ProgramBuilder(std::string_view text, int arity) : lexer_(text), arity_(arity) {
        PORTTEN_CHECK(arity >= 1 && arity <= 3, "apply arity must be 1..3");
    }

    Program build() {
        // Statement form: x = <expr>
        Token head = lexer_.next();
        if (head.kind != Token::Kind::Ident || head.text != "x") {
            throw ValidationError("apply expression must assign to operand x");
        }
        if (lexer_.next().kind != Token::Kind::Assign) {
            throw ValidationError("apply expression must have the form \"x = <expr>\"");
        }
        std::string rhs = parseExpr();
        if (lexer_.peek().kind != Token::Kind::End) {
            throw ValidationError("apply expression: trailing tokens after expression");
        }
        program_.kernelStatement_ = "x = " + rhs + ";";
        program_.arity_ = arity_;
        program_.referencedOperands_ = referenced_;
        return std::move(program_);
    }

private:
    Lexer lexer_;
    int arity_;
    Program program_;
    int referenced_ = 0;
    int depth_ = 0;

    using Op = Program::Op;

    void emit(Op op, float constant = 0.0f, std::uint8_t operand = 0) {
        program_.code_.push_back(Program::Instr{op, constant, operand});
    }

    void track(int delta) {
        depth_ += delta;
        PORTTEN_CHECK(depth_ <= 32, "apply expression too deep");
    }

    // Each parse function returns the canonical kernel-language text of the
    // subexpression it consumed.
    std::string parseExpr() {
        std::string text = parseTerm();
        while (true) {
            const auto kind = lexer_.peek().kind;
            if (kind == Token::Kind::Plus) {
                lexer_.next();
                std::string rhs = parseTerm();
                emit(Op::Add);
                track(-1);
                text = "(" + text + " + " + rhs + ")";
            } else if (kind == Token::Kind::Minus) {
                lexer_.next();
                std::string rhs = parseTerm();
                emit(Op::Sub);
                track(-1);
                text = "(" + text + " - " + rhs + ")";
            } else {
                return text;
            }
        }
    }

    std::string parseTerm() {
        std::string text = parseFactor();
        while (true) {
            const auto kind = lexer_.peek().kind;
            if (kind == Token::Kind::Star) {
                lexer_.next();
                std::string rhs = parseFactor();
                emit(Op::Mul);
                track(-1);
                text = "(" + text + " * " + rhs + ")";
            } else if (kind == Token::Kind::Slash) {
                lexer_.next();
                std::string rhs = parseFactor();
                emit(Op::Div);
                track(-1);
                text = "(" + text + " / " + rhs + ")";
            } else {
                return text;
            }
        }
    }

    std::string parseFactor() {
        if (lexer_.peek().kind == Token::Kind::Minus) {
            lexer_.next();
            std::string inner = parseFactor();
            emit(Op::Neg);
            return "(-" + inner + ")";
        }
        return parsePrimary();
    }

    std::string parsePrimary() {
        Token t = lexer_.next();
        switch (t.kind) {
            case Token::Kind::Number:
                emit(Op::PushConst, t.value);
                track(+1);
                return kernelLiteral(t.text);
            case Token::Kind::LParen: {
                std::string inner = parseExpr();
                if (lexer_.next().kind != Token::Kind::RParen) {
                    throw ValidationError("apply expression: missing ')'");
                }
                return inner;
            }
            case Token::Kind::Ident:
                return parseIdent(t.text);
            case Token::Kind::End:
                throw ValidationError("apply expression: unexpected end of input");
            default:
                throw ValidationError("apply expression: unexpected token '" + t.text + "'");
        }
    }

    std::string parseIdent(const std::string& name) {
        if (name == "s") {
            emit(Op::PushScalar);
            track(+1);
            return "s";
        }
        if (const FunctionInfo* fn = findFunction(name)) {
            if (lexer_.next().kind != Token::Kind::LParen) {
                throw ValidationError("apply expression: expected '(' after function '" + name +
                                      "'");
            }
            std::string arg0 = parseExpr();
            std::string text;
            if (fn->argc == 2) {
                if (lexer_.next().kind != Token::Kind::Comma) {
                    throw ValidationError("apply expression: function '" + name +
                                          "' takes two arguments");
                }
                std::string arg1 = parseExpr();
                track(-1);
                text = std::string(fn->kernelName) + "(" + arg0 + ", " + arg1 + ")";
            } else {
                text = std::string(fn->kernelName) + "(" + arg0 + ")";
            }
            if (lexer_.next().kind != Token::Kind::RParen) {
                throw ValidationError("apply expression: missing ')' in call to '" + name + "'");
            }
            emitFunction(name);
            return text;
        }
        const int idx = operandIndex(name);
        if (idx < 0) {
            throw ValidationError("apply expression references undeclared operand '" + name + "'");
        }
        if (idx >= arity_) {
            throw ValidationError("apply expression references operand '" + name +
                                  "' but only " + std::to_string(arity_) +
                                  " operand(s) are declared");
        }
        referenced_ = std::max(referenced_, idx + 1);
        emit(Op::PushOperand, 0.0f, static_cast<std::uint8_t>(idx));
        track(+1);
        return name;
    }

    void emitFunction(const std::string& name) {
        if (name == "abs") emit(Op::Abs);
        else if (name == "exp") emit(Op::Exp);
        else if (name == "log") emit(Op::Log);
        else if (name == "sqrt") emit(Op::Sqrt);
        else if (name == "tanh") emit(Op::Tanh);
        else if (name == "max") emit(Op::Max);
        else if (name == "min") emit(Op::Min);
    }
};

Program Program::parse(std::string_view text, int arity) {
    return ProgramBuilder(text, arity).build();
}

float Program::eval(std::span<const float> operands, float scalar) const {
    std::array<float, 32> stack;
    int top = 0;
    for (const Instr& ins : code_) {
        switch (ins.op) {
            case Op::PushConst: stack[static_cast<std::size_t>(top++)] = ins.constant; break;
            case Op::PushOperand:
                stack[static_cast<std::size_t>(top++)] = operands[ins.operand];
                break;
            case Op::PushScalar: stack[static_cast<std::size_t>(top++)] = scalar; break;
            case Op::Add:
                --top;
                stack[static_cast<std::size_t>(top - 1)] += stack[static_cast<std::size_t>(top)];
                break;
            case Op::Sub:
                --top;
                stack[static_cast<std::size_t>(top - 1)] -= stack[static_cast<std::size_t>(top)];
                break;
            case Op::Mul:
                --top;
                stack[static_cast<std::size_t>(top - 1)] *= stack[static_cast<std::size_t>(top)];
                break;
            case Op::Div:
                --top;
                stack[static_cast<std::size_t>(top - 1)] /= stack[static_cast<std::size_t>(top)];
                break;
            case Op::Neg:
                stack[static_cast<std::size_t>(top - 1)] = -stack[static_cast<std::size_t>(top - 1)];
                break;
            case Op::Abs:
                stack[static_cast<std::size_t>(top - 1)] =
                    std::fabs(stack[static_cast<std::size_t>(top - 1)]);
                break;
            case Op::Exp:
                stack[static_cast<std::size_t>(top - 1)] =
                    std::exp(stack[static_cast<std::size_t>(top - 1)]);
                break;
            case Op::Log:
                stack[static_cast<std::size_t>(top - 1)] =
                    std::log(stack[static_cast<std::size_t>(top - 1)]);
                break;
            case Op::Sqrt:
                stack[static_cast<std::size_t>(top - 1)] =
                    std::sqrt(stack[static_cast<std::size_t>(top - 1)]);
                break;
            case Op::Tanh:
                stack[static_cast<std::size_t>(top - 1)] =
                    std::tanh(stack[static_cast<std::size_t>(top - 1)]);
                break;
            case Op::Max:
                --top;
                stack[static_cast<std::size_t>(top - 1)] = std::fmax(
                    stack[static_cast<std::size_t>(top - 1)], stack[static_cast<std::size_t>(top)]);
                break;
            case Op::Min:
                --top;
                stack[static_cast<std::size_t>(top - 1)] = std::fmin(
                    stack[static_cast<std::size_t>(top - 1)], stack[static_cast<std::size_t>(top)]);
                break;
        }
    }
    return stack[0];
}

}  // namespace portten::expr
