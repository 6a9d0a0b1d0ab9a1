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
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "portten/errors.hpp"

namespace portten::expr {

/// Compiled form of a pointwise apply expression "x = <expr>", where <expr>
/// ranges over operands x, y, z, the scalar s, numeric literals, + - * /,
/// unary minus, parentheses, and the functions abs, exp, log, sqrt, tanh,
/// max, min.
///
/// The same grammar drives both the kernel generator and the reference
/// backend's interpreter, so validation errors are identical on every
/// backend. A Program is immutable and safe to share across threads.
class Program {
public:
    /// Parses and validates against the operand count. Referencing an
    /// operand beyond `arity` (or any unknown identifier) is an error that
    /// names the identifier.
    static Program parse(std::string_view text, int arity);

    /// Evaluates on one element. operands[0] is x, [1] is y, [2] is z.
    float eval(std::span<const float> operands, float scalar) const;

    /// Canonical C text of the assignment, e.g. "x = (x * 2);", with the
    /// function names used by the portable kernel language (fabs, fmax, ...).
    const std::string& kernelStatement() const { return kernelStatement_; }

    int arity() const { return arity_; }

    /// Highest operand index referenced + 1 (<= arity).
    int referencedOperands() const { return referencedOperands_; }

private:
    enum class Op : std::uint8_t {
        PushConst,
        PushOperand,
        PushScalar,
        Add,
        Sub,
        Mul,
        Div,
        Neg,
        Abs,
        Exp,
        Log,
        Sqrt,
        Tanh,
        Max,
        Min,
    };
    struct Instr {
        Op op;
        float constant = 0.0f;
        std::uint8_t operand = 0;
    };

    std::vector<Instr> code_;
    std::string kernelStatement_;
    int arity_ = 0;
    int referencedOperands_ = 0;

    friend class ProgramBuilder;
};

}  // namespace portten::expr
