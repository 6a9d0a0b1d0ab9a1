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
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "portten/errors.hpp"

namespace portten::tmpl {

/// Values bindable in a RenderContext.
using Value = std::variant<std::int64_t, bool, std::string, std::vector<std::int64_t>,
                           std::vector<std::string>>;

/// Variable bindings for one render. Identifiers must match
/// [A-Za-z_][A-Za-z0-9_]*.
class RenderContext {
public:
    RenderContext& bind(std::string name, Value value);

    RenderContext& bind(std::string name, int value) {
        return bind(std::move(name), Value(static_cast<std::int64_t>(value)));
    }
    RenderContext& bind(std::string name, const char* value) {
        return bind(std::move(name), Value(std::string(value)));
    }

    const Value* find(std::string_view name) const;

private:
    std::map<std::string, Value, std::less<>> bindings_;
};

/// Minimal Jinja-flavored text templater: {{var}} substitution,
/// {% for v in a..b %} / {% for v in list %} loops (a inclusive, b
/// exclusive), and {% if flag %} / {% else %} / {% endif %} conditionals,
/// nested to arbitrary depth. No filters, no macros, no expression
/// arithmetic: compute values in the host and bind the results.
///
/// Parsing never evaluates variables. Templates are immutable after parse
/// and render() is pure, so instances are freely shareable across threads.
class Template {
public:
    /// Parse errors (unclosed blocks, unknown tags, malformed expressions)
    /// are reported as ValidationError with a line number.
    static Template parse(std::string_view source);

    /// Every identifier the template references must be bound; an unbound
    /// identifier is a hard error naming it, not empty text.
    std::string render(const RenderContext& ctx) const;

    const std::string& source() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

bool isValidIdentifier(std::string_view name);

}  // namespace portten::tmpl
