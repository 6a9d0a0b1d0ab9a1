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

#include <stdexcept>
#include <string>

namespace portten {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad arguments, malformed inputs, shape mismatches. Maps to CLI exit code 2.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Backend/runtime trouble: compile failures, missing devices, allocation
/// failures on a device. Maps to CLI exit code 3.
class BackendError : public Error {
public:
    explicit BackendError(const std::string& what) : Error(what) {}
};

namespace detail {
[[noreturn]] inline void failValidation(const std::string& msg) { throw ValidationError(msg); }
}

// Internal invariant check that stays active in release builds.
#define PORTTEN_CHECK(cond, msg)                                        \
    do {                                                                \
        if (!(cond)) {                                                  \
            ::portten::detail::failValidation(msg);                     \
        }                                                               \
    } while (false)

}  // namespace portten
