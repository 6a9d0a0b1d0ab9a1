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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "portten/kernel_codegen.hpp"

namespace portten::codegen {

/// SHA-256 digest of (kernel text, build options, backend identifier).
/// Identical sources compiled for the same backend share a key; any change
/// to the baked geometry changes the text and therefore the key.
struct KernelCacheKey {
    std::array<std::uint8_t, 32> digest{};

    auto operator<=>(const KernelCacheKey&) const = default;
    std::string hex() const;
};

KernelCacheKey make_cache_key(const KernelSource& src, std::string_view backendId);

/// Backend-compiled kernel. `object` is whatever live handle the backend
/// produced; `binary` optionally holds a persistable form for the on-disk
/// cache (leave empty to skip persistence).
struct CompiledKernel {
    std::shared_ptr<void> object;
    std::vector<std::uint8_t> binary;
};

struct KernelHandle {
    KernelCacheKey key;
    std::shared_ptr<const CompiledKernel> kernel;
};

/// Process-wide kernel cache with an optional on-disk layer, since vendor
/// caches cannot be relied on across drivers. Internally synchronized:
/// concurrent getOrBuild calls for the same key compile once (single writer
/// per key), other callers wait for the result.
class KernelCache {
public:
    using CompileFn = std::function<CompiledKernel(const KernelSource&)>;
    using LoadBinaryFn =
        std::function<CompiledKernel(const KernelSource&, std::span<const std::uint8_t>)>;

    /// Disk directory taken from PORTTEN_KERNEL_CACHE_DIR (disabled when the
    /// variable is unset).
    KernelCache();
    explicit KernelCache(std::optional<std::filesystem::path> diskDir);

    /// Returns the cached handle, or compiles via `compile` on first sight of
    /// the key. When a disk directory is configured and `loadBinary` is
    /// given, a persisted binary short-circuits compilation. Compile errors
    /// propagate verbatim and the key stays absent, so a later call retries.
    KernelHandle getOrBuild(const KernelSource& src, std::string_view backendId,
                            const CompileFn& compile, const LoadBinaryFn& loadBinary = nullptr);

    struct Stats {
        std::uint64_t hits = 0;      // served from memory
        std::uint64_t diskHits = 0;  // served from the on-disk binary store
        std::uint64_t compiles = 0;  // compile callback invocations
    };
    Stats stats() const;
    std::size_t distinctKeys() const;

    const std::optional<std::filesystem::path>& diskDir() const { return diskDir_; }

    static KernelCache& global();

private:
    using Entry = std::shared_future<std::shared_ptr<const CompiledKernel>>;

    mutable std::mutex mu_;
    std::map<KernelCacheKey, Entry> entries_;
    Stats stats_;
    std::optional<std::filesystem::path> diskDir_;

    std::optional<std::vector<std::uint8_t>> readDiskBinary(const KernelCacheKey& key) const;
    void writeDiskBinary(const KernelCacheKey& key, std::span<const std::uint8_t> binary) const;
};

}  // namespace portten::codegen
