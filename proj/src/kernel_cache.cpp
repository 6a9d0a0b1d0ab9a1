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
#include "portten/kernel_cache.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace portten::codegen {

namespace {

void digestChunk(EVP_MD_CTX* ctx, std::string_view chunk) {
    // Length-prefix each field so (ab, c) and (a, bc) never collide.
    const std::uint64_t len = chunk.size();
    EVP_DigestUpdate(ctx, &len, sizeof(len));
    EVP_DigestUpdate(ctx, chunk.data(), chunk.size());
}

}  // namespace

KernelCacheKey make_cache_key(const KernelSource& src, std::string_view backendId) {
    KernelCacheKey key;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    PORTTEN_CHECK(ctx != nullptr, "failed to allocate digest context");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    digestChunk(ctx, src.text);
    digestChunk(ctx, src.buildOptions);
    digestChunk(ctx, backendId);
    unsigned int outLen = 0;
    EVP_DigestFinal_ex(ctx, key.digest.data(), &outLen);
    EVP_MD_CTX_free(ctx);
    PORTTEN_CHECK(outLen == key.digest.size(), "unexpected digest length");
    return key;
}

std::string KernelCacheKey::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(digest.size() * 2);
    for (std::uint8_t b : digest) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

KernelCache::KernelCache() {
    if (const char* dir = std::getenv("PORTTEN_KERNEL_CACHE_DIR"); dir && *dir) {
        diskDir_ = std::filesystem::path(dir);
    }
}

KernelCache::KernelCache(std::optional<std::filesystem::path> diskDir)
    : diskDir_(std::move(diskDir)) {}

KernelCache& KernelCache::global() {
    static KernelCache cache;
    return cache;
}

std::optional<std::vector<std::uint8_t>> KernelCache::readDiskBinary(
    const KernelCacheKey& key) const {
    if (!diskDir_) return std::nullopt;
    std::ifstream in(*diskDir_ / (key.hex() + ".bin"), std::ios::binary);
    if (!in) return std::nullopt;
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) return std::nullopt;
    return bytes;
}

void KernelCache::writeDiskBinary(const KernelCacheKey& key,
                                  std::span<const std::uint8_t> binary) const {
    if (!diskDir_ || binary.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(*diskDir_, ec);
    const auto finalPath = *diskDir_ / (key.hex() + ".bin");
    const auto tmpPath = *diskDir_ / (key.hex() + ".tmp");
    {
        std::ofstream out(tmpPath, std::ios::binary | std::ios::trunc);
        if (!out) return;  // disk cache is best-effort
        out.write(reinterpret_cast<const char*>(binary.data()),
                  static_cast<std::streamsize>(binary.size()));
        if (!out.good()) return;
    }
    std::filesystem::rename(tmpPath, finalPath, ec);
}

KernelHandle KernelCache::getOrBuild(const KernelSource& src, std::string_view backendId,
                                     const CompileFn& compile, const LoadBinaryFn& loadBinary) {
    PORTTEN_CHECK(static_cast<bool>(compile), "getOrBuild requires a compile callback");
    const KernelCacheKey key = make_cache_key(src, backendId);

    std::promise<std::shared_ptr<const CompiledKernel>> promise;
    Entry entry;
    bool owner = false;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            ++stats_.hits;
            entry = it->second;
        } else {
            owner = true;
            entry = promise.get_future().share();
            entries_.emplace(key, entry);
        }
    }

    if (!owner) {
        return KernelHandle{key, entry.get()};  // rethrows a failed build
    }

    try {
        std::shared_ptr<const CompiledKernel> built;
        bool fromDisk = false;
        if (loadBinary) {
            if (auto bytes = readDiskBinary(key)) {
                built = std::make_shared<const CompiledKernel>(loadBinary(src, *bytes));
                fromDisk = true;
            }
        }
        if (!built) {
            built = std::make_shared<const CompiledKernel>(compile(src));
            writeDiskBinary(key, built->binary);
        }
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (fromDisk) {
                ++stats_.diskHits;
            } else {
                ++stats_.compiles;
            }
        }
        promise.set_value(built);
        return KernelHandle{key, std::move(built)};
    } catch (...) {
        promise.set_exception(std::current_exception());
        {
            // Drop the failed entry so a later call can retry.
            std::lock_guard<std::mutex> lock(mu_);
            entries_.erase(key);
        }
        throw;
    }
}

KernelCache::Stats KernelCache::stats() const {
    std::lock_guard<std::mutex> lock(mu_);
    return stats_;
}

std::size_t KernelCache::distinctKeys() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
}

}  // namespace portten::codegen
