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
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

#include "portten/errors.hpp"

namespace portten {

/// Maximum tensor rank supported by the library and its generated kernels.
inline constexpr int kMaxDims = 8;

/// Flat, reference-counted buffer of float32 elements. Device buffers cannot
/// carry an implicit start offset, so views keep their offset on the Tensor
/// and storages stay plain arrays. Two tensors sharing a Storage observe each
/// other's writes.
class Storage {
public:
    explicit Storage(std::int64_t length);

    std::int64_t length() const { return static_cast<std::int64_t>(elems_.size()); }
    float* data() { return elems_.data(); }
    const float* data() const { return elems_.data(); }

private:
    std::vector<float> elems_;
};

/// Strided multi-dimensional view over a Storage.
///
/// Layout is row-major; a freshly created tensor is contiguous with
/// storageOffset 0. Views produced by narrow()/select() share the parent
/// storage and only adjust offset/sizes, never copy. Negative strides are
/// not supported.
///
/// Tensors are not internally synchronized: concurrent reads are fine, any
/// write needs external exclusion.
class Tensor {
public:
    Tensor() = default;

    /// New contiguous zero-filled tensor. Rank must be 1..8, every size >= 1.
    static Tensor create(std::vector<std::int64_t> sizes);
    static Tensor create(std::initializer_list<std::int64_t> sizes);

    bool defined() const { return storage_ != nullptr; }
    const std::shared_ptr<Storage>& storage() const { return storage_; }
    std::int64_t storageOffset() const { return offset_; }
    int dim() const { return static_cast<int>(sizes_.size()); }
    const std::vector<std::int64_t>& sizes() const { return sizes_; }
    const std::vector<std::int64_t>& strides() const { return strides_; }
    std::int64_t size(int d) const;
    std::int64_t stride(int d) const;
    std::int64_t numel() const;

    /// True iff strides equal the row-major strides for sizes().
    bool isContiguous() const;

    /// View of `length` slices starting at `start` along `dim`. Shares
    /// storage; bumps storageOffset by start * stride(dim).
    Tensor narrow(int dim, std::int64_t start, std::int64_t length) const;

    /// View with dimension `dim` removed, fixed at `index`. Rank must be >= 2.
    Tensor select(int dim, std::int64_t index) const;

    /// Element-for-element copy from src in logical row-major order. Sizes
    /// must match. Copies between views of the same storage are rejected when
    /// their storage ranges overlap.
    void copyFrom(const Tensor& src);

    /// Contiguous tensor with the same contents; returns *this when already
    /// contiguous.
    Tensor contiguous() const;

    void fill(float value);

    /// Pointer to the first logical element (storage base + offset).
    float* data();
    const float* data() const;

    /// Element access by full index list, honoring strides. For tests and
    /// host-side algorithms; not a fast path.
    float& at(std::span<const std::int64_t> index);
    float at(std::span<const std::int64_t> index) const;
    float& at(std::initializer_list<std::int64_t> index);
    float at(std::initializer_list<std::int64_t> index) const;

    /// Value of a single-element tensor.
    float item() const;

    /// Largest storage index reachable from this view (inclusive).
    std::int64_t maxReachableIndex() const;

private:
    std::shared_ptr<Storage> storage_;
    std::int64_t offset_ = 0;
    std::vector<std::int64_t> sizes_;
    std::vector<std::int64_t> strides_;

    std::int64_t indexOffset(std::span<const std::int64_t> index) const;
    void requireDefined() const;
};

/// Row-major strides for a size list: strides[d] = prod(sizes[e] for e > d).
std::vector<std::int64_t> rowMajorStrides(const std::vector<std::int64_t>& sizes);

}  // namespace portten
