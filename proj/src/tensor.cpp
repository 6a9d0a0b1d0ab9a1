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
#include "portten/tensor.hpp"

#include <limits>
#include <sstream>

namespace portten {

namespace {

std::string shapeToString(const std::vector<std::int64_t>& sizes) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (i) os << ",";
        os << sizes[i];
    }
    os << "]";
    return os.str();
}

std::int64_t checkedNumel(const std::vector<std::int64_t>& sizes) {
    std::int64_t n = 1;
    for (std::int64_t s : sizes) {
        PORTTEN_CHECK(s >= 1, "tensor size must be >= 1, got " + std::to_string(s));
        PORTTEN_CHECK(n <= std::numeric_limits<std::int64_t>::max() / s,
                      "tensor element count overflows int64");
        n *= s;
    }
    return n;
}

}  // namespace

Storage::Storage(std::int64_t length) {
    PORTTEN_CHECK(length >= 0, "storage length must be non-negative");
    elems_.assign(static_cast<std::size_t>(length), 0.0f);
}

std::vector<std::int64_t> rowMajorStrides(const std::vector<std::int64_t>& sizes) {
    std::vector<std::int64_t> strides(sizes.size(), 1);
    for (int d = static_cast<int>(sizes.size()) - 2; d >= 0; --d) {
        strides[static_cast<std::size_t>(d)] =
            strides[static_cast<std::size_t>(d) + 1] * sizes[static_cast<std::size_t>(d) + 1];
    }
    return strides;
}

Tensor Tensor::create(std::vector<std::int64_t> sizes) {
    PORTTEN_CHECK(!sizes.empty(), "tensor must have at least one dimension");
    PORTTEN_CHECK(static_cast<int>(sizes.size()) <= kMaxDims,
                  "tensor rank " + std::to_string(sizes.size()) + " exceeds the maximum of " +
                      std::to_string(kMaxDims));
    const std::int64_t n = checkedNumel(sizes);
    Tensor t;
    t.storage_ = std::make_shared<Storage>(n);
    t.offset_ = 0;
    t.strides_ = rowMajorStrides(sizes);
    t.sizes_ = std::move(sizes);
    return t;
}

Tensor Tensor::create(std::initializer_list<std::int64_t> sizes) {
    return create(std::vector<std::int64_t>(sizes));
}

void Tensor::requireDefined() const {
    PORTTEN_CHECK(storage_ != nullptr, "operation on a default-constructed tensor");
}

std::int64_t Tensor::size(int d) const {
    requireDefined();
    PORTTEN_CHECK(d >= 0 && d < dim(), "dimension index out of range");
    return sizes_[static_cast<std::size_t>(d)];
}

std::int64_t Tensor::stride(int d) const {
    requireDefined();
    PORTTEN_CHECK(d >= 0 && d < dim(), "dimension index out of range");
    return strides_[static_cast<std::size_t>(d)];
}

std::int64_t Tensor::numel() const {
    requireDefined();
    std::int64_t n = 1;
    for (std::int64_t s : sizes_) n *= s;
    return n;
}

bool Tensor::isContiguous() const {
    requireDefined();
    return strides_ == rowMajorStrides(sizes_);
}

std::int64_t Tensor::maxReachableIndex() const {
    requireDefined();
    std::int64_t idx = offset_;
    for (std::size_t d = 0; d < sizes_.size(); ++d) {
        if (strides_[d] > 0) idx += (sizes_[d] - 1) * strides_[d];
    }
    return idx;
}

Tensor Tensor::narrow(int dim, std::int64_t start, std::int64_t length) const {
    requireDefined();
    PORTTEN_CHECK(dim >= 0 && dim < this->dim(),
                  "narrow: dimension " + std::to_string(dim) + " out of range for rank " +
                      std::to_string(this->dim()));
    const std::int64_t extent = sizes_[static_cast<std::size_t>(dim)];
    PORTTEN_CHECK(start >= 0 && length >= 1 && start + length <= extent,
                  "narrow: range [" + std::to_string(start) + ", " +
                      std::to_string(start + length) + ") out of bounds for size " +
                      std::to_string(extent));
    Tensor view = *this;
    view.offset_ += start * strides_[static_cast<std::size_t>(dim)];
    view.sizes_[static_cast<std::size_t>(dim)] = length;
    return view;
}

Tensor Tensor::select(int dim, std::int64_t index) const {
    requireDefined();
    PORTTEN_CHECK(this->dim() >= 2, "select requires rank >= 2");
    PORTTEN_CHECK(dim >= 0 && dim < this->dim(), "select: dimension out of range");
    PORTTEN_CHECK(index >= 0 && index < sizes_[static_cast<std::size_t>(dim)],
                  "select: index " + std::to_string(index) + " out of bounds");
    Tensor view = *this;
    view.offset_ += index * strides_[static_cast<std::size_t>(dim)];
    view.sizes_.erase(view.sizes_.begin() + dim);
    view.strides_.erase(view.strides_.begin() + dim);
    return view;
}

void Tensor::copyFrom(const Tensor& src) {
    requireDefined();
    src.requireDefined();
    PORTTEN_CHECK(sizes_ == src.sizes_,
                  "copy: size mismatch, dst " + shapeToString(sizes_) + " vs src " +
                      shapeToString(src.sizes_));
    if (storage_ == src.storage_) {
        // Ranges touched by each view; strides are non-negative so the
        // minimum reachable index is the offset itself.
        const std::int64_t dstLo = offset_, dstHi = maxReachableIndex();
        const std::int64_t srcLo = src.offset_, srcHi = src.maxReachableIndex();
        PORTTEN_CHECK(dstHi < srcLo || srcHi < dstLo,
                      "copy between overlapping views of the same storage is not supported");
    }

    const std::int64_t n = numel();
    float* dstBase = storage_->data();
    const float* srcBase = src.storage_->data();
    if (isContiguous() && src.isContiguous()) {
        for (std::int64_t i = 0; i < n; ++i) dstBase[offset_ + i] = srcBase[src.offset_ + i];
        return;
    }

    // Odometer walk of the logical index space, tracking both offsets.
    const int rank = dim();
    std::int64_t counters[kMaxDims] = {0};
    std::int64_t dstOff = offset_, srcOff = src.offset_;
    for (std::int64_t i = 0; i < n; ++i) {
        dstBase[dstOff] = srcBase[srcOff];
        for (int d = rank - 1; d >= 0; --d) {
            counters[d] += 1;
            dstOff += strides_[static_cast<std::size_t>(d)];
            srcOff += src.strides_[static_cast<std::size_t>(d)];
            if (counters[d] < sizes_[static_cast<std::size_t>(d)]) break;
            counters[d] = 0;
            dstOff -= sizes_[static_cast<std::size_t>(d)] * strides_[static_cast<std::size_t>(d)];
            srcOff -= sizes_[static_cast<std::size_t>(d)] * src.strides_[static_cast<std::size_t>(d)];
        }
    }
}

Tensor Tensor::contiguous() const {
    requireDefined();
    if (isContiguous()) return *this;
    Tensor fresh = Tensor::create(sizes_);
    fresh.copyFrom(*this);
    return fresh;
}

void Tensor::fill(float value) {
    requireDefined();
    const std::int64_t n = numel();
    float* base = storage_->data();
    if (isContiguous()) {
        for (std::int64_t i = 0; i < n; ++i) base[offset_ + i] = value;
        return;
    }
    const int rank = dim();
    std::int64_t counters[kMaxDims] = {0};
    std::int64_t off = offset_;
    for (std::int64_t i = 0; i < n; ++i) {
        base[off] = value;
        for (int d = rank - 1; d >= 0; --d) {
            counters[d] += 1;
            off += strides_[static_cast<std::size_t>(d)];
            if (counters[d] < sizes_[static_cast<std::size_t>(d)]) break;
            counters[d] = 0;
            off -= sizes_[static_cast<std::size_t>(d)] * strides_[static_cast<std::size_t>(d)];
        }
    }
}

float* Tensor::data() {
    requireDefined();
    return storage_->data() + offset_;
}

const float* Tensor::data() const {
    requireDefined();
    return storage_->data() + offset_;
}

std::int64_t Tensor::indexOffset(std::span<const std::int64_t> index) const {
    PORTTEN_CHECK(static_cast<int>(index.size()) == dim(),
                  "element access expects one index per dimension");
    std::int64_t off = offset_;
    for (std::size_t d = 0; d < index.size(); ++d) {
        PORTTEN_CHECK(index[d] >= 0 && index[d] < sizes_[d], "element index out of bounds");
        off += index[d] * strides_[d];
    }
    return off;
}

float& Tensor::at(std::span<const std::int64_t> index) {
    requireDefined();
    return storage_->data()[indexOffset(index)];
}

float Tensor::at(std::span<const std::int64_t> index) const {
    requireDefined();
    return storage_->data()[indexOffset(index)];
}

float& Tensor::at(std::initializer_list<std::int64_t> index) {
    return at(std::span<const std::int64_t>(index.begin(), index.size()));
}

float Tensor::at(std::initializer_list<std::int64_t> index) const {
    return at(std::span<const std::int64_t>(index.begin(), index.size()));
}

float Tensor::item() const {
    requireDefined();
    PORTTEN_CHECK(numel() == 1, "item() requires a single-element tensor");
    return storage_->data()[offset_];
}

}  // namespace portten
