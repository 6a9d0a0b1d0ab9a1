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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "portten/conv_geometry.hpp"
#include "portten/errors.hpp"
#include "portten/tensor.hpp"

namespace portten::codegen {

/// Rendered, geometry-specialized portable kernel text. Everything about the
/// problem geometry (sizes, strides, storage offsets, loop trip counts) is
/// baked into the text as literals, so the text itself is the cache identity.
struct KernelSource {
    std::string text;
    std::string entryPoint;
    std::string buildOptions;  // passed to the backend compiler, may be empty
};

/// Shape/stride/offset of one kernel operand, captured from a Tensor or
/// built directly.
struct OperandGeometry {
    std::vector<std::int64_t> sizes;
    std::vector<std::int64_t> strides;
    std::int64_t storageOffset = 0;

    static OperandGeometry of(const Tensor& t) {
        return OperandGeometry{t.sizes(), t.strides(), t.storageOffset()};
    }

    bool contiguous() const { return strides == rowMajorStrides(sizes); }
    std::int64_t numel() const {
        std::int64_t n = 1;
        for (std::int64_t s : sizes) n *= s;
        return n;
    }
};

/// Descriptor of a pointwise operation over 1..3 same-shaped operands plus a
/// scalar. operand 0 (named x) is the destination.
struct ApplySpec {
    int arity = 1;
    std::string expression;            // "x = <expr over x,y,z,s>"
    std::vector<int> operandDims;      // rank per operand
    std::vector<bool> contiguityFlags; // per operand
};

ApplySpec make_apply_spec(std::string expression, std::span<const OperandGeometry> operands);

enum class ReduceOp { Sum, Max, Min };

const char* reduceOpName(ReduceOp op);

/// Reduce-all when dim is empty, otherwise reduce along that dimension.
struct ReduceGeometry {
    std::vector<std::int64_t> sizes;
    std::vector<std::int64_t> strides;
    std::int64_t storageOffset = 0;
    std::optional<int> dim;

    static ReduceGeometry allOf(const Tensor& t) {
        return ReduceGeometry{t.sizes(), t.strides(), t.storageOffset(), std::nullopt};
    }
    static ReduceGeometry alongDim(const Tensor& t, int dim) {
        return ReduceGeometry{t.sizes(), t.strides(), t.storageOffset(), dim};
    }
};

/// Pointwise kernel specialized to the operands' exact rank, strides and
/// offsets. Contiguous operands index flat off the global id; strided ones
/// get an unrolled per-dimension decode of the logical index.
KernelSource gen_apply_kernel(const ApplySpec& spec, std::span<const OperandGeometry> operands);

/// Two-stage tree reduction. Stage one reduces workgroup-local spans in
/// local memory with the tree steps unrolled for the given workgroup size
/// (one of 32/64/128/256); reduce-all sources also carry a *_stage2 kernel
/// that folds the per-group partials (small partial counts may instead be
/// finished on the host).
KernelSource gen_reduce_kernel(ReduceOp op, const ReduceGeometry& geometry, int workgroupSize);

/// Column-lowering kernel for one image. The kernel tap loops are unrolled
/// when kH*kW <= 25, and the boundary guard is only emitted when the
/// geometry actually pads.
KernelSource gen_im2col_kernel(const conv::ConvGeometry& geom);

/// When set, every KernelSource produced by the generators above is also
/// written to <dir>/NNN_<entry>.cl in generation order.
void set_kernel_dump_dir(std::optional<std::filesystem::path> dir);

}  // namespace portten::codegen
