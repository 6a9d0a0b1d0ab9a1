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
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "portten/backend.hpp"

namespace portten {

namespace {

// Odometer over the logical row-major index space of up to three same-shaped
// views, tracking one storage offset per view.
class MultiOdometer {
public:
    MultiOdometer(std::span<const Tensor> tensors) {
        count_ = static_cast<int>(tensors.size());
        rank_ = tensors[0].dim();
        for (int d = 0; d < rank_; ++d) sizes_[d] = tensors[0].size(d);
        for (int t = 0; t < count_; ++t) {
            offsets_[t] = tensors[t].storageOffset();
            for (int d = 0; d < rank_; ++d) {
                strides_[t][d] = tensors[t].stride(d);
            }
        }
        for (int d = 0; d < rank_; ++d) counters_[d] = 0;
    }

    std::int64_t offset(int t) const { return offsets_[t]; }

    void step() {
        for (int d = rank_ - 1; d >= 0; --d) {
            counters_[d] += 1;
            for (int t = 0; t < count_; ++t) offsets_[t] += strides_[t][d];
            if (counters_[d] < sizes_[d]) return;
            counters_[d] = 0;
            for (int t = 0; t < count_; ++t) offsets_[t] -= sizes_[d] * strides_[t][d];
        }
    }

private:
    int count_ = 0;
    int rank_ = 0;
    std::int64_t sizes_[kMaxDims];
    std::int64_t counters_[kMaxDims];
    std::int64_t offsets_[3];
    std::int64_t strides_[3][kMaxDims];
};

/// Host interpreter backend. Operation descriptors are executed directly;
/// the generated kernel text is never evaluated here (generated-source
/// correctness is covered by the golden-file suite and, when hardware
/// exists, by device/reference equivalence).
class ReferenceBackend final : public Backend {
public:
    ReferenceBackend() {
        desc_.name = "reference";
        desc_.maxWorkgroupSize = 256;   // simulated limit, matches common hardware caps
        desc_.localMemBytes = 32768;
        desc_.isDevice = false;
    }

    const BackendDescriptor& descriptor() const override { return desc_; }

    void runApply(const codegen::ApplySpec& spec, const expr::Program& program,
                  std::span<Tensor> operands, float scalar, const LaunchConfig&) override {
        const std::int64_t n = operands[0].numel();
        const int arity = spec.arity;

        float* bases[3] = {nullptr, nullptr, nullptr};
        bool allContiguous = true;
        for (int t = 0; t < arity; ++t) {
            bases[t] = operands[static_cast<std::size_t>(t)].storage()->data();
            allContiguous = allContiguous && operands[static_cast<std::size_t>(t)].isContiguous();
        }

        std::array<float, 3> values{};
        if (allContiguous) {
            std::int64_t offs[3] = {0, 0, 0};
            for (int t = 0; t < arity; ++t) {
                offs[t] = operands[static_cast<std::size_t>(t)].storageOffset();
            }
            for (std::int64_t i = 0; i < n; ++i) {
                for (int t = 0; t < arity; ++t) values[static_cast<std::size_t>(t)] = bases[t][offs[t] + i];
                bases[0][offs[0] + i] =
                    program.eval(std::span<const float>(values.data(), static_cast<std::size_t>(arity)), scalar);
            }
            return;
        }

        MultiOdometer odo(std::span<const Tensor>(operands.data(), operands.size()));
        for (std::int64_t i = 0; i < n; ++i) {
            for (int t = 0; t < arity; ++t) values[static_cast<std::size_t>(t)] = bases[t][odo.offset(t)];
            bases[0][odo.offset(0)] =
                program.eval(std::span<const float>(values.data(), static_cast<std::size_t>(arity)), scalar);
            odo.step();
        }
    }

    float runReduceAll(ReduceOp op, const Tensor& t) override {
        // Sequential accumulation in logical order (device backends reduce
        // tree-wise; the 1e-5 relative tolerance bridges the two orders).
        const std::int64_t n = t.numel();
        const float* base = t.storage()->data();
        MultiOdometer odo(std::span<const Tensor>(&t, 1));
        float acc = identity(op);
        for (std::int64_t i = 0; i < n; ++i) {
            acc = combine(op, acc, base[odo.offset(0)]);
            odo.step();
        }
        return acc;
    }

    Tensor runReduceDim(ReduceOp op, const Tensor& t, int dim) override {
        std::vector<std::int64_t> outSizes = t.sizes();
        outSizes[static_cast<std::size_t>(dim)] = 1;
        Tensor out = Tensor::create(outSizes);

        const std::int64_t reduceLen = t.size(dim);
        const std::int64_t reduceStride = t.stride(dim);
        const float* srcBase = t.storage()->data();
        float* dstBase = out.storage()->data();

        // Walk the output space; each output element owns a strided run of
        // the input along `dim`.
        Tensor srcOuter = t.dim() == 1 ? t.narrow(0, 0, 1) : t.select(dim, 0);
        Tensor dstOuter = out.dim() == 1 ? out : out.select(dim, 0);
        const std::int64_t outerCount = srcOuter.numel();
        const Tensor pair[2] = {srcOuter, dstOuter};
        MultiOdometer odo(std::span<const Tensor>(pair, 2));
        for (std::int64_t i = 0; i < outerCount; ++i) {
            float acc = identity(op);
            const std::int64_t base = odo.offset(0);
            for (std::int64_t j = 0; j < reduceLen; ++j) {
                acc = combine(op, acc, srcBase[base + j * reduceStride]);
            }
            dstBase[odo.offset(1)] = acc;
            odo.step();
        }
        return out;
    }

    DeviceBuffer uploadContiguous(const Tensor& t) override {
        PORTTEN_CHECK(t.isContiguous(), "upload expects a contiguous tensor");
        auto copy = std::make_shared<std::vector<float>>(t.data(), t.data() + t.numel());
        return DeviceBuffer{copy, t.numel(), desc_.name};
    }

    void downloadContiguous(const DeviceBuffer& buf, Tensor& dst) override {
        PORTTEN_CHECK(dst.isContiguous(), "download expects a contiguous tensor");
        PORTTEN_CHECK(buf.backendName == desc_.name, "buffer belongs to another backend");
        const auto* copy = static_cast<const std::vector<float>*>(buf.impl.get());
        PORTTEN_CHECK(copy != nullptr && static_cast<std::int64_t>(copy->size()) == dst.numel(),
                      "download size mismatch");
        float* out = dst.data();
        for (std::size_t i = 0; i < copy->size(); ++i) out[i] = (*copy)[i];
    }

private:
    BackendDescriptor desc_;

    static float identity(ReduceOp op) {
        switch (op) {
            case ReduceOp::Sum: return 0.0f;
            case ReduceOp::Max: return -std::numeric_limits<float>::infinity();
            case ReduceOp::Min: return std::numeric_limits<float>::infinity();
        }
        return 0.0f;
    }

    static float combine(ReduceOp op, float a, float b) {
        switch (op) {
            case ReduceOp::Sum: return a + b;
            case ReduceOp::Max: return std::fmax(a, b);
            case ReduceOp::Min: return std::fmin(a, b);
        }
        return a;
    }
};

}  // namespace

Backend& reference_backend() {
    static ReferenceBackend backend;
    return backend;
}

}  // namespace portten
