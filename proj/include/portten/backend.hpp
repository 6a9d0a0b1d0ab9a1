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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "portten/expression.hpp"
#include "portten/kernel_codegen.hpp"
#include "portten/tensor.hpp"

namespace portten {

/// Device capability record driving launch-config decisions. Hardware
/// geometry differs enough across vendors (a kernel assuming 512 workgroup
/// threads dies on hardware capped at 256) that every sizing decision goes
/// through this descriptor.
struct BackendDescriptor {
    std::string name;
    int maxWorkgroupSize = 1;
    std::int64_t localMemBytes = 0;
    bool isDevice = false;
};

struct LaunchConfig {
    std::int64_t globalSize = 0;
    int workgroupSize = 0;
};

/// workgroupSize = min(256, device max); globalSize = n rounded up to a
/// multiple of it.
LaunchConfig choose_launch(std::int64_t n, const BackendDescriptor& d);

/// Opaque device-side buffer handle returned by upload.
struct DeviceBuffer {
    std::shared_ptr<void> impl;
    std::int64_t elems = 0;
    std::string backendName;
};

using ReduceOp = codegen::ReduceOp;

/// Execution backend. The reference backend always exists and interprets
/// operation descriptors on the host; device backends compile the generated
/// kernels through the kernel cache and launch them. Both honor the same
/// dispatch contract, including arbitrary strides and storage offsets.
///
/// Backends are safe for concurrent dispatch on distinct tensors; dispatches
/// touching the same destination need external ordering.
class Backend {
public:
    virtual ~Backend() = default;

    virtual const BackendDescriptor& descriptor() const = 0;

    // Raw execution entry points; use the dispatch_* wrappers below, which
    // perform the argument validation shared by every backend.
    virtual void runApply(const codegen::ApplySpec& spec, const expr::Program& program,
                          std::span<Tensor> operands, float scalar, const LaunchConfig& lc) = 0;
    virtual float runReduceAll(ReduceOp op, const Tensor& t) = 0;
    virtual Tensor runReduceDim(ReduceOp op, const Tensor& t, int dim) = 0;
    virtual DeviceBuffer uploadContiguous(const Tensor& t) = 0;
    virtual void downloadContiguous(const DeviceBuffer& buf, Tensor& dst) = 0;
};

/// Reference backend (host interpreter). Reports simulated device limits:
/// maxWorkgroupSize 256, localMemBytes 32768.
Backend& reference_backend();

/// All live backends: reference first, then any device backends whose
/// runtime probed successfully at startup. PORTTEN_BACKEND=reference hides
/// devices; a failed device probe degrades to reference-only with a warning.
std::vector<Backend*> backend_enumerate();

/// Resolve "reference" | "device" | "auto". "auto" prefers a device when one
/// exists (honoring PORTTEN_BACKEND and PORTTEN_DEVICE); "device" with no
/// device available is a BackendError.
Backend& select_backend(std::string_view requested);

/// Pointwise dispatch: operands share sizes, operands[0] is the destination.
/// The expression grammar is parsed identically on every backend, so
/// validation errors do not depend on where the op runs.
void dispatch_apply(std::string_view expression, std::span<Tensor> operands, float scalar,
                    Backend& backend);

float dispatch_reduce_all(ReduceOp op, const Tensor& t, Backend& backend);

/// Keeps the reduced dimension with size 1.
Tensor dispatch_reduce_dim(ReduceOp op, const Tensor& t, int dim, Backend& backend);

/// Round-trip upload/download. Non-contiguous tensors are staged through a
/// contiguous copy on the way up; downloads into non-contiguous views stage
/// on the way down. upload(download(x)) is bitwise identity.
DeviceBuffer device_upload(const Tensor& t, Backend& backend);
void device_download(const DeviceBuffer& buf, Tensor& dst, Backend& backend);

}  // namespace portten
