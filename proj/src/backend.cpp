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
#include "portten/backend.hpp"

#include <cstdlib>
#include <iostream>

#include "opencl_backend.hpp"

namespace portten {

LaunchConfig choose_launch(std::int64_t n, const BackendDescriptor& d) {
    PORTTEN_CHECK(n >= 1, "choose_launch requires at least one work item");
    PORTTEN_CHECK(d.maxWorkgroupSize >= 1, "backend reports no workgroup capacity");
    LaunchConfig lc;
    lc.workgroupSize = std::min(256, d.maxWorkgroupSize);
    const std::int64_t wg = lc.workgroupSize;
    lc.globalSize = (n + wg - 1) / wg * wg;
    return lc;
}

namespace {

std::string shapeOf(const Tensor& t) {
    std::string s = "[";
    for (int d = 0; d < t.dim(); ++d) {
        if (d) s += ",";
        s += std::to_string(t.size(d));
    }
    return s + "]";
}

std::vector<Backend*> probedBackends() {
    static std::vector<Backend*> backends = [] {
        std::vector<Backend*> list;
        list.push_back(&reference_backend());
#ifdef PORTTEN_HAVE_OPENCL
        try {
            for (Backend* b : opencl_probe_devices()) list.push_back(b);
        } catch (const std::exception& e) {
            std::cerr << "portten: device probe failed, using reference backend only: "
                      << e.what() << "\n";
        }
#endif
        return list;
    }();
    return backends;
}

std::string backendEnvMode() {
    const char* env = std::getenv("PORTTEN_BACKEND");
    if (!env || !*env) return "auto";
    return env;
}

}  // namespace

std::vector<Backend*> backend_enumerate() {
    std::vector<Backend*> all = probedBackends();
    if (backendEnvMode() == "reference") {
        return {all.front()};
    }
    return all;
}

Backend& select_backend(std::string_view requested) {
    std::string mode(requested.empty() ? "auto" : requested);
    if (mode == "auto") {
        mode = backendEnvMode();
        if (mode != "reference" && mode != "device") mode = "auto";
    }
    std::vector<Backend*> all = backend_enumerate();
    if (mode == "reference") return *all.front();

    std::vector<Backend*> devices;
    for (Backend* b : all) {
        if (b->descriptor().isDevice) devices.push_back(b);
    }
    if (mode == "device") {
        if (devices.empty()) {
            throw BackendError("no device backend available (build without a device runtime, "
                               "or probe failed)");
        }
        std::int64_t index = 0;
        if (const char* env = std::getenv("PORTTEN_DEVICE"); env && *env) {
            index = std::atoll(env);
        }
        if (index < 0 || index >= static_cast<std::int64_t>(devices.size())) {
            throw BackendError("PORTTEN_DEVICE index " + std::to_string(index) +
                               " out of range, " + std::to_string(devices.size()) +
                               " device(s) present");
        }
        return *devices[static_cast<std::size_t>(index)];
    }
    if (mode == "auto") {
        return devices.empty() ? *all.front() : *devices.front();
    }
    throw ValidationError("unknown backend selector '" + mode +
                          "' (expected reference, device, or auto)");
}

void dispatch_apply(std::string_view expression, std::span<Tensor> operands, float scalar,
                    Backend& backend) {
    PORTTEN_CHECK(!operands.empty() && operands.size() <= 3,
                  "apply takes 1..3 operands, got " + std::to_string(operands.size()));
    for (const Tensor& t : operands) {
        PORTTEN_CHECK(t.defined(), "apply operand is undefined");
        PORTTEN_CHECK(t.sizes() == operands[0].sizes(),
                      "apply operands must share sizes: " + shapeOf(operands[0]) + " vs " +
                          shapeOf(t));
    }

    std::vector<codegen::OperandGeometry> geoms;
    geoms.reserve(operands.size());
    for (const Tensor& t : operands) geoms.push_back(codegen::OperandGeometry::of(t));
    codegen::ApplySpec spec = codegen::make_apply_spec(std::string(expression), geoms);

    // Same grammar and validation on every backend.
    const expr::Program program = expr::Program::parse(spec.expression, spec.arity);

    const LaunchConfig lc = choose_launch(operands[0].numel(), backend.descriptor());
    PORTTEN_CHECK(lc.workgroupSize <= backend.descriptor().maxWorkgroupSize,
                  "launch config exceeds device workgroup limit");
    PORTTEN_CHECK(lc.globalSize % lc.workgroupSize == 0,
                  "global size must be a multiple of the workgroup size");

    backend.runApply(spec, program, operands, scalar, lc);
}

float dispatch_reduce_all(ReduceOp op, const Tensor& t, Backend& backend) {
    PORTTEN_CHECK(t.defined(), "reduce on an undefined tensor");
    PORTTEN_CHECK(t.numel() >= 1, "reduce on an empty tensor");
    const LaunchConfig lc = choose_launch(t.numel(), backend.descriptor());
    PORTTEN_CHECK(lc.workgroupSize <= backend.descriptor().maxWorkgroupSize,
                  "launch config exceeds device workgroup limit");
    return backend.runReduceAll(op, t);
}

Tensor dispatch_reduce_dim(ReduceOp op, const Tensor& t, int dim, Backend& backend) {
    PORTTEN_CHECK(t.defined(), "reduce on an undefined tensor");
    PORTTEN_CHECK(dim >= 0 && dim < t.dim(),
                  "reduce dim " + std::to_string(dim) + " out of range for rank " +
                      std::to_string(t.dim()));
    const LaunchConfig lc = choose_launch(t.numel(), backend.descriptor());
    PORTTEN_CHECK(lc.workgroupSize <= backend.descriptor().maxWorkgroupSize,
                  "launch config exceeds device workgroup limit");
    return backend.runReduceDim(op, t, dim);
}

DeviceBuffer device_upload(const Tensor& t, Backend& backend) {
    PORTTEN_CHECK(t.defined(), "upload of an undefined tensor");
    const Tensor staged = t.contiguous();
    return backend.uploadContiguous(staged);
}

void device_download(const DeviceBuffer& buf, Tensor& dst, Backend& backend) {
    PORTTEN_CHECK(dst.defined(), "download into an undefined tensor");
    PORTTEN_CHECK(buf.elems == dst.numel(),
                  "download size mismatch: buffer holds " + std::to_string(buf.elems) +
                      " element(s), destination expects " + std::to_string(dst.numel()));
    if (dst.isContiguous()) {
        backend.downloadContiguous(buf, dst);
        return;
    }
    Tensor staged = Tensor::create(dst.sizes());
    backend.downloadContiguous(buf, staged);
    dst.copyFrom(staged);
}

}  // namespace portten
