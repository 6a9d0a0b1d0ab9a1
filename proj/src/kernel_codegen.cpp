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
#include "portten/kernel_codegen.hpp"

#include <atomic>
#include <fstream>
#include <mutex>

#include "portten/embedded_templates.hpp"
#include "portten/expression.hpp"
#include "portten/template_engine.hpp"

namespace portten::codegen {

namespace {

const tmpl::Template& applyTemplate() {
    static const tmpl::Template t = tmpl::Template::parse(embedded::kApplyTemplate);
    return t;
}

const tmpl::Template& reduceTemplate() {
    static const tmpl::Template t = tmpl::Template::parse(embedded::kReduceTemplate);
    return t;
}

const tmpl::Template& im2colTemplate() {
    static const tmpl::Template t = tmpl::Template::parse(embedded::kIm2colTemplate);
    return t;
}

std::mutex gDumpMutex;
std::optional<std::filesystem::path> gDumpDir;
std::atomic<std::uint64_t> gDumpCounter{0};

void maybeDump(const KernelSource& src) {
    std::filesystem::path dir;
    {
        std::lock_guard<std::mutex> lock(gDumpMutex);
        if (!gDumpDir) return;
        dir = *gDumpDir;
    }
    const std::uint64_t n = gDumpCounter.fetch_add(1);
    char prefix[8];
    std::snprintf(prefix, sizeof(prefix), "%03llu", static_cast<unsigned long long>(n));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(dir / (std::string(prefix) + "_" + src.entryPoint + ".cl"),
                      std::ios::binary);
    out << src.text;
}

std::string str(std::int64_t v) { return std::to_string(v); }

const char operandNames[3] = {'x', 'y', 'z'};

// Per-dimension decode of a linear row-major position `posVar` into a storage
// index `idxVar`, with all divisors, extents and strides baked as literals.
std::vector<std::string> decodeLines(const std::string& idxVar, const std::string& posVar,
                                     const std::vector<std::int64_t>& sizes,
                                     const std::vector<std::int64_t>& strides,
                                     std::int64_t offset) {
    std::vector<std::string> lines;
    lines.push_back("int " + idxVar + " = " + str(offset) + ";");
    std::int64_t divisor = 1;
    std::vector<std::int64_t> divisors(sizes.size());
    for (int d = static_cast<int>(sizes.size()) - 1; d >= 0; --d) {
        divisors[static_cast<std::size_t>(d)] = divisor;
        divisor *= sizes[static_cast<std::size_t>(d)];
    }
    for (std::size_t d = 0; d < sizes.size(); ++d) {
        lines.push_back(idxVar + " += ((" + posVar + " / " + str(divisors[d]) + ") % " +
                        str(sizes[d]) + ") * " + str(strides[d]) + ";");
    }
    return lines;
}

void validateOperandGeometry(const OperandGeometry& g, int index) {
    PORTTEN_CHECK(!g.sizes.empty() && g.sizes.size() == g.strides.size(),
                  "apply codegen: operand " + str(index) + " has inconsistent geometry");
    PORTTEN_CHECK(static_cast<int>(g.sizes.size()) <= kMaxDims,
                  "apply codegen: operand " + str(index) + " rank exceeds " + str(kMaxDims));
    PORTTEN_CHECK(g.storageOffset >= 0, "apply codegen: negative storage offset");
    for (std::int64_t s : g.sizes) {
        PORTTEN_CHECK(s >= 1, "apply codegen: operand sizes must be >= 1");
    }
}

}  // namespace

const char* reduceOpName(ReduceOp op) {
    switch (op) {
        case ReduceOp::Sum: return "sum";
        case ReduceOp::Max: return "max";
        case ReduceOp::Min: return "min";
    }
    return "?";
}

void set_kernel_dump_dir(std::optional<std::filesystem::path> dir) {
    std::lock_guard<std::mutex> lock(gDumpMutex);
    gDumpDir = std::move(dir);
}

ApplySpec make_apply_spec(std::string expression, std::span<const OperandGeometry> operands) {
    PORTTEN_CHECK(!operands.empty() && operands.size() <= 3,
                  "apply takes 1..3 operands, got " + str(static_cast<std::int64_t>(operands.size())));
    ApplySpec spec;
    spec.arity = static_cast<int>(operands.size());
    spec.expression = std::move(expression);
    for (const OperandGeometry& g : operands) {
        spec.operandDims.push_back(static_cast<int>(g.sizes.size()));
        spec.contiguityFlags.push_back(g.contiguous());
    }
    return spec;
}

KernelSource gen_apply_kernel(const ApplySpec& spec, std::span<const OperandGeometry> operands) {
    PORTTEN_CHECK(spec.arity >= 1 && spec.arity <= 3, "apply arity must be 1..3");
    PORTTEN_CHECK(static_cast<int>(operands.size()) == spec.arity,
                  "apply codegen: operand count does not match spec arity");
    for (int i = 0; i < spec.arity; ++i) {
        validateOperandGeometry(operands[static_cast<std::size_t>(i)], i);
        PORTTEN_CHECK(operands[0].sizes == operands[static_cast<std::size_t>(i)].sizes,
                      "apply codegen: operands must share identical sizes");
    }

    // Validates identifier use; referencing an undeclared operand throws here.
    const expr::Program program = expr::Program::parse(spec.expression, spec.arity);

    std::vector<std::string> paramDecls, indexLines, loadLines, storeLines;
    for (int i = 0; i < spec.arity; ++i) {
        const OperandGeometry& g = operands[static_cast<std::size_t>(i)];
        const std::string name(1, operandNames[i]);
        paramDecls.push_back(std::string(i == 0 ? "global float* data_" : "global const float* data_") +
                             name);
        if (g.contiguous()) {
            indexLines.push_back("const int idx_" + name + " = " +
                                 (g.storageOffset == 0 ? "gid"
                                                       : str(g.storageOffset) + " + gid") +
                                 ";");
        } else {
            for (auto& line : decodeLines("idx_" + name, "gid", g.sizes, g.strides,
                                          g.storageOffset)) {
                indexLines.push_back(std::move(line));
            }
        }
        loadLines.push_back("float " + name + " = data_" + name + "[idx_" + name + "];");
    }
    storeLines.push_back("data_x[idx_x] = x;");

    tmpl::RenderContext ctx;
    ctx.bind("entry", "portten_apply");
    ctx.bind("param_decls", paramDecls);
    ctx.bind("index_lines", indexLines);
    ctx.bind("load_lines", loadLines);
    ctx.bind("assign_stmt", program.kernelStatement());
    ctx.bind("store_lines", storeLines);

    KernelSource src{applyTemplate().render(ctx), "portten_apply", ""};
    maybeDump(src);
    return src;
}

KernelSource gen_reduce_kernel(ReduceOp op, const ReduceGeometry& geometry, int workgroupSize) {
    PORTTEN_CHECK(workgroupSize == 32 || workgroupSize == 64 || workgroupSize == 128 ||
                      workgroupSize == 256,
                  "reduce workgroup size must be one of 32/64/128/256, got " +
                      str(workgroupSize));
    PORTTEN_CHECK(!geometry.sizes.empty() && geometry.sizes.size() == geometry.strides.size(),
                  "reduce codegen: inconsistent geometry");
    PORTTEN_CHECK(static_cast<int>(geometry.sizes.size()) <= kMaxDims,
                  "reduce codegen: rank exceeds " + str(kMaxDims));

    const char* combineExpr = nullptr;
    const char* identity = nullptr;
    switch (op) {
        case ReduceOp::Sum:
            combineExpr = "a + b";
            identity = "0.0f";
            break;
        case ReduceOp::Max:
            combineExpr = "fmax(a, b)";
            identity = "-INFINITY";
            break;
        case ReduceOp::Min:
            combineExpr = "fmin(a, b)";
            identity = "INFINITY";
            break;
    }

    std::vector<std::int64_t> treeSteps;
    for (int step = workgroupSize / 2; step >= 1; step /= 2) treeSteps.push_back(step);

    tmpl::RenderContext ctx;
    ctx.bind("entry", "portten_reduce");
    ctx.bind("wg", workgroupSize);
    ctx.bind("combine_expr", combineExpr);
    ctx.bind("identity", identity);
    ctx.bind("tree_steps", treeSteps);

    if (!geometry.dim) {
        ctx.bind("reduce_all", true);
        ctx.bind("index_lines", decodeLines("idx", "pos", geometry.sizes, geometry.strides,
                                            geometry.storageOffset));
    } else {
        const int d = *geometry.dim;
        PORTTEN_CHECK(d >= 0 && d < static_cast<int>(geometry.sizes.size()),
                      "reduce codegen: dim " + str(d) + " out of range");
        ctx.bind("reduce_all", false);
        // Decode the output position over the non-reduced dimensions.
        std::vector<std::int64_t> outerSizes, outerStrides;
        for (std::size_t i = 0; i < geometry.sizes.size(); ++i) {
            if (static_cast<int>(i) == d) continue;
            outerSizes.push_back(geometry.sizes[i]);
            outerStrides.push_back(geometry.strides[i]);
        }
        if (outerSizes.empty()) {
            // Rank-1 tensor reduced along its only dimension.
            outerSizes.push_back(1);
            outerStrides.push_back(0);
        }
        ctx.bind("base_lines", decodeLines("base", "out_pos", outerSizes, outerStrides,
                                           geometry.storageOffset));
        ctx.bind("reduce_len", geometry.sizes[static_cast<std::size_t>(d)]);
        ctx.bind("reduce_stride", geometry.strides[static_cast<std::size_t>(d)]);
    }

    KernelSource src{reduceTemplate().render(ctx), "portten_reduce", ""};
    maybeDump(src);
    return src;
}

KernelSource gen_im2col_kernel(const conv::ConvGeometry& geom) {
    geom.validate();

    const std::int64_t outH = geom.outHeight();
    const std::int64_t outW = geom.outWidth();
    const bool unrolled = geom.kernelH * geom.kernelW <= 25;
    const bool hasPad = geom.padH > 0 || geom.padW > 0;

    tmpl::RenderContext ctx;
    ctx.bind("entry", "portten_im2col");
    ctx.bind("n_items", geom.inChannels * outH * outW);
    ctx.bind("outH", outH);
    ctx.bind("outW", outW);
    ctx.bind("out_spatial", outH * outW);
    ctx.bind("strideH", geom.strideH);
    ctx.bind("strideW", geom.strideW);
    ctx.bind("padH", geom.padH);
    ctx.bind("padW", geom.padW);
    ctx.bind("channel_stride", geom.inHeight * geom.inWidth);
    ctx.bind("H", geom.inHeight);
    ctx.bind("W", geom.inWidth);
    ctx.bind("kH", geom.kernelH);
    ctx.bind("kW", geom.kernelW);
    ctx.bind("patch", geom.kernelH * geom.kernelW);
    ctx.bind("unrolled", unrolled);
    ctx.bind("has_pad", hasPad);

    KernelSource src{im2colTemplate().render(ctx), "portten_im2col", ""};
    maybeDump(src);
    return src;
}

}  // namespace portten::codegen
