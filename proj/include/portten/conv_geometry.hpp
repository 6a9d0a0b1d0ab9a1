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
#include <string>

#include "portten/errors.hpp"

namespace portten::conv {

/// Full descriptor of a 2-D convolution problem: batched NCHW input against
/// K x C x kH x kW weights, zero padding, cross-correlation orientation.
/// Output dims follow the floor rule outH = (H + 2*padH - kH) / strideH + 1.
struct ConvGeometry {
    std::int64_t batch = 1;
    std::int64_t inChannels = 1;
    std::int64_t inHeight = 1;
    std::int64_t inWidth = 1;
    std::int64_t outChannels = 1;
    std::int64_t kernelH = 1;
    std::int64_t kernelW = 1;
    std::int64_t padH = 0;
    std::int64_t padW = 0;
    std::int64_t strideH = 1;
    std::int64_t strideW = 1;

    std::int64_t outHeight() const {
        return (inHeight + 2 * padH - kernelH) / strideH + 1;
    }
    std::int64_t outWidth() const {
        return (inWidth + 2 * padW - kernelW) / strideW + 1;
    }

    /// Rows of the im2col matrix: one per (c, r, s) weight tap.
    std::int64_t patchSize() const { return inChannels * kernelH * kernelW; }
    /// Columns of the im2col matrix: one per output position.
    std::int64_t outSpatial() const { return outHeight() * outWidth(); }

    void validate() const {
        PORTTEN_CHECK(batch >= 1 && inChannels >= 1 && inHeight >= 1 && inWidth >= 1 &&
                          outChannels >= 1 && kernelH >= 1 && kernelW >= 1 && strideH >= 1 &&
                          strideW >= 1,
                      "conv geometry: counts, dims, kernel and stride must be >= 1");
        PORTTEN_CHECK(padH >= 0 && padW >= 0, "conv geometry: padding must be >= 0");
        PORTTEN_CHECK(kernelH <= inHeight + 2 * padH && kernelW <= inWidth + 2 * padW,
                      "conv geometry: kernel exceeds padded input (" + toString() + ")");
        PORTTEN_CHECK(outHeight() >= 1 && outWidth() >= 1,
                      "conv geometry: empty output (" + toString() + ")");
    }

    std::string toString() const {
        return "N" + std::to_string(batch) + " C" + std::to_string(inChannels) + " H" +
               std::to_string(inHeight) + " W" + std::to_string(inWidth) + " K" +
               std::to_string(outChannels) + " k" + std::to_string(kernelH) + "x" +
               std::to_string(kernelW) + " p" + std::to_string(padH) + "x" +
               std::to_string(padW) + " s" + std::to_string(strideH) + "x" +
               std::to_string(strideW);
    }

    bool operator==(const ConvGeometry&) const = default;
};

}  // namespace portten::conv
