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

#ifdef PORTTEN_HAVE_OPENCL

#include <vector>

#include "portten/backend.hpp"

namespace portten {

/// Probes the OpenCL runtime and returns one backend per usable device.
/// Throws BackendError when the platform query itself fails; returns an
/// empty list when no devices are present.
std::vector<Backend*> opencl_probe_devices();

}  // namespace portten

#endif  // PORTTEN_HAVE_OPENCL
