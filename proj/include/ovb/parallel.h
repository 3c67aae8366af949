// Copyright 2026 The ovb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Every data-parallel kernel in the library comes as a pair: a plain serial
// loop kept as the reference, and an OpenMP version that must produce
// identical results. ExecPolicy selects between them at the call sites.

#ifndef OVB_PARALLEL_H_
#define OVB_PARALLEL_H_

namespace ovb {

enum class ExecPolicy { kSerial, kParallel };

// Caps OpenMP worker threads for subsequent parallel kernels; 0 keeps the
// runtime default.
void set_worker_threads(int threads);
int worker_threads();

}  // namespace ovb

#endif  // OVB_PARALLEL_H_
