//
// Copyright 2026 The Memlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef MEMLAB_EMBEDDED_DATA_H_
#define MEMLAB_EMBEDDED_DATA_H_

#include <string_view>

// Copies of the files under data/, compiled in at configure time so the
// library works without a source checkout.
namespace memlab::embedded {

std::string_view ScrubRulesJson();
std::string_view CanarySuiteTsv();
std::string_view ReferenceResultsCsv();

}  // namespace memlab::embedded

#endif  // MEMLAB_EMBEDDED_DATA_H_
