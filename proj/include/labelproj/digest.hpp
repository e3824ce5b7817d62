// Copyright 2026 The labelproj Authors.
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

#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace labelproj {

std::string sha256_hex(std::string_view data);

/// Recursively NFC-normalizes every string value. Combined with
/// nlohmann::json's sorted object keys this yields a canonical form:
/// equal logical inputs serialize to equal bytes.
nlohmann::json canonicalize(const nlohmann::json& j);

/// Stable digest over the canonical serialization of a JSON value.
std::string canonical_digest(const nlohmann::json& j);

}  // namespace labelproj
