// Copyright 2026 The ezdeepc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EZDEEPC_HYDRO_CONFIG_IO_HPP
#define EZDEEPC_HYDRO_CONFIG_IO_HPP

#include <string>

#include "json.hpp"

#include "ezdeepc/hydro/types.hpp"

namespace ezdeepc {

/// Read a JSON document; throws ConfigError with the path on failure.
nlohmann::json read_json_file(const std::string& path);

/// Parse a `[min, max]` pair.
Interval parse_interval(const nlohmann::json& j);

}  // namespace ezdeepc

namespace ezdeepc::hydro {

/// Parse the "plant" section of a configuration document and validate it.
WaterSystemConfig parse_water_system(const nlohmann::json& plant);

nlohmann::json to_json(const WaterSystemConfig& config);

}  // namespace ezdeepc::hydro

#endif  // EZDEEPC_HYDRO_CONFIG_IO_HPP
