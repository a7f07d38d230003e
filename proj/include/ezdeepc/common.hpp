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

#ifndef EZDEEPC_COMMON_HPP
#define EZDEEPC_COMMON_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ezdeepc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of every domain error raised by the library. Callers that only
/// need to distinguish "domain failure" from "usage error" catch this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double v, double tol = 0.0) const {
    return v >= lo - tol && v <= hi + tol;
  }
  [[nodiscard]] double width() const { return hi - lo; }
  [[nodiscard]] double clamp(double v) const {
    return v < lo ? lo : (v > hi ? hi : v);
  }
};

}  // namespace ezdeepc

#endif  // EZDEEPC_COMMON_HPP
