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

#ifndef EZDEEPC_DEEPC_TRAJECTORY_HPP
#define EZDEEPC_DEEPC_TRAJECTORY_HPP

#include <iosfwd>
#include <string>

#include "ezdeepc/common.hpp"

namespace ezdeepc::deepc {

/// Input/output record with one row per sampling instant. `disturbances` may
/// have zero columns.
struct TrajectoryData {
  Matrix inputs;        // T x m
  Matrix outputs;       // T x p
  Matrix disturbances;  // T x q

  [[nodiscard]] Eigen::Index length() const { return inputs.rows(); }
  [[nodiscard]] Eigen::Index input_dim() const { return inputs.cols(); }
  [[nodiscard]] Eigen::Index output_dim() const { return outputs.cols(); }

  /// Throws DimensionMismatch if the row counts disagree.
  void check() const;
};

/// CSV with header `t,u_1..u_m,y_1..y_p[,d_1..d_q]`, one row per step.
void write_csv(std::ostream& out, const TrajectoryData& data);
void write_csv(const std::string& path, const TrajectoryData& data);
TrajectoryData read_csv(std::istream& in);
TrajectoryData read_csv(const std::string& path);

}  // namespace ezdeepc::deepc

#endif  // EZDEEPC_DEEPC_TRAJECTORY_HPP
