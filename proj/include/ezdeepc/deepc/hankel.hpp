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

#ifndef EZDEEPC_DEEPC_HANKEL_HPP
#define EZDEEPC_DEEPC_HANKEL_HPP

#include "ezdeepc/common.hpp"

namespace ezdeepc::deepc {

class TooShort : public Error {
 public:
  using Error::Error;
};

/// Relative singular-value cutoff used for numerical rank and pseudoinverse.
inline constexpr double kRankTolerance = 1e-10;

/// Block Hankel matrix of depth `depth` from a T x dim sequence (one row per
/// sample). Column j stacks samples j..j+depth-1, giving a
/// (dim * depth) x (T - depth + 1) matrix.
Matrix build_hankel(const Matrix& seq, Eigen::Index depth);

struct ExcitationReport {
  bool persistently_exciting = false;
  Eigen::Index rank = 0;
  Eigen::Index rows = 0;
  double largest_singular_value = 0.0;
  double smallest_singular_value = 0.0;
};

/// Full-row-rank test of the depth-`order` Hankel matrix of `seq`.
ExcitationReport check_persistent_excitation(const Matrix& seq,
                                             Eigen::Index order);

/// Pseudoinverse with singular values below kRankTolerance * sigma_max
/// discarded.
Matrix pseudo_inverse(const Matrix& a, double rel_tol = kRankTolerance);

}  // namespace ezdeepc::deepc

#endif  // EZDEEPC_DEEPC_HANKEL_HPP
