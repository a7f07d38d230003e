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

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "ezdeepc/deepc/trajectory.hpp"

namespace ezdeepc::deepc {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

}  // namespace

void TrajectoryData::check() const {
  if (outputs.rows() != inputs.rows() ||
      (disturbances.cols() > 0 && disturbances.rows() != inputs.rows())) {
    throw DimensionMismatch("trajectory inputs, outputs and disturbances differ in length");
  }
}

void write_csv(std::ostream& out, const TrajectoryData& data) {
  data.check();
  out << "t";
  for (Eigen::Index i = 0; i < data.input_dim(); ++i) out << ",u_" << i + 1;
  for (Eigen::Index i = 0; i < data.output_dim(); ++i) out << ",y_" << i + 1;
  for (Eigen::Index i = 0; i < data.disturbances.cols(); ++i) out << ",d_" << i + 1;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index k = 0; k < data.length(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < data.input_dim(); ++i) out << ',' << data.inputs(k, i);
    for (Eigen::Index i = 0; i < data.output_dim(); ++i) out << ',' << data.outputs(k, i);
    for (Eigen::Index i = 0; i < data.disturbances.cols(); ++i) {
      out << ',' << data.disturbances(k, i);
    }
    out << '\n';
  }
}

void write_csv(const std::string& path, const TrajectoryData& data) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  write_csv(f, data);
}

TrajectoryData read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trajectory CSV is empty");
  const auto header = split(line);
  if (header.empty() || header[0] != "t") {
    throw ConfigError("trajectory CSV header must start with 't'");
  }
  Eigen::Index m = 0, p = 0, q = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const char kind = header[i].empty() ? '?' : header[i][0];
    const bool ordered = (kind == 'u' && p == 0 && q == 0) ||
                         (kind == 'y' && q == 0) || kind == 'd';
    if (header[i].size() < 3 || header[i][1] != '_' || !ordered) {
      throw ConfigError("unexpected trajectory CSV column '" + header[i] + "'");
    }
    (kind == 'u' ? m : kind == 'y' ? p : q)++;
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ConfigError("trajectory CSV line " + std::to_string(lineno) +
                        " has " + std::to_string(cells.size()) + " fields");
    }
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      try {
        row.push_back(std::stod(cells[i]));
      } catch (const std::exception&) {
        throw ConfigError("trajectory CSV line " + std::to_string(lineno) +
                          ": bad number '" + cells[i] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  const auto t = static_cast<Eigen::Index>(rows.size());
  TrajectoryData d{Matrix(t, m), Matrix(t, p), Matrix(t, q)};
  for (Eigen::Index k = 0; k < t; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) d.inputs(k, i) = rows[k][i];
    for (Eigen::Index i = 0; i < p; ++i) d.outputs(k, i) = rows[k][m + i];
    for (Eigen::Index i = 0; i < q; ++i) d.disturbances(k, i) = rows[k][m + p + i];
  }
  return d;
}

TrajectoryData read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open trajectory file '" + path + "'");
  return read_csv(f);
}

}  // namespace ezdeepc::deepc
