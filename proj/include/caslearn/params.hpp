// params.hpp
//   Named parameter tensors plus the checkpoint file format: little-endian
//   binary, magic "CSLN", version, then {name, rows, cols, doubles} per
//   tensor in order.

#pragma once

#include <string>
#include <vector>

namespace caslearn {

struct ParamTensor {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> value;

  std::size_t size() const { return value.size(); }
};

using ParamSet = std::vector<ParamTensor>;

void save_params(const std::string& path, const ParamSet& params);
ParamSet load_params(const std::string& path);

}  // namespace caslearn
