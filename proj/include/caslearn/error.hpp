// error.hpp
//   Error taxonomy shared by all modules. Every failure carries a stable
//   code so the CLI can map it to an exit status.

#pragma once

#include <stdexcept>
#include <string>

namespace caslearn {

enum class Errc {
  // graph construction
  multiple_roots,
  dangling_parent,
  cycle_detected,
  negative_time,
  invalid_time_order,
  // parsing / dataset
  malformed_line,
  inconsistent_count,
  io_error,
  empty_dataset,
  fraction_out_of_range,
  no_adoptions,
  // augmentation
  singleton_graph,
  not_a_leaf,
  // tensor engine
  shape_mismatch,
  zero_vector,
  non_scalar_loss,
  // losses / training
  non_positive_label,
  empty_set,
  insufficient_data,
  no_labeled_data,
  no_teacher,
  // evaluation
  empty_test_split,
  too_few_positives,
  // numerics
  eigen_failure,
  numeric_failure,
  // configuration
  config_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Exit statuses used by the CLI: 0 success, 2 config, 3 data, 4 numeric.
inline int exit_code_for(Errc c) {
  switch (c) {
    case Errc::config_error:
    case Errc::fraction_out_of_range:
      return 2;
    case Errc::eigen_failure:
    case Errc::numeric_failure:
    case Errc::non_scalar_loss:
    case Errc::shape_mismatch:
    case Errc::zero_vector:
      return 4;
    default:
      return 3;
  }
}

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace caslearn
