#include "caslearn/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace caslearn::kern {

bool avx2_compiled();  // defined in kernels_avx2.cpp

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  return avx2_compiled() && __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

Lane pick_initial_lane() {
  if (const char* env = std::getenv("CASLEARN_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Lane::scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Lane::avx2;
  }
  return avx2_available() ? Lane::avx2 : Lane::scalar;
}

std::atomic<Lane>& lane_state() {
  static std::atomic<Lane> lane{pick_initial_lane()};
  return lane;
}

}  // namespace

Lane active_lane() { return lane_state().load(std::memory_order_relaxed); }

void force_lane(Lane lane) {
  if (lane == Lane::avx2 && !avx2_available()) lane = Lane::scalar;
  lane_state().store(lane, std::memory_order_relaxed);
}

const Ops& active() {
  return active_lane() == Lane::avx2 ? avx2_ops() : scalar_ops();
}

}  // namespace caslearn::kern
