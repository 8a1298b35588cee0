#pragma once

#include <mutex>

namespace geolab::detail {

// FFTW planning is not thread-safe; execution with new-array functions is.
std::mutex& fftw_planner_mutex();

}  // namespace geolab::detail
