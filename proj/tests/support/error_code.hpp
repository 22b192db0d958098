#pragma once

#include <string>

#include "gyrocond/error.hpp"

/// Code of the gyrocond::Error thrown by f, or "" when nothing was thrown.
template <class F>
std::string error_code(F&& f) {
  try {
    f();
  } catch (const gyrocond::Error& e) {
    return e.code();
  }
  return "";
}
