#pragma once

#include <doctest.h>

#include "dnar/error.hpp"

// Runs f and returns the code of the dnar::Error it throws.
template <class F>
dnar::ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const dnar::Error& e) {
    return e.code();
  }
  FAIL("expected a dnar::Error");
  return dnar::ErrorCode::InvalidArgument;
}
