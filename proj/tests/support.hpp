#pragma once

#include "hololab/error.hpp"

#include <gtest/gtest.h>

// Asserts that `stmt` throws hololab::Error with the given code.
#define EXPECT_ERROR_CODE(stmt, expected_code)                                      \
  do {                                                                              \
    bool thrown_ = false;                                                           \
    try {                                                                           \
      stmt;                                                                         \
    } catch (const hololab::Error& e_) {                                            \
      thrown_ = true;                                                               \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                             \
    }                                                                               \
    EXPECT_TRUE(thrown_) << #stmt " did not throw";                                 \
  } while (0)
