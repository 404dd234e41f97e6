#pragma once

#include <memory>

#include "modlab/prime_kernel.hpp"
#include "modlab/mod_sequences.hpp"

namespace testing_support {

/// One shared table per test binary.
inline modlab::TablePtr table_1e6() {
  static const modlab::TablePtr t = std::make_shared<const modlab::PrimeTable>(1'000'000);
  return t;
}

}  // namespace testing_support
