#pragma once

#include <stdexcept>
#include <string>

namespace lcen {

inline constexpr const char* kLibraryVersion = "lcen 0.1.0";

/// Malformed or unusable input data (CSV parse errors, shape mismatches,
/// empty files). The CLI maps this to exit code 2.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a usable result (domain violations
/// in strict mode, every CV combination failing). CLI exit code 3.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Worker-thread count: explicit request > LCEN_THREADS env var > OpenMP
/// default. Always >= 1.
int resolve_threads(int requested = 0);

}  // namespace lcen
