#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace pmrd {

/// Result of the built-in end-to-end exercise: a scalar run, a coupled run,
/// diagnostic checks on both, and a synthetic covering analysis, all written
/// under `out_dir`. `fingerprint` hashes every artifact produced, so repeated
/// invocations with the same seed must return identical fingerprints.
struct SelftestResult {
  bool passed = false;
  std::string fingerprint;
  nlohmann::json report;
};

SelftestResult run_selftest(const std::string& out_dir, std::uint64_t seed);

}  // namespace pmrd
