#pragma once

#include <string>
#include <vector>

namespace p4l {

struct SelftestResult {
  std::vector<std::string> lines;
  bool ok = true;
};

/// Quick crypto sanity suite (reduced-size keys): keygen, round trips,
/// homomorphic sums, decryption proofs, tamper detection, signatures.
SelftestResult crypto_selftest(unsigned key_bits = 512, uint64_t seed = 7);

} // namespace p4l
