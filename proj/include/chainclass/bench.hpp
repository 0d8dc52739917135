#pragma once

#include "chainclass/consensus.hpp"

#include <cstdint>
#include <string>

namespace chainclass {

struct BenchOptions {
  ConsensusKind kind = ConsensusKind::PoA;
  std::uint64_t blocks = 50;
  int difficulty_bits = 12;
  std::size_t txs_per_block = 0;
  /// More than one node runs the threaded network, with node 0 producing.
  std::size_t nodes = 1;
};

/// Seals `blocks` blocks and reports the sealing cost.
ConsensusMetrics run_consensus_bench(const BenchOptions& options);

inline constexpr std::string_view kBenchCsvHeader = "kind,blocks,hash_attempts,wall_time_s,attempts_per_block";
std::string bench_csv_row(const ConsensusMetrics& m);

}  // namespace chainclass
