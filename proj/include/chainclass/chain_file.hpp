#pragma once

#include "chainclass/chain.hpp"

#include <filesystem>
#include <fstream>
#include <optional>

namespace chainclass {

/// On-disk chain: "CHAINCLS" || u32 version || u32 len || ChainSpec, then one
/// u32-length-prefixed canonical block encoding per record, genesis first.
/// All integers big-endian.
inline constexpr std::uint32_t kChainFileVersion = 1;

struct ChainFile {
  ChainSpec spec;
  std::vector<Block> blocks;  // including genesis
};

/// Appends blocks to a chain file, creating the header on first open.
class ChainFileWriter {
 public:
  /// Creates (truncating) `path` and writes the header and genesis block.
  ChainFileWriter(const std::filesystem::path& path, const ChainSpec& spec, const Block& genesis);
  /// Opens an existing file for appending.
  explicit ChainFileWriter(const std::filesystem::path& path);

  void append(const Block& block);

 private:
  std::ofstream out_;
};

/// Writes the full chain in one go.
void write_chain_file(const std::filesystem::path& path, const Chain& chain);

/// Throws Error(CorruptFile) naming the record index that fails to parse.
ChainFile read_chain_file(const std::filesystem::path& path);

struct ChainVerification {
  Status status;
  std::uint64_t blocks = 0;                // blocks that verified, genesis included
  std::optional<std::uint64_t> bad_height; // first offending height
  Hash256 head_state_root;
  Hash256 head_hash;
};

/// Parses, validates every block against the embedded spec and replays from
/// genesis. Never throws for content errors.
ChainVerification verify_chain_file(const std::filesystem::path& path);

}  // namespace chainclass
