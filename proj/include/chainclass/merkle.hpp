#pragma once

#include "chainclass/bytes.hpp"

#include <vector>

namespace chainclass {

/// Root of the empty tree: SHA-256 of the empty string.
Hash256 empty_tree_root();

/// SHA-256(0x00 || field(key) || field(value)).
Hash256 merkle_leaf(ByteView key, ByteView value);

/// Bottom-up binary tree over `leaves` in the given order. Inner nodes are
/// SHA-256(0x01 || left || right); an odd trailing node is promoted unchanged.
Hash256 merkle_root(std::vector<Hash256> leaves);

}  // namespace chainclass
