#include "chainclass/merkle.hpp"

#include "chainclass/crypto.hpp"
#include "chainclass/encoding.hpp"

namespace chainclass {

Hash256 empty_tree_root() {
  return sha256(ByteView{});
}

Hash256 merkle_leaf(ByteView key, ByteView value) {
  Encoder e;
  e.field(key).field(value);
  const std::uint8_t tag[1] = {0x00};
  return sha256({ByteView(tag), e.bytes()});
}

Hash256 merkle_root(std::vector<Hash256> leaves) {
  if (leaves.empty()) return empty_tree_root();
  const std::uint8_t tag[1] = {0x01};
  while (leaves.size() > 1) {
    std::vector<Hash256> next;
    next.reserve((leaves.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < leaves.size(); i += 2)
      next.push_back(sha256({ByteView(tag), leaves[i].view(), leaves[i + 1].view()}));
    if (leaves.size() % 2 == 1) next.push_back(leaves.back());
    leaves = std::move(next);
  }
  return leaves.front();
}

}  // namespace chainclass
