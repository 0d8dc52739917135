#include "chainclass/chain.hpp"

#include "chainclass/encoding.hpp"

#include <limits>

namespace chainclass {

WorldState ChainSpec::genesis_state() const {
  WorldState s;
  for (const auto& a : allocations) s.credit(a.account, a.balance);
  if (s.total_supply() > std::numeric_limits<Amount>::max())
    throw Error(Errc::SupplyOverflow, "genesis allocations exceed the 64-bit supply range");
  return s;
}

Block ChainSpec::genesis_block() const {
  Block b;
  b.index = 0;
  b.timestamp = genesis_timestamp;
  b.state_root = compute_state_root(genesis_state());
  return b;
}

Bytes ChainSpec::encode() const {
  Encoder allocs;
  for (const auto& a : allocations) allocs.nested(Encoder().fixed(a.account).u64(a.balance));
  Encoder e;
  e.field(consensus.encode()).field(rules.encode()).u64(genesis_timestamp).nested(allocs);
  return e.take();
}

ChainSpec ChainSpec::decode(ByteView data) {
  Decoder d(data);
  ChainSpec s;
  s.consensus = ConsensusParams::decode(d.field());
  s.rules = ChainRules::decode(d.field());
  s.genesis_timestamp = d.u64();
  auto allocs = d.nested();
  while (!allocs.done()) {
    auto a = allocs.nested();
    GenesisAllocation g;
    g.account = a.fixed<Address>();
    g.balance = a.u64();
    a.finish();
    s.allocations.push_back(g);
  }
  d.finish();
  return s;
}

BlockOutcome apply_transactions(const WorldState& parent, std::span<const SignedTransaction> txs,
                                const BlockContext& ctx, const ChainRules& rules, const Address& producer) {
  BlockOutcome out{parent, {}, 0, 0};
  for (std::size_t i = 0; i < txs.size(); ++i) {
    ExecutionResult r;
    try {
      r = execute(out.state, txs[i], ctx, rules);
    } catch (const Error& e) {
      throw Error(Errc::BadTx, std::to_string(i) + ": " + e.what());
    }
    out.state = std::move(r.state);
    out.fees += r.fee;
    out.gas_used += r.receipt.gas_used;
    out.receipts.push_back(std::move(r.receipt));
  }
  out.state.credit(producer, out.fees);
  return out;
}

Chain::Chain(ChainSpec spec) : spec_(std::move(spec)) {
  if (auto s = spec_.consensus.validate(spec_.genesis_state()); !s) throw Error(s.code, s.detail);
  auto genesis = spec_.genesis_block();
  hashes_.push_back(genesis.hash());
  states_.push_back(std::make_shared<const WorldState>(spec_.genesis_state()));
  receipts_.emplace_back();
  work_.push_back(0);
  blocks_.push_back(std::move(genesis));
}

std::optional<TxLocation> Chain::find_tx(const Hash256& tx_hash) const {
  auto it = tx_index_.find(tx_hash);
  if (it == tx_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint64_t> Chain::height_of(const Hash256& block_hash) const {
  for (std::size_t h = 0; h < hashes_.size(); ++h)
    if (hashes_[h] == block_hash) return h;
  return std::nullopt;
}

ChainTip Chain::tip() const {
  return ChainTip{work_.back(), height(), head_hash()};
}

namespace {

// Runs every check except the seal; on success returns the outcome so the
// caller need not execute twice.
std::pair<Status, std::optional<BlockOutcome>> check_block(const Chain& chain, const Block& block,
                                                           const ConsensusParams& engine) {
  using R = std::pair<Status, std::optional<BlockOutcome>>;
  const auto& head = chain.head();
  if (block.index != head.index + 1)
    return R{Status::fail(Errc::BadLink, "index " + std::to_string(block.index) + " does not follow head " +
                                             std::to_string(head.index)),
             std::nullopt};
  if (block.prev_hash != chain.head_hash())
    return R{Status::fail(Errc::BadLink, "prev_hash does not match head"), std::nullopt};
  if (block.timestamp < head.timestamp)
    return R{Status::fail(Errc::BadLink, "timestamp earlier than parent"), std::nullopt};
  if (block.gas_used > chain.rules().block_gas_limit)
    return R{Status::fail(Errc::GasOverflow, std::to_string(block.gas_used) + " > " +
                                                 std::to_string(chain.rules().block_gas_limit)),
             std::nullopt};

  const auto& parent_state = chain.head_state();
  if (auto s = verify_seal(engine, block, parent_state); !s) return R{s, std::nullopt};

  BlockOutcome outcome;
  try {
    outcome = apply_transactions(parent_state, block.transactions, BlockContext{block.index, block.prev_hash},
                                 chain.rules(), block.producer);
  } catch (const Error& e) {
    auto detail = e.detail();
    std::size_t idx = std::stoul(detail.substr(0, detail.find(':')));
    return R{Status::fail(Errc::BadTx, detail, idx), std::nullopt};
  }
  if (outcome.gas_used > chain.rules().block_gas_limit)
    return R{Status::fail(Errc::GasOverflow, "receipts sum to " + std::to_string(outcome.gas_used)),
             std::nullopt};
  if (outcome.gas_used != block.gas_used)
    return R{Status::fail(Errc::GasMismatch, "header says " + std::to_string(block.gas_used) +
                                                 ", receipts sum to " + std::to_string(outcome.gas_used)),
             std::nullopt};
  if (compute_state_root(outcome.state) != block.state_root)
    return R{Status::fail(Errc::BadStateRoot), std::nullopt};
  return R{Status::ok(), std::move(outcome)};
}

}  // namespace

Status validate_block(const Chain& chain, const Block& block, const ConsensusParams& engine) {
  return check_block(chain, block, engine).first;
}

Status Chain::validate(const Block& block) const {
  return validate_block(*this, block, spec_.consensus);
}

Status Chain::append(Block block) {
  auto [status, outcome] = check_block(*this, block, spec_.consensus);
  if (!status) return status;
  const std::uint64_t h = block.index;
  for (std::size_t i = 0; i < block.transactions.size(); ++i)
    tx_index_[block.transactions[i].hash()] = TxLocation{h, i};
  hashes_.push_back(block.hash());
  work_.push_back(work_.back() + block_work(block));
  states_.push_back(std::make_shared<const WorldState>(std::move(outcome->state)));
  receipts_.push_back(std::move(outcome->receipts));
  blocks_.push_back(std::move(block));
  return Status::ok();
}

void Chain::truncate(std::uint64_t h) {
  while (height() > h) {
    for (const auto& tx : blocks_.back().transactions) tx_index_.erase(tx.hash());
    blocks_.pop_back();
    hashes_.pop_back();
    states_.pop_back();
    receipts_.pop_back();
    work_.pop_back();
  }
}

Chain::Assembled Chain::assemble(std::span<const SignedTransaction> candidates, const KeyPair& producer,
                                 std::uint64_t timestamp) const {
  Assembled out;
  Block& b = out.block;
  b.index = head().index + 1;
  b.prev_hash = head_hash();
  b.timestamp = std::max(timestamp, head().timestamp);
  b.producer = producer.address();

  const BlockContext ctx{b.index, b.prev_hash};
  WorldState state = head_state();
  Amount fees = 0;
  std::uint64_t reserved = 0;
  bool full = false;
  for (const auto& tx : candidates) {
    if (full) {
      out.deferred.push_back(tx);
      continue;
    }
    auto adm = check_admission(state, tx, spec_.rules);
    if (adm.code == Errc::FutureNonce) {
      out.deferred.push_back(tx);
      continue;
    }
    if (!adm) {
      out.dropped.emplace_back(tx, adm);
      continue;
    }
    if (reserved + tx.body.gas_limit > spec_.rules.block_gas_limit) {
      full = true;
      out.deferred.push_back(tx);
      continue;
    }
    auto r = execute(state, tx, ctx, spec_.rules);
    reserved += tx.body.gas_limit;
    b.gas_used += r.receipt.gas_used;
    fees += r.fee;
    state = std::move(r.state);
    b.transactions.push_back(tx);
    out.included.push_back(tx);
  }
  state.credit(b.producer, fees);
  b.state_root = compute_state_root(state);
  out.hash_attempts = seal_block(spec_.consensus, b, producer);
  return out;
}

WorldState replay(const ChainSpec& spec, std::span<const Block> blocks) {
  Chain chain(spec);
  std::size_t start = 0;
  if (!blocks.empty() && blocks.front().index == 0) {
    if (blocks.front().hash() != chain.head_hash())
      throw Error(Errc::BadLink, "height 0: genesis does not match chain spec");
    start = 1;
  }
  for (std::size_t i = start; i < blocks.size(); ++i) {
    if (auto s = chain.append(blocks[i]); !s)
      throw Error(s.code, "height " + std::to_string(blocks[i].index) + ": " + s.message());
  }
  return chain.head_state();
}

}  // namespace chainclass
