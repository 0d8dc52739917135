#include "chainclass/node.hpp"

#include <algorithm>

namespace chainclass {

std::string_view node_role_name(NodeRole r) {
  switch (r) {
    case NodeRole::Authority:
      return "authority";
    case NodeRole::Validator:
      return "validator";
    case NodeRole::Observer:
      return "observer";
    case NodeRole::Team:
      return "team";
  }
  return "unknown";
}

// ---- Mempool

Status Mempool::add(const SignedTransaction& tx, bool& added) {
  added = false;
  const auto h = tx.hash();
  if (hashes_.count(h)) return Status::ok();
  auto slot = std::make_pair(tx.body.from, tx.body.nonce);
  if (by_slot_.count(slot))
    return Status::fail(Errc::DuplicateNonce, "nonce " + std::to_string(tx.body.nonce) + " already pending for " +
                                                  tx.body.from.hex());
  by_slot_.emplace(slot, tx);
  hashes_.insert(h);
  added = true;
  return Status::ok();
}

void Mempool::remove(const SignedTransaction& tx) {
  auto it = by_slot_.find({tx.body.from, tx.body.nonce});
  if (it == by_slot_.end() || it->second.hash() != tx.hash()) return;
  hashes_.erase(it->second.hash());
  by_slot_.erase(it);
}

void Mempool::prune(const WorldState& state) {
  for (auto it = by_slot_.begin(); it != by_slot_.end();) {
    if (it->first.second < state.nonce(it->first.first)) {
      hashes_.erase(it->second.hash());
      it = by_slot_.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<SignedTransaction> Mempool::ordered() const {
  std::vector<SignedTransaction> out;
  out.reserve(by_slot_.size());
  for (const auto& [slot, tx] : by_slot_) out.push_back(tx);
  return out;
}

// ---- Node

Node::Node(std::size_t id, NodeSetup setup, const ChainSpec& spec)
    : id_(id), setup_(std::move(setup)), chain_(std::make_unique<Chain>(spec)) {
  store_.emplace(chain_->head_hash(), chain_->head());
}

bool Node::known(const Hash256& h) const {
  return store_.count(h) || rejected_.count(h);
}

Status Node::screen_tx(const SignedTransaction& tx) const {
  if (auto s = verify_transaction(tx); !s) return s;
  const auto& rules = chain_->rules();
  if (tx.body.gas_price < rules.gas_price)
    return Status::fail(Errc::GasPriceTooLow, "gas price below " + std::to_string(rules.gas_price));
  if (tx.body.gas_limit > rules.block_gas_limit)
    return Status::fail(Errc::GasLimitExceedsBlock, "gas limit above " + std::to_string(rules.block_gas_limit));
  const auto expected = chain_->head_state().nonce(tx.body.from);
  if (tx.body.nonce < expected)
    return Status::fail(Errc::StaleNonce, "nonce " + std::to_string(tx.body.nonce) + " < " + std::to_string(expected));
  return Status::ok();
}

Status Node::receive_tx(const SignedTransaction& tx, bool& is_new) {
  is_new = false;
  const auto h = tx.hash();
  if (mempool_.contains(h) || chain_->find_tx(h)) return Status::ok();
  auto s = screen_tx(tx);
  if (s) s = mempool_.add(tx, is_new);
  if (!s) return Status::fail(Errc::InvalidTx, std::string(errc_name(s.code)) + ": " + s.detail);
  return Status::ok();
}

void Node::on_new_head() {
  mempool_.prune(chain_->head_state());
}

void Node::adopt_orphans() {
  bool progress = true;
  while (progress && !orphans_.empty()) {
    progress = false;
    for (auto it = orphans_.begin(); it != orphans_.end(); ++it) {
      if (!store_.count(it->first)) continue;
      Block b = it->second;
      orphans_.erase(it);
      bool fresh = false;
      (void)receive_block(b, fresh);
      progress = true;
      break;
    }
  }
}

Status Node::receive_block(const Block& block, bool& is_new) {
  const auto h = block.hash();
  is_new = false;
  if (known(h)) return Status::ok();
  is_new = true;

  if (block.prev_hash == chain_->head_hash()) {
    auto s = chain_->append(block);
    if (!s) {
      rejected_.insert(h);
      return s;
    }
    store_.emplace(h, block);
    on_new_head();
    adopt_orphans();
    return Status::ok();
  }

  if (!store_.count(block.prev_hash)) {
    orphans_.emplace(block.prev_hash, block);
    return Status::ok();
  }

  // Competing branch: walk back through the store to the main chain.
  store_.emplace(h, block);
  std::vector<Block> suffix{block};
  while (!chain_->height_of(suffix.back().prev_hash)) {
    auto it = store_.find(suffix.back().prev_hash);
    if (it == store_.end()) return Status::ok();
    suffix.push_back(it->second);
  }
  std::reverse(suffix.begin(), suffix.end());
  bool adopted = false;
  auto s = resolve_fork(suffix, adopted);
  if (!s) {
    store_.erase(h);
    rejected_.insert(h);
    return s;
  }
  if (adopted) adopt_orphans();
  return Status::ok();
}

Status Node::resolve_fork(std::span<const Block> suffix, bool& adopted) {
  adopted = false;
  if (suffix.empty()) return Status::fail(Errc::InvalidSuffix, "empty suffix");
  auto base = chain_->height_of(suffix.front().prev_hash);
  if (!base) return Status::fail(Errc::InvalidSuffix, "suffix does not attach to the local chain");

  auto candidate = std::make_unique<Chain>(*chain_);
  candidate->truncate(*base);
  for (const auto& b : suffix) {
    if (auto s = candidate->append(b); !s)
      return Status::fail(Errc::InvalidSuffix, "height " + std::to_string(b.index) + ": " + s.message());
  }
  if (!prefer_tip(chain_->engine().kind, candidate->tip(), chain_->tip())) return Status::ok();

  std::vector<SignedTransaction> orphaned;
  for (std::uint64_t i = *base + 1; i <= chain_->height(); ++i)
    for (const auto& tx : chain_->block(i).transactions) orphaned.push_back(tx);
  for (const auto& b : suffix) store_.emplace(b.hash(), b);
  chain_ = std::move(candidate);
  for (const auto& tx : orphaned) {
    if (chain_->find_tx(tx.hash())) continue;
    bool added = false;
    if (screen_tx(tx)) (void)mempool_.add(tx, added);
  }
  on_new_head();
  adopted = true;
  return Status::ok();
}

bool Node::can_produce() const {
  if (setup_.role != NodeRole::Authority && setup_.role != NodeRole::Validator) return false;
  const auto& eng = chain_->engine();
  const auto me = address();
  switch (eng.kind) {
    case ConsensusKind::PoW:
      return true;
    case ConsensusKind::PoA:
      return std::find(eng.poa_authorities.begin(), eng.poa_authorities.end(), me) != eng.poa_authorities.end();
    case ConsensusKind::PoS:
      return std::find(eng.pos_validators.begin(), eng.pos_validators.end(), me) != eng.pos_validators.end();
  }
  return false;
}

Status Node::produce(std::uint64_t timestamp, Block& out, std::uint64_t& hash_attempts) {
  if (!can_produce()) return Status::fail(Errc::NotProposer, "node role cannot seal blocks");
  const auto next = chain_->height() + 1;
  auto expected = expected_proposer(chain_->engine(), next, chain_->head_hash(), chain_->head_state());
  if (expected && *expected != address())
    return Status::fail(Errc::NotProposer, "height " + std::to_string(next) + " belongs to " + expected->hex());
  auto pending = mempool_.ordered();
  auto built = chain_->assemble(pending, key(), timestamp);
  for (const auto& [tx, why] : built.dropped) mempool_.remove(tx);
  hash_attempts = built.hash_attempts;
  out = built.block;
  bool fresh = false;
  return receive_block(out, fresh);
}

// ---- MessageBus

MessageBus::MessageBus(LatencyModel latency, std::uint64_t seed, std::uint32_t duplicate_percent)
    : latency_(latency), rng_(seed), duplicate_percent_(duplicate_percent) {
  if (latency_.max_ms < latency_.min_ms) std::swap(latency_.min_ms, latency_.max_ms);
}

std::uint64_t MessageBus::delay() {
  const auto span = latency_.max_ms - latency_.min_ms;
  if (span == 0) return latency_.min_ms;
  return latency_.min_ms + rng_() % (span + 1);
}

void MessageBus::send(std::size_t to, NetMessage msg) {
  auto shared = std::make_shared<const NetMessage>(std::move(msg));
  queue_.push(Pending{now_ + delay(), seq_++, to, shared});
  if (duplicate_percent_ > 0 && rng_() % 100 < duplicate_percent_)
    queue_.push(Pending{now_ + delay(), seq_++, to, shared});
}

bool MessageBus::step(const std::function<void(std::size_t, const NetMessage&)>& deliver) {
  if (queue_.empty()) return false;
  auto next = queue_.top();
  queue_.pop();
  now_ = std::max(now_, next.due);
  ++delivered_;
  deliver(next.to, *next.msg);
  return true;
}

void MessageBus::advance_to(std::uint64_t t, const std::function<void(std::size_t, const NetMessage&)>& deliver) {
  while (!queue_.empty() && queue_.top().due <= t) step(deliver);
  now_ = std::max(now_, t);
}

// ---- Network

Network::Network(const ChainSpec& spec, std::vector<NodeSetup> nodes, NetworkOptions options)
    : spec_(spec), options_(options), bus_(options.latency, options.seed, options.duplicate_percent) {
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes_.push_back(std::make_unique<Node>(i, std::move(nodes[i]), spec_));
}

void Network::gossip(std::size_t from, const NetMessage& msg) {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (i != from) bus_.send(i, msg);
}

void Network::deliver(std::size_t to, const NetMessage& msg) {
  auto& n = *nodes_[to];
  bool fresh = false;
  if (const auto* tx = std::get_if<SignedTransaction>(&msg)) {
    if (n.receive_tx(*tx, fresh) && fresh) gossip(to, msg);
  } else {
    const auto& b = std::get<Block>(msg);
    if (n.receive_block(b, fresh) && fresh) gossip(to, msg);
  }
}

Status Network::broadcast_tx(std::size_t origin, const SignedTransaction& tx) {
  bool fresh = false;
  auto s = nodes_.at(origin)->receive_tx(tx, fresh);
  if (!s) return s;
  if (fresh) gossip(origin, tx);
  return Status::ok();
}

Status Network::produce(std::size_t producer, Block* out, std::uint64_t* hash_attempts) {
  auto& n = *nodes_.at(producer);
  const auto ts = spec_.genesis_timestamp + (n.chain().height() + 1) * options_.block_interval_s;
  Block b;
  std::uint64_t attempts = 0;
  auto s = n.produce(ts, b, attempts);
  if (!s) return s;
  gossip(producer, b);
  if (out) *out = b;
  if (hash_attempts) *hash_attempts = attempts;
  return Status::ok();
}

std::size_t Network::produce_on_schedule(std::size_t producer, std::uint64_t block_time_ms, std::uint64_t until_ms) {
  auto fn = [this](std::size_t to, const NetMessage& m) { deliver(to, m); };
  std::size_t made = 0;
  if (block_time_ms == 0) {
    bus_.advance_to(until_ms, fn);
    return made;
  }
  auto next = (bus_.now_ms() / block_time_ms + 1) * block_time_ms;
  for (; next <= until_ms; next += block_time_ms) {
    bus_.advance_to(next, fn);
    if (produce(producer)) ++made;
  }
  bus_.advance_to(until_ms, fn);
  return made;
}

void Network::run_until_quiet() {
  auto fn = [this](std::size_t to, const NetMessage& m) { deliver(to, m); };
  while (bus_.step(fn)) {
  }
}

void Network::advance(std::uint64_t ms) {
  bus_.advance_to(bus_.now_ms() + ms, [this](std::size_t to, const NetMessage& m) { deliver(to, m); });
}

bool Network::converged() const {
  for (const auto& n : nodes_) {
    if (n->chain().head_hash() != nodes_.front()->chain().head_hash()) return false;
    if (n->chain().head().state_root != nodes_.front()->chain().head().state_root) return false;
  }
  return true;
}

// ---- ThreadedNetwork

ThreadedNetwork::ThreadedNetwork(const ChainSpec& spec, std::vector<NodeSetup> nodes, std::uint64_t block_interval_s)
    : block_interval_s_(block_interval_s), genesis_ts_(spec.genesis_timestamp) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto w = std::make_unique<Worker>();
    w->node = std::make_unique<Node>(i, std::move(nodes[i]), spec);
    workers_.push_back(std::move(w));
  }
  for (std::size_t i = 0; i < workers_.size(); ++i) workers_[i]->thread = std::thread([this, i] { run(i); });
}

ThreadedNetwork::~ThreadedNetwork() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  work_cv_.notify_all();
  for (auto& w : workers_)
    if (w->thread.joinable()) w->thread.join();
}

void ThreadedNetwork::post(std::size_t to, Task task) {
  {
    std::lock_guard lk(mu_);
    workers_.at(to)->inbox.push_back(std::move(task));
    ++queued_;
  }
  work_cv_.notify_all();
}

void ThreadedNetwork::run(std::size_t i) {
  auto& w = *workers_[i];
  for (;;) {
    Task task;
    {
      std::unique_lock lk(mu_);
      work_cv_.wait(lk, [&] { return stop_ || !w.inbox.empty(); });
      if (stop_ && w.inbox.empty()) return;
      task = std::move(w.inbox.front());
      w.inbox.pop_front();
      --queued_;
      ++busy_;
    }
    std::vector<NetMessage> relay;
    if (auto* msg = std::get_if<NetMessage>(&task.body)) {
      bool fresh = false;
      if (auto* tx = std::get_if<SignedTransaction>(msg)) {
        if (w.node->receive_tx(*tx, fresh) && fresh) relay.push_back(*msg);
      } else if (w.node->receive_block(std::get<Block>(*msg), fresh) && fresh) {
        relay.push_back(*msg);
      }
    } else {
      std::get<std::function<void(Node&)>>(task.body)(*w.node);
    }
    for (const auto& m : relay)
      for (std::size_t j = 0; j < workers_.size(); ++j)
        if (j != i) post(j, Task{m});
    {
      std::lock_guard lk(mu_);
      --busy_;
    }
    quiet_cv_.notify_all();
  }
}

void ThreadedNetwork::broadcast_tx(std::size_t origin, const SignedTransaction& tx) {
  post(origin, Task{NetMessage{tx}});
}

Status ThreadedNetwork::produce(std::size_t producer, std::uint64_t* hash_attempts) {
  std::promise<std::pair<Status, std::optional<Block>>> done;
  auto fut = done.get_future();
  post(producer, Task{std::function<void(Node&)>([&, this](Node& n) {
         const auto ts = genesis_ts_ + (n.chain().height() + 1) * block_interval_s_;
         Block b;
         std::uint64_t attempts = 0;
         auto s = n.produce(ts, b, attempts);
         if (hash_attempts) *hash_attempts = attempts;
         done.set_value({s, s ? std::optional<Block>(b) : std::nullopt});
       })});
  auto [status, block] = fut.get();
  if (block)
    for (std::size_t j = 0; j < workers_.size(); ++j)
      if (j != producer) post(j, Task{NetMessage{*block}});
  return status;
}

void ThreadedNetwork::wait_quiet() {
  std::unique_lock lk(mu_);
  quiet_cv_.wait(lk, [&] { return queued_ == 0 && busy_ == 0; });
}

void ThreadedNetwork::inspect(std::size_t i, const std::function<void(const Node&)>& fn) {
  std::promise<void> done;
  auto fut = done.get_future();
  post(i, Task{std::function<void(Node&)>([&](Node& n) {
         fn(n);
         done.set_value();
       })});
  fut.get();
}

bool ThreadedNetwork::converged() {
  Hash256 head0, root0;
  bool same = true;
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    inspect(i, [&](const Node& n) {
      if (i == 0) {
        head0 = n.chain().head_hash();
        root0 = n.chain().head().state_root;
      } else if (n.chain().head_hash() != head0 || n.chain().head().state_root != root0) {
        same = false;
      }
    });
  }
  return same;
}

}  // namespace chainclass
