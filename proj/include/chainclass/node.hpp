#pragma once

#include "chainclass/chain.hpp"
#include "chainclass/crypto.hpp"

#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace chainclass {

enum class NodeRole { Authority, Validator, Observer, Team };
std::string_view node_role_name(NodeRole r);

/// Pending transactions keyed by (sender, nonce); iteration order is the
/// block assembly order.
class Mempool {
 public:
  /// DuplicateNonce if another tx already holds the (sender, nonce) slot.
  /// Re-adding the same tx is ok and reported through `added`.
  Status add(const SignedTransaction& tx, bool& added);
  bool contains(const Hash256& tx_hash) const { return hashes_.count(tx_hash) > 0; }
  void remove(const SignedTransaction& tx);
  /// Drops every tx whose nonce is already used in `state`.
  void prune(const WorldState& state);
  std::vector<SignedTransaction> ordered() const;
  std::size_t size() const { return by_slot_.size(); }
  bool empty() const { return by_slot_.empty(); }

 private:
  std::map<std::pair<Address, std::uint64_t>, SignedTransaction> by_slot_;
  std::unordered_set<Hash256> hashes_;
};

struct NodeSetup {
  NodeRole role = NodeRole::Observer;
  std::shared_ptr<const KeyPair> key;
};

/// One in-process node: a chain, a mempool and the block store used for
/// fork choice. Not thread-safe; each node is driven by exactly one caller.
class Node {
 public:
  Node(std::size_t id, NodeSetup setup, const ChainSpec& spec);

  std::size_t id() const { return id_; }
  NodeRole role() const { return setup_.role; }
  const KeyPair& key() const { return *setup_.key; }
  Address address() const { return setup_.key->address(); }
  const Chain& chain() const { return *chain_; }
  const Mempool& mempool() const { return mempool_; }

  /// Why `tx` cannot enter this node's mempool, checked against the head
  /// state: the verify_transaction code, StaleNonce, GasPriceTooLow,
  /// GasLimitExceedsBlock or DuplicateNonce.
  Status screen_tx(const SignedTransaction& tx) const;

  /// Full verification against the head state. `is_new` is false for a tx the
  /// node has already seen. Invalid txs yield InvalidTx with the cause in the
  /// detail and must not be relayed.
  Status receive_tx(const SignedTransaction& tx, bool& is_new);

  /// Appends, buffers as an orphan, or hands a competing branch to
  /// resolve_fork. `is_new` is false for a block already known.
  Status receive_block(const Block& block, bool& is_new);

  /// Switches to `suffix` (which must extend a block on the current chain)
  /// when the engine's fork-choice rule prefers it. InvalidSuffix if any block
  /// fails validation. Returns whether the head changed.
  Status resolve_fork(std::span<const Block> suffix, bool& adopted);

  /// True when this node's role and the engine allow it to seal the next block.
  bool can_produce() const;
  /// Seals the next block from the mempool. NotProposer when it is not this
  /// node's turn.
  Status produce(std::uint64_t timestamp, Block& out, std::uint64_t& hash_attempts);

 private:
  void on_new_head();
  void adopt_orphans();
  bool known(const Hash256& h) const;

  std::size_t id_;
  NodeSetup setup_;
  std::unique_ptr<Chain> chain_;
  Mempool mempool_;
  std::unordered_map<Hash256, Block> store_;                  // every structurally accepted block
  std::unordered_multimap<Hash256, Block> orphans_;           // keyed by prev_hash
  std::unordered_set<Hash256> rejected_;
};

/// Per-message delay in virtual milliseconds: min + rng() % (max - min + 1).
struct LatencyModel {
  std::uint64_t min_ms = 0;
  std::uint64_t max_ms = 0;

  static LatencyModel fixed(std::uint64_t ms) { return {ms, ms}; }
  static LatencyModel uniform(std::uint64_t lo, std::uint64_t hi) { return {lo, hi}; }
};

struct NetworkOptions {
  LatencyModel latency;
  std::uint64_t seed = 0;
  /// Percentage of messages that are delivered twice.
  std::uint32_t duplicate_percent = 0;
  /// Virtual seconds between consecutive block timestamps.
  std::uint64_t block_interval_s = 1;
};

using NetMessage = std::variant<SignedTransaction, Block>;

/// Deterministic virtual-time bus. Messages are delivered in (due time,
/// sequence) order; the schedule is a pure function of the seed and the
/// sends.
class MessageBus {
 public:
  MessageBus(LatencyModel latency, std::uint64_t seed, std::uint32_t duplicate_percent);

  void send(std::size_t to, NetMessage msg);
  /// Delivers the next message through `deliver`; false when the queue is empty.
  bool step(const std::function<void(std::size_t, const NetMessage&)>& deliver);
  /// Delivers everything due at or before `t` and moves the clock to `t`.
  void advance_to(std::uint64_t t, const std::function<void(std::size_t, const NetMessage&)>& deliver);
  std::uint64_t now_ms() const { return now_; }
  bool idle() const { return queue_.empty(); }
  std::uint64_t delivered() const { return delivered_; }

 private:
  struct Pending {
    std::uint64_t due;
    std::uint64_t seq;
    std::size_t to;
    std::shared_ptr<const NetMessage> msg;
    bool operator>(const Pending& o) const { return std::tie(due, seq) > std::tie(o.due, o.seq); }
  };
  std::uint64_t delay();

  LatencyModel latency_;
  std::mt19937_64 rng_;
  std::uint32_t duplicate_percent_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
  std::uint64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t delivered_ = 0;
};

/// N fully connected nodes on one MessageBus, single-threaded.
class Network {
 public:
  Network(const ChainSpec& spec, std::vector<NodeSetup> nodes, NetworkOptions options);

  std::size_t size() const { return nodes_.size(); }
  Node& node(std::size_t i) { return *nodes_.at(i); }
  const Node& node(std::size_t i) const { return *nodes_.at(i); }
  const NetworkOptions& options() const { return options_; }
  MessageBus& bus() { return bus_; }

  /// Verifies at `origin`, then gossips. InvalidTx if the origin rejects it.
  Status broadcast_tx(std::size_t origin, const SignedTransaction& tx);

  /// Produces one block at `producer` and gossips it. Timestamps advance by
  /// block_interval_s per height.
  Status produce(std::size_t producer, Block* out = nullptr, std::uint64_t* hash_attempts = nullptr);

  /// Produces at every multiple of block_time_ms up to `until_ms` (virtual),
  /// delivering messages in between. Ticks where the node is not the proposer
  /// are skipped. Returns the number of blocks produced.
  std::size_t produce_on_schedule(std::size_t producer, std::uint64_t block_time_ms, std::uint64_t until_ms);

  void run_until_quiet();
  /// Delivers whatever falls due in the next `ms` virtual milliseconds.
  void advance(std::uint64_t ms);
  /// Identical head hash and state root on every node.
  bool converged() const;

 private:
  void deliver(std::size_t to, const NetMessage& msg);
  void gossip(std::size_t from, const NetMessage& msg);

  ChainSpec spec_;
  NetworkOptions options_;
  MessageBus bus_;
  std::vector<std::unique_ptr<Node>> nodes_;
};

/// Concurrent mode: every node runs on its own thread and owns its state;
/// interaction is only through per-node inboxes.
class ThreadedNetwork {
 public:
  ThreadedNetwork(const ChainSpec& spec, std::vector<NodeSetup> nodes, std::uint64_t block_interval_s = 1);
  ~ThreadedNetwork();
  ThreadedNetwork(const ThreadedNetwork&) = delete;
  ThreadedNetwork& operator=(const ThreadedNetwork&) = delete;

  std::size_t size() const { return workers_.size(); }
  void broadcast_tx(std::size_t origin, const SignedTransaction& tx);
  /// Runs produce() on the producer's thread and waits for the result.
  Status produce(std::size_t producer, std::uint64_t* hash_attempts = nullptr);
  /// Blocks until every inbox is empty and no node is busy.
  void wait_quiet();
  /// Call only after wait_quiet().
  bool converged();
  /// Runs `fn` against node i on its own thread.
  void inspect(std::size_t i, const std::function<void(const Node&)>& fn);

 private:
  struct Task {
    std::variant<NetMessage, std::function<void(Node&)>> body;
  };
  struct Worker {
    std::unique_ptr<Node> node;
    std::deque<Task> inbox;
    std::thread thread;
  };

  void post(std::size_t to, Task task);
  void run(std::size_t i);

  std::uint64_t block_interval_s_;
  std::uint64_t genesis_ts_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::mutex mu_;
  std::condition_variable work_cv_;
  std::condition_variable quiet_cv_;
  std::size_t busy_ = 0;
  std::size_t queued_ = 0;
  bool stop_ = false;
};

}  // namespace chainclass
