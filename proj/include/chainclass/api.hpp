#pragma once

#include "chainclass/chain_file.hpp"
#include "chainclass/node.hpp"
#include "chainclass/views.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace chainclass {

struct HostOptions {
  /// 0 mines a block as soon as a tx is accepted; otherwise blocks are sealed
  /// on this period by a background thread.
  std::uint64_t block_time_ms = 0;
  std::size_t event_retention = 100'000;
  /// Block timestamp source; the default steps one second per height.
  std::function<std::uint64_t(const Chain&)> clock;
  std::optional<std::filesystem::path> chain_file;
  std::optional<Address> game;
};

/// A contract event together with where it was emitted. Cursors start at 1
/// and increase by one per event in block order.
struct LoggedEvent {
  std::uint64_t cursor = 0;
  std::uint64_t height = 0;
  Hash256 tx_hash;
  ContractEvent event;
};

struct SubmitResult {
  Status status;
  Hash256 tx_hash;
  std::optional<ExecutionReceipt> receipt;  // set when already mined
};

/// Thread-safe owner of the node the API serves. Every mutation goes through
/// submit(); readers get a consistent snapshot of the committed head.
class NodeHost {
 public:
  NodeHost(const ChainSpec& spec, std::shared_ptr<const KeyPair> producer, HostOptions options = {});
  /// Rebuilds the node from an exported chain, then keeps appending to it.
  static std::unique_ptr<NodeHost> from_chain_file(const std::filesystem::path& path,
                                                   std::shared_ptr<const KeyPair> producer, HostOptions options = {});
  ~NodeHost();
  NodeHost(const NodeHost&) = delete;
  NodeHost& operator=(const NodeHost&) = delete;

  SubmitResult submit(const SignedTransaction& tx);
  /// Seals one block from the mempool (possibly empty).
  Status produce();
  /// Waits up to `timeout` for `tx_hash` to be mined.
  std::optional<ExecutionReceipt> wait_receipt(const Hash256& tx_hash, std::chrono::milliseconds timeout);

  /// Runs `fn` with the committed chain under the host lock.
  void read(const std::function<void(const Chain&)>& fn) const;

  /// Events with cursor > since. Throws Error(CursorExpired) when the cursor
  /// predates the retained window. Waits up to `wait` if nothing is new.
  std::vector<LoggedEvent> events_since(std::uint64_t since, std::chrono::milliseconds wait,
                                        std::uint64_t& next) const;

  std::optional<Address> game() const;
  void set_game(const Address& game);
  const ChainSpec& spec() const { return spec_; }

 private:
  Status produce_locked();
  void index_block(std::uint64_t height);
  void ticker();

  ChainSpec spec_;
  HostOptions options_;
  std::unique_ptr<Node> node_;
  std::unique_ptr<ChainFileWriter> writer_;
  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  std::deque<LoggedEvent> events_;
  std::uint64_t next_cursor_ = 1;
  std::optional<Address> game_;
  bool stop_ = false;
  std::thread ticker_;
};

struct ApiOptions {
  std::chrono::seconds session_idle{900};
  std::chrono::milliseconds max_wait{30'000};
  std::chrono::milliseconds admin_receipt_wait{30'000};
};

/// HTTP/JSON front end for one NodeHost. Holds no keys and no game state.
class ApiService {
 public:
  ApiService(NodeHost& host, ApiOptions options = {});
  ~ApiService();

  /// Binds to an ephemeral port and serves on a background thread.
  int start(const std::string& host = "127.0.0.1");
  /// Serves on `port` in the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  struct Session {
    Address address;
    std::chrono::steady_clock::time_point last_used;
  };
  struct Challenge {
    Bytes nonce;
    std::chrono::steady_clock::time_point issued;
  };

  void routes();
  std::optional<Address> session_address(const std::string& auth_header);

  NodeHost& host_;
  ApiOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::mutex session_mu_;
  std::map<std::string, Session> sessions_;
  std::map<Address, Challenge> challenges_;
};

}  // namespace chainclass
