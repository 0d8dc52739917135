#include "chainclass/api.hpp"

#include "chainclass/game.hpp"

#include <httplib.h>
#include <sodium.h>

#include <algorithm>

namespace chainclass {

namespace {

constexpr std::string_view kLoginPrefix = "chainclass login\n";

Bytes random_bytes(std::size_t n) {
  ensure_crypto();
  Bytes b(n);
  randombytes_buf(b.data(), b.size());
  return b;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, Errc code, const std::string& detail) {
  reply(res, status, {{"error", std::string(errc_name(code))}, {"detail", detail}});
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Body is either the hex string itself or {"tx": "0x..."}.
std::optional<SignedTransaction> decode_tx_body(const std::string& raw, httplib::Response& res) {
  auto body = trim(raw);
  try {
    if (!body.empty() && body.front() == '{') body = json::parse(body).at("tx").get<std::string>();
    if (!body.empty() && body.front() == '"') body = json::parse(body).get<std::string>();
    return SignedTransaction::decode(from_hex(body));
  } catch (const Error& e) {
    fail(res, 400, e.code(), e.detail());
  } catch (const std::exception& e) {
    fail(res, 400, Errc::MalformedInput, e.what());
  }
  return std::nullopt;
}

std::optional<std::uint64_t> query_u64(const httplib::Request& req, const char* name, httplib::Response& res) {
  if (!req.has_param(name)) return std::nullopt;
  try {
    return parse_u64(json(req.get_param_value(name)), name);
  } catch (const Error& e) {
    fail(res, 400, Errc::MalformedInput, e.detail());
    throw;
  }
}

json logged_json(const LoggedEvent& e) {
  auto j = to_json(e.event);
  j["cursor"] = e.cursor;
  j["height"] = e.height;
  j["tx_hash"] = e.tx_hash.hex();
  return j;
}

}  // namespace

// ---- NodeHost

NodeHost::NodeHost(const ChainSpec& spec, std::shared_ptr<const KeyPair> producer, HostOptions options)
    : spec_(spec), options_(std::move(options)), game_(options_.game) {
  node_ = std::make_unique<Node>(0, NodeSetup{NodeRole::Authority, std::move(producer)}, spec_);
  if (options_.chain_file)
    writer_ = std::make_unique<ChainFileWriter>(*options_.chain_file, spec_, node_->chain().head());
  if (options_.block_time_ms > 0) ticker_ = std::thread([this] { ticker(); });
}

std::unique_ptr<NodeHost> NodeHost::from_chain_file(const std::filesystem::path& path,
                                                    std::shared_ptr<const KeyPair> producer, HostOptions options) {
  auto file = read_chain_file(path);
  auto ticker_period = options.block_time_ms;
  options.chain_file.reset();
  options.block_time_ms = 0;
  auto host = std::make_unique<NodeHost>(file.spec, std::move(producer), options);
  {
    std::lock_guard lk(host->mu_);
    for (std::size_t i = 1; i < file.blocks.size(); ++i) {
      bool fresh = false;
      auto s = host->node_->receive_block(file.blocks[i], fresh);
      if (!s || host->node_->chain().height() != file.blocks[i].index)
        throw Error(s ? Errc::BadLink : s.code, "height " + std::to_string(file.blocks[i].index) + ": " + s.message());
      host->index_block(file.blocks[i].index);
    }
    host->writer_ = std::make_unique<ChainFileWriter>(path);
    host->options_.chain_file = path;
    host->options_.block_time_ms = ticker_period;
  }
  if (ticker_period > 0) host->ticker_ = std::thread([h = host.get()] { h->ticker(); });
  return host;
}

NodeHost::~NodeHost() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  changed_.notify_all();
  if (ticker_.joinable()) ticker_.join();
}

void NodeHost::ticker() {
  std::unique_lock lk(mu_);
  while (!stop_) {
    if (changed_.wait_for(lk, std::chrono::milliseconds(options_.block_time_ms), [&] { return stop_; })) break;
    (void)produce_locked();
  }
}

void NodeHost::index_block(std::uint64_t height) {
  const auto& chain = node_->chain();
  for (const auto& r : chain.receipts_at(height))
    for (const auto& ev : r.events) events_.push_back(LoggedEvent{next_cursor_++, height, r.tx_hash, ev});
  while (events_.size() > options_.event_retention) events_.pop_front();
  if (writer_) writer_->append(chain.block(height));
  if (!game_) {
    for (const auto& r : chain.receipts_at(height)) {
      if (!r.contract_address) continue;
      const auto* rec = chain.head_state().contract(*r.contract_address);
      if (rec && rec->code_id == game::kCodeId) game_ = *r.contract_address;
    }
  }
}

Status NodeHost::produce_locked() {
  const auto& chain = node_->chain();
  const auto ts = options_.clock ? options_.clock(chain) : spec_.genesis_timestamp + chain.height() + 1;
  Block b;
  std::uint64_t attempts = 0;
  auto before = chain.height();
  auto s = node_->produce(ts, b, attempts);
  if (s && node_->chain().height() > before) index_block(node_->chain().height());
  changed_.notify_all();
  return s;
}

Status NodeHost::produce() {
  std::lock_guard lk(mu_);
  return produce_locked();
}

SubmitResult NodeHost::submit(const SignedTransaction& tx) {
  SubmitResult out;
  out.tx_hash = tx.hash();
  std::lock_guard lk(mu_);
  const auto& chain = node_->chain();
  if (chain.find_tx(out.tx_hash) || node_->mempool().contains(out.tx_hash)) {
    if (auto loc = chain.find_tx(out.tx_hash)) out.receipt = chain.receipts_at(loc->height).at(loc->index);
    return out;
  }
  out.status = node_->screen_tx(tx);
  if (out.status) {
    auto adm = check_admission(chain.head_state(), tx, chain.rules());
    if (!adm && adm.code != Errc::FutureNonce) out.status = adm;
  }
  if (out.status) {
    bool fresh = false;
    auto s = node_->receive_tx(tx, fresh);
    if (!s) out.status = Status::fail(Errc::DuplicateNonce, s.detail);
  }
  if (!out.status) return out;
  if (options_.block_time_ms == 0) (void)produce_locked();
  if (auto loc = node_->chain().find_tx(out.tx_hash))
    out.receipt = node_->chain().receipts_at(loc->height).at(loc->index);
  return out;
}

std::optional<ExecutionReceipt> NodeHost::wait_receipt(const Hash256& tx_hash, std::chrono::milliseconds timeout) {
  std::unique_lock lk(mu_);
  std::optional<ExecutionReceipt> out;
  changed_.wait_for(lk, timeout, [&] {
    if (auto loc = node_->chain().find_tx(tx_hash)) {
      out = node_->chain().receipts_at(loc->height).at(loc->index);
      return true;
    }
    return stop_;
  });
  return out;
}

void NodeHost::read(const std::function<void(const Chain&)>& fn) const {
  std::lock_guard lk(mu_);
  fn(node_->chain());
}

std::vector<LoggedEvent> NodeHost::events_since(std::uint64_t since, std::chrono::milliseconds wait,
                                                std::uint64_t& next) const {
  std::unique_lock lk(mu_);
  const auto first = events_.empty() ? next_cursor_ : events_.front().cursor;
  if (since + 1 < first)
    throw Error(Errc::CursorExpired, "cursor " + std::to_string(since) + " is older than " + std::to_string(first - 1));
  if (since + 1 >= next_cursor_ && wait.count() > 0)
    changed_.wait_for(lk, wait, [&] { return stop_ || since + 1 < next_cursor_; });
  std::vector<LoggedEvent> out;
  for (const auto& e : events_)
    if (e.cursor > since) out.push_back(e);
  next = out.empty() ? since : out.back().cursor;
  return out;
}

std::optional<Address> NodeHost::game() const {
  std::lock_guard lk(mu_);
  return game_;
}

void NodeHost::set_game(const Address& game) {
  std::lock_guard lk(mu_);
  game_ = game;
}

// ---- ApiService

ApiService::ApiService(NodeHost& host, ApiOptions options)
    : host_(host), options_(options), server_(std::make_unique<httplib::Server>()) {
  routes();
}

ApiService::~ApiService() {
  stop();
}

int ApiService::start(const std::string& host) {
  const int port = server_->bind_to_any_port(host);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

bool ApiService::listen(const std::string& host, int port) {
  return server_->listen(host, port);
}

void ApiService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::optional<Address> ApiService::session_address(const std::string& auth) {
  constexpr std::string_view kBearer = "Bearer ";
  if (auth.rfind(kBearer, 0) != 0) return std::nullopt;
  const auto token = auth.substr(kBearer.size());
  std::lock_guard lk(session_mu_);
  auto it = sessions_.find(token);
  if (it == sessions_.end()) return std::nullopt;
  const auto now = std::chrono::steady_clock::now();
  if (now - it->second.last_used > options_.session_idle) {
    sessions_.erase(it);
    return std::nullopt;
  }
  it->second.last_used = now;
  return it->second.address;
}

void ApiService::routes() {
  auto& s = *server_;

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      fail(res, 400, e.code(), e.detail());
    } catch (const std::exception& e) {
      fail(res, 500, Errc::MalformedInput, e.what());
    }
  });

  s.Post("/tx", [this](const httplib::Request& req, httplib::Response& res) {
    auto tx = decode_tx_body(req.body, res);
    if (!tx) return;
    auto r = host_.submit(*tx);
    if (!r.status) {
      reply(res, 422,
            {{"error", std::string(errc_name(r.status.code))}, {"detail", r.status.detail}, {"tx_hash", r.tx_hash.hex()}});
      return;
    }
    json out = {{"tx_hash", r.tx_hash.hex()}, {"status", "accepted"}};
    if (r.receipt) out["receipt"] = to_json(*r.receipt);
    reply(res, 200, out);
  });

  auto admin = [this](std::string_view method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      auto tx = decode_tx_body(req.body, res);
      if (!tx) return;
      if (tx->body.from != host_.spec().rules.admin) {
        fail(res, 403, Errc::Unauthorized, "transaction is not signed by the admin");
        return;
      }
      if (tx->body.payload.kind != method) {
        fail(res, 400, Errc::InvalidParams, "this endpoint only accepts " + std::string(method) + " calls");
        return;
      }
      auto r = host_.submit(*tx);
      if (!r.status) {
        reply(res, 422, {{"error", std::string(errc_name(r.status.code))},
                         {"detail", r.status.detail},
                         {"tx_hash", r.tx_hash.hex()}});
        return;
      }
      if (!r.receipt) r.receipt = host_.wait_receipt(r.tx_hash, options_.admin_receipt_wait);
      if (!r.receipt) {
        reply(res, 202, {{"tx_hash", r.tx_hash.hex()}, {"status", "pending"}});
        return;
      }
      json out = {{"tx_hash", r.tx_hash.hex()}, {"receipt", to_json(*r.receipt)}};
      if (!r.receipt->ok) {
        out["error"] = r.receipt->error ? std::string(errc_name(*r.receipt->error)) : "ContractRevert";
        out["detail"] = r.receipt->reason;
        reply(res, 422, out);
        return;
      }
      reply(res, 200, out);
    };
  };
  s.Post("/admin/config", admin("configure_game"));
  s.Post("/admin/advance", admin("advance_phase"));
  s.Post("/admin/close", admin("close_round"));

  s.Get("/chain/head", [this](const httplib::Request&, httplib::Response& res) {
    host_.read([&](const Chain& c) {
      auto j = block_json(c, c.height(), false);
      j["head"] = c.head_hash().hex();
      j["height"] = c.height();
      reply(res, 200, j);
    });
  });

  s.Get("/chain/blocks", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::uint64_t> from, to;
    try {
      from = query_u64(req, "from", res);
      to = query_u64(req, "to", res);
    } catch (const Error&) {
      return;
    }
    host_.read([&](const Chain& c) {
      const auto lo = from.value_or(0);
      const auto hi = std::min(to.value_or(c.height()), c.height());
      if (lo > c.height()) return fail(res, 404, Errc::NotFound, "no block at height " + std::to_string(lo));
      if (lo > hi) return fail(res, 400, Errc::InvalidParams, "from must not exceed to");
      if (hi - lo >= 256) return fail(res, 400, Errc::InvalidParams, "at most 256 blocks per request");
      json blocks = json::array();
      for (auto h = lo; h <= hi; ++h) blocks.push_back(block_json(c, h));
      reply(res, 200, {{"head", c.head_hash().hex()}, {"blocks", blocks}});
    });
  });

  s.Get(R"(/accounts/(0x[0-9a-fA-F]{40}))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto a = Address::from_hex(req.matches[1].str());
    host_.read([&](const Chain& c) {
      auto j = account_json(c.head_state(), a);
      j["head"] = c.head_hash().hex();
      reply(res, 200, j);
    });
  });

  s.Get(R"(/state/(0x[0-9a-fA-F]{40})/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto a = Address::from_hex(req.matches[1].str());
    const auto key = req.matches[2].str();
    host_.read([&](const Chain& c) {
      const auto& st = c.head_state();
      if (!st.contract(a)) return fail(res, 404, Errc::UnknownContract, a.hex());
      auto v = st.storage(a, as_bytes(key));
      if (!v) return fail(res, 404, Errc::NotFound, "no value at " + key);
      reply(res, 200, {{"contract", a.hex()}, {"key", key}, {"value", to_hex(*v)}, {"head", c.head_hash().hex()}});
    });
  });

  s.Get(R"(/receipt/(0x[0-9a-fA-F]{64}))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto h = Hash256::from_hex(req.matches[1].str());
    host_.read([&](const Chain& c) {
      auto loc = c.find_tx(h);
      if (!loc) return fail(res, 404, Errc::NotFound, "no mined transaction " + h.hex());
      reply(res, 200, {{"receipt", to_json(c.receipts_at(loc->height).at(loc->index))},
                       {"height", loc->height},
                       {"index", loc->index},
                       {"block", c.hash_at(loc->height).hex()},
                       {"head", c.head_hash().hex()}});
    });
  });

  auto game_of = [this](const httplib::Request& req) -> std::optional<Address> {
    if (req.has_param("game")) return Address::from_hex(req.get_param_value("game"));
    return host_.game();
  };

  s.Get("/round", [this, game_of](const httplib::Request& req, httplib::Response& res) {
    auto g = game_of(req);
    if (!g) return fail(res, 404, Errc::UnknownContract, "no game contract deployed");
    host_.read([&](const Chain& c) {
      const auto& st = c.head_state();
      if (!st.contract(*g)) return fail(res, 404, Errc::UnknownContract, g->hex());
      auto cfg = game::load_config(st, *g);
      auto j = round_json(game::load_round(st, *g), cfg ? &*cfg : nullptr);
      j["game"] = g->hex();
      j["head"] = c.head_hash().hex();
      reply(res, 200, j);
    });
  });

  s.Get("/config", [this, game_of](const httplib::Request& req, httplib::Response& res) {
    auto g = game_of(req);
    host_.read([&](const Chain& c) {
      json out = {{"chain", to_json(c.spec())}, {"head", c.head_hash().hex()}, {"game", nullptr}, {"config", nullptr}};
      if (g && c.head_state().contract(*g)) {
        out["game"] = g->hex();
        if (auto cfg = game::load_config(c.head_state(), *g)) out["config"] = to_json(*cfg);
      }
      reply(res, 200, out);
    });
  });

  s.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::uint64_t> since, wait;
    try {
      since = query_u64(req, "since", res);
      wait = query_u64(req, "wait", res);
    } catch (const Error&) {
      return;
    }
    const auto wait_ms =
        std::min<std::chrono::milliseconds>(std::chrono::milliseconds(wait.value_or(0) * 1000), options_.max_wait);
    std::uint64_t next = 0;
    std::vector<LoggedEvent> evs;
    try {
      evs = host_.events_since(since.value_or(0), wait_ms, next);
    } catch (const Error& e) {
      return fail(res, 410, e.code(), e.detail());
    }
    json list = json::array();
    for (const auto& e : evs) list.push_back(logged_json(e));
    std::string head;
    host_.read([&](const Chain& c) { head = c.head_hash().hex(); });
    reply(res, 200, {{"events", list}, {"next", next}, {"head", head}});
  });

  s.Post("/session/challenge", [this](const httplib::Request& req, httplib::Response& res) {
    Address a;
    try {
      a = Address::from_hex(json::parse(req.body).at("address").get<std::string>());
    } catch (const std::exception& e) {
      return fail(res, 400, Errc::MalformedInput, e.what());
    }
    Bytes nonce = random_bytes(32);
    Bytes message = to_bytes(kLoginPrefix);
    append(message, nonce);
    {
      std::lock_guard lk(session_mu_);
      challenges_[a] = Challenge{nonce, std::chrono::steady_clock::now()};
    }
    reply(res, 200, {{"address", a.hex()}, {"challenge", to_hex(nonce)}, {"message", to_hex(message)}});
  });

  s.Post("/session/login", [this](const httplib::Request& req, httplib::Response& res) {
    Address a;
    PublicKey pk;
    Signature sig;
    try {
      auto j = json::parse(req.body);
      a = Address::from_hex(j.at("address").get<std::string>());
      pk = PublicKey::from_hex(j.at("public_key").get<std::string>());
      sig = Signature::from_hex(j.at("signature").get<std::string>());
    } catch (const std::exception& e) {
      return fail(res, 400, Errc::MalformedInput, e.what());
    }
    std::lock_guard lk(session_mu_);
    auto it = challenges_.find(a);
    if (it == challenges_.end()) return fail(res, 404, Errc::NotFound, "request a challenge first");
    Bytes message = to_bytes(kLoginPrefix);
    append(message, it->second.nonce);
    bool ok = false;
    try {
      ok = derive_address(pk) == a && verify_signature(pk, message, sig);
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) return fail(res, 403, Errc::BadSignature, "signature does not prove ownership of " + a.hex());
    challenges_.erase(it);
    const auto token = to_hex(random_bytes(32)).substr(2);
    sessions_[token] = Session{a, std::chrono::steady_clock::now()};
    reply(res, 200, {{"token", token}, {"address", a.hex()}, {"idle_timeout_s", options_.session_idle.count()}});
  });

  s.Get(R"(/report/(\d+))", [this, game_of](const httplib::Request& req, httplib::Response& res) {
    auto who = session_address(req.get_header_value("Authorization"));
    if (!who) return fail(res, 401, Errc::Unauthorized, "log in through /session first");
    Address team = *who;
    if (req.has_param("team")) team = Address::from_hex(req.get_param_value("team"));
    if (team != *who) return fail(res, 403, Errc::Unauthorized, "session belongs to " + who->hex());
    auto g = game_of(req);
    if (!g) return fail(res, 404, Errc::UnknownContract, "no game contract deployed");
    const auto round = std::stoull(req.matches[1].str());
    host_.read([&](const Chain& c) {
      try {
        auto j = game::rendered_report(c.head_state(), *g, round, team);
        j["head"] = c.head_hash().hex();
        reply(res, 200, j);
      } catch (const Error& e) {
        const int status = e.code() == Errc::RoundOpen ? 409 : 404;
        fail(res, status, e.code(), e.detail());
      }
    });
  });
}

}  // namespace chainclass
