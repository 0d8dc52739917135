#include "chainclass/vm.hpp"

#include "chainclass/crypto.hpp"
#include "chainclass/encoding.hpp"

#include <algorithm>
#include <limits>

namespace chainclass {

namespace {

struct OutOfGasSignal {};

struct RevertSignal {
  Errc code;
  std::string reason;
};

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return b > std::numeric_limits<std::uint64_t>::max() - a ? std::numeric_limits<std::uint64_t>::max()
                                                             : a + b;
}

// a*b, or nullopt if it does not fit in 64 bits.
std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  if (p > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  return static_cast<std::uint64_t>(p);
}

struct DeployArgs {
  std::string code_id;
  Bytes init;
};

DeployArgs decode_deploy_args(ByteView args) {
  Decoder d(args);
  DeployArgs out;
  out.code_id = d.str();
  out.init = d.blob();
  d.finish();
  return out;
}

struct Outcome {
  ExecutionReceipt receipt;
  std::optional<ContractRecord> record;
};

// Runs the contract part of a tx against `work`. Leaves `work` in an
// arbitrary state on revert; the caller discards it.
Outcome run_contract(WorldState& work, const SignedTransaction& tx, const BlockContext& block,
                     const ChainRules& rules, const ContractRegistry& registry, std::uint64_t start_gas) {
  Outcome out;
  auto& r = out.receipt;
  Address self;
  const CodeEntry* entry = nullptr;
  std::optional<DeployArgs> dargs;

  auto fail = [&](Errc code, std::string reason, std::uint64_t gas) {
    r.ok = false;
    r.error = code;
    r.reason = std::move(reason);
    r.gas_used = gas;
    r.events.clear();
    out.record.reset();
  };

  const auto& body = tx.body;
  if (tx.is_deploy()) {
    if (body.payload.kind != kDeployKind) {
      fail(Errc::UnknownMethod, "deploy tx must use the deploy call kind", start_gas);
      return out;
    }
    try {
      dargs = decode_deploy_args(body.payload.args);
    } catch (const Error& e) {
      fail(e.code(), e.detail(), start_gas);
      return out;
    }
    entry = registry.find(dargs->code_id);
    if (!entry) {
      fail(Errc::UnknownCode, "no registered code '" + dargs->code_id + "'", start_gas);
      return out;
    }
    if (entry->policy == DeployPolicy::AdminOnly && body.from != rules.admin) {
      fail(Errc::Unauthorized, "only the admin may deploy " + dargs->code_id, start_gas);
      return out;
    }
    self = contract_address_for(body.from, body.nonce);
  } else {
    self = *body.contract;
    const auto* rec = work.contract(self);
    if (!rec) {
      fail(Errc::UnknownContract, "no contract at " + self.hex(), start_gas);
      return out;
    }
    entry = registry.find(rec->code_id);
    if (!entry || entry->version != rec->version) {
      fail(Errc::UnknownCode, "code " + rec->code_id + "@" + rec->version + " not in registry", start_gas);
      return out;
    }
  }

  ContractContext ctx(work, self, tx, block, rules, start_gas);
  try {
    if (dargs) {
      ContractRecord rec{self, entry->code_id, entry->version, code_hash_of(entry->code_id, entry->version)};
      ctx.charge(rules.gas.per_storage_write);
      work.add_contract(rec);
      try {
        entry->contract->init(ctx, dargs->init);
      } catch (const RevertSignal& rs) {
        throw RevertSignal{Errc::InitRejected, std::string(errc_name(rs.code)) +
                                                   (rs.reason.empty() ? "" : ": " + rs.reason)};
      } catch (const Error& e) {
        throw RevertSignal{Errc::InitRejected, e.what()};
      }
      out.record = rec;
      r.contract_address = self;
    } else {
      entry->contract->call(ctx, body.payload.kind, body.payload.args);
    }
    r.ok = true;
    r.gas_used = ctx.gas_used();
    r.events = ctx.take_events();
  } catch (const OutOfGasSignal&) {
    fail(Errc::OutOfGas, {}, body.gas_limit);
  } catch (const RevertSignal& rs) {
    fail(rs.code, rs.reason, ctx.gas_used());
  } catch (const Error& e) {
    fail(e.code(), e.detail(), ctx.gas_used());
  }
  return out;
}

}  // namespace

Bytes GasSchedule::encode() const {
  Encoder e;
  e.u64(tx_base).u64(per_payload_byte).u64(per_storage_read).u64(per_storage_write).u64(per_report_render);
  return e.take();
}

GasSchedule GasSchedule::decode(ByteView data) {
  Decoder d(data);
  GasSchedule g;
  g.tx_base = d.u64();
  g.per_payload_byte = d.u64();
  g.per_storage_read = d.u64();
  g.per_storage_write = d.u64();
  g.per_report_render = d.u64();
  d.finish();
  return g;
}

std::uint64_t intrinsic_gas(std::size_t payload_bytes, const GasSchedule& schedule) {
  auto per = checked_mul(schedule.per_payload_byte, payload_bytes);
  return sat_add(schedule.tx_base, per.value_or(std::numeric_limits<std::uint64_t>::max()));
}

std::uint64_t intrinsic_gas(const SignedTransaction& tx, const GasSchedule& schedule) {
  return intrinsic_gas(tx.payload_size(), schedule);
}

Bytes ChainRules::encode() const {
  Encoder e;
  e.field(gas.encode()).u64(block_gas_limit).u64(gas_price).fixed(admin);
  return e.take();
}

ChainRules ChainRules::decode(ByteView data) {
  Decoder d(data);
  ChainRules r;
  r.gas = GasSchedule::decode(d.field());
  r.block_gas_limit = d.u64();
  r.gas_price = d.u64();
  r.admin = d.fixed<Address>();
  d.finish();
  return r;
}

ContractContext::ContractContext(WorldState& state, const Address& self, const SignedTransaction& tx,
                                 const BlockContext& block, const ChainRules& rules, std::uint64_t gas_used)
    : state_(state), self_(self), tx_(tx), block_(block), rules_(rules), gas_used_(gas_used) {}

void ContractContext::charge(std::uint64_t gas) {
  gas_used_ = sat_add(gas_used_, gas);
  if (gas_used_ > tx_.body.gas_limit) throw OutOfGasSignal{};
}

std::optional<Bytes> ContractContext::read(ByteView key) {
  charge(rules_.gas.per_storage_read);
  return state_.storage(self_, key);
}

void ContractContext::write(ByteView key, Bytes value) {
  charge(rules_.gas.per_storage_write);
  state_.set_storage(self_, key, std::move(value));
}

void ContractContext::erase(std::string_view key) {
  charge(rules_.gas.per_storage_write);
  state_.erase_storage(self_, as_bytes(key));
}

Amount ContractContext::balance(const Address& a) {
  charge(rules_.gas.per_storage_read);
  return state_.balance(a);
}

void ContractContext::transfer(const Address& from, const Address& to, Amount amount) {
  if (amount == 0) return;
  try {
    state_.transfer(from, to, amount);
  } catch (const Error& e) {
    revert(e.code(), e.detail());
  }
}

void ContractContext::emit(std::string topic, Bytes value) {
  events_.push_back({std::move(topic), std::move(value)});
}

void ContractContext::revert(Errc code, std::string reason) {
  throw RevertSignal{code, std::move(reason)};
}

void ContractRegistry::add(CodeEntry entry) {
  auto id = entry.code_id;
  entries_.insert_or_assign(std::move(id), std::move(entry));
}

const CodeEntry* ContractRegistry::find(std::string_view code_id) const {
  auto it = entries_.find(code_id);
  return it == entries_.end() ? nullptr : &it->second;
}

Address contract_address_for(const Address& sender, std::uint64_t nonce) {
  Encoder e;
  e.fixed(sender).u64(nonce);
  auto h = sha256(e.bytes());
  Address a;
  std::copy(h.bytes.end() - 20, h.bytes.end(), a.bytes.begin());
  return a;
}

Payload deploy_payload(std::string_view code_id, ByteView init_args) {
  Encoder e;
  e.str(code_id).field(init_args);
  return Payload{std::string(kDeployKind), e.take()};
}

Status check_admission(const WorldState& state, const SignedTransaction& tx, const ChainRules& rules) {
  if (auto s = verify_transaction(tx); !s) return s;
  const auto& b = tx.body;
  auto expected = state.nonce(b.from);
  if (b.nonce < expected)
    return Status::fail(Errc::StaleNonce,
                        "nonce " + std::to_string(b.nonce) + " < expected " + std::to_string(expected));
  if (b.nonce > expected)
    return Status::fail(Errc::FutureNonce,
                        "nonce " + std::to_string(b.nonce) + " > expected " + std::to_string(expected));
  if (b.gas_price < rules.gas_price) return Status::fail(Errc::GasPriceTooLow);
  if (b.gas_limit > rules.block_gas_limit) return Status::fail(Errc::GasLimitExceedsBlock);
  auto max_fee = checked_mul(b.gas_limit, b.gas_price);
  if (!max_fee || state.balance(b.from) < *max_fee)
    return Status::fail(Errc::InsufficientFeeBalance);
  return Status::ok();
}

DeployResult deploy(const WorldState& state, const SignedTransaction& tx, const BlockContext& block,
                    const ChainRules& rules, const ContractRegistry& registry) {
  if (!tx.is_deploy()) throw Error(Errc::InvalidTx, "not a deploy transaction");
  auto r = execute(state, tx, block, rules, registry);
  DeployResult out{std::move(r.state), std::nullopt, std::move(r.receipt)};
  if (out.receipt.contract_address) {
    const auto* rec = out.state.contract(*out.receipt.contract_address);
    if (rec) out.record = *rec;
  }
  return out;
}

ExecutionResult execute(const WorldState& state, const SignedTransaction& tx, const BlockContext& block,
                        const ChainRules& rules, const ContractRegistry& registry) {
  if (auto s = check_admission(state, tx, rules); !s) throw Error(s.code, s.detail);
  const auto& b = tx.body;
  const Amount max_fee = b.gas_limit * b.gas_price;  // checked in admission

  WorldState base = state;
  base.set_nonce(b.from, b.nonce + 1);
  base.debit(b.from, max_fee);

  Outcome outcome;
  auto start_gas = intrinsic_gas(tx, rules.gas);
  if (start_gas > b.gas_limit) {
    outcome.receipt.ok = false;
    outcome.receipt.error = Errc::OutOfGas;
    outcome.receipt.reason = "gas limit below intrinsic gas";
    outcome.receipt.gas_used = b.gas_limit;
  } else {
    WorldState work = base;
    outcome = run_contract(work, tx, block, rules, registry, start_gas);
    if (outcome.receipt.ok) base = std::move(work);
  }
  outcome.receipt.tx_hash = tx.hash();

  const Amount fee = outcome.receipt.gas_used * b.gas_price;
  base.credit(b.from, max_fee - fee);
  return ExecutionResult{std::move(base), std::move(outcome.receipt), fee};
}

namespace bench_counter {

namespace {

class Counter final : public NativeContract {
 public:
  void init(ContractContext& ctx, ByteView args) override {
    if (!args.empty()) ctx.revert(Errc::InvalidConfig, "bench counter takes no init args");
    ctx.write("count", Encoder().u64(0).take());
  }

  void call(ContractContext& ctx, std::string_view method, ByteView args) override {
    if (method == "increment") {
      auto cur = ctx.read("count");
      std::uint64_t n = 0;
      if (cur) {
        Decoder d(*cur);
        n = d.u64();
      }
      ctx.write("count", Encoder().u64(n + 1).take());
      ctx.emit("Incremented", Encoder().u64(n + 1).take());
    } else if (method == "burn") {
      Decoder d(args);
      auto gas = d.u64();
      d.finish();
      ctx.charge(gas);
    } else {
      ctx.revert(Errc::UnknownMethod, std::string(method));
    }
  }
};

}  // namespace

CodeEntry entry() {
  return CodeEntry{std::string(kCodeId), std::string(kVersion), DeployPolicy::Anyone,
                   std::make_shared<Counter>()};
}

Payload increment() {
  return Payload{"increment", {}};
}

Payload burn(std::uint64_t gas) {
  return Payload{"burn", Encoder().u64(gas).take()};
}

}  // namespace bench_counter

}  // namespace chainclass
