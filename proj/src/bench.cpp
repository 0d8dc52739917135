#include "chainclass/bench.hpp"

#include "chainclass/chain.hpp"
#include "chainclass/crypto.hpp"
#include "chainclass/node.hpp"

#include <chrono>
#include <cstdio>

namespace chainclass {

ConsensusMetrics run_consensus_bench(const BenchOptions& opt) {
  auto producer = std::make_shared<const KeyPair>(KeyPair::from_label("bench/producer"));
  const auto sender = KeyPair::from_label("bench/sender");

  ChainSpec spec;
  spec.consensus.kind = opt.kind;
  spec.consensus.pow_difficulty_bits = opt.difficulty_bits;
  if (opt.kind == ConsensusKind::PoA) spec.consensus.poa_authorities = {producer->address()};
  if (opt.kind == ConsensusKind::PoS) spec.consensus.pos_validators = {producer->address()};
  spec.rules.admin = producer->address();
  spec.allocations = {{producer->address(), tokens(1000)}, {sender.address(), tokens(100'000)}};

  std::vector<NodeSetup> setups{{NodeRole::Authority, producer}};
  for (std::size_t i = 1; i < std::max<std::size_t>(opt.nodes, 1); ++i)
    setups.push_back({NodeRole::Observer,
                      std::make_shared<const KeyPair>(KeyPair::from_label("bench/observer/" + std::to_string(i)))});
  ThreadedNetwork net(spec, std::move(setups));

  std::uint64_t nonce = 0;
  std::optional<Address> counter;
  auto tx = [&](std::optional<Address> to, Payload p) {
    UnsignedTransaction u;
    u.nonce = nonce++;
    u.contract = to;
    u.payload = std::move(p);
    u.gas_limit = 200'000;
    u.gas_price = spec.rules.gas_price;
    return sign_transaction(sender, std::move(u));
  };

  ConsensusMetrics m;
  m.kind = opt.kind;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t b = 0; b < opt.blocks; ++b) {
    if (opt.txs_per_block > 0) {
      if (!counter) {
        counter = contract_address_for(sender.address(), nonce);
        net.broadcast_tx(0, tx(std::nullopt, deploy_payload("bench-counter-v1", {})));
      } else {
        for (std::size_t i = 0; i < opt.txs_per_block; ++i) net.broadcast_tx(0, tx(counter, Payload{"increment", {}}));
      }
    }
    std::uint64_t attempts = 0;
    auto s = net.produce(0, &attempts);
    if (!s) throw Error(s.code, "bench block " + std::to_string(b + 1) + ": " + s.message());
    m.hash_attempts += attempts;
    ++m.blocks_produced;
    if (opt.kind != ConsensusKind::PoW) ++m.proposer_selections;
  }
  net.wait_quiet();
  m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!net.converged()) throw Error(Errc::BadLink, "bench nodes did not converge");
  return m;
}

std::string bench_csv_row(const ConsensusMetrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s,%llu,%llu,%.6f,%.2f", std::string(consensus_name(m.kind)).c_str(),
                static_cast<unsigned long long>(m.blocks_produced), static_cast<unsigned long long>(m.hash_attempts),
                m.wall_time, m.attempts_per_block());
  return buf;
}

}  // namespace chainclass
