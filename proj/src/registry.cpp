#include "chainclass/game.hpp"
#include "chainclass/vm.hpp"

namespace chainclass {

const ContractRegistry& builtin_registry() {
  static const ContractRegistry registry = [] {
    ContractRegistry r;
    r.add(game::entry());
    r.add(bench_counter::entry());
    return r;
  }();
  return registry;
}

}  // namespace chainclass
