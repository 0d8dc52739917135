#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chainclass {

/// Machine-readable error codes shared by every module. The names are the
/// strings surfaced by the API and CLI.
enum class Errc {
  Ok,
  MalformedInput,
  InvalidKey,
  BadSignature,
  NonCanonicalEncoding,
  // chain
  BadLink,
  BadSeal,
  WrongProposer,
  BadStateRoot,
  GasOverflow,
  GasMismatch,
  BadTx,
  InvalidSuffix,
  SupplyOverflow,
  // admission
  StaleNonce,
  FutureNonce,
  DuplicateNonce,
  InsufficientFeeBalance,
  GasPriceTooLow,
  GasLimitExceedsBlock,
  // consensus
  EmptyAuthoritySet,
  NoStake,
  NotProposer,
  InvalidParams,
  // vm
  UnknownCode,
  Unauthorized,
  InitRejected,
  OutOfGas,
  ContractRevert,
  UnknownContract,
  UnknownMethod,
  // game
  ConfigLocked,
  InvalidConfig,
  NotConfigured,
  WrongPhase,
  NotATeam,
  OverBudget,
  InsufficientBalance,
  NoPlan,
  CapExceeded,
  UnknownKeywordChannel,
  NoActiveEvent,
  AlreadyPurchased,
  TerminalPhase,
  TreasuryInsufficient,
  RoundOpen,
  UnknownRound,
  ZeroSpend,
  // wallet
  WrongPassphrase,
  LockedKeystore,
  CorruptFile,
  // node / scenario / api
  InvalidTx,
  ScenarioError,
  NotFound,
  CursorExpired,
};

std::string_view errc_name(Errc code);
std::optional<Errc> errc_from_name(std::string_view name);

/// Exception type thrown by value-returning operations.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail = {});

  Errc code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

/// Outcome of an `ok | error` operation.
struct Status {
  Errc code = Errc::Ok;
  std::string detail;
  std::optional<std::size_t> index;  // offending tx index for BadTx

  static Status ok() { return {}; }
  static Status fail(Errc c, std::string d = {}, std::optional<std::size_t> idx = std::nullopt) {
    return {c, std::move(d), idx};
  }
  bool is_ok() const { return code == Errc::Ok; }
  explicit operator bool() const { return is_ok(); }
  std::string message() const;
};

}  // namespace chainclass
