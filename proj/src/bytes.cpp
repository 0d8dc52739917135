#include "chainclass/bytes.hpp"

#include "chainclass/error.hpp"

#include <algorithm>
#include <array>

namespace chainclass {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

constexpr std::array<const char*, 56> kErrcNames = {
    "Ok",
    "MalformedInput",
    "InvalidKey",
    "BadSignature",
    "NonCanonicalEncoding",
    "BadLink",
    "BadSeal",
    "WrongProposer",
    "BadStateRoot",
    "GasOverflow",
    "GasMismatch",
    "BadTx",
    "InvalidSuffix",
    "SupplyOverflow",
    "StaleNonce",
    "FutureNonce",
    "DuplicateNonce",
    "InsufficientFeeBalance",
    "GasPriceTooLow",
    "GasLimitExceedsBlock",
    "EmptyAuthoritySet",
    "NoStake",
    "NotProposer",
    "InvalidParams",
    "UnknownCode",
    "Unauthorized",
    "InitRejected",
    "OutOfGas",
    "ContractRevert",
    "UnknownContract",
    "UnknownMethod",
    "ConfigLocked",
    "InvalidConfig",
    "NotConfigured",
    "WrongPhase",
    "NotATeam",
    "OverBudget",
    "InsufficientBalance",
    "NoPlan",
    "CapExceeded",
    "UnknownKeywordChannel",
    "NoActiveEvent",
    "AlreadyPurchased",
    "TerminalPhase",
    "TreasuryInsufficient",
    "RoundOpen",
    "UnknownRound",
    "ZeroSpend",
    "WrongPassphrase",
    "LockedKeystore",
    "CorruptFile",
    "InvalidTx",
    "ScenarioError",
    "NotFound",
    "CursorExpired",
    nullptr,
};

static_assert(static_cast<std::size_t>(Errc::CursorExpired) + 2 == kErrcNames.size());

}  // namespace

std::string to_hex(ByteView data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out = "0x";
  out.reserve(2 + data.size() * 2);
  for (auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
  if (text.size() % 2 != 0) throw Error(Errc::MalformedInput, "odd-length hex");
  Bytes out;
  out.reserve(text.size() / 2);
  for (std::size_t i = 0; i < text.size(); i += 2) {
    int hi = hex_digit(text[i]);
    int lo = hex_digit(text[i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::MalformedInput, "invalid hex digit");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

template <std::size_t N, typename Tag>
std::string FixedBytes<N, Tag>::hex() const {
  return to_hex(view());
}

template <std::size_t N, typename Tag>
FixedBytes<N, Tag> FixedBytes<N, Tag>::from_hex(std::string_view text) {
  return from_view(chainclass::from_hex(text));
}

template <std::size_t N, typename Tag>
FixedBytes<N, Tag> FixedBytes<N, Tag>::from_view(ByteView v) {
  if (v.size() != N)
    throw Error(Errc::MalformedInput,
                "expected " + std::to_string(N) + " bytes, got " + std::to_string(v.size()));
  FixedBytes out;
  std::copy(v.begin(), v.end(), out.bytes.begin());
  return out;
}

template struct FixedBytes<32, HashTag>;
template struct FixedBytes<20, AddressTag>;
template struct FixedBytes<32, PublicKeyTag>;
template struct FixedBytes<64, SignatureTag>;

std::string_view errc_name(Errc code) {
  auto i = static_cast<std::size_t>(code);
  if (i + 1 >= kErrcNames.size()) return "Unknown";
  return kErrcNames[i];
}

std::optional<Errc> errc_from_name(std::string_view name) {
  for (std::size_t i = 0; kErrcNames[i] != nullptr; ++i)
    if (name == kErrcNames[i]) return static_cast<Errc>(i);
  return std::nullopt;
}

Error::Error(Errc code, std::string detail)
    : std::runtime_error(detail.empty() ? std::string(errc_name(code))
                                        : std::string(errc_name(code)) + ": " + detail),
      code_(code),
      detail_(std::move(detail)) {}

std::string Status::message() const {
  std::string out(errc_name(code));
  if (index) out += "(" + std::to_string(*index) + ")";
  if (!detail.empty()) out += ": " + detail;
  return out;
}

}  // namespace chainclass
