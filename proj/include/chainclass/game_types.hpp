#pragma once

#include "chainclass/bytes.hpp"
#include "chainclass/error.hpp"
#include "chainclass/fixed_point.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chainclass {

struct Product {
  std::string name;
  std::uint64_t unit_price = 0;  // tokens
  std::string segment;
  bool operator==(const Product&) const = default;
};

struct Channel {
  std::string name;
  std::map<std::string, Fixed> reach;  // segment -> factor in [0, 1]
  std::vector<std::string> keyword_vocabulary;

  Fixed reach_for(const std::string& segment) const;
  bool operator==(const Channel&) const = default;
};

enum class Cadence : std::uint8_t { Daily = 0, Weekly = 1 };

/// Rule set of one game. Money amounts here are whole tokens.
struct GameConfig {
  std::vector<Address> teams;
  std::vector<Product> products;
  std::vector<Channel> channels;
  std::uint64_t weekly_budget = 10'000;
  std::uint64_t report_price = 500;
  Fixed adjustment_cap = Fixed::from_raw(200'000);
  std::uint64_t rounds_total = 8;
  Cadence cadence = Cadence::Weekly;
  Fixed event_probability = Fixed::from_raw(300'000);
  Fixed event_penalty = Fixed::from_raw(800'000);
  Fixed concentration_gain = Fixed::from_raw(250'000);
  std::map<std::pair<std::string, std::uint64_t>, std::uint64_t> demand;  // (segment, round) -> units
  std::uint64_t gas_price = 20000000000ULL;
  std::uint64_t block_gas_limit = 6721975;
  Address treasury;
  std::optional<Address> scheduler;
  bool budget_carryover = false;

  Status validate() const;
  /// Distinct product segments in sorted order.
  std::vector<std::string> segments() const;
  std::uint64_t demand_for(const std::string& segment, std::uint64_t round) const;
  std::optional<std::size_t> channel_index(std::string_view name) const;
  bool is_team(const Address& a) const;

  Bytes encode() const;
  static GameConfig decode(ByteView data);
  bool operator==(const GameConfig&) const = default;
};

inline constexpr std::size_t kProductCount = 3;

/// Row-major [product][channel] matrix of whole tokens.
template <typename T>
struct CellMatrix {
  std::size_t products = 0;
  std::size_t channels = 0;
  std::vector<T> cells;

  CellMatrix() = default;
  CellMatrix(std::size_t p, std::size_t c) : products(p), channels(c), cells(p * c, T{}) {}

  T& at(std::size_t p, std::size_t c) { return cells.at(p * channels + c); }
  const T& at(std::size_t p, std::size_t c) const { return cells.at(p * channels + c); }
  bool operator==(const CellMatrix&) const = default;
};

using SpendMatrix = CellMatrix<std::uint64_t>;
using DeltaMatrix = CellMatrix<std::int64_t>;

/// Sum of all cells, or nullopt on 64-bit overflow.
std::optional<std::uint64_t> matrix_total(const SpendMatrix& m);

struct Plan {
  SpendMatrix spend;

  Bytes encode() const;
  static Plan decode(ByteView data);
  bool operator==(const Plan&) const = default;
};

struct Adjustment {
  std::map<std::string, std::vector<std::string>> keywords;  // channel name -> keywords
  std::map<std::string, std::uint64_t> target_weights;       // segment -> weight
  DeltaMatrix spend_delta;

  Bytes encode() const;
  static Adjustment decode(ByteView data);
  bool operator==(const Adjustment&) const = default;
};

enum class EventKind : std::uint8_t {
  SalesPromotionSupport = 0,
  GoodCause = 1,
  DistributionIssue = 2,
  TechnicalFault = 3,
};

enum class ResponseChoice : std::uint8_t {
  FundPromotion = 0,
  SponsorCause = 1,
  SwitchDistributor = 2,
  RecallAndFix = 3,
};

inline constexpr std::size_t kEventKindCount = 4;

ResponseChoice correct_response(EventKind kind);
std::string_view event_kind_name(EventKind k);
std::string_view response_name(ResponseChoice c);
EventKind parse_event_kind(std::string_view name);
ResponseChoice parse_response(std::string_view name);

struct EventDraw {
  bool occurred = false;
  EventKind kind = EventKind::SalesPromotionSupport;
  std::uint32_t affected_product = 0;

  Bytes encode() const;
  static EventDraw decode(ByteView data);
  bool operator==(const EventDraw&) const = default;
};

enum class Phase : std::uint8_t {
  NotStarted = 0,
  Planning = 1,
  Execution = 2,
  Reporting = 3,
  Closed = 4,
};

std::string_view phase_name(Phase p);

struct RoundState {
  std::uint64_t index = 0;  // 0 until the game starts
  Phase phase = Phase::NotStarted;
  std::optional<EventDraw> event;  // set when an event occurred this round

  bool test_round() const { return index == 1; }
  /// True once the final round is closed.
  bool game_over(const GameConfig& cfg) const { return phase == Phase::Closed && index == cfg.rounds_total; }

  Bytes encode() const;
  static RoundState decode(ByteView data);
  bool operator==(const RoundState&) const = default;
};

enum class EventOutcome : std::uint8_t { None = 0, Avoided = 1, Penalized = 2 };
std::string_view event_outcome_name(EventOutcome o);

struct TeamResult {
  Address team;
  bool participated = false;
  std::uint64_t spend_total = 0;
  Fixed multiplier;
  std::vector<Fixed> effective_spend;  // per product
  std::vector<Fixed> share;            // per product
  std::vector<std::uint64_t> units_sold;
  std::uint64_t revenue = 0;  // tokens
  EventOutcome event_outcome = EventOutcome::None;
  std::uint64_t score_delta = 0;
  Fixed overall_share;
  std::uint8_t feedback_index = 2;
  std::string feedback;

  bool operator==(const TeamResult&) const = default;
};

struct SegmentSummary {
  std::string segment;
  std::uint64_t demand = 0;
  std::string top_channel;
  bool operator==(const SegmentSummary&) const = default;
};

/// Hash-committed outcome of one round.
struct TurnReport {
  std::uint64_t round = 0;
  bool test_round = false;
  EventDraw event;
  std::vector<TeamResult> teams;  // sorted by address
  std::vector<SegmentSummary> segments;

  const TeamResult* find(const Address& team) const;

  Bytes encode() const;
  static TurnReport decode(ByteView data);
  Hash256 digest() const;
  bool operator==(const TurnReport&) const = default;
};

}  // namespace chainclass
