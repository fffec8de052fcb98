// Hyperplane games on C^n.  Player A removes thin neighbourhoods of complex
// hyperplanes, player B answers with a shrunken ball avoiding them; the limit
// point of B's balls is what A tries to steer.  Two rule sets:
//
//   HA: at most one hyperplane per round, thickness delta <= beta * rho,
//       beta < 1/3;
//   HP: a finite family per round with sum delta_i^gamma <= (beta rho)^gamma,
//       beta < 1.
//
// StrategyABad plays the blocking strategy built on resonance: whenever B's
// ball enters a fresh radius class it erases, band by band, the union of
// approximation boxes that meet the ball.  All boxes of one band share a ratio
// point, so one hyperplane through it suffices.  The certificate is that the
// limit point is eps-bad for every denominator height the processed classes
// cover, which in_bad_eps can confirm independently.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "badflow/bad_approx.hpp"
#include "badflow/field.hpp"

namespace badflow {

struct GameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IllegalMove : GameError {
  using GameError::GameError;
};
// The strategy's hyperplane budget would be violated; surfaced, never clipped.
struct BudgetExceeded : GameError {
  using GameError::GameError;
};

struct Ball {
  ComplexVector center;
  double radius = 0.0;
};

// {w : |<w, normal> - offset| <= delta * ||normal||}, Hermitian inner product.
struct HyperplaneNbhd {
  std::vector<cplx> normal;
  cplx offset;
  double delta = 0.0;
};

// Distance from w to the core hyperplane; 1-Lipschitz and exact for balls.
double hyperplane_distance(const HyperplaneNbhd& h, const ComplexVector& w);

enum class GameKind { HA, HP };

struct GameConfig {
  GameKind kind = GameKind::HP;
  double beta = 0.3;
  double gamma = 1.0;
  int rounds = 0;
  std::uint64_t seed = 0;
  Ball start;
};

struct AMove {
  std::vector<HyperplaneNbhd> family;  // may be empty (pass)
};

struct MoveCheck {
  bool ok = true;
  std::string reason;
};

MoveCheck validate_a_move(const GameConfig& cfg, const Ball& current, const AMove& mv);
MoveCheck validate_b_move(const GameConfig& cfg, const Ball& current, const AMove& last,
                          const Ball& next);

struct RoundRecord {
  Ball before;
  AMove a;
  Ball after;
};

struct Transcript {
  GameConfig config;
  std::vector<RoundRecord> rounds;
  Ball final_ball;

  std::string to_json() const;
  static Transcript from_json(const std::string& text);
};

struct AuditReport {
  bool legal = true;
  int violation_round = -1;  // -1 when legal
  std::string first_violation;
  int rounds = 0;
  double final_radius = 0.0;
};

// Re-validates a transcript move by move against the recorded config.
AuditReport audit_transcript(const Transcript& t);

// ---------------------------------------------------------------------------
// players

class StrategyA {
 public:
  virtual ~StrategyA() = default;
  virtual AMove move(const Ball& current, int round, const GameConfig& cfg) = 0;
  virtual std::string name() const = 0;
};

class StrategyB {
 public:
  virtual ~StrategyB() = default;
  virtual Ball move(const Ball& current, const AMove& a, int round, const GameConfig& cfg) = 0;
  virtual std::string name() const = 0;
};

// Plays the game to the configured number of rounds, validating every move.
Transcript run_game(const GameConfig& cfg, StrategyA& a, StrategyB& b);

// ---------------------------------------------------------------------------
// A: the blocking strategy

class StrategyABad : public StrategyA {
 public:
  // Constants are picked lazily at the first ball of radius < 1, which becomes
  // the normalisation rho0.  l_cap bounds the refinement sweep per class.
  StrategyABad(const NumberField& K, WeightVector r, int l_cap = 8);

  AMove move(const Ball& current, int round, const GameConfig& cfg) override;
  std::string name() const override { return "blocking"; }

  const std::optional<GameConstants>& constants() const { return C_; }
  int max_processed() const { return max_processed_; }
  // Height up to which the limit point is certified eps-bad: H_{M+1} for the
  // deepest processed class M.  0 before constants lock.
  double certificate_Hmax() const;

 private:
  const NumberField& K_;
  WeightVector r_;
  int l_cap_;
  std::optional<GameConstants> C_;
  std::set<int> processed_;
  int max_processed_ = -1;
};

// ---------------------------------------------------------------------------
// B: adversaries for testing

// Uniformly random legal replies (minimal radius beta * rho).
class AdversaryRandom : public StrategyB {
 public:
  explicit AdversaryRandom(std::uint64_t seed) : rng_(seed) {}
  Ball move(const Ball& current, const AMove& a, int round, const GameConfig& cfg) override;
  std::string name() const override { return "random"; }

 private:
  std::mt19937_64 rng_;
};

// Chases the removed region: picks the legal reply closest to a hyperplane.
class AdversaryGreedy : public StrategyB {
 public:
  explicit AdversaryGreedy(std::uint64_t seed) : rng_(seed) {}
  Ball move(const Ball& current, const AMove& a, int round, const GameConfig& cfg) override;
  std::string name() const override { return "greedy"; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace badflow
