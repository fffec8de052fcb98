#include "badflow/game.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"

namespace badflow {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// geometry

double hyperplane_distance(const HyperplaneNbhd& h, const ComplexVector& w) {
  if (h.normal.size() != w.size()) throw GameError("hyperplane dimension mismatch");
  cplx acc = -h.offset;
  double n2 = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    acc += w[j] * std::conj(h.normal[j]);
    n2 += std::norm(h.normal[j]);
  }
  if (n2 == 0.0) throw GameError("hyperplane with zero normal");
  if (std::abs(n2 - 1.0) > 2e-12)
    std::fprintf(stderr, "badflow: hyperplane normal has length %.6g; renormalizing\n",
                 std::sqrt(n2));
  return std::abs(acc) / std::sqrt(n2);
}

static double center_dist(const ComplexVector& a, const ComplexVector& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// rules

static void validate_config(const GameConfig& cfg) {
  if (cfg.rounds < 0) throw GameError("negative round count");
  if (!(cfg.start.radius > 0.0)) throw GameError("start ball needs a positive radius");
  if (cfg.start.center.empty()) throw GameError("start ball needs a center");
  if (cfg.kind == GameKind::HA) {
    if (!(cfg.beta > 0.0 && cfg.beta < 1.0 / 3.0))
      throw GameError("HA game needs beta in (0, 1/3)");
  } else {
    if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw GameError("HP game needs beta in (0, 1)");
    if (!(cfg.gamma > 0.0)) throw GameError("HP game needs gamma > 0");
  }
}

MoveCheck validate_a_move(const GameConfig& cfg, const Ball& current, const AMove& mv) {
  const double rho = current.radius;
  for (const auto& h : mv.family) {
    if (h.normal.size() != current.center.size()) return {false, "hyperplane dimension mismatch"};
    double n2 = 0.0;
    for (auto& c : h.normal) n2 += std::norm(c);
    if (n2 == 0.0) return {false, "hyperplane with zero normal"};
    if (!(h.delta >= 0.0)) return {false, "negative thickness"};
  }
  if (cfg.kind == GameKind::HA) {
    if (mv.family.size() > 1) return {false, "HA allows at most one hyperplane per round"};
    for (const auto& h : mv.family)
      if (h.delta > cfg.beta * rho * (1.0 + 1e-9))
        return {false, "thickness exceeds beta rho"};
  } else {
    double s = 0.0;
    for (const auto& h : mv.family) s += std::pow(h.delta, cfg.gamma);
    if (s > std::pow(cfg.beta * rho, cfg.gamma) * (1.0 + 1e-9))
      return {false, "family exceeds the (beta rho)^gamma budget"};
  }
  return {};
}

MoveCheck validate_b_move(const GameConfig& cfg, const Ball& current, const AMove& last,
                          const Ball& next) {
  const double rho = current.radius;
  const double tol = 1e-9 * rho;
  if (next.center.size() != current.center.size()) return {false, "ball dimension mismatch"};
  if (next.radius < cfg.beta * rho - tol) return {false, "radius shrank below beta rho"};
  if (next.radius > rho + tol) return {false, "radius grew"};
  if (center_dist(next.center, current.center) > rho - next.radius + tol)
    return {false, "ball not contained in the previous one"};
  for (const auto& h : last.family)
    if (hyperplane_distance(h, next.center) < next.radius + h.delta - tol)
      return {false, "ball meets a removed neighbourhood"};
  return {};
}

Transcript run_game(const GameConfig& cfg, StrategyA& a, StrategyB& b) {
  validate_config(cfg);
  Transcript t;
  t.config = cfg;
  Ball cur = cfg.start;
  for (int i = 0; i < cfg.rounds; ++i) {
    AMove mv = a.move(cur, i, cfg);
    auto ca = validate_a_move(cfg, cur, mv);
    if (!ca.ok)
      throw IllegalMove("round " + std::to_string(i) + ", A (" + a.name() + "): " + ca.reason);
    Ball nxt = b.move(cur, mv, i, cfg);
    auto cb = validate_b_move(cfg, cur, mv, nxt);
    if (!cb.ok)
      throw IllegalMove("round " + std::to_string(i) + ", B (" + b.name() + "): " + cb.reason);
    t.rounds.push_back({cur, mv, nxt});
    cur = nxt;
  }
  t.final_ball = cur;
  return t;
}

AuditReport audit_transcript(const Transcript& t) {
  AuditReport rep;
  rep.rounds = int(t.rounds.size());
  rep.final_radius = t.final_ball.radius;
  Ball cur = t.config.start;
  auto fail = [&](int i, const std::string& why) {
    rep.legal = false;
    rep.violation_round = i;
    rep.first_violation = why;
  };
  try {
    validate_config(t.config);
  } catch (const GameError& e) {
    fail(-1, e.what());
    return rep;
  }
  for (int i = 0; i < int(t.rounds.size()); ++i) {
    const auto& rr = t.rounds[i];
    if (rr.before.center != cur.center || rr.before.radius != cur.radius) {
      fail(i, "recorded state disagrees with the previous round");
      return rep;
    }
    auto ca = validate_a_move(t.config, cur, rr.a);
    if (!ca.ok) {
      fail(i, "A: " + ca.reason);
      return rep;
    }
    auto cb = validate_b_move(t.config, cur, rr.a, rr.after);
    if (!cb.ok) {
      fail(i, "B: " + cb.reason);
      return rep;
    }
    cur = rr.after;
  }
  if (t.final_ball.center != cur.center || t.final_ball.radius != cur.radius)
    fail(int(t.rounds.size()), "final ball disagrees with the last round");
  return rep;
}

// ---------------------------------------------------------------------------
// blocking strategy

StrategyABad::StrategyABad(const NumberField& K, WeightVector r, int l_cap)
    : K_(K), r_(std::move(r)), l_cap_(l_cap) {
  if (int(r_.r.size()) != K_.n) throw GameError("weight vector has wrong length");
  if (l_cap_ < 1) throw GameError("l_cap must be at least 1");
}

AMove StrategyABad::move(const Ball& cur, int, const GameConfig& cfg) {
  if (int(cur.center.size()) != K_.n) throw GameError("ball dimension mismatch");
  if (!C_) {
    if (!(cur.radius < 1.0)) return {};  // pass until the normalisation locks
    C_ = pick_constants(K_, r_, cfg.beta, cfg.gamma, cur.radius);
  }
  auto cls = try_ball_class(*C_, cur.radius);
  if (!cls) return {};  // radius in a class gap: nested later balls cover it
  const int m = *cls;
  if (processed_.count(m)) return {};
  processed_.insert(m);
  max_processed_ = std::max(max_processed_, m);

  AMove mv;
  for (int l = 1; l <= l_cap_; ++l) {
    auto pairs = resonant_pairs(K_, r_, *C_, cur.center, cur.radius, m + l, l);
    if (pairs.empty()) continue;
    for (std::size_t i = 1; i < pairs.size(); ++i)
      if (!same_ratio(K_, pairs[0], pairs[i]))
        throw GameError("resonant pairs of one band disagree on their ratio point");
    auto y = ratio_point(K_, pairs[0]);
    double delta = 0.0;
    for (const auto& pq : pairs) {
      double logN = log_weighted_norm(K_, r_, pq.q);
      double aw = std::abs(embed(K_, pq.q)[r_.omega]);
      delta = std::max(delta, C_->eps / (aw * std::exp(r_.r[r_.omega] * logN)));
    }
    HyperplaneNbhd h;
    h.normal.assign(K_.n, cplx(0.0, 0.0));
    h.normal[r_.omega] = 1.0;
    h.offset = y[r_.omega];
    h.delta = delta;
    mv.family.push_back(h);
  }

  double s = 0.0;
  for (const auto& h : mv.family) s += std::pow(h.delta, cfg.gamma);
  if (s > std::pow(cfg.beta * cur.radius, cfg.gamma) * (1.0 + 1e-9))
    throw BudgetExceeded("hyperplane family exceeds the (beta rho)^gamma budget");
  return mv;
}

double StrategyABad::certificate_Hmax() const {
  if (!C_ || max_processed_ < 0) return 0.0;
  return C_->H_level(max_processed_ + 1);
}

// ---------------------------------------------------------------------------
// adversaries

namespace {

bool reply_ok(const GameConfig& cfg, const Ball& cur, const AMove& a, const Ball& cand,
              double margin) {
  if (center_dist(cand.center, cur.center) > cur.radius - cand.radius - margin) return false;
  for (const auto& h : a.family)
    if (hyperplane_distance(h, cand.center) < cand.radius + h.delta + margin) return false;
  (void)cfg;
  return true;
}

// deterministic escape candidates: stay put, or step along each hyperplane
// normal (the direction that grows the distance fastest)
std::vector<Ball> fallback_candidates(const Ball& cur, const AMove& a, double rho2,
                                      double slack) {
  std::vector<Ball> out;
  out.push_back({cur.center, rho2});
  for (const auto& h : a.family) {
    double n2 = 0.0;
    for (auto& c : h.normal) n2 += std::norm(c);
    double nn = std::sqrt(n2);
    if (nn == 0.0) continue;
    for (double sign : {1.0, -1.0})
      for (double frac : {1.0, 0.5, 0.25}) {
        Ball cand{cur.center, rho2};
        for (std::size_t j = 0; j < cand.center.size(); ++j)
          cand.center[j] += sign * frac * slack * h.normal[j] / nn;
        out.push_back(std::move(cand));
      }
  }
  return out;
}

}  // namespace

Ball AdversaryRandom::move(const Ball& cur, const AMove& a, int, const GameConfig& cfg) {
  const double rho2 = cfg.beta * cur.radius;
  const double margin = 1e-6 * cur.radius;
  const double slack = cur.radius - rho2 - 2.0 * margin;
  const int dim = 2 * int(cur.center.size());
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  for (int t = 0; t < 4000; ++t) {
    std::vector<double> dir(dim);
    double n2 = 0.0;
    for (auto& v : dir) {
      v = g(rng_);
      n2 += v * v;
    }
    if (n2 == 0.0) continue;
    double rad = slack * std::pow(u01(rng_), 1.0 / dim) / std::sqrt(n2);
    Ball cand{cur.center, rho2};
    for (std::size_t j = 0; j < cand.center.size(); ++j)
      cand.center[j] += cplx(dir[2 * j], dir[2 * j + 1]) * rad;
    if (reply_ok(cfg, cur, a, cand, margin)) return cand;
  }
  for (auto& cand : fallback_candidates(cur, a, rho2, slack))
    if (reply_ok(cfg, cur, a, cand, margin)) return cand;
  throw IllegalMove("random adversary found no legal reply");
}

Ball AdversaryGreedy::move(const Ball& cur, const AMove& a, int, const GameConfig& cfg) {
  const double rho2 = cfg.beta * cur.radius;
  const double margin = 1e-6 * cur.radius;
  const double slack = cur.radius - rho2 - 2.0 * margin;
  const int dim = 2 * int(cur.center.size());
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  auto score = [&](const Ball& cand) {
    // chase the removed region: smaller distance to a core hyperplane is better
    double s = std::numeric_limits<double>::infinity();
    for (const auto& h : a.family) s = std::min(s, hyperplane_distance(h, cand.center));
    return s;
  };

  Ball best;
  double best_score = std::numeric_limits<double>::infinity();
  bool have = false;
  auto consider = [&](const Ball& cand) {
    if (!reply_ok(cfg, cur, a, cand, margin)) return;
    double s = score(cand);
    if (!have || s < best_score) {
      have = true;
      best_score = s;
      best = cand;
    }
  };

  for (int t = 0; t < 256; ++t) {
    std::vector<double> dir(dim);
    double n2 = 0.0;
    for (auto& v : dir) {
      v = g(rng_);
      n2 += v * v;
    }
    if (n2 == 0.0) continue;
    double rad = slack * std::pow(u01(rng_), 1.0 / dim) / std::sqrt(n2);
    Ball cand{cur.center, rho2};
    for (std::size_t j = 0; j < cand.center.size(); ++j)
      cand.center[j] += cplx(dir[2 * j], dir[2 * j + 1]) * rad;
    consider(cand);
  }
  for (auto& cand : fallback_candidates(cur, a, rho2, slack)) consider(cand);
  if (have) return best;
  throw IllegalMove("greedy adversary found no legal reply");
}

// ---------------------------------------------------------------------------
// serialization

namespace {

json cplx_to_json(const cplx& c) { return json::array({c.real(), c.imag()}); }

cplx cplx_from_json(const json& j) {
  return cplx(j.at(0).get<double>(), j.at(1).get<double>());
}

json cvec_to_json(const ComplexVector& v) {
  json a = json::array();
  for (auto& c : v) a.push_back(cplx_to_json(c));
  return a;
}

ComplexVector cvec_from_json(const json& j) {
  ComplexVector v;
  for (auto& e : j) v.push_back(cplx_from_json(e));
  return v;
}

json ball_to_json(const Ball& b) {
  return json{{"center", cvec_to_json(b.center)}, {"radius", b.radius}};
}

Ball ball_from_json(const json& j) {
  return Ball{cvec_from_json(j.at("center")), j.at("radius").get<double>()};
}

json move_to_json(const AMove& mv) {
  json fam = json::array();
  for (const auto& h : mv.family)
    fam.push_back(json{{"normal", cvec_to_json(h.normal)},
                       {"offset", cplx_to_json(h.offset)},
                       {"delta", h.delta}});
  return json{{"family", fam}};
}

AMove move_from_json(const json& j) {
  AMove mv;
  for (auto& e : j.at("family")) {
    HyperplaneNbhd h;
    h.normal = cvec_from_json(e.at("normal"));
    h.offset = cplx_from_json(e.at("offset"));
    h.delta = e.at("delta").get<double>();
    mv.family.push_back(std::move(h));
  }
  return mv;
}

}  // namespace

std::string Transcript::to_json() const {
  json cfg{{"kind", config.kind == GameKind::HA ? "HA" : "HP"},
           {"beta", config.beta},
           {"gamma", config.gamma},
           {"rounds", config.rounds},
           {"seed", config.seed},
           {"start", ball_to_json(config.start)}};
  json rds = json::array();
  for (const auto& rr : rounds)
    rds.push_back(json{{"before", ball_to_json(rr.before)},
                       {"a", move_to_json(rr.a)},
                       {"after", ball_to_json(rr.after)}});
  AuditReport audit = audit_transcript(*this);
  json aud{{"legal", audit.legal},
           {"violation_round", audit.violation_round},
           {"first_violation", audit.first_violation},
           {"rounds", audit.rounds},
           {"final_radius", audit.final_radius}};
  json out{{"config", cfg},
           {"rounds", rds},
           {"final", ball_to_json(final_ball)},
           {"audit", aud},
           {"limit", cvec_to_json(final_ball.center)}};
  return out.dump(2);
}

Transcript Transcript::from_json(const std::string& text) {
  json j = json::parse(text);
  Transcript t;
  const auto& cfg = j.at("config");
  std::string kind = cfg.at("kind").get<std::string>();
  if (kind == "HA")
    t.config.kind = GameKind::HA;
  else if (kind == "HP")
    t.config.kind = GameKind::HP;
  else
    throw GameError("unknown game kind '" + kind + "'");
  t.config.beta = cfg.at("beta").get<double>();
  t.config.gamma = cfg.at("gamma").get<double>();
  t.config.rounds = cfg.at("rounds").get<int>();
  t.config.seed = cfg.at("seed").get<std::uint64_t>();
  t.config.start = ball_from_json(cfg.at("start"));
  for (auto& e : j.at("rounds"))
    t.rounds.push_back(RoundRecord{ball_from_json(e.at("before")), move_from_json(e.at("a")),
                                   ball_from_json(e.at("after"))});
  t.final_ball = ball_from_json(j.at("final"));
  return t;
}

}  // namespace badflow
