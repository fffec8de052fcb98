#include "badflow/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "badflow/bad_approx.hpp"
#include "badflow/dimension.hpp"
#include "badflow/field.hpp"
#include "badflow/game.hpp"
#include "badflow/lattice.hpp"
#include "badflow/report.hpp"
#include "badflow/stats.hpp"

namespace badflow {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// small parsers (strict: the whole string must be consumed)

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("trailing junk in number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& s) {
  std::size_t pos = 0;
  long long v;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("trailing junk in integer: '" + s + "'");
  return v;
}

std::vector<double> split_doubles(const std::string& s, char sep) {
  std::vector<double> out;
  for (const auto& p : split(s, sep)) out.push_back(parse_double(p));
  return out;
}

std::vector<std::int64_t> split_ints(const std::string& s, char sep) {
  std::vector<std::int64_t> out;
  for (const auto& p : split(s, sep)) out.push_back(parse_int(p));
  return out;
}

// "re,im" pairs separated by ';'.  A single pair on a quadratic field is
// lifted to the conjugate diagonal (z, conj z).
ComplexVector parse_cvec(const std::string& s, int n) {
  ComplexVector v;
  for (const auto& part : split(s, ';')) {
    auto nums = split_doubles(part, ',');
    if (nums.size() != 2)
      throw std::invalid_argument("expected 're,im' but got '" + part + "'");
    v.emplace_back(nums[0], nums[1]);
  }
  if (static_cast<int>(v.size()) == 1 && n == 2) v.push_back(std::conj(v[0]));
  if (static_cast<int>(v.size()) != n)
    throw std::invalid_argument("expected " + std::to_string(n) +
                                " complex coordinates, got " + std::to_string(v.size()));
  return v;
}

void parse_levels(const std::string& s, int& lo, int& hi) {
  auto parts = split(s, ':');
  if (parts.size() != 2) throw std::invalid_argument("levels must look like 'a:b'");
  lo = static_cast<int>(parse_int(parts[0]));
  hi = static_cast<int>(parse_int(parts[1]));
  if (lo < 0 || hi < lo) throw std::invalid_argument("bad level range '" + s + "'");
}

Window parse_window(const std::string& s) {
  auto nums = split_doubles(s, ',');
  if (nums.size() != 3) throw std::invalid_argument("window must look like 'cx,cy,half'");
  Window w;
  w.center = cplx(nums[0], nums[1]);
  w.half = nums[2];
  if (!(w.half > 0.0)) throw std::invalid_argument("window half-size must be positive");
  return w;
}

std::string fmt_cplx(const cplx& c) {
  std::string s = fmt_g17(c.real());
  s += c.imag() < 0.0 ? " - " : " + ";
  s += fmt_g17(std::abs(c.imag()));
  s += "i";
  return s;
}

json coords_json(const AlgebraicInt& a) { return json(a.coords); }

json cvec_json(const ComplexVector& v) {
  json a = json::array();
  for (const cplx& c : v) a.push_back(json::array({c.real(), c.imag()}));
  return a;
}

// ---------------------------------------------------------------------------
// shared option plumbing

struct FieldOpts {
  std::int64_t D = 1;
  std::string poly;
  bool trusted = false;
};

void add_field_flags(CLI::App& app, FieldOpts& f) {
  app.add_option("--D,--field-D", f.D, "imaginary quadratic field Q(sqrt(-D))");
  app.add_option("--field-poly", f.poly,
                 "monic integer polynomial, coefficients low to high ('1,0,1' = x^2+1)");
  app.add_flag("--trusted", f.trusted,
               "accept the polynomial without an irreducibility certificate");
}

void apply_precision_env(FieldSpec& spec, std::ostream& err) {
  const char* env = std::getenv("BADFLOW_PRECISION");
  if (env == nullptr) return;
  long long digits = 0;
  bool ok = true;
  try {
    digits = parse_int(env);
  } catch (const std::invalid_argument&) {
    ok = false;
  }
  if (!ok) {
    err << "BADFLOW_PRECISION='" << env << "' is not an integer; keeping " << spec.precision
        << " digits\n";
    return;
  }
  const long long clamped = std::clamp<long long>(digits, 8, 300);
  if (clamped != digits)
    err << "BADFLOW_PRECISION=" << digits << " out of range, clamped to " << clamped << "\n";
  spec.precision = static_cast<int>(clamped);
}

FieldSpec resolve_field(const FieldOpts& f, std::ostream& err) {
  FieldSpec spec;
  if (!f.poly.empty())
    spec = FieldSpec::poly(split_ints(f.poly, ','), f.trusted);
  else
    spec = FieldSpec::quadratic(f.D);
  apply_precision_env(spec, err);
  return spec;
}

WeightVector resolve_weights(const std::string& weights, int n) {
  if (weights.empty()) return WeightVector::balanced(n);
  return WeightVector::make(split_doubles(weights, ','));
}

// --config FILE (JSON object) overrides flags after parsing.  Keys are the
// long flag names without the leading dashes.
struct ConfigOverride {
  json j;

  explicit ConfigOverride(const std::string& path) {
    if (path.empty()) return;
    j = json::parse(read_text_file(path));
    if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");
  }

  template <typename T>
  void num(const char* key, T& v) {
    if (auto it = j.find(key); it != j.end()) {
      v = it->get<T>();
      j.erase(it);
    }
  }
  void str(const char* key, std::string& v) {
    if (auto it = j.find(key); it != j.end()) {
      if (it->is_string())
        v = it->get<std::string>();
      else
        v = it->dump();
      j.erase(it);
    }
  }
  // weights-style keys may be given as an array instead of "a,b,..."
  void numlist(const char* key, std::string& v) {
    if (auto it = j.find(key); it != j.end()) {
      if (it->is_array()) {
        std::string s;
        for (const auto& e : *it) {
          if (!s.empty()) s += ",";
          s += e.is_number_integer() ? std::to_string(e.get<long long>())
                                     : fmt_g17(e.get<double>());
        }
        v = s;
      } else {
        v = it->get<std::string>();
      }
      j.erase(it);
    }
  }
  void flag(const char* key, bool& v) {
    if (auto it = j.find(key); it != j.end()) {
      v = it->get<bool>();
      j.erase(it);
    }
  }
  void field(FieldOpts& f) {
    num("D", f.D);
    num("field-D", f.D);
    numlist("field-poly", f.poly);
    flag("trusted", f.trusted);
  }
  // call last: any unconsumed key is a config error
  void done() const {
    if (!j.empty())
      throw std::invalid_argument("unknown config key '" + j.begin().key() + "'");
  }
};

// --help raises CallForHelp mid-parse; print the help text where the app
// object still exists and unwind with a sentinel.
struct HelpShown {};

void parse_app(CLI::App& app, const std::vector<std::string>& rest, std::ostream& out) {
  std::vector<std::string> rev(rest.rbegin(), rest.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    throw HelpShown{};
  }
}

void ensure_out_dir(const std::string& out) {
  if (!out.empty()) fs::create_directories(out);
}

std::string artifact_path(const std::string& out, const std::string& name) {
  return (fs::path(out) / name).string();
}

// One comment line carrying the resolved config; nlohmann orders keys, so the
// bytes are reproducible.
std::vector<std::string> config_comments(const std::string& subcmd, const json& cfg) {
  return {std::string("badflow ") + subcmd, std::string("config ") + cfg.dump()};
}

json base_config(const FieldSpec& spec, const WeightVector& r) {
  json cfg;
  cfg["field"] = json::parse(spec.to_json());
  cfg["weights"] = r.r;
  return cfg;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_field_info(const std::vector<std::string>& rest, std::ostream& out,
                   std::ostream& err) {
  FieldOpts fo;
  std::string outdir, cfgpath;
  CLI::App app{"field invariants and embeddings", "badflow field info"};
  add_field_flags(app, fo);
  app.add_option("--out", outdir, "artifact directory");
  app.add_option("--config", cfgpath, "JSON config overriding flags");
  parse_app(app, rest, out);
  ConfigOverride ov(cfgpath);
  ov.field(fo);
  ov.str("out", outdir);
  ov.done();

  const FieldSpec spec = resolve_field(fo, err);
  const NumberField K = make_field(spec);

  out << "field: " << spec.to_json() << "\n";
  out << "degree: " << K.n << "\n";
  out << "discriminant: " << K.discriminant << "\n";
  out << "class number one: "
      << (K.class_number_one ? "yes" : (spec.kind == FieldSpec::Kind::Quadratic ? "no" : "unknown"))
      << "\n";
  out << "effective digits: " << K.effective_digits << "\n";
  out << "embedding matrix (rows sigma_j, columns basis elements):\n";
  for (int j = 0; j < K.n; ++j) {
    out << " ";
    for (int k = 0; k < K.n; ++k) out << "  " << fmt_cplx(K.emb[j][k]);
    out << "\n";
  }

  if (!outdir.empty()) {
    ensure_out_dir(outdir);
    json doc;
    doc["config"] = json{{"field", json::parse(spec.to_json())}};
    doc["degree"] = K.n;
    doc["discriminant"] = K.discriminant;
    doc["class_number_one"] = K.class_number_one;
    doc["effective_digits"] = K.effective_digits;
    json emb = json::array();
    for (int j = 0; j < K.n; ++j) {
      json row = json::array();
      for (int k = 0; k < K.n; ++k)
        row.push_back(json::array({K.emb[j][k].real(), K.emb[j][k].imag()}));
      emb.push_back(row);
    }
    doc["embeddings"] = emb;
    write_text_file(artifact_path(outdir, "field.json"), doc.dump(2) + "\n");
    out << "wrote " << artifact_path(outdir, "field.json") << "\n";
  }
  return 0;
}

int cmd_bad_constant(const std::vector<std::string>& rest, std::ostream& out,
                     std::ostream& err) {
  FieldOpts fo;
  std::string weights, zstr, outdir, cfgpath;
  double qmax = 30.0, eps_zero = 1.0;
  bool parallel = false;
  CLI::App app{"finite-height approximation constant at a target", "badflow bad constant"};
  add_field_flags(app, fo);
  app.add_option("--weights", weights, "weight vector 'r1,r2,...' (default balanced)");
  app.add_option("--z", zstr, "target 're,im[;re,im...]'")->required();
  app.add_option("--qmax", qmax, "height cutoff for denominators");
  app.add_option("--eps-zero", eps_zero, "admissibility bound on weight-0 embeddings");
  app.add_flag("--parallel", parallel, "use the OpenMP kernels");
  app.add_option("--out", outdir, "artifact directory");
  app.add_option("--config", cfgpath, "JSON config overriding flags");
  parse_app(app, rest, out);
  ConfigOverride ov(cfgpath);
  ov.field(fo);
  ov.numlist("weights", weights);
  ov.str("z", zstr);
  ov.num("qmax", qmax);
  ov.num("eps-zero", eps_zero);
  ov.flag("parallel", parallel);
  ov.str("out", outdir);
  ov.done();

  const FieldSpec spec = resolve_field(fo, err);
  const NumberField K = make_field(spec);
  const WeightVector r = resolve_weights(weights, K.n);
  const ComplexVector z = parse_cvec(zstr, K.n);
  const Exec mode = parallel ? Exec::Parallel : Exec::Serial;

  const BadConstantResult res = bad_constant_up_to_height(K, r, z, qmax, eps_zero, mode);

  json cfg = base_config(spec, r);
  cfg["z"] = cvec_json(z);
  cfg["qmax"] = qmax;
  cfg["eps_zero"] = eps_zero;

  out << "denominators scanned: " << res.denominators << "\n";
  out << "bad constant up to height " << fmt_g17(qmax) << ": " << fmt_g17(res.value) << "\n";
  if (res.denominators > 0) {
    out << "argmin p: " << coords_json(res.argmin.p).dump()
        << "  q: " << coords_json(res.argmin.q).dump() << "\n";
  }

  if (!outdir.empty()) {
    ensure_out_dir(outdir);
    json doc;
    doc["config"] = cfg;
    doc["value"] = res.value;
    doc["denominators"] = res.denominators;
    doc["argmin"] = json{{"p", coords_json(res.argmin.p)}, {"q", coords_json(res.argmin.q)}};
    write_text_file(artifact_path(outdir, "bad_constant.json"), doc.dump(2) + "\n");
    out << "wrote " << artifact_path(outdir, "bad_constant.json") << "\n";
  }
  return 0;
}

int cmd_boxes_dump(const std::vector<std::string>& rest, std::ostream& out,
                   std::ostream& err) {
  FieldOpts fo;
  std::string weights, centerstr, outdir, cfgpath;
  double beta = 0.3, gamma = 1.0, rho0 = 0.9, rho = 0.0;
  int band = 0, refine = 0;
  CLI::App app{"resonant approximation boxes for one ball and band", "badflow boxes dump"};
  add_field_flags(app, fo);
  app.add_option("--weights", weights, "weight vector (default balanced)");
  app.add_option("--beta", beta, "game contraction beta");
  app.add_option("--gamma", gamma, "HP budget exponent gamma");
  app.add_option("--rho0", rho0, "normalisation radius rho0");
  app.add_option("--center", centerstr, "ball center 're,im[;re,im...]'")->required();
  app.add_option("--rho", rho, "ball radius")->required();
  app.add_option("--band", band, "height band index m")->required();
  app.add_option("--refine", refine, "refinement level l (0 = whole band)");
  app.add_option("--out", outdir, "artifact directory");
  app.add_option("--config", cfgpath, "JSON config overriding flags");
  parse_app(app, rest, out);
  ConfigOverride ov(cfgpath);
  ov.field(fo);
  ov.numlist("weights", weights);
  ov.num("beta", beta);
  ov.num("gamma", gamma);
  ov.num("rho0", rho0);
  ov.str("center", centerstr);
  ov.num("rho", rho);
  ov.num("band", band);
  ov.num("refine", refine);
  ov.str("out", outdir);
  ov.done();

  const FieldSpec spec = resolve_field(fo, err);
  const NumberField K = make_field(spec);
  const WeightVector r = resolve_weights(weights, K.n);
  const ComplexVector center = parse_cvec(centerstr, K.n);

  const GameConstants C = pick_constants(K, r, beta, gamma, rho0);
  const auto pairs = resonant_pairs(K, r, C, center, rho, band, refine);

  json cfg = base_config(spec, r);
  cfg["beta"] = beta;
  cfg["gamma"] = gamma;
  cfg["rho0"] = rho0;
  cfg["center"] = cvec_json(center);
  cfg["rho"] = rho;
  cfg["band"] = band;
  cfg["refine"] = refine;
  cfg["R"] = C.R;
  cfg["eps"] = C.eps;

  out << "constants: R = " << C.R << ", eps = " << fmt_g17(C.eps) << "\n";
  out << "band " << band << ": heights [" << fmt_g17(C.H_level(band)) << ", "
      << fmt_g17(C.H_level(band + 1)) << ")\n";
  out << "resonant pairs: " << pairs.size() << "\n";

  std::vector<std::vector<std::string>> rows;
  for (const PairPQ& pq : pairs) {
    const cplx q1 = embed1(K, pq.q);
    const PartitionIndex pi = partition_index(C, K, r, pq.q);
    rows.push_back({fmt_g17(q1.real()), fmt_g17(q1.imag()), fmt_g17(height(K, r, pq.q)),
                    std::to_string(pi.m), std::to_string(pi.l),
                    fmt_g17(weighted_norm(K, r, pq.q))});
  }
  const std::string csv = render_csv(config_comments("boxes dump", cfg),
                                     {"q_re", "q_im", "H", "m", "l", "norm_r"}, rows);
  if (!outdir.empty()) {
    ensure_out_dir(outdir);
    write_text_file(artifact_path(outdir, "boxes.csv"), csv);
    out << "wrote " << artifact_path(outdir, "boxes.csv") << "\n";
  } else {
    out << csv;
  }
  return 0;
}

int cmd_game_run(const std::vector<std::string>& rest, std::ostream& out, std::ostream& err) {
  FieldOpts fo;
  std::string weights, kind = "HP", adversary = "random", startstr, outdir, cfgpath;
  double beta = 0.3, gamma = 1.0, start_radius = 0.9;
  int rounds = 40, l_cap = 8;
  std::uint64_t seed = 1;
  bool parallel = false;
  CLI::App app{"blocking strategy vs a seeded adversary", "badflow game run"};
  add_field_flags(app, fo);
  app.add_option("--weights", weights, "weight vector (default balanced)");
  app.add_option("--kind", kind, "game kind: HA or HP")
      ->check(CLI::IsMember({"HA", "HP"}));
  app.add_option("--beta", beta, "contraction beta");
  app.add_option("--gamma", gamma, "HP budget exponent gamma");
  app.add_option("--rounds", rounds, "number of rounds");
  app.add_option("--seed", seed, "adversary seed");
  app.add_option("--adversary", adversary, "random or greedy")
      ->check(CLI::IsMember({"random", "greedy"}));
  app.add_option("--start-center", startstr, "start ball center (default origin)");
  app.add_option("--start-radius", start_radius, "start ball radius");
  app.add_option("--l-cap", l_cap, "refinement sweep bound per radius class");
  app.add_flag("--parallel", parallel, "use the OpenMP kernels for the certificate");
  app.add_option("--out", outdir, "artifact directory");
  app.add_option("--config", cfgpath, "JSON config overriding flags");
  parse_app(app, rest, out);
  ConfigOverride ov(cfgpath);
  ov.field(fo);
  ov.numlist("weights", weights);
  ov.str("kind", kind);
  ov.num("beta", beta);
  ov.num("gamma", gamma);
  ov.num("rounds", rounds);
  ov.num("seed", seed);
  ov.str("adversary", adversary);
  ov.str("start-center", startstr);
  ov.num("start-radius", start_radius);
  ov.num("l-cap", l_cap);
  ov.flag("parallel", parallel);
  ov.str("out", outdir);
  ov.done();

  const FieldSpec spec = resolve_field(fo, err);
  const NumberField K = make_field(spec);
  const WeightVector r = resolve_weights(weights, K.n);

  GameConfig cfg;
  cfg.kind = kind == "HA" ? GameKind::HA : GameKind::HP;
  cfg.beta = beta;
  cfg.gamma = gamma;
  cfg.rounds = rounds;
  cfg.seed = seed;
  cfg.start.center = startstr.empty() ? ComplexVector(K.n, cplx(0.0, 0.0))
                                      : parse_cvec(startstr, K.n);
  cfg.start.radius = start_radius;

  StrategyABad A(K, r, l_cap);
  std::unique_ptr<StrategyB> B;
  if (adversary == "random")
    B = std::make_unique<AdversaryRandom>(seed);
  else
    B = std::make_unique<AdversaryGreedy>(seed);

  Transcript t = run_game(cfg, A, *B);
  const AuditReport audit = audit_transcript(t);

  const double cert_eps = A.constants() ? A.constants()->eps : 0.0;
  const double cert_Hmax = A.certificate_Hmax();
  const Exec mode = parallel ? Exec::Parallel : Exec::Serial;
  const WitnessReport wit = in_bad_eps(K, r, t.final_ball.center, cert_eps, cert_Hmax, mode);

  out << "game: " << (cfg.kind == GameKind::HA ? "HA" : "HP") << ", " << rounds
      << " rounds vs " << B->name() << " (seed " << seed << ")\n";
  out << "final radius: " << fmt_g17(t.final_ball.radius) << "\n";
  out << "deepest processed class: " << A.max_processed() << "\n";
  out << "certificate: eps = " << fmt_g17(cert_eps) << ", Hmax = " << fmt_g17(cert_Hmax)
      << "\n";
  out << "audit: " << (audit.legal ? "ok" : ("FAIL: " + audit.first_violation)) << "\n";
  out << "limit point eps-bad up to Hmax: " << (wit.bad ? "yes" : "NO") << "\n";

  if (!outdir.empty()) {
    ensure_out_dir(outdir);
    write_text_file(artifact_path(outdir, "transcript.json"), t.to_json() + "\n");
    json wj;
    wj["config"] = [&] {
      json c = base_config(spec, r);
      c["kind"] = kind;
      c["beta"] = beta;
      c["gamma"] = gamma;
      c["rounds"] = rounds;
      c["seed"] = seed;
      c["adversary"] = adversary;
      c["l_cap"] = l_cap;
      return c;
    }();
    wj["z"] = cvec_json(t.final_ball.center);
    wj["eps"] = wit.eps;
    wj["Hmax"] = wit.Hmax;
    wj["verdict"] = wit.bad ? "bad" : "not bad";
    if (wit.minimizer)
      wj["worst_pair"] = json{{"p", coords_json(wit.minimizer->p)},
                              {"q", coords_json(wit.minimizer->q)},
                              {"quality", wit.min_quality}};
    else
      wj["worst_pair"] = nullptr;
    write_text_file(artifact_path(outdir, "witness.json"), wj.dump(2) + "\n");
    out << "wrote " << artifact_path(outdir, "transcript.json") << "\n";
    out << "wrote " << artifact_path(outdir, "witness.json") << "\n";
  }

  if (!audit.legal || !wit.bad) {
    err << "game run failed its own audit or certificate\n";
    return 3;
  }
  return 0;
}

int cmd_game_replay(const std::vector<std::string>& rest, std::ostream& out,
                    std::ostream& err) {
  std::string file;
  CLI::App app{"re-audit a stored transcript", "badflow game replay"};
  app.add_option("file", file, "transcript JSON")->required();
  parse_app(app, rest, out);

  const Transcript t = Transcript::from_json(read_text_file(file));
  const AuditReport audit = audit_transcript(t);
  out << "rounds: " << audit.rounds << "\n";
  out << "final radius: " << fmt_g17(audit.final_radius) << "\n";
  if (audit.legal) {
    out << "audit: ok\n";
    return 0;
  }
  out << "audit: FAIL round " << audit.violation_round << ": " << audit.first_violation
      << "\n";
  err << "transcript is illegal\n";
  return 2;
}

int cmd_orbit_profile(const std::vector<std::string>& rest, std::ostream& out,
                      std::ostream& err) {
  FieldOpts fo;
  std::string weights, zstr, outdir, cfgpath;
  double horizon = 8.0, threshold = 0.05, slope_tol = 0.1;
  int steps = 33;
  bool exact = false, parallel = false;
  CLI::App app{"systole of the sheared, flowed ring lattice", "badflow orbit profile"};
  add_field_flags(app, fo);
  app.add_option("--weights", weights, "weight vector (default balanced)");
  app.add_option("--z", zstr, "target 're,im[;re,im...]'")->required();
  app.add_option("--horizon", horizon, "flow horizon T");
  app.add_option("--steps", steps, "number of grid points on [0, T]");
  app.add_flag("--exact", exact, "re-evaluate candidate norms from exact pairs");
  app.add_option("--threshold", threshold, "bounded-orbit systole floor");
  app.add_option("--slope-tol", slope_tol, "tail-slope tolerance for classification");
  app.add_flag("--parallel", parallel, "distribute steps with OpenMP");
  app.add_option("--out", outdir, "artifact directory");
  app.add_option("--config", cfgpath, "JSON config overriding flags");
  parse_app(app, rest, out);
  ConfigOverride ov(cfgpath);
  ov.field(fo);
  ov.numlist("weights", weights);
  ov.str("z", zstr);
  ov.num("horizon", horizon);
  ov.num("steps", steps);
  ov.flag("exact", exact);
  ov.num("threshold", threshold);
  ov.num("slope-tol", slope_tol);
  ov.flag("parallel", parallel);
  ov.str("out", outdir);
  ov.done();

  const FieldSpec spec = resolve_field(fo, err);
  const NumberField K = make_field(spec);
  const WeightVector r = resolve_weights(weights, K.n);
  const ComplexVector z = parse_cvec(zstr, K.n);
  const Exec mode = parallel ? Exec::Parallel : Exec::Serial;

  const OrbitProfile prof = systole_profile(K, r, z, horizon, steps, exact, mode);
  const OrbitVerdict verdict = classify_orbit(prof, threshold, slope_tol);

  json cfg = base_config(spec, r);
  cfg["z"] = cvec_json(z);
  cfg["horizon"] = horizon;
  cfg["steps"] = steps;
  cfg["exact"] = exact;
  cfg["threshold"] = threshold;
  cfg["slope_tol"] = slope_tol;

  out << "tail slope: " << fmt_g17(verdict.tail_slope) << "\n";
  out << "min systole: " << fmt_g17(verdict.min_systole) << "\n";
  out << "orbit: " << orbit_class_name(verdict.cls) << "\n";

  if (!outdir.empty()) {
    ensure_out_dir(outdir);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < prof.t.size(); ++i)
      rows.push_back({fmt_g17(prof.t[i]), fmt_g17(prof.systole[i]), exact ? "1" : "0"});
    write_text_file(artifact_path(outdir, "profile.csv"),
                    render_csv(config_comments("orbit profile", cfg),
                               {"t", "lambda1", "exact_flag"}, rows));
    json vj;
    vj["config"] = cfg;
    vj["horizon"] = horizon;
    vj["threshold"] = threshold;
    vj["slope_tol"] = slope_tol;
    vj["tail_slope"] = verdict.tail_slope;
    vj["min_systole"] = verdict.min_systole;
    vj["class"] = orbit_class_name(verdict.cls);
    write_text_file(artifact_path(outdir, "verdict.json"), vj.dump(2) + "\n");
    out << "wrote " << artifact_path(outdir, "profile.csv") << "\n";
    out << "wrote " << artifact_path(outdir, "verdict.json") << "\n";
  }
  return 0;
}

int cmd_dim_survey(const std::vector<std::string>& rest, std::ostream& out,
                   std::ostream& err) {
  FieldOpts fo;
  std::string weights, levels = "3:8", windowstr = "0.5,0.5,0.5", outdir, cfgpath;
  double eps = 0.0, factor = 8.0;
  bool parallel = false;
  CLI::App app{"box-counting survey of the eps-bad survivor set", "badflow dim survey"};
  add_field_flags(app, fo);
  app.add_option("--weights", weights, "weight vector (default balanced)");
  app.add_option("--eps", eps, "badness level")->required();
  app.add_option("--levels", levels, "dyadic levels 'a:b'");
  app.add_option("--window", windowstr, "survey window 'cx,cy,half'");
  app.add_option("--factor", factor, "height truncation factor C in H <= C eps 2^k");
  app.add_flag("--parallel", parallel, "distribute obstruction marking with OpenMP");
  app.add_option("--out", outdir, "artifact directory");
  app.add_option("--config", cfgpath, "JSON config overriding flags");
  parse_app(app, rest, out);
  ConfigOverride ov(cfgpath);
  ov.field(fo);
  ov.numlist("weights", weights);
  ov.num("eps", eps);
  ov.str("levels", levels);
  ov.numlist("window", windowstr);
  ov.num("factor", factor);
  ov.flag("parallel", parallel);
  ov.str("out", outdir);
  ov.done();

  const FieldSpec spec = resolve_field(fo, err);
  const NumberField K = make_field(spec);
  const WeightVector r = resolve_weights(weights, K.n);
  int k_lo = 0, k_hi = 0;
  parse_levels(levels, k_lo, k_hi);
  const Window win = parse_window(windowstr);
  const Exec mode = parallel ? Exec::Parallel : Exec::Serial;

  if (auto note = survey_vacuity_note(K, r, eps)) out << "note: " << *note << "\n";

  const auto survey = dimension_survey(K, r, win, eps, k_lo, k_hi, factor, mode);

  json cfg = base_config(spec, r);
  cfg["eps"] = eps;
  cfg["levels"] = levels;
  cfg["window"] = json::array({win.center.real(), win.center.imag(), win.half});
  cfg["factor"] = factor;

  std::vector<std::vector<std::string>> rows;
  for (const GridSurvey& g : survey)
    rows.push_back({std::to_string(g.k), std::to_string(g.alive), fmt_g17(g.eps),
                    fmt_g17(g.Hmax)});
  const std::string csv =
      render_csv(config_comments("dim survey", cfg), {"k", "N_k", "eps", "Hmax"}, rows);

  // Slope over the levels with nonempty survivor sets.
  std::vector<double> xs, ys;
  for (const GridSurvey& g : survey)
    if (g.alive > 0) {
      xs.push_back(static_cast<double>(g.k) * std::log(2.0));
      ys.push_back(std::log(static_cast<double>(g.alive)));
    }
  std::optional<LineFit> fit;
  if (xs.size() >= 3) fit = linear_fit(xs, ys);

  for (const GridSurvey& g : survey)
    out << "k = " << g.k << ": " << g.alive << " survivors (Hmax " << fmt_g17(g.Hmax)
        << ")\n";
  if (fit)
    out << "box-count slope: " << fmt_g17(fit->slope) << " (residual rms "
        << fmt_g17(fit->residual_rms) << ")\n";
  else
    out << "box-count slope: insufficient data\n";

  if (!outdir.empty()) {
    ensure_out_dir(outdir);
    write_text_file(artifact_path(outdir, "survey.csv"), csv);
    json sj;
    sj["config"] = cfg;
    if (fit) {
      sj["slope"] = fit->slope;
      sj["intercept"] = fit->intercept;
      sj["residual_rms"] = fit->residual_rms;
    } else {
      sj["slope"] = nullptr;
    }
    json lv = json::array();
    for (const GridSurvey& g : survey)
      lv.push_back(json{{"k", g.k}, {"N_k", g.alive}, {"eps", g.eps}, {"Hmax", g.Hmax}});
    sj["levels"] = lv;
    write_text_file(artifact_path(outdir, "survey.json"), sj.dump(2) + "\n");
    const std::string plot =
        "# log2 survivors against grid level\n"
        "set xlabel 'level k'\n"
        "set ylabel 'survivors N_k'\n"
        "set logscale y 2\n"
        "plot 'survey.csv' using 1:2 with linespoints title 'N_k'\n";
    write_text_file(artifact_path(outdir, "plot.gp"), plot);
    out << "wrote " << artifact_path(outdir, "survey.csv") << "\n";
    out << "wrote " << artifact_path(outdir, "survey.json") << "\n";
    out << "wrote " << artifact_path(outdir, "plot.gp") << "\n";
  }
  return 0;
}

}  // namespace

std::string usage() {
  return
      "badflow - weighted badly-approximable experiments over totally imaginary fields\n"
      "\n"
      "usage: badflow <command> [options]\n"
      "\n"
      "commands:\n"
      "  field info      field invariants and embeddings\n"
      "  bad constant    finite-height approximation constant at a target\n"
      "  boxes dump      resonant approximation boxes for one ball and band\n"
      "  game run        blocking strategy vs a seeded adversary\n"
      "  game replay     re-audit a stored transcript\n"
      "  orbit profile   systole of the sheared, flowed ring lattice\n"
      "  dim survey      box-counting survey of the eps-bad survivor set\n"
      "\n"
      "run 'badflow <command> --help' for options\n";
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    (args.empty() ? err : out) << usage();
    return args.empty() ? 64 : 0;
  }
  if (args.size() < 2) {
    err << "unknown command '" << args[0] << "'\n\n" << usage();
    return 64;
  }
  const std::string cmd = args[0] + " " + args[1];
  const std::vector<std::string> rest(args.begin() + 2, args.end());
  try {
    if (cmd == "field info") return cmd_field_info(rest, out, err);
    if (cmd == "bad constant") return cmd_bad_constant(rest, out, err);
    if (cmd == "boxes dump") return cmd_boxes_dump(rest, out, err);
    if (cmd == "game run") return cmd_game_run(rest, out, err);
    if (cmd == "game replay") return cmd_game_replay(rest, out, err);
    if (cmd == "orbit profile") return cmd_orbit_profile(rest, out, err);
    if (cmd == "dim survey") return cmd_dim_survey(rest, out, err);
  } catch (const HelpShown&) {
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const GameError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const FieldError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
  err << "unknown command '" << cmd << "'\n\n" << usage();
  return 64;
}

int dispatch(const std::vector<std::string>& args) {
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace badflow
