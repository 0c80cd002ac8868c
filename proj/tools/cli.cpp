#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <regex>
#include <sstream>

#include "cpc/channel_sim.hpp"
#include "cpc/ndt_analytics.hpp"
#include "cpc/optimizer.hpp"
#include "cpc/parallel.hpp"
#include "cpc/placement.hpp"
#include "cpc/shuffle_codec.hpp"

namespace cpc::cli {
namespace {

using json = nlohmann::ordered_json;

class UsageError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

struct Options {
  int K = 0;
  std::int64_t N = 0;
  std::int64_t Q = 0;
  std::string r;
  std::uint64_t B = 0;
  int K_r = 0;
  int t = 0;
  std::uint64_t seed = 0;
  std::string format;
  std::string out;
  bool ideal = false;
  bool fault = false;
  bool with_payloads = false;
  double snr = 0.0;
  bool snr_set = false;
  double tolerance = 1e-6;
  std::string preset;
  int K_max = 0;
  std::string r_range;
  std::string K_range;
};

// --- parsing ----------------------------------------------------------------

int parse_int(const std::string& s, const char* what) {
  static const std::regex re(R"(-?\d+)");
  if (!std::regex_match(s, re)) throw UsageError(std::string(what) + " must be an integer, got '" + s + "'");
  try {
    return std::stoi(s);
  } catch (const std::out_of_range&) {
    throw UsageError(std::string(what) + " is out of range");
  }
}

Rational parse_rational(const std::string& s) {
  static const std::regex frac(R"((\d+)/(\d+))");
  static const std::regex dec(R"((\d*)\.(\d+))");
  std::smatch m;
  if (std::regex_match(s, m, frac)) {
    const BigInt den(m[2].str());
    if (den == 0) throw UsageError("zero denominator in '" + s + "'");
    return Rational(BigInt(m[1].str()), den);
  }
  if (std::regex_match(s, m, dec)) {
    const std::string whole = m[1].str().empty() ? "0" : m[1].str();
    BigInt scale = 1;
    for (std::size_t i = 0; i < m[2].str().size(); ++i) scale *= 10;
    return Rational(BigInt(whole + m[2].str()), scale);
  }
  return Rational(parse_int(s, "r"));
}

/// "a", "a:b", "a:b:step" or "a,b,c".
std::vector<int> parse_range(const std::string& s, const char* what) {
  std::vector<int> v;
  if (s.find(',') != std::string::npos) {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(parse_int(item, what));
    return v;
  }
  std::vector<int> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(parse_int(item, what));
  if (parts.empty() || parts.size() > 3) throw UsageError(std::string("bad range for ") + what + ": '" + s + "'");
  if (parts.size() == 1) return parts;
  const int step = parts.size() == 3 ? parts[2] : 1;
  if (step <= 0) throw UsageError(std::string("range step must be positive for ") + what);
  for (int x = parts[0]; x <= parts[1]; x += step) v.push_back(x);
  return v;
}

// --- instances --------------------------------------------------------------

struct Instance {
  SystemParams params;
  std::optional<ShuffleConfig> config;  // empty at r = K
  std::uint64_t B_requested = 0;
};

std::uint64_t round_up(std::uint64_t x, std::uint64_t unit) {
  if (unit == 0) throw InternalError("zero rounding unit");
  return (x + unit - 1) / unit * unit;
}

Instance resolve_instance(const Options& o) {
  if (o.K == 0) throw UsageError("--K is required");
  if (o.r.empty()) throw UsageError("--r is required");
  const int r = parse_int(o.r, "r");
  if (o.K < 1 || o.K > kMaxNodes) throw ParameterError("K must lie in [1, 64]");
  if (r < 1 || r > o.K) throw ParameterError("r must lie in [1, K]");
  Instance in;
  in.B_requested = o.B == 0 ? 8 : o.B;
  const std::int64_t N = o.N != 0 ? o.N : static_cast<std::int64_t>(binomial(o.K, r));
  const std::int64_t Q = o.Q != 0 ? o.Q : o.K;

  if (r == o.K) {
    in.params = SystemParams::make(o.K, N, Q, r, round_up(in.B_requested, 8));
    in.params.require_symmetric();
    return in;
  }
  if (o.K_r == 0 || o.t == 0) throw UsageError("--Kr and --t are required when r < K");
  const SystemParams probe = SystemParams::make(o.K, N, Q, r, 8);
  const ShuffleConfig probe_cfg = validate_config(probe, o.K_r, o.t);
  probe.require_symmetric();
  const std::uint64_t unit = 8 * binomial(r, o.t) * binomial(o.K - r - 1, o.K_r - probe_cfg.s);
  in.params = SystemParams::make(o.K, N, Q, r, round_up(in.B_requested, unit));
  in.config = validate_config(in.params, o.K_r, o.t);
  return in;
}

// --- json helpers -----------------------------------------------------------

json rat(const Rational& v) { return json{{"exact", to_string(v)}, {"value", to_double(v)}}; }

json nodes(const NodeSet& s) { return s.members(); }

std::string hex(const Bytes& b) {
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (auto c : b) os << std::setw(2) << static_cast<int>(c);
  return os.str();
}

json params_json(const Instance& in) {
  const SystemParams& p = in.params;
  json j{{"K", p.K}, {"N", p.N}, {"Q", p.Q}, {"r", p.r}, {"B", p.B}, {"B_requested", in.B_requested},
         {"eta1", p.eta1_int()}, {"eta2", p.eta2_int()}};
  return j;
}

json config_json(const Instance& in) {
  if (!in.config) return nullptr;
  const ShuffleConfig& c = *in.config;
  return json{{"K_r", c.K_r}, {"K_t", c.K_t()}, {"t", c.t}, {"s", c.s}, {"regime", to_string(regime_of(c))}};
}

json segment_json(const SegmentId& id) {
  return json{{"dest", id.dest}, {"U", nodes(id.U)}, {"p", id.p}, {"B", nodes(id.B)}};
}

json witness_json(const std::optional<Witness>& w) {
  if (!w) return nullptr;
  return json{{"node", w->node}, {"q", w->q}, {"n", w->n}};
}

json report_json(const DeliveryReport& rep) {
  json per = json::object();
  for (const auto& [node, n] : rep.symbols_per_receiver) per[std::to_string(node)] = n;
  return json{{"slots", rep.slots},
              {"measured_dof", rat(rep.measured_dof)},
              {"symbols", rep.symbols},
              {"failed_symbols", rep.failed_symbols},
              {"symbols_per_receiver", per},
              {"max_condition", rep.max_condition},
              {"max_residual", rep.max_residual},
              {"min_signal", rep.min_signal},
              {"max_symbol_error", rep.max_symbol_error},
              {"symbol_mse", rep.symbol_mse},
              {"resamples", rep.resamples}};
}

// --- output -----------------------------------------------------------------

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw UsageError("cannot open '" + o.out + "' for writing");
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void require_json(const Options& o, const char* cmd) {
  if (!o.format.empty() && o.format != "json")
    throw UsageError(std::string(cmd) + " writes JSON only");
}

// --- construct / verify / simulate -------------------------------------------

std::vector<CodedMessage> message_skeleton(const ShuffleScheme& scheme, const Partition& part) {
  const ShuffleConfig& c = scheme.config();
  std::vector<CodedMessage> msgs;
  for (const NodeSet& B : enum_subsets(part.tx, c.t))
    for (const NodeSet& D : enum_subsets(part.rx, c.s)) {
      CodedMessage m;
      m.p = part.index;
      m.D = D;
      m.B = B;
      for (int j : D) m.parts.push_back(scheme.segment_for(j, D, part.index, B));
      msgs.push_back(std::move(m));
    }
  return msgs;
}

int cmd_construct(const Options& o, std::ostream& out) {
  require_json(o, "construct");
  const Instance in = resolve_instance(o);
  const PlacementMap placement = build_placement(in.params);

  json j;
  j["params"] = params_json(in);
  j["config"] = config_json(in);
  json files = json::array();
  for (std::int64_t n = 1; n <= in.params.N; ++n) files.push_back(nodes(placement.storage_of(n)));
  json reduce = json::array();
  for (int k = 1; k <= in.params.K; ++k) reduce.push_back(placement.outputs_of(k));
  j["placement"] = json{{"file_nodes", files}, {"reduce_outputs", reduce}};

  json partitions = json::array();
  json messages = json::array();
  if (in.config) {
    const ShuffleScheme scheme(*in.config, placement);
    j["segments_per_block"] = scheme.segments_per_block();
    j["segment_bytes"] = scheme.segment_bytes();
    std::vector<std::vector<CodedMessage>> all;
    if (o.with_payloads) {
      all = encode_all(scheme, map_phase(placement, o.seed));
    } else {
      for (const Partition& part : scheme.partitions()) all.push_back(message_skeleton(scheme, part));
    }
    for (const Partition& part : scheme.partitions())
      partitions.push_back(json{{"p", part.index}, {"tx", nodes(part.tx)}, {"rx", nodes(part.rx)}});
    for (const auto& per : all)
      for (const CodedMessage& m : per) {
        json parts = json::array();
        for (const SegmentId& id : m.parts) parts.push_back(segment_json(id));
        json jm{{"p", m.p}, {"D", nodes(m.D)}, {"B", nodes(m.B)}, {"segments", parts}};
        if (o.with_payloads) jm["payload"] = hex(m.payload);
        messages.push_back(std::move(jm));
      }
  }
  j["counts"] = json{{"partitions", partitions.size()}, {"messages", messages.size()}};
  j["partitions"] = std::move(partitions);
  j["messages"] = std::move(messages);
  emit(o, out, dump(j));
  return kOk;
}

SimOptions sim_options(const Options& o) {
  SimOptions so;
  so.tolerance = o.tolerance;
  if (o.snr_set) so.snr_db = o.snr;
  so.noise_seed = o.seed;
  return so;
}

int cmd_verify(const Options& o, std::ostream& out) {
  require_json(o, "verify");
  const Instance in = resolve_instance(o);
  json j;
  j["params"] = params_json(in);
  j["config"] = config_json(in);
  j["path"] = o.ideal ? "ideal" : "channel";
  j["seed"] = o.seed;
  j["fault"] = o.fault;

  bool ok = true;
  if (!in.config) {
    // Every node already stores every file; nothing is exchanged.
    j["ok"] = true;
    j["messages"] = 0;
    j["ivs_checked"] = 0;
    j["witness"] = nullptr;
  } else if (o.ideal) {
    const PlacementMap placement = build_placement(in.params);
    const IVStore store = map_phase(placement, o.seed);
    const ShuffleScheme scheme(*in.config, placement);
    scheme.segment_bytes();
    const ExchangeResult ex = run_ideal_exchange(scheme, store, o.fault);
    ok = ex.ok;
    j["ok"] = ex.ok;
    j["messages"] = ex.messages;
    j["ivs_checked"] = ex.ivs_checked;
    j["witness"] = witness_json(ex.witness);
  } else {
    const VerifyResult v = end_to_end_verify(in.params, *in.config, o.seed, sim_options(o), o.fault);
    ok = v.ok;
    j["ok"] = v.ok;
    j["messages"] = v.messages;
    j["ivs_checked"] = v.ivs_checked;
    j["witness"] = witness_json(v.witness);
    j["min_partition_dof"] = rat(v.min_partition_dof);
    j["max_partition_dof"] = rat(v.max_partition_dof);
    j["report"] = report_json(v.report);
  }
  emit(o, out, dump(j));
  return ok ? kOk : kVerificationFailed;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  require_json(o, "simulate");
  const Instance in = resolve_instance(o);
  if (!in.config) throw ParameterError("r = K leaves nothing to transmit");
  const VerifyResult v = end_to_end_verify(in.params, *in.config, o.seed, sim_options(o), o.fault);
  json j;
  j["params"] = params_json(in);
  j["config"] = config_json(in);
  j["seed"] = o.seed;
  j["snr_db"] = o.snr_set ? json(o.snr) : json(nullptr);
  j["tolerance"] = o.tolerance;
  j["slots_per_partition"] = partition_slots(*in.config);
  j["min_partition_dof"] = rat(v.min_partition_dof);
  j["max_partition_dof"] = rat(v.max_partition_dof);
  j["report"] = report_json(v.report);
  j["recovered"] = v.ok;
  j["witness"] = witness_json(v.witness);
  emit(o, out, dump(j));
  return kOk;
}

// --- analytics ----------------------------------------------------------------

struct Row {
  std::string scheme;
  int K = 0;
  Rational r;
  std::optional<int> K_r;
  std::optional<int> t;
  Rational value;
};

Row row_of(const NdtPoint& p) { return Row{scheme_label(p.scheme), p.K, p.r, p.K_r, p.t, p.value}; }

/// Baselines, CPC optimum, lower bound and gap at one grid cell.
std::vector<Row> all_scheme_rows(const Rational& r, int K) {
  std::vector<Row> rows;
  for (auto f : {ndt_uncoded, ndt_cdc, ndt_osl_fd, ndt_osl_hd, ndt_bw_fd, ndt_bw_hd}) rows.push_back(row_of(f(r, K)));
  const LowerBoundModel lb = lower_bound(r, K);
  if (denominator(r) == 1) {
    const int ri = static_cast<int>(numerator(r));
    const OptimumParams best = brute_force_min(ri, K);
    Row cpc{"CPC", K, r, std::nullopt, std::nullopt, best.best_value};
    if (best.K_r_star != 0) {
      cpc.K_r = best.K_r_star;
      cpc.t = best.t_star;
    }
    rows.push_back(cpc);
    rows.push_back(Row{"LowerBound", K, r, std::nullopt, std::nullopt, lb.bound});
    rows.push_back(Row{"Gap", K, r, std::nullopt, std::nullopt, gap_ratio(ri, K)});
  } else {
    const NdtPoint cpc = ndt_cpc_fractional(r, K);
    rows.push_back(row_of(cpc));
    rows.push_back(Row{"LowerBound", K, r, std::nullopt, std::nullopt, lb.bound});
    rows.push_back(Row{"Gap", K, r, std::nullopt, std::nullopt, cpc.value / lb.bound});
  }
  return rows;
}

std::string format_rows_csv(const std::vector<Row>& rows) {
  std::string s = csv_header() + "\n";
  for (const Row& row : rows) {
    s += row.scheme + "," + std::to_string(row.K) + "," + to_string(row.r) + ",";
    s += (row.K_r ? std::to_string(*row.K_r) : "") + ",";
    s += (row.t ? std::to_string(*row.t) : "") + ",";
    s += format_value(row.value) + "\n";
  }
  return s;
}

std::string format_rows_json(const std::vector<Row>& rows) {
  json arr = json::array();
  for (const Row& row : rows)
    arr.push_back(json{{"scheme", row.scheme},
                       {"K", row.K},
                       {"r", to_string(row.r)},
                       {"K_r", row.K_r ? json(*row.K_r) : json(nullptr)},
                       {"t", row.t ? json(*row.t) : json(nullptr)},
                       {"value", rat(row.value)}});
  return dump(arr);
}

std::string format_rows(const Options& o, const std::vector<Row>& rows) {
  if (o.format.empty() || o.format == "csv") return format_rows_csv(rows);
  if (o.format == "json") return format_rows_json(rows);
  throw UsageError("--format must be csv or json");
}

int cmd_ndt(const Options& o, std::ostream& out) {
  if (o.K == 0 || o.r.empty()) throw UsageError("ndt needs --r and --K");
  const Rational r = parse_rational(o.r);
  std::vector<Row> rows = all_scheme_rows(r, o.K);
  if (o.K_r != 0 || o.t != 0) {
    if (o.K_r == 0 || o.t == 0) throw UsageError("give both --Kr and --t for a specific CPC config");
    if (denominator(r) != 1) throw UsageError("a specific CPC config needs integer r");
    rows.push_back(row_of(ndt_cpc(static_cast<int>(numerator(r)), o.t, o.K, o.K_r)));
  }
  emit(o, out, format_rows(o, rows));
  return kOk;
}

// Grids of the published figures.
struct Cell {
  int K;
  int r;
};

std::vector<Cell> grid(const std::vector<int>& rs, const std::vector<int>& Ks) {
  std::vector<Cell> cells;
  for (int K : Ks)
    for (int r : rs)
      if (K >= 2 && r >= 1 && r <= K) cells.push_back({K, r});
  return cells;
}

std::vector<int> iota(int a, int b) {
  std::vector<int> v;
  for (int x = a; x <= b; ++x) v.push_back(x);
  return v;
}

std::vector<Row> sweep_rows(const std::vector<Cell>& cells) {
  std::vector<std::vector<Row>> per(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) { per[i] = all_scheme_rows(cells[i].r, cells[i].K); });
  std::vector<Row> rows;
  for (auto& v : per) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

std::vector<Row> preset_rows(const std::string& name) {
  if (name == "fig2") return sweep_rows(grid(iota(1, 50), {50}));
  if (name == "fig3") return sweep_rows(grid({2}, iota(3, 50)));
  if (name == "fig4") {
    std::vector<Cell> cells;
    for (int r = 1; r <= 5; ++r)
      for (int K = r + 1; K <= 50; ++K) cells.push_back({K, r});
    std::vector<Row> rows(cells.size());
    parallel_for(cells.size(), [&](std::size_t i) {
      const OptimumParams best = brute_force_min(cells[i].r, cells[i].K);
      rows[i] = Row{"CPC", cells[i].K, cells[i].r, best.K_r_star, best.t_star, best.best_value};
    });
    return rows;
  }
  if (name == "fig5") {
    struct Item {
      int K, r, t;
    };
    std::vector<Item> items;
    for (int t = 1; t <= 3; ++t)
      for (int r = 4; r <= 10; ++r)
        for (int K = 25; K <= 50; ++K) items.push_back({K, r, t});
    std::vector<std::optional<Row>> rows(items.size());
    parallel_for(items.size(), [&](std::size_t i) {
      const auto p = ndt_cpc_fixed_t(items[i].r, items[i].t, items[i].K);
      if (p) rows[i] = row_of(*p);
    });
    std::vector<Row> outv;
    for (auto& r : rows)
      if (r) outv.push_back(*r);
    return outv;
  }
  throw UsageError("unknown preset '" + name + "' (fig2, fig3, fig4, fig5)");
}

int cmd_sweep(const Options& o, std::ostream& out) {
  std::vector<Row> rows;
  if (!o.preset.empty()) {
    rows = preset_rows(o.preset);
  } else {
    if (o.r_range.empty() && o.r.empty()) throw UsageError("sweep needs --preset or --r-range/--r");
    if (o.K_range.empty() && o.K == 0) throw UsageError("sweep needs --preset or --K-range/--K");
    const auto rs = !o.r_range.empty() ? parse_range(o.r_range, "r") : std::vector<int>{parse_int(o.r, "r")};
    const auto Ks = !o.K_range.empty() ? parse_range(o.K_range, "K") : std::vector<int>{o.K};
    for (int K : Ks)
      if (K < 2) throw ParameterError("sweep K must be at least 2");
    rows = sweep_rows(grid(rs, Ks));
  }
  emit(o, out, format_rows(o, rows));
  return kOk;
}

int cmd_figures(const Options& o, std::ostream&) {
  if (o.out.empty()) throw UsageError("figures needs --out <directory>");
  std::filesystem::create_directories(o.out);
  std::vector<std::string> names{"fig2", "fig3", "fig4", "fig5"};
  if (!o.preset.empty() && o.preset != "all") names = {o.preset};
  for (const std::string& name : names) {
    const std::vector<Row> rows = preset_rows(name);
    std::ofstream f(std::filesystem::path(o.out) / (name + ".csv"), std::ios::binary);
    if (!f) throw UsageError("cannot write into '" + o.out + "'");
    f << format_rows_csv(rows);
  }
  return kOk;
}

json optimum_json(const OptimumParams& p) {
  return json{{"value", rat(p.best_value)}, {"K_r", p.K_r_star}, {"t", p.t_star}, {"s", p.s_star},
              {"branch", to_string(p.branch)}};
}

int cmd_optimize(const Options& o, std::ostream& out) {
  require_json(o, "optimize");
  if (o.K_max != 0) {
    const CrossReport rep = cross_validate(o.K_max);
    json mismatches = json::array();
    for (const CrossCell& c : rep.cells)
      if (!c.agree)
        mismatches.push_back(json{{"r", c.r}, {"K", c.K}, {"brute", rat(c.brute)}, {"closed", rat(c.closed)}});
    json j{{"K_max", rep.K_max}, {"cells", rep.cells.size()}, {"discrepancies", rep.discrepancies},
           {"mismatches", mismatches}};
    emit(o, out, dump(j));
    return rep.discrepancies == 0 ? kOk : kVerificationFailed;
  }
  if (o.K == 0 || o.r.empty()) throw UsageError("optimize needs --r and --K, or --Kmax");
  const int r = parse_int(o.r, "r");
  const OptimumParams brute = brute_force_min(r, o.K);
  const OptimumParams closed = closed_form_min(r, o.K);
  json j{{"r", r}, {"K", o.K}};
  if (r < o.K) {
    const ClosedForm cf = closed_form_terms(r, o.K);
    j["closed_form"] = json{{"t_star", cf.t_star},
                            {"ndt1", cf.ndt1 ? rat(*cf.ndt1) : json(nullptr)},
                            {"K_r_star", cf.K_r_star},
                            {"ndt2", rat(cf.ndt2)}};
  }
  j["closed_form_min"] = optimum_json(closed);
  j["brute_force_min"] = optimum_json(brute);
  j["brute_force_argmin_count"] = brute.argmin_count;
  j["agree"] = brute.best_value == closed.best_value;
  j["closed_form_regime"] = theorem3_regime(r, o.K);
  emit(o, out, dump(j));
  return brute.best_value == closed.best_value ? kOk : kVerificationFailed;
}

int cmd_bounds(const Options& o, std::ostream& out) {
  require_json(o, "bounds");
  if (o.K_max != 0) {
    if (o.K_max < 2) throw ParameterError("--Kmax must be at least 2");
    std::vector<Cell> cells = grid(iota(1, o.K_max), iota(2, o.K_max));
    struct Out {
      Rational lb, best, gap;
    };
    std::vector<Out> res(cells.size());
    parallel_for(cells.size(), [&](std::size_t i) {
      res[i].lb = lower_bound(cells[i].r, cells[i].K).bound;
      res[i].best = cpc_min_over_configs(cells[i].r, cells[i].K, cells[i].r);
      res[i].gap = gap_ratio(cells[i].r, cells[i].K);
    });
    bool sandwich = true;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (res[i].lb > res[i].best) sandwich = false;
      if (res[i].gap > res[worst].gap) worst = i;
    }
    const bool below3 = res[worst].gap < 3;
    json j{{"K_max", o.K_max},
           {"cells", cells.size()},
           {"sandwich_holds", sandwich},
           {"max_gap", json{{"r", cells[worst].r}, {"K", cells[worst].K}, {"gap", rat(res[worst].gap)}}},
           {"all_gaps_below_3", below3}};
    emit(o, out, dump(j));
    return sandwich && below3 ? kOk : kVerificationFailed;
  }
  if (o.K == 0 || o.r.empty()) throw UsageError("bounds needs --r and --K, or --Kmax");
  const Rational r = parse_rational(o.r);
  const LowerBoundModel m = lower_bound(r, o.K);
  json env = json::array();
  for (const Rational& e : m.envelope) env.push_back(rat(e));
  json j{{"r", to_string(r)}, {"K", o.K},           {"bound", rat(m.bound)}, {"branch", m.branch},
         {"lb1", rat(m.lb1)}, {"lb2", rat(m.lb2)}, {"envelope", env}};
  if (denominator(r) == 1) {
    const int ri = static_cast<int>(numerator(r));
    j["achievable"] = rat(cpc_min_over_configs(ri, o.K, ri));
    j["gap"] = rat(gap_ratio(ri, o.K));
  }
  emit(o, out, dump(j));
  return kOk;
}

// --- wiring -------------------------------------------------------------------

void add_instance(CLI::App* app, Options& o) {
  app->add_option("--K", o.K, "number of nodes");
  app->add_option("--N", o.N, "number of files (default C(K, r))");
  app->add_option("--Q", o.Q, "number of Reduce outputs (default K)");
  app->add_option("--r", o.r, "computation load");
  app->add_option("--B", o.B, "requested bits per intermediate value (rounded up)");
  app->add_option("--Kr", o.K_r, "receivers per partition");
  app->add_option("--t", o.t, "transmitter cooperation group size");
  app->add_option("--seed", o.seed, "seed for intermediate values and channels");
  app->add_option("--format", o.format, "csv or json");
  app->add_option("--out", o.out, "output path");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Coded parallel computing shuffle: construction, verification and analysis"};
  app.require_subcommand(1);

  auto* construct = app.add_subcommand("construct", "dump partitions and coded messages as JSON");
  add_instance(construct, o);
  construct->add_flag("--with-payloads", o.with_payloads, "include hex payloads");

  auto* verify = app.add_subcommand("verify", "run the shuffle and check every intermediate value");
  add_instance(verify, o);
  verify->add_flag("--ideal", o.ideal, "error-free delivery, XOR decoding only");
  verify->add_flag("--fault", o.fault, "flip one payload bit before transmission");
  verify->add_option("--tolerance", o.tolerance, "symbol error accepted as a clean decode");
  verify->add_option("--snr", o.snr, "add receiver noise at this SNR in dB")->each([&](const std::string&) {
    o.snr_set = true;
  });

  auto* simulate = app.add_subcommand("simulate", "channel simulation with a delivery report");
  add_instance(simulate, o);
  simulate->add_flag("--fault", o.fault, "flip one payload bit before transmission");
  simulate->add_option("--tolerance", o.tolerance, "symbol error accepted as a clean decode");
  simulate->add_option("--snr", o.snr, "add receiver noise at this SNR in dB")->each([&](const std::string&) {
    o.snr_set = true;
  });

  auto* ndt = app.add_subcommand("ndt", "NDT of every scheme at one (r, K)");
  add_instance(ndt, o);

  auto* sweep = app.add_subcommand("sweep", "NDT rows over an (r, K) grid");
  add_instance(sweep, o);
  sweep->add_option("--preset", o.preset, "fig2, fig3, fig4 or fig5");
  sweep->add_option("--r-range", o.r_range, "a:b[:step] or a,b,c");
  sweep->add_option("--K-range", o.K_range, "a:b[:step] or a,b,c");

  auto* optimize = app.add_subcommand("optimize", "closed-form and brute-force optimum");
  add_instance(optimize, o);
  optimize->add_option("--Kmax", o.K_max, "cross-validate every (r, K) with K <= Kmax");

  auto* bounds = app.add_subcommand("bounds", "converse bound and optimality gap");
  add_instance(bounds, o);
  bounds->add_option("--Kmax", o.K_max, "check the whole grid K <= Kmax");

  auto* figures = app.add_subcommand("figures", "write every preset as CSV into --out");
  figures->add_option("--out", o.out, "output directory")->required();
  figures->add_option("--preset", o.preset, "all (default), fig2, fig3, fig4 or fig5");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (*construct) return cmd_construct(o, out);
    if (*verify) return cmd_verify(o, out);
    if (*simulate) return cmd_simulate(o, out);
    if (*ndt) return cmd_ndt(o, out);
    if (*sweep) return cmd_sweep(o, out);
    if (*optimize) return cmd_optimize(o, out);
    if (*bounds) return cmd_bounds(o, out);
    if (*figures) return cmd_figures(o, out);
  } catch (const ResampleAdvisory& e) {
    err << "error: " << e.what() << " (after one redraw)\n";
    return kVerificationFailed;
  } catch (const RegimeNotSimulated& e) {
    err << "error: " << e.what() << "; use --ideal for XOR-only verification\n";
    return kInvalidConfig;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const InfeasibleInstance& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const UncombatableStraggler& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalBreach;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalBreach;
  }
  return kInvalidConfig;
}

}  // namespace cpc::cli
