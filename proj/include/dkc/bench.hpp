#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "dkc/checks.hpp"
#include "dkc/oracles.hpp"
#include "dkc/pipeline.hpp"
#include "dkc/random.hpp"
#include "dkc/stream.hpp"

// Stream driver behind the dkc_bench tool: runs a stream through a pipeline,
// emits one CSV row per update and an aggregate JSON object.
namespace dkc::bench {

struct RunConfig {
  PipelineConfig pipeline;
  std::uint64_t seed = 1;  // algorithm coins; the stream has its own seed
  std::optional<MetricBounds> bounds;  // overrides the stream header
  bool verify = false;
  oracles::OracleBudget budget;
  bool timing = true;
  bool bounds_check = true;
  std::size_t eval_n = 20000;  // cost columns are left blank above this |V|
};

struct Row {
  std::size_t t = 0;
  char op = 'I';
  std::uint64_t id = 0;
  std::size_t n_v = 0;
  std::size_t n_u = 0;
  std::optional<double> cost_alg;
  std::optional<double> certificate;
  std::optional<double> cost_gonzalez;
  std::optional<double> cost_opt;
  std::size_t step_recourse = 0;
  std::size_t cum_recourse = 0;
  std::size_t forwarded = 0;
  bool reset = false;
  double micros_sparsifier = 0.0;
  double micros_kcenter = 0.0;
};

inline const char* csv_header() {
  return "t,op,id,n_v,n_u,cost_alg,certificate,cost_gonzalez,cost_opt,ratio_opt,step_recourse,cum_recourse,"
         "forwarded,reset,micros_sparsifier,micros_kcenter";
}

inline std::string csv_row(const Row& r) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  std::string ratio;
  if (r.cost_alg && r.cost_opt) ratio = *r.cost_opt > 0.0 ? fmt::format("{}", *r.cost_alg / *r.cost_opt) : "1";
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3f},{:.3f}", r.t, r.op, r.id, r.n_v, r.n_u,
                     opt(r.cost_alg), opt(r.certificate), opt(r.cost_gonzalez), opt(r.cost_opt), ratio,
                     r.step_recourse, r.cum_recourse, r.forwarded, r.reset ? 1 : 0, r.micros_sparsifier,
                     r.micros_kcenter);
}

struct RunResult {
  std::vector<Row> rows;
  nlohmann::ordered_json aggregate;
  checks::Failures failures;
};

/// Approximation bound checked per row under --verify.
inline double ratio_bound(PipelineMode mode) { return mode == PipelineMode::direct ? 8.0 : 20.0; }

inline MetricSpace make_metric(const Stream& stream, const RunConfig& cfg) {
  std::optional<MetricBounds> bounds = cfg.bounds ? cfg.bounds : stream.bounds;
  if (!bounds) throw InvalidArgument("distance bounds unknown: pass --dmin and --dmax or use a stream header");
  const std::uint64_t priority_seed = derive_seed(cfg.seed, 0);
  MetricSpace m = stream.matrix ? MetricSpace::explicit_matrix(*stream.matrix, *bounds, priority_seed)
                                : MetricSpace::euclidean(*bounds, priority_seed);
  m.set_bounds_check(cfg.bounds_check);
  return m;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return (hi + *std::max_element(v.begin(), v.begin() + mid)) / 2.0;
}

/// Runs every event; rows are streamed to `csv` when given.
inline RunResult run_stream(const Stream& stream, const RunConfig& cfg, std::ostream* csv = nullptr) {
  PipelineConfig pc = cfg.pipeline;
  pc.sparsifier.seed = derive_seed(cfg.seed, 1);
  if (stream.n_max > 0) pc.sparsifier.n_max = std::max(pc.sparsifier.n_max, stream.n_max);
  Pipeline pipe(make_metric(stream, cfg), pc);

  RunResult out;
  if (csv) *csv << csv_header() << '\n';
  std::vector<double> step_micros;
  double max_ratio_gonzalez = 0.0, max_ratio_opt = 0.0;
  std::size_t max_u = 0;
  int max_layers = 1;
  for (std::size_t t = 0; t < stream.events.size(); ++t) {
    const UpdateEvent& e = stream.events[t];
    PipelineStepReport step = pipe.apply(e);
    if (!cfg.timing) step.micros_sparsifier = step.micros_kcenter = 0.0;

    Row r;
    r.t = t;
    r.op = e.kind == UpdateEvent::Kind::insert ? 'I' : 'D';
    r.id = to_u64(e.id);
    r.n_v = pipe.metric().size();
    r.n_u = pipe.kcenter().level_size(0);
    r.step_recourse = step.reported.size();
    r.cum_recourse = pipe.metrics().cumulative_recourse;
    r.forwarded = step.forwarded;
    r.reset = step.reset;
    r.micros_sparsifier = step.micros_sparsifier;
    r.micros_kcenter = step.micros_kcenter;
    step_micros.push_back(step.micros_sparsifier + step.micros_kcenter);
    max_u = std::max(max_u, r.n_u);
    if (pipe.sparsifier()) max_layers = std::max(max_layers, pipe.sparsifier()->layers());

    const bool evaluate = r.n_v > 0 && r.n_v <= cfg.eval_n;
    if (!evaluate && !cfg.verify) {
      if (csv) *csv << csv_row(r) << '\n';
      out.rows.push_back(std::move(r));
      continue;
    }
    const std::vector<PointId> v = pipe.metric().ids();
    const std::vector<PointId> u = pipe.space();
    const std::vector<PointId>& s = pipe.kcenter().centers();
    if (evaluate) {
      r.cost_alg = cl(pipe.metric(), s, v);
      const double slack = cfg.pipeline.mode == PipelineMode::direct ? 0.0 : cl(pipe.metric(), u, v);
      r.certificate = slack + pipe.kcenter().cost_certificate();
      const auto g = oracles::gonzalez(pipe.metric(), v, cfg.pipeline.k, v.front());
      r.cost_gonzalez = oracles::cost(pipe.metric(), g, v);
      if (*r.cost_gonzalez > 0.0) max_ratio_gonzalez = std::max(max_ratio_gonzalez, *r.cost_alg / *r.cost_gonzalez);
      out.failures.expect(checks::le(*r.cost_alg, *r.certificate),
                          fmt::format("t={}: cost_alg {} above certificate {}", t, *r.cost_alg, *r.certificate));
    }
    if (cfg.verify) {
      checks::NestedCheckOptions opt;
      opt.budget = cfg.budget;
      opt.reference = v.size() <= cfg.budget.max_mis_vertices;
      checks::Failures f;
      checks::check_pipeline(pipe, f, opt);
      if (!v.empty() && v.size() <= cfg.budget.max_n && cfg.pipeline.k <= cfg.budget.max_k) {
        if (!r.cost_alg) r.cost_alg = cl(pipe.metric(), s, v);
        r.cost_opt = oracles::opt_k_exact(pipe.metric(), v, cfg.pipeline.k, cfg.budget).value;
        const double bound = ratio_bound(cfg.pipeline.mode);
        f.expect(checks::le(*r.cost_alg, bound * *r.cost_opt), fmt::format("ratio above {}", bound));
        if (*r.cost_opt > 0.0) max_ratio_opt = std::max(max_ratio_opt, *r.cost_alg / *r.cost_opt);
      }
      out.failures.checks += f.checks;
      for (auto& msg : f.messages) out.failures.messages.push_back(fmt::format("t={}: {}", t, msg));
    }
    if (csv) *csv << csv_row(r) << '\n';
    out.rows.push_back(std::move(r));
  }

  const MetricsSnapshot& ms = pipe.metrics();
  const double n_upd = static_cast<double>(std::max<std::size_t>(ms.steps, 1));
  auto& a = out.aggregate;
  a["mode"] = to_string(cfg.pipeline.mode);
  a["k"] = cfg.pipeline.k;
  a["seed"] = cfg.seed;
  a["stream"] = stream.header.count("gen") ? stream.header.at("gen") : std::string("file");
  a["updates"] = ms.steps;
  a["final_n"] = pipe.metric().size();
  a["final_u"] = pipe.space().size();
  a["max_u"] = max_u;
  a["cumulative_recourse"] = ms.cumulative_recourse;
  a["amortized_recourse"] = static_cast<double>(ms.cumulative_recourse) / n_upd;
  a["forwarded_updates"] = ms.forwarded_updates;
  a["resets"] = ms.resets;
  a["mean_update_micros"] = (ms.micros_sparsifier + ms.micros_kcenter) / n_upd * (cfg.timing ? 1.0 : 0.0);
  a["median_update_micros"] = median(step_micros);
  a["max_ratio_vs_gonzalez"] = max_ratio_gonzalez;
  if (cfg.verify) a["max_ratio_vs_opt"] = max_ratio_opt;
  if (cfg.pipeline.mode == PipelineMode::buffered) {
    a["epsilon"] = cfg.pipeline.epsilon;
    a["epoch_length"] = pipe.buffered()->epoch_length();
    a["inner_k"] = pipe.buffered()->inner().config().k;
  }
  if (pipe.sparsifier()) a["max_layers"] = max_layers;

  // Composition parameters: declared bounds next to what this run measured.
  const double nk = std::max(2.0, static_cast<double>(pc.sparsifier.n_max) / static_cast<double>(cfg.pipeline.k));
  nlohmann::ordered_json declared, measured;
  declared["alpha_A"] = 8.0;
  if (cfg.pipeline.mode == PipelineMode::direct) {
    declared["alpha_S"] = 0.0;
    declared["beta"] = nullptr;
  } else {
    declared["alpha_S"] = 4.0;
    declared["beta"] = 18.0 * std::log2(nk) * (cfg.pipeline.mode == PipelineMode::buffered ? 4.0 / cfg.pipeline.epsilon : 1.0);
  }
  measured["R_S"] = static_cast<double>(ms.forwarded_updates) / n_upd;
  measured["R_A"] = ms.forwarded_updates ? static_cast<double>(ms.cumulative_recourse) / static_cast<double>(ms.forwarded_updates) : 0.0;
  measured["T_S_micros"] = cfg.timing ? ms.micros_sparsifier / n_upd : 0.0;
  measured["T_A_micros"] = cfg.timing && ms.forwarded_updates ? ms.micros_kcenter / static_cast<double>(ms.forwarded_updates) : 0.0;
  measured["beta"] = static_cast<double>(max_u) / static_cast<double>(cfg.pipeline.k);
  a["declared"] = declared;
  a["measured"] = measured;
  a["invariant_checks"] = out.failures.checks;
  a["invariant_failures"] = out.failures.messages.size();
  return out;
}

// ---- randomized self-check behind `dkc_bench verify` ----------------------

struct VerifyConfig {
  std::uint64_t seed = 1;
  std::size_t instances = 40;
  std::size_t updates = 30;  // per instance
  std::size_t n_max = 12;
  std::size_t k_max = 3;
  oracles::OracleBudget budget;
  NestedKCenter::Options kcenter_options;
};

struct VerifyReport {
  std::size_t instances = 0;
  std::size_t steps = 0;
  checks::Failures failures;
};

/// Random integer points on a line or in the plane, with random updates.
inline Stream small_instance(Rng& rng, std::size_t n_max, std::size_t updates) {
  StreamSpec spec;
  spec.kind = unit_real(rng) < 0.5 ? StreamSpec::Kind::uniform_box : StreamSpec::Kind::adversarial_duplicates;
  spec.dim = 1 + uniform_below(rng, 2);
  spec.side = static_cast<double>(4 + uniform_below(rng, 60));
  spec.n_max = 2 + uniform_below(rng, n_max - 1);
  spec.updates = updates;
  spec.insert_frac = 0.5;
  spec.seed = rng();
  return generate(spec);
}

inline VerifyReport verify(const VerifyConfig& vc) {
  if (vc.n_max < 2 || vc.n_max > vc.budget.max_n) throw BudgetExceeded("verify: n_max outside [2, budget n]");
  if (vc.n_max > vc.budget.max_mu_n) throw BudgetExceeded("verify: n_max above the mu budget");
  if (vc.k_max == 0 || vc.k_max > vc.budget.max_k) throw BudgetExceeded("verify: k_max outside [1, budget k]");
  VerifyReport rep;
  Rng rng(vc.seed);
  const PipelineMode modes[] = {PipelineMode::direct, PipelineMode::sparsified, PipelineMode::buffered};
  for (std::size_t inst = 0; inst < vc.instances; ++inst) {
    const Stream stream = small_instance(rng, vc.n_max, vc.updates);
    const std::size_t k = 1 + uniform_below(rng, vc.k_max);
    const PipelineMode mode = modes[inst % 3];
    RunConfig cfg;
    cfg.pipeline.mode = mode;
    cfg.pipeline.k = k;
    cfg.pipeline.epsilon = 1.0;
    cfg.pipeline.sparsifier.stop_factor = 8;
    cfg.pipeline.kcenter_options = vc.kcenter_options;
    cfg.seed = rng();
    cfg.verify = true;
    cfg.timing = false;
    cfg.budget = vc.budget;
    RunResult run = run_stream(stream, cfg);
    ++rep.instances;
    rep.steps += run.rows.size();
    rep.failures.checks += run.failures.checks;
    for (auto& msg : run.failures.messages)
      rep.failures.messages.push_back(fmt::format("instance {} ({}, k={}): {}", inst, to_string(mode), k, msg));

    // Bound checks on the final live set, a random subset W and W minus one point.
    MetricSpace m = make_metric(stream, cfg);
    for (const UpdateEvent& e : stream.events) {
      if (e.kind == UpdateEvent::Kind::insert)
        admit_event(m, e);
      else
        m.erase(e.id);
    }
    const std::vector<PointId> all = m.ids();
    if (all.size() < 2) continue;
    std::vector<PointId> w, w2;
    for (PointId p : all)
      if (unit_real(rng) < 0.7) w.push_back(p);
    if (w.empty()) w.push_back(all.front());
    w2 = w;
    if (w2.size() >= 4) w2.erase(w2.begin() + static_cast<std::ptrdiff_t>(uniform_below(rng, w2.size())));
    checks::Failures f;
    checks::check_subset_opt(m, all, w, k, f, vc.budget);
    checks::check_lazy_updates(m, all, w, k, f, vc.budget);
    checks::check_mu_bounds(m, all, w, w2, k, f, vc.budget);
    rep.failures.checks += f.checks;
    for (auto& msg : f.messages) rep.failures.messages.push_back(fmt::format("instance {}: {}", inst, msg));
  }
  return rep;
}

}  // namespace dkc::bench
