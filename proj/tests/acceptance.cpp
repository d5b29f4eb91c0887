// acceptance.cpp
//   End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//   the process exits nonzero if any fails. Usage:
//     acceptance <path-to-caslearn-cli> [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "caslearn/augment.hpp"
#include "caslearn/config.hpp"
#include "caslearn/error.hpp"
#include "caslearn/eval.hpp"
#include "caslearn/losses.hpp"

using namespace caslearn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<Outcome> outcomes;

template <typename F>
void run_criterion(int id, const std::string& name, F&& body) {
  const auto t0 = Clock::now();
  Outcome o{id, name, false, "", 0.0};
  try {
    o.detail = body(o.pass);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  o.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("[%s] %2d. %-24s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), o.seconds);
  std::fflush(stdout);
  outcomes.push_back(std::move(o));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Adoption adopt(const std::string& user, double time, const std::string& parent = "") {
  return Adoption{user, time, parent.empty() ? std::nullopt : std::optional<std::string>(parent)};
}

// fixed 20-node tree: a root-heavy two-level structure
CascadeGraph fixed_tree20() {
  std::vector<Adoption> as{adopt("n0", 0.0)};
  for (int i = 1; i <= 6; ++i) as.push_back(adopt("n" + std::to_string(i), 0.1 * i, "n0"));
  int next = 7;
  for (int p = 1; p <= 6 && next < 20; ++p)
    for (int c = 0; c < 3 && next < 20; ++c, ++next)
      as.push_back(adopt("n" + std::to_string(next), 0.6 + 0.02 * next, "n" + std::to_string(p)));
  return build_graph(std::move(as), "t20", 0.0);
}

// -------------------------------------------------------------------------
// the synthetic benchmark shared by the trend criteria

DatasetConfig benchmark_data_config() {
  DatasetConfig cfg;
  cfg.window = {1.0, 24.0};
  cfg.min_observed_nodes = 5;
  cfg.max_observed_nodes = 50;
  cfg.dataset_end_time = 60.0;
  cfg.seed = 1337;
  return cfg;
}

EncoderConfig benchmark_encoder() {
  EncoderConfig cfg;
  cfg.embedding_dim = 8;
  cfg.base_width = 8;
  cfg.width_multiplier = 2;  // hidden width 16
  cfg.head_depth = 2;
  cfg.finetune_layer = 1;
  return cfg;
}

struct BenchmarkModels {
  std::vector<double> ccgl_msle;     // pretrain -> finetune, per seed
  std::vector<double> base_msle;     // random init -> finetune, per seed
  std::vector<double> student_msle;  // self-distilled from the CCGL teacher
};

BenchmarkModels run_benchmark() {
  const CascadeDataset ds = generate_synthetic(2000, benchmark_data_config(), SyntheticParams{}, 1337);

  AdamConfig opt;
  opt.lr = 2e-3;

  BenchmarkModels out;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const CascadeDataset run_ds = label_fraction(ds, 0.1, seed);

    ContrastiveParams cp;
    cp.batch_size = 32;
    cp.temperature = 0.1;
    cp.epochs = 12;
    cp.augment.strategy = AugStrategy::aug_sim;
    cp.augment.sim.eta = 0.1;
    cp.augment.sim.strength_mode = StrengthMode::per_node;
    cp.augment.sim.lambda = fit_global_rate(run_ds);

    FinetuneOptions fo;
    fo.cut_layer = 1;
    fo.epochs = 40;
    fo.batch_size = 32;
    fo.patience = 20;
    fo.opt = opt;

    EncoderModel init = EncoderModel::random_init(benchmark_encoder(), derive_seed(seed, "init"));
    EncoderModel pretrained = pretrain(run_ds, init, cp, opt, seed);

    FinetuneResult ccgl = finetune(run_ds, pretrained, fo, seed);
    FinetuneResult base = finetune(run_ds, init, fo, seed);
    out.ccgl_msle.push_back(ccgl.test_msle);
    out.base_msle.push_back(base.test_msle);

    DistillOptions dopt;
    dopt.pool = DistillPool::both;
    dopt.self_distill = true;
    dopt.epochs = 30;
    dopt.batch_size = 32;
    dopt.patience = 20;
    dopt.opt = opt;
    out.student_msle.push_back(distill(ccgl.model, run_ds, dopt, seed).test_msle);
  }
  return out;
}

const BenchmarkModels& benchmark() {
  static BenchmarkModels models = run_benchmark();
  return models;
}

// -------------------------------------------------------------------------

std::string criterion_augsim_expectation(bool& pass) {
  const CascadeGraph g = fixed_tree20();
  AugSimParams p;
  p.eta = 0.1;
  p.lambda = 1.0;
  p.strength_mode = StrengthMode::absolute;
  const int trials = 100000;
  double sum_a = 0, sumsq_a = 0, sum_r = 0, sumsq_r = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(2024, "augsim-mc", static_cast<uint64_t>(t)));
    AugSimStats st;
    aug_sim(g, p, 10.0, rng, &st);
    sum_a += st.added;
    sumsq_a += static_cast<double>(st.added) * st.added;
    sum_r += st.removed;
    sumsq_r += static_cast<double>(st.removed) * st.removed;
  }
  const double mean_a = sum_a / trials;
  const double mean_r = sum_r / trials;
  const double se_a = std::sqrt((sumsq_a / trials - mean_a * mean_a) / trials);
  const double se_r = std::sqrt((sumsq_r / trials - mean_r * mean_r) / trials);
  const bool ok_a = std::abs(mean_a - p.eta) <= 3.0 * se_a;
  const bool ok_r = std::abs(mean_r - p.eta) <= 3.0 * se_r;
  pass = ok_a && ok_r;
  std::ostringstream os;
  os << "mean added " << mean_a << " (3se " << 3 * se_a << "), removed " << mean_r << " (3se "
     << 3 * se_r << ") vs eta 0.1";
  return os.str();
}

std::string criterion_tree_preservation(bool& pass) {
  SyntheticParams sp;
  auto graphs = generate_synthetic_graphs(20000, sp, 60.0, 555);
  AugSimParams simp;
  simp.eta = 0.5;
  simp.lambda = 0.8;
  simp.strength_mode = StrengthMode::per_node;
  AugRwrParams rwrp;
  const double t_o = 5.0;

  long violations = 0, checked = 0;
  auto verify = [&](const CascadeGraph& out, double window) {
    int edges = 0;
    for (int i = 0; i < out.size(); ++i) {
      if (!(out.node(i).time >= 0.0) || !(out.node(i).time <= window)) ++violations;
      if (out.parent_of(i) >= 0) {
        ++edges;
        if (out.node(out.parent_of(i)).time > out.node(i).time) ++violations;
      }
    }
    if (edges != out.size() - 1) ++violations;
  };
  for (std::size_t i = 0; i < graphs.size() && checked < 10000; ++i) {
    CascadeGraph obs = observe(graphs[i], t_o);
    if (obs.size() < 2) continue;  // aug_sim needs an edge to work with
    Rng rng(derive_seed(777, "tree-pres", i));
    try {
      verify(aug_sim(obs, simp, t_o, rng, nullptr), t_o);
      verify(aug_rwr(obs, rwrp, rng), t_o);
      ++checked;
    } catch (const std::exception&) {
      ++violations;
    }
  }
  pass = violations == 0 && checked == 10000;
  std::ostringstream os;
  os << checked << " cascades through both augmentors, " << violations << " violations";
  return os.str();
}

double nt_xent_direct(const std::vector<std::vector<double>>& z, double tau) {
  const int m = static_cast<int>(z.size());
  auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ab += a[i] * b[i];
      aa += a[i] * a[i];
      bb += b[i] * b[i];
    }
    return ab / (std::sqrt(aa) * std::sqrt(bb));
  };
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    double denom = 0.0;
    for (int k = 0; k < m; ++k)
      if (k != i) denom += std::exp(cosine(z[static_cast<size_t>(i)], z[static_cast<size_t>(k)]) / tau);
    total += -std::log(
        std::exp(cosine(z[static_cast<size_t>(i)], z[static_cast<size_t>(i ^ 1)]) / tau) / denom);
  }
  return total / m;
}

double nt_xent_tape(const std::vector<std::vector<double>>& z, double tau) {
  ad::Tape tape;
  std::vector<ad::Var> views;
  for (const auto& v : z) views.push_back(tape.leaf(1, static_cast<int>(v.size()), v));
  return nt_xent_loss(tape, views, tau).scalar();
}

std::string criterion_contrastive_oracle(bool& pass) {
  Rng rng(31337);
  const double taus[] = {0.05, 0.1, 1.0};
  const int bs[] = {2, 4, 8};
  double worst = 0.0;
  for (int batch = 0; batch < 100; ++batch) {
    const int B = bs[batch % 3];
    const double tau = taus[(batch / 3) % 3];
    std::vector<std::vector<double>> z;
    for (int i = 0; i < 2 * B; ++i) {
      std::vector<double> v(5);
      for (double& x : v) x = rng.uniform(-1.0, 1.0);
      v[2] += v[2] >= 0 ? 0.4 : -0.4;
      z.push_back(std::move(v));
    }
    worst = std::max(worst, std::abs(nt_xent_tape(z, tau) - nt_xent_direct(z, tau)));

    if (batch < 10) {
      // invariances on a subset
      auto scaled = z;
      for (auto& v : scaled)
        for (double& x : v) x *= 113.0;
      if (std::abs(nt_xent_tape(scaled, tau) - nt_xent_tape(z, tau)) > 1e-9) {
        pass = false;
        return "rescaling all views changed the loss";
      }
      auto permuted = z;
      std::rotate(permuted.begin(), permuted.begin() + 2, permuted.end());  // move first pair last
      if (std::abs(nt_xent_tape(permuted, tau) - nt_xent_tape(z, tau)) > 1e-12) {
        pass = false;
        return "pair-preserving permutation changed the loss";
      }
    }
  }
  // single pair: exactly zero
  std::vector<std::vector<double>> one{{0.3, 1.2, -0.7}, {1.0, 0.1, 0.2}};
  const double zero = nt_xent_tape(one, 0.1);
  pass = worst < 1e-10 && zero == 0.0;
  std::ostringstream os;
  os << "max |loss - oracle| " << worst << ", B=1 loss " << zero;
  return os.str();
}

std::string criterion_gradient_correctness(bool& pass) {
  EncoderConfig cfg;
  cfg.embedding_dim = 5;
  cfg.base_width = 3;
  cfg.width_multiplier = 2;  // hidden width 6
  cfg.head_depth = 2;
  cfg.finetune_layer = 1;

  Rng graph_rng(909);
  auto small_cascade = [&](int n) {
    std::vector<Adoption> as{adopt("n0", 0.0)};
    for (int i = 1; i < n; ++i) {
      int p = static_cast<int>(graph_rng.below(static_cast<uint64_t>(i)));
      as.push_back(adopt("n" + std::to_string(i), i + graph_rng.uniform01(), "n" + std::to_string(p)));
    }
    return build_graph(std::move(as), "fd" + std::to_string(graph_rng.next_u64() % 1000), 0.0);
  };

  const double h = 1e-5;
  const double t_o = 10.0;
  double worst = 0.0;
  int instance = 0;

  // loss kinds cycle: 0 msle, 1 distill, 2 contrastive
  for (int inst = 0; inst < 20; ++inst) {
    const int kind = inst % 3;
    std::vector<CascadeGraph> graphs;
    graphs.push_back(small_cascade(5 + static_cast<int>(graph_rng.below(6))));
    graphs.push_back(small_cascade(5 + static_cast<int>(graph_rng.below(6))));
    if (kind == 2) {
      graphs.push_back(small_cascade(5 + static_cast<int>(graph_rng.below(6))));
      graphs.push_back(small_cascade(5 + static_cast<int>(graph_rng.below(6))));
    }

    EncoderModel enc = EncoderModel::random_init(cfg, derive_seed(2000, "fd-model", inst));
    TaskModel tm(enc, 1, derive_seed(2000, "fd-head", inst));

    // analytic gradients
    ad::Tape tape;
    TaskModel::Bound bound = tm.bind(tape);
    ad::Var loss;
    if (kind == 0) {
      std::vector<ad::Var> preds;
      for (const auto& g : graphs) preds.push_back(tm.predict(bound, tape, g, t_o));
      loss = msle_loss(tape, preds, {3, 17});
    } else if (kind == 1) {
      std::vector<ad::Var> preds;
      for (const auto& g : graphs) preds.push_back(tm.predict(bound, tape, g, t_o));
      loss = distill_loss(tape, preds, {2.5, 4.25});
    } else {
      std::vector<ad::Var> views;
      for (const auto& g : graphs) {
        ad::Var hvar = tm.encoder().encode(bound.enc, tape, g, t_o);
        views.push_back(tm.encoder().project(bound.enc, hvar));
      }
      loss = nt_xent_loss(tape, views, 0.1);
    }
    tape.backward(loss);

    auto evaluate = [&](const TaskModel& model) {
      ad::Tape t2;
      TaskModel::Bound b2 = model.bind(t2);
      if (kind == 0) {
        std::vector<ad::Var> preds;
        for (const auto& g : graphs) preds.push_back(model.predict(b2, t2, g, t_o));
        return msle_loss(t2, preds, {3, 17}).scalar();
      }
      if (kind == 1) {
        std::vector<ad::Var> preds;
        for (const auto& g : graphs) preds.push_back(model.predict(b2, t2, g, t_o));
        return distill_loss(t2, preds, {2.5, 4.25}).scalar();
      }
      std::vector<ad::Var> views;
      for (const auto& g : graphs) {
        ad::Var hvar = model.encoder().encode(b2.enc, t2, g, t_o);
        views.push_back(model.encoder().project(b2.enc, hvar));
      }
      return nt_xent_loss(t2, views, 0.1).scalar();
    };

    // probe every encoder and head coordinate with central differences
    auto probe_set = [&](bool head, std::size_t tensor_idx, std::size_t coord, double analytic) {
      TaskModel clone = tm;
      ParamSet& ps = head ? clone.head_params() : clone.encoder().params();
      ps[tensor_idx].value[coord] += h;
      const double up = evaluate(clone);
      ps[tensor_idx].value[coord] -= 2.0 * h;
      const double down = evaluate(clone);
      const double fd = (up - down) / (2.0 * h);
      const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-6});
      worst = std::max(worst, rel);
    };

    for (std::size_t ti = 0; ti < tm.encoder().params().size(); ++ti)
      for (std::size_t c = 0; c < tm.encoder().params()[ti].size(); ++c)
        probe_set(false, ti, c, bound.enc.vars[ti].grad()[c]);
    for (std::size_t ti = 0; ti < tm.head_params().size(); ++ti)
      for (std::size_t c = 0; c < tm.head_params()[ti].size(); ++c)
        probe_set(true, ti, c, bound.head_vars[ti].grad()[c]);
    ++instance;
  }

  pass = worst < 1e-4;
  std::ostringstream os;
  os << instance << " instances, max relative error " << worst;
  return os.str();
}

std::string criterion_exponential_fit(bool& pass) {
  // exact closed form on {2, 4}
  CascadeDataset exact;
  exact.config.window = {10.0, 100.0};
  exact.labeled.push_back(
      {build_graph({adopt("A", 0.0), adopt("B", 2.0, "A"), adopt("C", 4.0, "A")}, "x", 0.0), 3,
       Split::train});
  const double lam = fit_global_rate(exact);
  const bool exact_ok = std::abs(lam - 1.0 / 3.0) < 1e-12;

  // recovery of a known rate from 10^4 samples
  const double rate = 0.7;
  Rng rng(24680);
  CascadeDataset sampled;
  sampled.config.window = {10.0, 100.0};
  for (int c = 0; c < 100; ++c) {
    std::vector<Adoption> as{adopt("r", 0.0)};
    for (int i = 0; i < 100; ++i) as.push_back({"u" + std::to_string(i), rng.exponential(rate), "r"});
    sampled.unlabeled.push_back(build_graph(std::move(as), "c" + std::to_string(c), 0.0));
  }
  const double fitted = fit_global_rate(sampled);
  const double rel = std::abs(fitted - rate) / rate;
  pass = exact_ok && rel < 0.05;
  std::ostringstream os;
  os << "closed form " << lam << ", recovered " << fitted << " vs " << rate << " (rel " << rel << ")";
  return os.str();
}

std::string criterion_wavelet_identities(bool& pass) {
  Rng rng(1111);
  double worst_trace = 0.0, worst_iso = 0.0;
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(40));
    std::vector<Adoption> as{adopt("n0", 0.0)};
    std::vector<Adoption> renamed{adopt("n0", 0.0)};
    for (int i = 1; i < n; ++i) {
      int p = static_cast<int>(rng.below(static_cast<uint64_t>(i)));
      double t = 1.0 + (i / 4) * 0.5;  // blocks of tied times, monotone with the index
      as.push_back(adopt("n" + std::to_string(i), t, "n" + std::to_string(p)));
      renamed.push_back(adopt("m" + std::to_string(i), t,
                              p == 0 ? std::string("n0") : "m" + std::to_string(p)));
    }
    CascadeGraph g = build_graph(as, "w", 0.0);
    CascadeGraph h = build_graph(renamed, "w", 0.0);
    const double s = rng.uniform(0.3, 1.5);

    // trace identity against the eigenvalues of the Laplacian
    std::vector<double> lap(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
      lap[static_cast<size_t>(i) * n + i] = g.degree(i);
      int p = g.parent_of(i);
      if (p >= 0) {
        lap[static_cast<size_t>(i) * n + p] = -1.0;
        lap[static_cast<size_t>(p) * n + i] = -1.0;
      }
    }
    EighResult eig = jacobi_eigh(lap, n);
    double from_eigs = 0.0;
    for (double l : eig.eigenvalues) from_eigs += std::exp(-s * l);
    std::vector<double> kernel = heat_kernel(g, s);
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += kernel[static_cast<size_t>(i) * n + i];
    worst_trace = std::max(worst_trace, std::abs(trace - from_eigs));

    NodeFeatureSpec spec;
    spec.mode = FeatureMode::wavelet;
    spec.wavelet_scale = s;
    spec.wavelet_samples = 6;
    std::vector<double> f1 = node_features(g, spec, 5.0);
    std::vector<double> f2 = node_features(h, spec, 5.0);
    for (std::size_t i = 0; i < f1.size(); ++i)
      worst_iso = std::max(worst_iso, std::abs(f1[i] - f2[i]));
  }
  pass = worst_trace < 1e-8 && worst_iso < 1e-9;
  std::ostringstream os;
  os << "trace error " << worst_trace << ", relabeling error " << worst_iso;
  return os.str();
}

std::string criterion_trend(bool& pass) {
  const BenchmarkModels& m = benchmark();
  const double ccgl = median(m.ccgl_msle);
  const double base = median(m.base_msle);
  pass = ccgl < base;
  std::ostringstream os;
  os << "median test MSLE: pretrained " << ccgl << " vs random init " << base;
  return os.str();
}

std::string criterion_distill_benefit(bool& pass) {
  const BenchmarkModels& m = benchmark();
  const double teacher = median(m.ccgl_msle);
  const double student = median(m.student_msle);
  pass = student <= teacher + 0.02;
  std::ostringstream os;
  os << "median student " << student << " vs teacher " << teacher << " + 0.02";
  return os.str();
}

std::string strip_wall_clock(const fs::path& jsonl) {
  std::ifstream in(jsonl);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    j.erase("wall_ms");
    out << j.dump() << "\n";
  }
  return out.str();
}

std::string g_cli_path;

std::string criterion_determinism(bool& pass) {
  if (g_cli_path.empty()) {
    pass = false;
    return "no CLI path supplied";
  }
  const fs::path base = fs::temp_directory_path() / "caslearn_determinism";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string common =
      " run --synth-cascades 240 --t-o 1 --t-p 24 --dataset-end-time 60 --min-observed 3"
      " --max-observed 30 --data-seed 19 --embedding-dim 6 --base-width 4 --model-size 2"
      " --head-design 2-1 --batch-size 8 --pretrain-epochs 2 --finetune-epochs 3"
      " --distill-epochs 2 --aug-strength 0.3 --seeds 5 ";
  for (int run = 1; run <= 2; ++run) {
    const std::string cmd = "\"" + g_cli_path + "\"" + common + "--out-dir " +
                            (base / ("run" + std::to_string(run))).string() + " > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      pass = false;
      return "CLI run " + std::to_string(run) + " failed";
    }
  }
  const std::string a = strip_wall_clock(base / "run1" / "seed_5" / "metrics.jsonl");
  const std::string b = strip_wall_clock(base / "run2" / "seed_5" / "metrics.jsonl");
  pass = !a.empty() && a == b;
  std::ostringstream os;
  os << a.size() << " bytes of metrics, " << (a == b ? "identical" : "DIFFER");
  return os.str();
}

std::string criterion_protocol(bool& pass) {
  bool ok = true;
  std::ostringstream os;

  // split sizes within one of 50/10/40
  for (int n : {20, 45, 101, 500}) {
    DatasetConfig cfg;
    cfg.window = {1.0, 24.0};
    cfg.min_observed_nodes = 2;
    cfg.dataset_end_time = 1e9;
    cfg.seed = 3;
    std::vector<CascadeGraph> pool;
    for (int i = 0; i < n; ++i)
      pool.push_back(build_graph({adopt("r", 0.0), adopt("u", 0.5, "r")}, "c" + std::to_string(i), 0.0));
    CascadeDataset ds = assemble_dataset(std::move(pool), cfg);
    ok = ok && std::abs(ds.count(Split::train) - 0.5 * n) <= 1.0 &&
         std::abs(ds.count(Split::val) - 0.1 * n) <= 1.0 &&
         std::abs(ds.count(Split::test) - 0.4 * n) <= 1.0;

    // exact ceiling sizes for the label fractions
    for (double f : {0.01, 0.1, 1.0}) {
      CascadeDataset sub = label_fraction(ds, f, 7);
      ok = ok && sub.count(Split::train) ==
                     static_cast<int>(std::ceil(f * ds.count(Split::train)));
    }
  }
  os << "splits/fractions ok=" << ok;

  // early stopping fires exactly per the patience rule
  std::vector<double> flat(20, 1.0);
  ok = ok && !early_stop(flat, 20).stop;
  flat.push_back(1.0);
  ok = ok && early_stop(flat, 20).stop && early_stop(flat, 20).best_epoch == 1;
  std::vector<double> improving(19, 1.0);
  improving.push_back(0.9);
  ok = ok && !early_stop(improving, 20).stop;
  std::vector<double> down{5, 4, 3, 2, 1};
  ok = ok && !early_stop(down, 20).stop;

  // outbreak datasets exactly balanced
  CascadeDataset ds;
  ds.config.window = {1.0, 24.0};
  for (int i = 0; i < 600; ++i) {
    CascadeGraph g = build_graph({adopt("r", 0.0), adopt("u", 0.5, "r")}, "o" + std::to_string(i), 0.0);
    Split s = i % 10 < 5 ? Split::train : (i % 10 < 6 ? Split::val : Split::test);
    ds.labeled.push_back({std::move(g), 1 + i, s});
  }
  BinaryDataset bds = build_outbreak_dataset(ds, 5);
  for (Split s : {Split::train, Split::val, Split::test}) {
    int pos = 0, neg = 0;
    for (std::size_t i = 0; i < bds.graphs.size(); ++i)
      if (bds.splits[i] == s) (bds.labels[i] ? pos : neg)++;
    ok = ok && pos == neg && pos >= 2;
  }
  os << ", early-stop/outbreak ok=" << ok;
  pass = ok;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];
  std::set<int> selected;
  for (int i = 2; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };

  if (wanted(1)) run_criterion(1, "augsim-expectation", criterion_augsim_expectation);
  if (wanted(2)) run_criterion(2, "tree-preservation", criterion_tree_preservation);
  if (wanted(3)) run_criterion(3, "contrastive-oracle", criterion_contrastive_oracle);
  if (wanted(4)) run_criterion(4, "gradient-correctness", criterion_gradient_correctness);
  if (wanted(5)) run_criterion(5, "exponential-fit", criterion_exponential_fit);
  if (wanted(6)) run_criterion(6, "wavelet-identities", criterion_wavelet_identities);
  if (wanted(7)) run_criterion(7, "pretraining-trend", criterion_trend);
  if (wanted(8)) run_criterion(8, "distillation-benefit", criterion_distill_benefit);
  if (wanted(9)) run_criterion(9, "run-determinism", criterion_determinism);
  if (wanted(10)) run_criterion(10, "protocol-conformance", criterion_protocol);

  int failures = 0;
  for (const Outcome& o : outcomes) failures += o.pass ? 0 : 1;
  std::printf("%zu criteria run, %d failed\n", outcomes.size(), failures);
  return failures > 0 ? 1 : 0;
}
