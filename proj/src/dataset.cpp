#include "caslearn/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "caslearn/error.hpp"
#include "caslearn/rng.hpp"

namespace caslearn {

namespace {

// shortest representation that round-trips, so serialize/parse is exact
std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_double(std::string_view sv, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc{} || ptr != sv.data() + sv.size())
    raise(Errc::malformed_line, std::string("parse_line: bad ") + what + " '" + std::string(sv) + "'");
  return v;
}

long parse_long(std::string_view sv, const char* what) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc{} || ptr != sv.data() + sv.size())
    raise(Errc::malformed_line, std::string("parse_line: bad ") + what + " '" + std::string(sv) + "'");
  return v;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

void DatasetConfig::validate() const {
  if (!(window.t_o > 0.0) || !(window.t_p > window.t_o))
    raise(Errc::config_error, "dataset config: need 0 < t_o < t_p");
  if (min_observed_nodes < 1 || max_observed_nodes < min_observed_nodes)
    raise(Errc::config_error, "dataset config: need 1 <= min_observed_nodes <= max_observed_nodes");
  double total = train_fraction + val_fraction + test_fraction;
  if (std::abs(total - 1.0) > 1e-9)
    raise(Errc::config_error, "dataset config: split fractions must sum to 1");
}

std::vector<int> CascadeDataset::split_indices(Split s) const {
  std::vector<int> out;
  for (size_t i = 0; i < labeled.size(); ++i)
    if (labeled[i].split == s) out.push_back(static_cast<int>(i));
  return out;
}

CascadeGraph parse_line(const std::string& line) {
  auto fields = split_on(line, '\t');
  if (fields.size() != 5) raise(Errc::malformed_line, "parse_line: expected 5 tab-separated fields");
  std::string id(fields[0]);
  std::string root_user(fields[1]);
  double pub_time = parse_double(fields[2], "pub_time");
  long m = parse_long(fields[3], "adoption count");

  std::vector<Adoption> adoptions;
  long non_root = 0;
  for (std::string_view entry : split_on(fields[4], ' ')) {
    if (entry.empty()) continue;
    size_t colon = entry.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == entry.size())
      raise(Errc::malformed_line, "parse_line: path entry without ':time' in '" + std::string(entry) + "'");
    double t = parse_double(entry.substr(colon + 1), "adoption time");
    auto chain = split_on(entry.substr(0, colon), '/');
    for (auto part : chain)
      if (part.empty()) raise(Errc::malformed_line, "parse_line: empty user in path '" + std::string(entry) + "'");
    Adoption a;
    a.user = std::string(chain.back());
    a.time = t;
    if (chain.size() >= 2) {
      a.parent = std::string(chain[chain.size() - 2]);
      ++non_root;
    } else if (a.user != root_user) {
      raise(Errc::malformed_line, "parse_line: root entry '" + a.user + "' does not match root field '" + root_user + "'");
    }
    adoptions.push_back(std::move(a));
  }
  if (adoptions.empty()) raise(Errc::malformed_line, "parse_line: no path entries");
  if (non_root != m)
    raise(Errc::inconsistent_count, "parse_line: declared " + std::to_string(m) + " adoptions, found " +
                                        std::to_string(non_root));
  return build_graph(std::move(adoptions), std::move(id), pub_time);
}

std::string serialize_cascade(const CascadeGraph& g) {
  // ids embed into the path syntax; separator characters would not round-trip
  auto check_token = [](const std::string& token, const char* what) {
    if (token.empty() || token.find_first_of("/: \t\n\r") != std::string::npos)
      raise(Errc::malformed_line,
            std::string("serialize: ") + what + " '" + token + "' is not a clean token");
  };
  check_token(g.id(), "cascade id");
  for (const Adoption& a : g.nodes()) check_token(a.user, "user id");

  std::string out = g.id();
  out += '\t';
  out += g.node(0).user;
  out += '\t';
  out += format_double(g.pub_time());
  out += '\t';
  out += std::to_string(g.size() - 1);
  out += '\t';
  for (int i = 0; i < g.size(); ++i) {
    if (i > 0) out += ' ';
    // root-to-node chain
    std::vector<int> path;
    for (int v = i; v >= 0; v = g.parent_of(v)) path.push_back(v);
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      if (it != path.rbegin()) out += '/';
      out += g.node(*it).user;
    }
    out += ':';
    out += format_double(g.node(i).time);
  }
  return out;
}

CascadeDataset assemble_dataset(std::vector<CascadeGraph> cascades, const DatasetConfig& cfg) {
  cfg.validate();
  CascadeDataset ds;
  ds.config = cfg;
  for (CascadeGraph& g : cascades) {
    CascadeGraph obs = observe(g, cfg.window.t_o);
    if (obs.size() < cfg.min_observed_nodes) continue;
    if (obs.size() > cfg.max_observed_nodes) {
      // keep the first max_observed_nodes by adoption time; parents always
      // precede children, so the prefix is a valid tree
      std::vector<Adoption> prefix(obs.nodes().begin(), obs.nodes().begin() + cfg.max_observed_nodes);
      obs = build_graph(std::move(prefix), obs.id(), obs.pub_time());
    }
    if (g.pub_time() + cfg.window.t_p <= cfg.dataset_end_time) {
      // label from the untruncated cascade
      ds.labeled.push_back({std::move(obs), popularity(g, cfg.window.t_p), Split::train});
    } else {
      ds.unlabeled.push_back(std::move(obs));
    }
  }
  if (ds.labeled.empty() && ds.unlabeled.empty())
    raise(Errc::empty_dataset, "assemble_dataset: no cascade survives the size filters");

  // seeded shuffle, then rounded 50/10/40 cuts (each within 1 of exact)
  const int n = static_cast<int>(ds.labeled.size());
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed, "splits"));
  rng.shuffle(order);
  int n_train = static_cast<int>(std::llround(cfg.train_fraction * n));
  int n_val = static_cast<int>(std::llround(cfg.val_fraction * n));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);
  for (int pos = 0; pos < n; ++pos) {
    Split s = pos < n_train ? Split::train : (pos < n_train + n_val ? Split::val : Split::test);
    ds.labeled[static_cast<size_t>(order[static_cast<size_t>(pos)])].split = s;
  }
  return ds;
}

CascadeDataset load_dataset(const std::string& path, const DatasetConfig& cfg) {
  gzFile f = gzopen(path.c_str(), "rb");  // reads plain files too
  if (!f) raise(Errc::io_error, "load_dataset: cannot open '" + path + "'");
  std::vector<CascadeGraph> cascades;
  std::string line;
  char buf[1 << 16];
  bool pending = false;
  while (true) {
    char* got = gzgets(f, buf, sizeof(buf));
    if (!got) break;
    line += got;
    pending = true;
    if (!line.empty() && line.back() == '\n') {
      line.pop_back();
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) cascades.push_back(parse_line(line));
      line.clear();
      pending = false;
    }
  }
  if (pending && !line.empty()) cascades.push_back(parse_line(line));
  int err = 0;
  gzerror(f, &err);
  gzclose(f);
  if (err != Z_OK && err != Z_STREAM_END)
    raise(Errc::io_error, "load_dataset: read error in '" + path + "'");
  if (cascades.empty()) raise(Errc::empty_dataset, "load_dataset: no cascades in '" + path + "'");
  return assemble_dataset(std::move(cascades), cfg);
}

void save_cascades(const std::string& path, const std::vector<CascadeGraph>& graphs) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) raise(Errc::io_error, "save_cascades: cannot open '" + path + "' for writing");
  for (const CascadeGraph& g : graphs) {
    std::string line = serialize_cascade(g);
    line += '\n';
    if (std::fwrite(line.data(), 1, line.size(), f) != line.size()) {
      std::fclose(f);
      raise(Errc::io_error, "save_cascades: short write to '" + path + "'");
    }
  }
  std::fclose(f);
}

CascadeDataset label_fraction(const CascadeDataset& ds, double fraction, uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    raise(Errc::fraction_out_of_range, "label_fraction: fraction must lie in (0, 1]");
  std::vector<int> train = ds.split_indices(Split::train);
  const int n_train = static_cast<int>(train.size());
  const int keep = static_cast<int>(std::ceil(fraction * n_train));
  if (keep >= n_train) return ds;

  Rng rng(derive_seed(seed, "labelfrac"));
  rng.shuffle(train);
  std::vector<char> kept_flag(ds.labeled.size(), 1);
  for (size_t i = static_cast<size_t>(keep); i < train.size(); ++i)
    kept_flag[static_cast<size_t>(train[i])] = 0;

  CascadeDataset out;
  out.config = ds.config;
  out.unlabeled = ds.unlabeled;
  for (size_t i = 0; i < ds.labeled.size(); ++i) {
    if (kept_flag[i])
      out.labeled.push_back(ds.labeled[i]);
    else
      out.unlabeled.push_back(ds.labeled[i].observed);
  }
  return out;
}

std::vector<CascadeGraph> generate_synthetic_graphs(int n_cascades, const SyntheticParams& params,
                                                    double pub_time_span, uint64_t seed) {
  std::vector<CascadeGraph> out;
  out.reserve(static_cast<size_t>(n_cascades));
  for (int c = 0; c < n_cascades; ++c) {
    Rng rng(derive_seed(seed, "synth", static_cast<uint64_t>(c)));

    // heavy-tailed final size: 1 + floor(mean * scaled Pareto excess)
    double u = std::max(rng.uniform01(), 1e-12);
    double excess = std::pow(u, -1.0 / 1.5) - 1.0;
    int target = 1 + static_cast<int>(std::floor(params.branching_mean * 10.0 * excess));
    int size = std::clamp(target, 1, params.max_size);

    std::vector<Adoption> adoptions;
    std::vector<double> times{0.0};
    std::vector<int> degree{0};
    adoptions.push_back({"u0", 0.0, std::nullopt});
    for (int k = 1; k < size; ++k) {
      int p = 0;
      int deg_sum = 2 * (k - 1);  // tree with k nodes has k-1 edges
      if (deg_sum > 0) {
        // attach proportionally to degree
        uint64_t pick = rng.below(static_cast<uint64_t>(deg_sum));
        uint64_t acc = 0;
        for (int v = 0; v < k; ++v) {
          acc += static_cast<uint64_t>(degree[static_cast<size_t>(v)]);
          if (pick < acc) {
            p = v;
            break;
          }
        }
      }
      double t = times[static_cast<size_t>(p)] + rng.exponential(params.time_rate);
      adoptions.push_back({"u" + std::to_string(k), t, adoptions[static_cast<size_t>(p)].user});
      times.push_back(t);
      degree.push_back(1);
      degree[static_cast<size_t>(p)] += 1;
    }
    double pub = rng.uniform(0.0, pub_time_span);
    out.push_back(build_graph(std::move(adoptions), "c" + std::to_string(c), pub));
  }
  return out;
}

CascadeDataset generate_synthetic(int n_cascades, const DatasetConfig& cfg,
                                  const SyntheticParams& params, uint64_t seed) {
  auto graphs = generate_synthetic_graphs(n_cascades, params, cfg.dataset_end_time, seed);
  return assemble_dataset(std::move(graphs), cfg);
}

std::string dataset_manifest(const CascadeDataset& ds) {
  std::ostringstream os;
  const DatasetConfig& c = ds.config;
  os << "t_o=" << format_double(c.window.t_o) << "\n";
  os << "t_p=" << format_double(c.window.t_p) << "\n";
  os << "min_observed_nodes=" << c.min_observed_nodes << "\n";
  os << "max_observed_nodes=" << c.max_observed_nodes << "\n";
  os << "dataset_end_time=" << format_double(c.dataset_end_time) << "\n";
  os << "train_fraction=" << format_double(c.train_fraction) << "\n";
  os << "val_fraction=" << format_double(c.val_fraction) << "\n";
  os << "test_fraction=" << format_double(c.test_fraction) << "\n";
  os << "seed=" << c.seed << "\n";
  os << "labeled=" << ds.labeled.size() << "\n";
  os << "unlabeled=" << ds.unlabeled.size() << "\n";
  os << "train=" << ds.count(Split::train) << "\n";
  os << "val=" << ds.count(Split::val) << "\n";
  os << "test=" << ds.count(Split::test) << "\n";
  return os.str();
}

}  // namespace caslearn
