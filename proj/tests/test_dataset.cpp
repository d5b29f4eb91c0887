#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <set>

#include "caslearn/dataset.hpp"
#include "caslearn/error.hpp"
#include "caslearn/rng.hpp"

using namespace caslearn;

namespace {

DatasetConfig small_config() {
  DatasetConfig cfg;
  cfg.window = {1.0, 24.0};
  cfg.min_observed_nodes = 2;
  cfg.max_observed_nodes = 100;
  cfg.dataset_end_time = 60.0;
  cfg.seed = 3;
  return cfg;
}

CascadeGraph star_cascade(const std::string& id, int observed, int later, double pub) {
  std::vector<Adoption> as;
  as.push_back({"u0", 0.0, std::nullopt});
  for (int i = 0; i < observed - 1; ++i)
    as.push_back({"o" + std::to_string(i), 0.1 + 0.8 * i / std::max(1, observed - 1), "u0"});
  for (int i = 0; i < later; ++i)
    as.push_back({"l" + std::to_string(i), 2.0 + i, "u0"});
  return build_graph(std::move(as), id, pub);
}

}  // namespace

TEST_CASE("parse_line reads the canonical format") {
  CascadeGraph g = parse_line("c1\tA\t1000\t2\tA:0 A/B:1.5 A/B/C:2.0");
  CHECK(g.id() == "c1");
  CHECK(g.pub_time() == 1000.0);
  CHECK(g.size() == 3);
  CHECK(g.node(1).user == "B");
  CHECK(g.node(2).user == "C");
  CHECK(g.parent_of(2) == 1);

  CascadeGraph two = parse_line("c3\tA\t1000\t1\tA:0 A/B:0.5");
  CHECK(two.size() == 2);
}

TEST_CASE("parse_line flags inconsistent counts and malformed lines") {
  try {
    parse_line("c2\tA\t1000\t1\tA:0");
    FAIL("expected count mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::inconsistent_count);
  }
  CHECK_THROWS_AS(parse_line("c2\tA\t1000"), Error);
  CHECK_THROWS_AS(parse_line("c2\tA\t1000\t0\tA"), Error);          // no :time
  CHECK_THROWS_AS(parse_line("c2\tA\tzzz\t0\tA:0"), Error);         // bad pub_time
  CHECK_THROWS_AS(parse_line("c2\tA\t1000\t0\tB:0"), Error);        // root mismatch
  CHECK_THROWS_AS(parse_line("c2\tA\t1000\t1\tA:0 A//B:1"), Error); // empty chain user
}

TEST_CASE("serialize then parse is the identity") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Adoption> as;
    int n = 1 + static_cast<int>(rng.below(40));
    as.push_back({"u0", 0.0, std::nullopt});
    for (int i = 1; i < n; ++i) {
      int p = static_cast<int>(rng.below(static_cast<uint64_t>(i)));
      as.push_back({"u" + std::to_string(i), rng.uniform(0.0, 50.0) + as[static_cast<size_t>(p)].time,
                    "u" + std::to_string(p)});
    }
    CascadeGraph g = build_graph(std::move(as), "t" + std::to_string(trial), rng.uniform(0.0, 1e6));
    CascadeGraph back = parse_line(serialize_cascade(g));
    REQUIRE(back.size() == g.size());
    CHECK(back.id() == g.id());
    CHECK(back.pub_time() == g.pub_time());
    for (int i = 0; i < g.size(); ++i) {
      CHECK(back.node(i).user == g.node(i).user);
      CHECK(back.node(i).time == g.node(i).time);
      CHECK(back.parent_of(i) == g.parent_of(i));
    }
  }
}

TEST_CASE("assemble_dataset applies the observed-size filter") {
  DatasetConfig cfg = small_config();
  cfg.min_observed_nodes = 10;
  // 4 observed nodes at t_o = 1: filtered out entirely
  std::vector<CascadeGraph> pool;
  pool.push_back(star_cascade("small", 4, 5, 0.0));
  pool.push_back(star_cascade("big", 15, 5, 0.0));
  CascadeDataset ds = assemble_dataset(std::move(pool), cfg);
  REQUIRE(ds.labeled.size() == 1);
  CHECK(ds.labeled[0].observed.id() == "big");
}

TEST_CASE("assemble_dataset routes horizon-overflowing cascades to the unlabeled pool") {
  DatasetConfig cfg = small_config();
  std::vector<CascadeGraph> pool;
  pool.push_back(star_cascade("labeled", 5, 3, 30.0));   // 30 + 24 <= 60
  pool.push_back(star_cascade("unlabeled", 5, 3, 40.0)); // 40 + 24 > 60
  CascadeDataset ds = assemble_dataset(std::move(pool), cfg);
  REQUIRE(ds.labeled.size() == 1);
  REQUIRE(ds.unlabeled.size() == 1);
  CHECK(ds.labeled[0].observed.id() == "labeled");
  CHECK(ds.unlabeled[0].id() == "unlabeled");
}

TEST_CASE("observed graphs are truncated, labels are not") {
  DatasetConfig cfg = small_config();
  cfg.max_observed_nodes = 100;
  CascadeGraph big = star_cascade("big", 120, 7, 0.0);  // 120 observed, 7 later
  CascadeDataset ds = assemble_dataset({big}, cfg);
  REQUIRE(ds.labeled.size() == 1);
  CHECK(ds.labeled[0].observed.size() == 100);          // first 100 by adoption time
  CHECK(ds.labeled[0].label == popularity(big, 24.0));  // label from the untruncated cascade
  CHECK(ds.labeled[0].label == 127);
}

TEST_CASE("split sizes stay within one cascade of 50/10/40") {
  for (int n : {10, 17, 45, 100, 333}) {
    DatasetConfig cfg = small_config();
    std::vector<CascadeGraph> pool;
    for (int i = 0; i < n; ++i) pool.push_back(star_cascade("c" + std::to_string(i), 5, 2, 1.0));
    CascadeDataset ds = assemble_dataset(std::move(pool), cfg);
    CHECK(std::abs(ds.count(Split::train) - 0.5 * n) <= 1.0);
    CHECK(std::abs(ds.count(Split::val) - 0.1 * n) <= 1.0);
    CHECK(std::abs(ds.count(Split::test) - 0.4 * n) <= 1.0);
    CHECK(ds.count(Split::train) + ds.count(Split::val) + ds.count(Split::test) == n);
  }
}

TEST_CASE("label_fraction keeps a ceil-sized seeded subsample") {
  DatasetConfig cfg = small_config();
  std::vector<CascadeGraph> pool;
  for (int i = 0; i < 40; ++i) pool.push_back(star_cascade("c" + std::to_string(i), 5, 2, 1.0));
  CascadeDataset ds = assemble_dataset(std::move(pool), cfg);
  const int n_train = ds.count(Split::train);
  const std::size_t total_graphs = ds.labeled.size() + ds.unlabeled.size();

  CascadeDataset frac = label_fraction(ds, 0.1, 9);
  CHECK(frac.count(Split::train) == static_cast<int>(std::ceil(0.1 * n_train)));
  CHECK(frac.count(Split::val) == ds.count(Split::val));
  CHECK(frac.count(Split::test) == ds.count(Split::test));
  // dropped training cascades moved to the unlabeled pool
  CHECK(frac.labeled.size() + frac.unlabeled.size() == total_graphs);
  CHECK(frac.unlabeled.size() == ds.unlabeled.size() +
                                     static_cast<std::size_t>(n_train - frac.count(Split::train)));

  // identity at fraction 1
  CascadeDataset same = label_fraction(ds, 1.0, 9);
  CHECK(same.labeled.size() == ds.labeled.size());

  // determinism
  CascadeDataset again = label_fraction(ds, 0.1, 9);
  REQUIRE(again.labeled.size() == frac.labeled.size());
  for (std::size_t i = 0; i < frac.labeled.size(); ++i)
    CHECK(again.labeled[i].observed.id() == frac.labeled[i].observed.id());

  CHECK_THROWS_AS(label_fraction(ds, 0.0, 1), Error);
  CHECK_THROWS_AS(label_fraction(ds, 1.5, 1), Error);
}

TEST_CASE("synthetic generation is reproducible and filterable") {
  DatasetConfig cfg = small_config();
  SyntheticParams sp;
  auto a = generate_synthetic_graphs(50, sp, cfg.dataset_end_time, 5);
  auto b = generate_synthetic_graphs(50, sp, cfg.dataset_end_time, 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(serialize_cascade(a[i]) == serialize_cascade(b[i]));

  // degenerate: single-node cascades never pass the filters
  SyntheticParams degenerate;
  degenerate.branching_mean = 0.0;
  degenerate.max_size = 1;
  CHECK_THROWS_AS(generate_synthetic(20, cfg, degenerate, 5), Error);
}

TEST_CASE("synthetic pools regression fixture") {
  // measured once at n=2000, defaults, seed 42: both pools populated and
  // labels grow with observed size
  DatasetConfig cfg = small_config();
  cfg.min_observed_nodes = 5;
  CascadeDataset ds = generate_synthetic(2000, cfg, SyntheticParams{}, 42);
  CHECK(ds.labeled.size() > 100);
  CHECK(ds.unlabeled.size() > 100);
  double small_sum = 0.0, big_sum = 0.0;
  int small_n = 0, big_n = 0;
  for (const LabeledCascade& lc : ds.labeled) {
    if (lc.observed.size() < 15) {
      small_sum += lc.label;
      ++small_n;
    } else {
      big_sum += lc.label;
      ++big_n;
    }
  }
  REQUIRE(small_n > 0);
  REQUIRE(big_n > 0);
  CHECK(big_sum / big_n > small_sum / small_n);  // popularity is monotone-ish in observed size
}

TEST_CASE("dataset files round-trip through save and load") {
  DatasetConfig cfg = small_config();
  SyntheticParams sp;
  auto graphs = generate_synthetic_graphs(60, sp, cfg.dataset_end_time, 8);
  const std::string path = "ds_roundtrip_test.txt";
  save_cascades(path, graphs);
  CascadeDataset direct = assemble_dataset(std::move(graphs), cfg);
  CascadeDataset loaded = load_dataset(path, cfg);
  CHECK(loaded.labeled.size() == direct.labeled.size());
  CHECK(loaded.unlabeled.size() == direct.unlabeled.size());
  CHECK(dataset_manifest(loaded) == dataset_manifest(direct));
  std::remove(path.c_str());
}

TEST_CASE("no cascade lands in two pools or splits") {
  DatasetConfig cfg = small_config();
  cfg.min_observed_nodes = 3;
  CascadeDataset ds = generate_synthetic(400, cfg, SyntheticParams{}, 12);
  std::set<std::string> seen;
  for (const LabeledCascade& lc : ds.labeled) CHECK(seen.insert(lc.observed.id()).second);
  for (const CascadeGraph& g : ds.unlabeled) CHECK(seen.insert(g.id()).second);
}

TEST_CASE("gzip cascade files load transparently") {
  DatasetConfig cfg = small_config();
  SyntheticParams sp;
  auto graphs = generate_synthetic_graphs(40, sp, cfg.dataset_end_time, 21);
  const std::string path = "ds_gzip_test.txt.gz";
  gzFile f = gzopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  for (const CascadeGraph& g : graphs) {
    std::string line = serialize_cascade(g) + "\n";
    REQUIRE(gzwrite(f, line.data(), static_cast<unsigned>(line.size())) > 0);
  }
  gzclose(f);
  CascadeDataset loaded = load_dataset(path, cfg);
  CascadeDataset direct = assemble_dataset(std::move(graphs), cfg);
  CHECK(dataset_manifest(loaded) == dataset_manifest(direct));
  std::remove(path.c_str());
}

TEST_CASE("serialization rejects ids that cannot round-trip") {
  CascadeGraph slash = build_graph({{"a/b", 0.0, std::nullopt}}, "c", 0.0);
  CHECK_THROWS_AS(serialize_cascade(slash), Error);
  CascadeGraph colon = build_graph({{"a:1", 0.0, std::nullopt}}, "c", 0.0);
  CHECK_THROWS_AS(serialize_cascade(colon), Error);
  CascadeGraph bad_id = build_graph({{"a", 0.0, std::nullopt}}, "c 1", 0.0);
  CHECK_THROWS_AS(serialize_cascade(bad_id), Error);
}
