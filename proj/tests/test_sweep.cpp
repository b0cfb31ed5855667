#include <algorithm>
#include <cmath>

#include "sldlab/curve_csv.hpp"
#include "sldlab/sweep.hpp"
#include "test_util.hpp"

using namespace sldlab;

namespace {

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.params = {3, 40, 0.1};
  cfg.train_sizes = {2, 5, 20, 60, 150};
  cfg.n_seeds = 3;
  cfg.estimators = {EstimatorKind::Opt, EstimatorKind::Pca, EstimatorKind::Esgd,
                    EstimatorKind::Pinv};
  cfg.base_seed = 17;
  return cfg;
}

}  // namespace

TEST_SUITE("sweep") {

TEST_CASE("estimator names") {
  CHECK(estimator_stem(EstimatorKind::Esgd) == "ESGD");
  CHECK(estimator_stem(EstimatorKind::Pinv) == "PINV");
  CHECK(parse_estimator("pca") == EstimatorKind::Pca);
  CHECK(parse_estimator("OPT") == EstimatorKind::Opt);
  CHECK_FALSE(parse_estimator("svd").has_value());
}

TEST_CASE("default train grid") {
  CHECK(default_train_grid(1, 100, 2) == std::vector<Index>{1, 3, 10, 32, 100});
  const auto g = default_train_grid(1, 20000, 5);
  CHECK(g.size() == 22);
  CHECK(g.front() == 1);
  CHECK(g.back() == 20000);
  CHECK(std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end());
  CHECK_THROWS_CODE(default_train_grid(10, 10, 3), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(default_train_grid(0, 10, 3), ErrorCode::InvalidArgument);
}

TEST_CASE("config validation") {
  SweepConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.train_sizes = {5, 5};
  CHECK_THROWS_CODE(cfg.validate(), ErrorCode::InvalidArgument);
  cfg = small_config();
  cfg.train_sizes.clear();
  CHECK_THROWS_CODE(cfg.validate(), ErrorCode::InvalidArgument);
  cfg = small_config();
  cfg.n_seeds = 0;
  CHECK_THROWS_CODE(cfg.validate(), ErrorCode::InvalidArgument);
  cfg = small_config();
  cfg.estimators.clear();
  CHECK_THROWS_CODE(cfg.validate(), ErrorCode::InvalidArgument);
  cfg = small_config();
  cfg.mc_test_size = 1;
  CHECK_THROWS_CODE(cfg.validate(), ErrorCode::InvalidArgument);
}

TEST_CASE("optimal series is the floor with zero spread") {
  SweepConfig cfg = small_config();
  cfg.estimators = {EstimatorKind::Opt};
  const RiskCurve c = run_sweep(cfg);
  const Series* opt = c.find("OPT");
  REQUIRE(opt != nullptr);
  for (std::size_t i = 0; i < c.train_sizes.size(); ++i) {
    CHECK(std::abs(opt->mean[i] - 0.01 / 1.01) <= 1e-12);
    CHECK(opt->std[i] == 0.0);
  }
}

TEST_CASE("scheduling determinism and cell independence") {
  const SweepConfig cfg = small_config();
  const RiskCurve serial = run_sweep(cfg, {1, {}});
  const RiskCurve parallel = run_sweep(cfg, {4, {}});
  const RiskCurve hw = run_sweep(cfg, {0, {}});
  CHECK(format_curve_csv(serial) == format_curve_csv(parallel));
  CHECK(format_curve_csv(serial) == format_curve_csv(hw));

  // A mean is the plain average of its cells, computed in seed order.
  const auto c0 = run_cell(cfg, 2, 0), c1 = run_cell(cfg, 2, 1), c2 = run_cell(cfg, 2, 2);
  CHECK(serial.find("ESGD")->mean[2] == doctest::Approx((c0[2] + c1[2] + c2[2]) / 3.0).epsilon(1e-15));

  CHECK(cell_seed(1, 0, 0) != cell_seed(1, 0, 1));
  CHECK(cell_seed(1, 0, 1) != cell_seed(1, 1, 0));
  CHECK(cell_seed(1, 2, 3) == cell_seed(1, 2, 3));
}

TEST_CASE("series shape, floor invariant, early stopping dominance") {
  const RiskCurve c = run_sweep(small_config());
  const double floor = 0.01 / 1.01;
  for (const Series& s : c.series) {
    REQUIRE(s.mean.size() == c.train_sizes.size());
    REQUIRE(s.std.size() == c.train_sizes.size());
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      CHECK(s.mean[i] >= floor - 3.0 * s.std[i] / std::sqrt(3.0) - 1e-12);
    }
  }
  for (std::size_t i = 0; i < c.train_sizes.size(); ++i) {
    CHECK(c.find("ESGD")->mean[i] <= c.find("PINV")->mean[i] + 1e-12);
  }
}

TEST_CASE("noiseless PCA has zero risk once N >= d") {
  SweepConfig cfg = small_config();
  cfg.params.sigma_z = 0.0;
  cfg.train_sizes = {3, 4, 10, 50, 200};
  cfg.estimators = {EstimatorKind::Pca};
  const RiskCurve c = run_sweep(cfg);
  for (double m : c.find("PCA")->mean) CHECK(std::abs(m) <= 1e-10);
}

TEST_CASE("Monte-Carlo columns track the closed form") {
  SweepConfig cfg = small_config();
  cfg.train_sizes = {20, 100};
  cfg.estimators = {EstimatorKind::Opt, EstimatorKind::Pca};
  cfg.mc_test_size = 4000;
  const RiskCurve c = run_sweep(cfg);
  REQUIRE(c.find("PCA_MC") != nullptr);
  REQUIRE(c.find("OPT_MC") != nullptr);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(c.find("PCA_MC")->mean[i] == doctest::Approx(c.find("PCA")->mean[i]).epsilon(0.1));
  }
}

TEST_CASE("progress reports every cell") {
  SweepConfig cfg = small_config();
  std::size_t calls = 0, last_total = 0, last_done = 0;
  run_sweep(cfg, {2, [&](std::size_t done, std::size_t total) {
                    ++calls;
                    last_done = done;
                    last_total = total;
                  }});
  CHECK(calls == 15);
  CHECK(last_total == 15);
  CHECK(last_done == 15);
}

TEST_CASE("failed cell aborts with its coordinates") {
  SweepConfig cfg = small_config();
  cfg.params.sigma_z = 1e300;
  cfg.train_sizes = {40};
  cfg.n_seeds = 1;
  cfg.estimators = {EstimatorKind::Esgd};
  bool thrown = false;
  try {
    run_sweep(cfg);
  } catch (const CellError& e) {
    thrown = true;
    CHECK(e.n_index() == 0);
    CHECK(e.seed_index() == 0);
    CHECK(std::string(e.what()).find("N=40") != std::string::npos);
  }
  CHECK(thrown);
}

TEST_CASE("d=10, n=100 early stopping effect (Fig. 4 shape)") {
  SweepConfig cfg;
  cfg.params = {10, 100, 0.05};
  cfg.train_sizes = {20, 100, 1000, 10000};
  cfg.n_seeds = 3;
  cfg.estimators = {EstimatorKind::Esgd, EstimatorKind::Pinv};
  const RiskCurve c = run_sweep(cfg);
  const Series* esgd = c.find("ESGD");
  const Series* pinv = c.find("PINV");
  CHECK(pinv->mean[1] > 1.5 * esgd->mean[1]);
  const double floor = 0.0025 / 1.0025;
  CHECK(esgd->mean[3] <= 2.0 * floor);
  CHECK(pinv->mean[3] <= 2.0 * floor);
}

TEST_CASE("d=10, n=1000 curves decay with N") {
  SweepConfig cfg;
  cfg.params = {10, 1000, 0.1};
  cfg.train_sizes = default_train_grid(10, 2000, 3);
  cfg.train_sizes.push_back(10000);
  cfg.train_sizes.insert(cfg.train_sizes.begin(), 100);
  std::sort(cfg.train_sizes.begin(), cfg.train_sizes.end());
  cfg.train_sizes.erase(std::unique(cfg.train_sizes.begin(), cfg.train_sizes.end()),
                        cfg.train_sizes.end());
  cfg.n_seeds = 5;
  cfg.estimators = {EstimatorKind::Esgd, EstimatorKind::Pca};
  const RiskCurve c = run_sweep(cfg);
  for (const char* name : {"ESGD", "PCA"}) {
    const Series* s = c.find(name);
    std::size_t pairs = 0, violations = 0;
    for (std::size_t i = 1; i < s->mean.size(); ++i) {
      ++pairs;
      if (s->mean[i] > s->mean[i - 1] + s->std[i - 1]) ++violations;
    }
    CHECK(violations * 10 <= pairs);
  }
  const auto at = [&](Index n) {
    return static_cast<std::size_t>(
        std::find(cfg.train_sizes.begin(), cfg.train_sizes.end(), n) - cfg.train_sizes.begin());
  };
  // Two decades of slope ~ -1 in excess risk: at least a factor 10.
  const double floor = 0.01 / 1.01;
  CHECK((c.find("ESGD")->mean[at(10000)] - floor) * 10.0 <=
        c.find("ESGD")->mean[at(100)] - floor);
}

}  // TEST_SUITE
