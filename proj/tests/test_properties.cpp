// Randomized property checks over generated networks and samples.
#include "support.hpp"

#include "laa/ingest.hpp"
#include "laa/oracle.hpp"
#include "laa/response.hpp"
#include "laa/scheduling.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace laa;

namespace {

constexpr int kTrials = 12;

// Connected random network: a spanning tree plus a few chords.
GridCase random_grid(std::mt19937_64& rng, int gens, int loads) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridCase g;
  g.name = "random";
  const int n = gens + loads;
  for (int id = 1; id <= n; ++id) g.buses.push_back({id, id <= gens ? BusKind::Generator : BusKind::Load});
  for (int id = 2; id <= n; ++id) {
    const int parent = 1 + static_cast<int>(u(rng) * (id - 1));
    g.branches.push_back({parent, id, 2.0 + 18.0 * u(rng)});
  }
  for (int k = 0; k < n / 2; ++k) {
    const int a = 1 + static_cast<int>(u(rng) * n), b = 1 + static_cast<int>(u(rng) * n);
    if (a != b) g.branches.push_back({a, b, 2.0 + 18.0 * u(rng)});
  }
  for (int id = 1; id <= gens; ++id)
    g.generators.push_back({id, 0.02 + 0.2 * u(rng), 0.01 + 0.05 * u(rng), 0.05 + 0.5 * u(rng), 0.1 + 2.0 * u(rng)});
  for (int id = gens + 1; id <= n; ++id) g.loads.push_back({id, u(rng), 0.3 * u(rng)});
  validate_case(g);
  return g;
}

}  // namespace

TEST_CASE("property: Kron reduction equals the Schur complement on random networks") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto g = random_grid(rng, 2 + trial % 4, 3 + trial);
    const auto p = build_partition(g);
    const auto k = kron_reduce(p);
    const Eigen::MatrixXd inv = p.ll.inverse();
    CHECK(laa::test::rel_linf(k.gg_eff, p.gg - p.gl * inv * p.lg) < 1e-10);
    CHECK(laa::test::rel_linf(k.bm, p.gl * inv) < 1e-10);
    CHECK((k.bm.colwise().sum().array() + 1.0).abs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("property: spectra come in exact conjugate pairs with conjugate vectors") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto eig = solve_eigen(build_model(random_grid(rng, 2 + trial % 4, 4)));
    const auto m = eig.eigenvalues.size();
    for (Eigen::Index j = 0; j < m; ++j) {
      const Complex l = eig.eigenvalues[j];
      if (l.imag() == 0.0) continue;
      Eigen::Index partner = -1;
      for (Eigen::Index q = 0; q < m; ++q)
        if (eig.eigenvalues[q] == std::conj(l)) partner = q;
      REQUIRE(partner >= 0);
      CHECK((eig.right.col(partner) - eig.right.col(j).conjugate()).cwiseAbs().maxCoeff() < 1e-12);
    }
    const auto res = check_eigen(eig);
    CHECK(res.right < 1e-9);
    CHECK(res.normalization < 1e-9);
  }
}

TEST_CASE("property: zero forcing gives zero response") {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 4; ++trial) {
    const auto g = random_grid(rng, 3, 4);
    const auto eig = solve_eigen(build_model(g));
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
    std::vector<double> grid{0.0, 0.1, 1.0, 5.0, 19.9};
    CHECK(respond(eig, z, z, grid).states.cwiseAbs().maxCoeff() == 0.0);
    CHECK(integrate(eig.model, Forcing::step(z), 2.0).states.cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(kernel(eig, i).eval(0.0).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("property: response is linear in the forcing") {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> grid;
  for (int k = 0; k <= 200; ++k) grid.push_back(0.1 * k);
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto eig = solve_eigen(build_model(random_grid(rng, 3, 5)));
    Eigen::VectorXd e1(5), e2(5), zero = Eigen::VectorXd::Zero(5);
    for (int i = 0; i < 5; ++i) {
      e1[i] = n(rng);
      e2[i] = n(rng);
    }
    const double a = n(rng), b = n(rng);
    const auto lhs = respond(eig, a * e1 + b * e2, zero, grid).states;
    const Eigen::MatrixXd rhs = a * respond(eig, e1, zero, grid).states + b * respond(eig, e2, zero, grid).states;
    CHECK(laa::test::rel_linf(lhs, rhs) < 1e-10);
  }
}

TEST_CASE("property: percentiles are order statistics") {
  std::mt19937_64 rng(505);
  std::lognormal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < kTrials; ++trial) {
    std::vector<double> v(24 * (2 + trial));
    for (auto& x : v) x = d(rng);
    RtoSeries a;
    for (std::size_t k = 0; k < v.size(); ++k) a.records.push_back({static_cast<std::int64_t>(k), v[k], 0, 0});
    // Shuffle whole days, which keeps every record in its hour-of-day group.
    std::vector<std::size_t> days(v.size() / 24);
    std::iota(days.begin(), days.end(), 0);
    std::shuffle(days.begin(), days.end(), rng);
    RtoSeries b;
    for (std::size_t k = 0; k < v.size(); ++k)
      b.records.push_back({static_cast<std::int64_t>(k), v[days[k / 24] * 24 + k % 24], 0, 0});
    const auto ba = percentile_bands(a, Quantity::Load), bb = percentile_bands(b, Quantity::Load);
    for (std::size_t h = 0; h < 24; ++h) {
      CHECK(ba[h].low == bb[h].low);
      CHECK(ba[h].median == bb[h].median);
      CHECK(ba[h].high == bb[h].high);
      CHECK(ba[h].low <= ba[h].median);
      CHECK(ba[h].median <= ba[h].high);
    }
    std::vector<double> s = v;
    std::shuffle(s.begin(), s.end(), rng);
    for (double p : {0.0, 5.0, 37.5, 50.0, 95.0, 100.0}) CHECK(percentile(v, p) == percentile(s, p));
  }
}

TEST_CASE("property: seeded runs are deterministic") {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 4; ++trial) {
    ProfileInputs in;
    in.buses = {6};
    in.residual_load = Eigen::MatrixXd::Constant(24, 1, 50.0 + 10.0 * trial);
    in.renewable_fraction.assign(24, 0.1 * trial);
    in.sigma = 0.1;
    in.seed = rng();
    TemporalOptions opt;
    opt.renewable_generators = {3};
    const auto g = laa::test::wscc9();
    const auto a = temporal_vulnerability(g, schedule(in), 6, TargetGenerator::all(), 0.1, opt);
    opt.max_threads = 3;
    const auto b = temporal_vulnerability(g, schedule(in), 6, TargetGenerator::all(), 0.1, opt);
    CHECK(temporal_to_csv(a) == temporal_to_csv(b));
  }
  const auto g = laa::test::wscc9();
  const auto m = build_model(g);
  SweepOptions s1, s2;
  s1.counts = s2.counts = {2, 4};
  s1.t_end = s2.t_end = 16.0;
  s1.max_threads = 1;
  s2.max_threads = 4;
  CHECK(sweep_to_csv(sweep_multibus(g, m, protection_preset("NERC"), s1)) ==
        sweep_to_csv(sweep_multibus(g, m, protection_preset("NERC"), s2)));
}
