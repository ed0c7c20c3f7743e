#include "support.hpp"

#include "laa/csv.hpp"
#include "laa/error.hpp"
#include "laa/scheduling.hpp"

#include <doctest.h>

#include <filesystem>

using namespace laa;

namespace {

ProfileInputs flat_inputs(std::size_t hours, double sigma, std::uint64_t seed, double r = 0.2) {
  ProfileInputs in;
  in.buses = {5, 6, 8};
  in.residual_load = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(hours), 3, 80.0);
  in.renewable_fraction.assign(hours, r);
  in.sigma = sigma;
  in.seed = seed;
  return in;
}

TemporalOptions gen3() {
  TemporalOptions o;
  o.renewable_generators = {3};
  return o;
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / ("laa_sched_" + name);
  write_text_file(p, text);
  return p;
}

}  // namespace

TEST_CASE("zero forecast error schedules exactly the residual load") {
  const auto p = schedule(flat_inputs(24, 0.0, 1));
  CHECK(p.forecast == p.residual);
  for (std::size_t t = 0; t < 24; ++t) CHECK(mismatch_mw(p, t).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("seeded draws are reproducible and seed-dependent") {
  const auto a = schedule(flat_inputs(24, 0.1, 42)), b = schedule(flat_inputs(24, 0.1, 42));
  CHECK(a.draws == b.draws);
  CHECK(a.forecast == b.forecast);
  const auto c = schedule(flat_inputs(24, 0.1, 43));
  CHECK(a.draws != c.draws);
  // Draws do not depend on sigma, so the same seed gives scaled forecast errors.
  const auto d = schedule(flat_inputs(24, 0.2, 42));
  CHECK(d.draws == a.draws);
}

TEST_CASE("schedule balances generation and reserve against the forecast") {
  const auto in = flat_inputs(48, 0.1, 7);
  for (auto preset : {ReservePreset::None, ReservePreset::PeakLoad3, ReservePreset::Load3Generation3,
                      ReservePreset::LargestUnit, ReservePreset::Hydro5Conventional7}) {
    ScheduleOptions opt;
    opt.reserve = preset;
    opt.largest_unit_mw = 20.0;
    const auto p = schedule(in, opt);
    CHECK(((p.generation + p.reserve) - p.forecast).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(p.reserve.minCoeff() >= 0.0);
    CHECK(p.generation.minCoeff() >= 0.0);
    CHECK(parse_reserve_preset(to_string(preset)) == preset);
  }
  ScheduleOptions margin;
  margin.policy = SchedulePolicy::ForecastPlusMargin;
  margin.margin = 0.05;
  const auto p = schedule(in, margin);
  CHECK(((p.generation + p.reserve) - 1.05 * p.forecast).cwiseAbs().maxCoeff() < 1e-9);
  margin.margin = -1.5;
  CHECK_THROWS_AS(schedule(in, margin), ValidationError);
  CHECK_THROWS_AS(parse_reserve_preset("spinning"), ValidationError);
}

TEST_CASE("reserve presets size the reserve as documented") {
  auto in = flat_inputs(24, 0.0, 1);
  in.total_load.assign(24, 300.0);
  in.total_load[13] = 400.0;
  ScheduleOptions opt;
  opt.reserve = ReservePreset::PeakLoad3;
  CHECK(schedule(in, opt).reserve.row(0).sum() == doctest::Approx(12.0));
  opt.reserve = ReservePreset::LargestUnit;
  opt.largest_unit_mw = 30.0;
  CHECK(schedule(in, opt).reserve.row(5).sum() == doctest::Approx(30.0));
  opt.reserve = ReservePreset::Hydro5Conventional7;
  const auto p = schedule(in, opt);
  CHECK(p.reserve.row(5).sum() == doctest::Approx(0.07 * p.generation.row(5).sum()));
  opt.reserve = ReservePreset::Load3Generation3;
  const auto q = schedule(in, opt);
  CHECK(q.reserve.row(5).sum() == doctest::Approx(0.03 * 300.0 + 0.03 * q.generation.row(5).sum()));
}

TEST_CASE("mismatch is the clamped shortfall") {
  TemporalProfile p;
  p.buses = {5, 6};
  p.renewable_fraction = {0.1};
  p.residual = Eigen::RowVector2d(100.0, 50.0);
  p.generation = Eigen::RowVector2d(90.0, 60.0);
  p.reserve = Eigen::RowVector2d(5.0, 0.0);
  const auto mw = mismatch_mw(p, 0);
  CHECK(mw[0] == 5.0);
  CHECK(mw[1] == 0.0);
  const auto pu = mismatch(p, 0, {4, 5, 6, 7, 8, 9}, 100.0);
  CHECK(pu[1] == 0.05);
  CHECK(pu.sum() == 0.05);
  CHECK_THROWS_AS(mismatch(p, 0, {4, 6}, 100.0), ValidationError);
  CHECK_THROWS_AS(mismatch_mw(p, 1), ValidationError);
}

TEST_CASE("constant inputs without noise give the static least effort every hour") {
  const auto grid = laa::test::wscc9();
  const auto pts = temporal_vulnerability(grid, schedule(flat_inputs(6, 0.0, 1, 0.3)), 6, TargetGenerator::all(), 0.1,
                                          gen3());
  const auto ref = least_effort(solve_eigen(build_model(grid, {0.0, 0.0, 0.3})), TargetGenerator::all(), 0.1);
  for (const auto& p : pts) {
    CHECK(p.required_mw == doctest::Approx(ref.for_bus(6).epsilon_mw).epsilon(1e-9));
    CHECK(p.mismatch_mw == 0.0);
    CHECK_FALSE(p.baseline_exceeds);
  }
}

TEST_CASE("required attack falls as the renewable fraction rises") {
  auto in = flat_inputs(8, 0.0, 1);
  for (std::size_t t = 0; t < 8; ++t) in.renewable_fraction[t] = 0.07 * static_cast<double>(t);
  const auto pts = temporal_vulnerability(laa::test::wscc9(), schedule(in), 6, TargetGenerator::all(), 0.1, gen3());
  for (std::size_t t = 1; t < pts.size(); ++t) CHECK(pts[t].required_mw <= pts[t - 1].required_mw);
}

TEST_CASE("larger forecast error never raises the required attack for the same draws") {
  const auto grid = laa::test::wscc9();
  ProfileInputs in;
  in.buses = {6};
  in.residual_load = Eigen::MatrixXd::Constant(12, 1, 60.0);
  in.renewable_fraction.assign(12, 0.3);
  in.seed = 11;
  std::vector<double> prev;
  for (double sigma : {0.0, 0.05, 0.1, 0.2}) {
    in.sigma = sigma;
    const auto pts = temporal_vulnerability(grid, schedule(in), 6, TargetGenerator::all(), 0.1, gen3());
    for (std::size_t t = 0; t < prev.size(); ++t) CHECK(pts[t].required_mw <= prev[t] + 1e-12);
    prev.clear();
    for (const auto& p : pts) prev.push_back(p.required_mw);
  }
}

TEST_CASE("mismatch elsewhere is handled by the search and still hits the threshold") {
  const auto grid = laa::test::wscc9();
  TemporalProfile p;
  p.buses = {5, 6};
  p.renewable_fraction = {0.2};
  p.residual = Eigen::RowVector2d(100.0, 40.0);
  p.generation = Eigen::RowVector2d(96.0, 38.0);
  p.reserve = Eigen::RowVector2d::Zero();
  const auto pts = temporal_vulnerability(grid, p, 6, TargetGenerator::all(), 0.1, gen3());
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].mismatch_mw == doctest::Approx(6.0));
  const auto eig = solve_eigen(build_model(grid, {0.0, 0.0, 0.2}));
  Eigen::VectorXd u = mismatch(p, 0, grid.load_bus_ids(), grid.base_mva);
  u[2] += pts[0].required_mw / grid.base_mva;
  const Eigen::MatrixXd s = forced_series(eig, u).sample(3, 3, 1e-3, 20001);
  CHECK(s.cwiseAbs().maxCoeff() == doctest::Approx(2 * M_PI * 0.1).epsilon(1e-9));
  const auto pure = least_effort(eig, TargetGenerator::all(), 0.1).for_bus(6).epsilon_mw;
  CHECK(pts[0].required_mw < pure);
}

TEST_CASE("baseline alone past the threshold is flagged with zero required attack") {
  ProfileInputs in;
  in.buses = {6};
  in.residual_load = Eigen::MatrixXd::Constant(1, 1, 500.0);
  in.renewable_fraction = {0.3};
  auto p = schedule(in);
  p.generation(0, 0) = 450.0;
  const auto pts = temporal_vulnerability(laa::test::wscc9(), p, 6, TargetGenerator::all(), 0.1, gen3());
  CHECK(pts[0].baseline_exceeds);
  CHECK(pts[0].required_mw == 0.0);
}

TEST_CASE("temporal inputs are validated") {
  const auto grid = laa::test::wscc9();
  const auto p = schedule(flat_inputs(2, 0.0, 1));
  CHECK_THROWS_AS(temporal_vulnerability(grid, p, 2, TargetGenerator::all(), 0.1, gen3()), ValidationError);
  CHECK_THROWS_AS(temporal_vulnerability(grid, p, 6, TargetGenerator::all(), 0.1, {}), ValidationError);
  TemporalOptions bad;
  bad.renewable_generators = {4};
  CHECK_THROWS_AS(temporal_vulnerability(grid, p, 6, TargetGenerator::all(), 0.1, bad), ValidationError);
  auto in = flat_inputs(2, 0.0, 1);
  in.renewable_fraction[1] = 1.0;
  CHECK_THROWS_AS(schedule(in), ValidationError);
  in = flat_inputs(2, -0.1, 1);
  CHECK_THROWS_AS(schedule(in), ValidationError);
}

TEST_CASE("temporal CSV has one row per hour") {
  const auto pts = temporal_vulnerability(laa::test::wscc9(), schedule(flat_inputs(3, 0.0, 1)), 6,
                                          TargetGenerator::all(), 0.1, gen3());
  const auto t = parse_csv(temporal_to_csv(pts));
  CHECK(t.header == std::vector<std::string>{"hour", "renewable_fraction", "mismatch_mw", "required_laa_mw",
                                             "baseline_exceeds"});
  CHECK(t.rows.size() == 3);
}

TEST_CASE("system-wide profiles are spread over the allocation") {
  const auto path = temp_file("sys.csv", "hour,load_mw,renewable_mw\n1,100,30\n0,80,40\n");
  const auto in = load_profile(path, {{5, 1.0}, {6, 3.0}}, 2.0);
  CHECK(in.buses == std::vector<int>{5, 6});
  REQUIRE(in.hours() == 2);
  CHECK(in.renewable_fraction[0] == doctest::Approx(0.5));
  CHECK(in.residual_load(0, 1) == doctest::Approx(60.0));
  CHECK(in.residual_load(1, 0) == doctest::Approx(35.0));
  CHECK(in.total_load[1] == doctest::Approx(200.0));
  CHECK_THROWS_AS(load_profile(path, {}), ValidationError);
}

TEST_CASE("per-bus profiles need every bus every hour") {
  const auto good = temp_file("bus.csv", "hour,bus,load_mw,renewable_mw\n0,5,50,10\n0,6,40,10\n1,5,60,0\n1,6,30,3\n");
  const auto in = load_profile(good, {});
  CHECK(in.buses == std::vector<int>{5, 6});
  CHECK(in.residual_load(1, 1) == doctest::Approx(27.0));
  CHECK(in.renewable_fraction[0] == doctest::Approx(20.0 / 90.0));
  const auto gap = temp_file("gap.csv", "hour,bus,load_mw,renewable_mw\n0,5,50,10\n0,6,40,10\n1,5,60,0\n");
  CHECK_THROWS_AS(load_profile(gap, {}), ValidationError);
  const auto bad = temp_file("bad.csv", "hour,load_mw,renewable_mw\n0,abc,1\n");
  CHECK_THROWS_AS(load_profile(bad, {{6, 1.0}}), ParseError);
  const auto over = temp_file("over.csv", "hour,load_mw,renewable_mw\n0,10,12\n");
  CHECK_THROWS_AS(load_profile(over, {{6, 1.0}}), ValidationError);
}

TEST_CASE("shipped SPP-like profiles peak in renewable share during the early morning") {
  for (const char* year : {"2019", "2020"}) {
    const auto in = load_profile(laa::test::data_path(std::string("profiles/spp_") + year + ".csv"), {{6, 1.0}});
    REQUIRE(in.hours() == 24);
    const auto it = std::max_element(in.renewable_fraction.begin(), in.renewable_fraction.end());
    const auto h = it - in.renewable_fraction.begin();
    CHECK(h >= 1);
    CHECK(h <= 8);
  }
}
