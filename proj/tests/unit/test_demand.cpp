#include <cmath>
#include <limits>
#include <string>

#include "doctest.h"
#include "equiflow/demand.hpp"
#include "equiflow/error.hpp"
#include "equiflow/generator.hpp"
#include "equiflow/rng.hpp"

using namespace equiflow;

namespace {

std::string doc(const std::string& regions, const std::string& demands, const std::string& extra = "")
{
  return R"({"operating_window_min": 1440, )" + extra + R"("regions": [)" + regions + R"(], "demands": [)" + demands +
         "]}";
}

const std::string kRegion = R"({"id": 1, "population": 100, "budget": 5})";

std::string demand(int o, int d, double users, bool bike = true, int region = 1)
{
  return R"({"origin": )" + std::to_string(o) + R"(, "destination": )" + std::to_string(d) +
         R"(, "daily_users": )" + std::to_string(users) + R"(, "region": )" + std::to_string(region) +
         R"(, "bike_capable": )" + (bike ? "true" : "false") + "}";
}

}  // namespace

TEST_CASE("daily counts become per-minute rates")
{
  const DemandSet d = parse_demand(doc(kRegion, demand(1, 2, 1440)));
  REQUIRE(d.demands.size() == 1);
  CHECK(d.demands[0].rate == doctest::Approx(1.0));
}

TEST_CASE("a full day of trips aggregates to the expected total rate")
{
  // 445851 trips spread over 3 demands.
  const DemandSet d =
      parse_demand(doc(kRegion, demand(1, 2, 200000) + "," + demand(1, 3, 200000) + "," + demand(2, 3, 45851)));
  CHECK(d.total_rate() == doctest::Approx(309.6).epsilon(1e-3));
}

TEST_CASE("window override replaces the document window")
{
  const DemandSet d = parse_demand(doc(kRegion, demand(1, 2, 120)), 60.0);
  CHECK(d.operating_window_min == 60.0);
  CHECK(d.demands[0].rate == doctest::Approx(2.0));
}

TEST_CASE("declared total population must match the regions")
{
  const std::string regions = R"({"id": 1, "population": 3, "budget": 1}, {"id": 2, "population": 7, "budget": 1})";
  CHECK_NOTHROW(parse_demand(doc(regions, demand(1, 2, 10), R"("total_population": 10, )")));
  CHECK_THROWS_AS(parse_demand(doc(regions, demand(1, 2, 10), R"("total_population": 11, )")), SchemaError);
}

TEST_CASE("zero-count demands are dropped and ids stay dense")
{
  const DemandSet d = parse_demand(doc(kRegion, demand(1, 2, 0) + "," + demand(1, 3, 5)));
  REQUIRE(d.demands.size() == 1);
  CHECK(d.demands[0].id == 0);
  CHECK(d.demands[0].destination == 3);
}

TEST_CASE("repeated demand classes are a partition error")
{
  CHECK_THROWS_AS(parse_demand(doc(kRegion, demand(1, 2, 5) + "," + demand(1, 2, 7))), PartitionError);
  // Same pair in both bike classes is a valid partition.
  CHECK(parse_demand(doc(kRegion, demand(1, 2, 5, true) + "," + demand(1, 2, 7, false))).demands.size() == 2);
}

TEST_CASE("demand schema errors")
{
  CHECK_THROWS_AS(parse_demand("[]"), SchemaError);
  CHECK_THROWS_AS(parse_demand(doc(kRegion, demand(1, 2, 5, true, 9))), SchemaError);
  CHECK_THROWS_AS(parse_demand(doc(kRegion, demand(1, 2, -1))), SchemaError);
  CHECK_THROWS_AS(parse_demand(doc(R"({"id": 1, "population": -3, "budget": 1})", "")), SchemaError);
  CHECK_THROWS_AS(parse_demand(doc(kRegion, "", R"("unexpected": 1, )")), SchemaError);
}

TEST_CASE("demand JSON round trip")
{
  const DemandSet d = parse_demand(doc(kRegion, demand(1, 2, 300) + "," + demand(1, 3, 50, false)));
  const DemandSet back = parse_demand(demand_to_json(d));
  REQUIRE(back.demands.size() == 2);
  CHECK(back.demands[1].rate == doctest::Approx(d.demands[1].rate));
  CHECK_FALSE(back.demands[1].bike_capable);
  CHECK(back.total_population() == 100.0);
}

TEST_CASE("bike share split arithmetic")
{
  DemandSet base;
  base.regions = {{1, 10, 1}};
  base.demands = {{0, 1, 2, 2.0, 1, true}};

  SUBCASE("quarter incapable")
  {
    const DemandSet s = split_by_bike_share(base, {{1, 0.25}});
    REQUIRE(s.demands.size() == 2);
    CHECK(s.demands[0].bike_capable);
    CHECK(s.demands[0].rate == doctest::Approx(1.5));
    CHECK_FALSE(s.demands[1].bike_capable);
    CHECK(s.demands[1].rate == doctest::Approx(0.5));
    CHECK(s.demands[1].id == 1);
  }
  SUBCASE("share zero keeps the demand bike-capable")
  {
    const DemandSet s = split_by_bike_share(base, {{1, 0.0}});
    REQUIRE(s.demands.size() == 1);
    CHECK(s.demands[0].bike_capable);
    CHECK(s.demands[0].rate == 2.0);
  }
  SUBCASE("share one leaves a single bike-incapable demand")
  {
    const DemandSet s = split_by_bike_share(base, {{1, 1.0}});
    REQUIRE(s.demands.size() == 1);
    CHECK_FALSE(s.demands[0].bike_capable);
    CHECK(s.demands[0].rate == 2.0);
  }
}

TEST_CASE("bike share split conserves every demand's rate to machine precision")
{
  RandomStream rng(42, "split");
  for (int trial = 0; trial < 200; ++trial) {
    DemandSet base;
    base.regions = {{1, 10, 1}, {2, 20, 1}};
    for (int m = 0; m < 5; ++m)
      base.demands.push_back({m, 1, 2 + m, rng.uniform(1e-4, 50.0), 1 + m % 2, true});
    const double s1 = rng.unit();
    const double s2 = rng.unit();
    const DemandSet s = split_by_bike_share(base, {{1, s1}, {2, s2}});
    std::size_t k = 0;
    for (const Demand& d : base.demands) {
      double sum = 0.0;
      while (k < s.demands.size() && s.demands[k].destination == d.destination) sum += s.demands[k++].rate;
      CHECK(std::abs(sum - d.rate) <= 4 * std::numeric_limits<double>::epsilon() * d.rate);
    }
    CHECK(k == s.demands.size());
  }
}

TEST_CASE("demand references are checked against the network")
{
  GridCitySpec spec;
  spec.rows = 2;
  spec.cols = 2;
  auto [net, dem] = generate_grid_city(spec, 1);
  CHECK(check_demand_references(net, dem).empty());

  DemandSet bad = dem;
  bad.demands[0].origin = bad.demands[0].destination;
  CHECK_FALSE(check_demand_references(net, bad).empty());

  bad = dem;
  bad.demands[0].region = 999;
  CHECK_FALSE(check_demand_references(net, bad).empty());
}
