#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "equiflow/config.hpp"
#include "equiflow/demand.hpp"
#include "equiflow/generator.hpp"
#include "equiflow/network.hpp"
#include "support/instances.hpp"

using namespace equiflow;
using namespace equiflow::testing;
namespace fs = std::filesystem;

namespace {

struct Run
{
  int code;
  std::string out;
  std::string err;
};

double reported(const std::string& out, const std::string& key)
{
  const auto at = out.find(key + " ");
  REQUIRE(at != std::string::npos);
  return std::stod(out.substr(at + key.size() + 1));
}

Run invoke(std::vector<std::string> args)
{
  std::ostringstream out, err;
  const int code = equiflow::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void put(const fs::path& p, const std::string& text)
{
  std::ofstream(p, std::ios::binary) << text;
}

fs::path two_route_dir()
{
  const fs::path dir = fs::temp_directory_path() / "equiflow_unit" / "cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Instance in = two_route_instance(true);
  put(dir / "network.json", network_to_json(in.network));
  put(dir / "demand.json", demand_to_json(in.demand));
  put(dir / "config.json", config_to_json(in.config));
  return dir;
}

}  // namespace

TEST_CASE("solve on the two-route city")
{
  const fs::path d = two_route_dir();
  const std::vector<std::string> common = {"--network", (d / "network.json").string(), "--demand",
                                           (d / "demand.json").string(), "--config", (d / "config.json").string()};
  std::vector<std::string> args = {"solve"};
  args.insert(args.end(), common.begin(), common.end());

  auto util = args;
  util.insert(util.end(), {"--objective", "util-eff", "--out", (d / "ue").string()});
  const Run u = invoke(util);
  CHECK(u.code == 0);
  CHECK(reported(u.out, "avg_travel_time") == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(fs::exists(d / "ue" / "histogram.csv"));
  CHECK(fs::exists(d / "ue" / "heatmap.csv"));

  auto comm = args;
  comm.insert(comm.end(), {"--objective", "comm-suff", "--out", (d / "cs").string()});
  const Run c = invoke(comm);
  CHECK(c.code == 0);
  CHECK(reported(c.out, "avg_travel_time") == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(reported(c.out, "commute_insufficiency") <= 1e-12);

  CHECK(invoke({"decompose", "--solution", (d / "ue").string()}).code == 0);
  CHECK(invoke({"report", "--solution", (d / "cs").string()}).code == 0);

  auto capped = util;
  capped.insert(capped.end(), {"--max-iterations", "1"});
  CHECK(invoke(capped).code == 1);
}

TEST_CASE("exit codes for bad input")
{
  const fs::path d = two_route_dir();
  put(d / "broken.json", "{\"nodes\": [");
  CHECK(invoke({"validate", "--network", (d / "broken.json").string()}).code == 2);
  CHECK(invoke({"validate", "--network", (d / "missing.json").string()}).code == 2);
  CHECK(invoke({"solve", "--network", (d / "network.json").string()}).code == 2);
  CHECK(invoke({"no-such-command"}).code == 2);
  CHECK(invoke({"solve", "--network", (d / "network.json").string(), "--demand", (d / "demand.json").string(),
             "--objective", "fastest", "--out", (d / "x").string()})
            .code == 2);
  CHECK(invoke({"solve", "--network", (d / "network.json").string(), "--demand", (d / "demand.json").string(),
             "--n-amod-max", "-3", "--out", (d / "x").string()})
            .code == 2);

  const Run ok = invoke({"validate", "--network", (d / "network.json").string(), "--demand", (d / "demand.json").string()});
  CHECK(ok.code == 0);
  CHECK(ok.out == "valid\n");

  // A walk arc with negative time is a structural violation, not a parse error.
  const Instance in = two_route_instance(true);
  std::vector<Arc> arcs(in.network.arcs().begin(), in.network.arcs().end());
  arcs[0].time_min = -1;
  put(d / "bad_net.json", network_to_json(in.network.with_arcs(arcs)));
  const Run bad = invoke({"validate", "--network", (d / "bad_net.json").string()});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("negative") != std::string::npos);
}

TEST_CASE("generate writes a usable city")
{
  const fs::path d = fs::temp_directory_path() / "equiflow_unit" / "gen";
  fs::remove_all(d);
  fs::create_directories(d);
  GridCitySpec s;
  s.rows = 2;
  s.cols = 2;
  s.region_rows = 1;
  s.region_cols = 1;
  s.demand_count = 2;
  put(d / "spec.json", grid_spec_to_json(s));
  const Run g = invoke({"generate", "--spec", (d / "spec.json").string(), "--seed", "9", "--out", (d / "city").string()});
  REQUIRE(g.code == 0);
  CHECK(invoke({"validate", "--network", (d / "city" / "network.json").string(), "--demand",
             (d / "city" / "demand.json").string()})
            .code == 0);
  CHECK(invoke({"--version"}).out.find("equiflow") != std::string::npos);
}
