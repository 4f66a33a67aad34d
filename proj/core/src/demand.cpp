#include "equiflow/demand.hpp"

#include <cmath>
#include <set>
#include <tuple>

#include "equiflow/error.hpp"
#include "json_util.hpp"

namespace equiflow {

const Region* DemandSet::find_region(int id) const
{
  int pos = region_position(id);
  return pos < 0 ? nullptr : &regions[static_cast<std::size_t>(pos)];
}

int DemandSet::region_position(int id) const
{
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i].id == id) return static_cast<int>(i);
  return -1;
}

double DemandSet::total_population() const
{
  double s = 0.0;
  for (const Region& r : regions) s += r.population;
  return s;
}

double DemandSet::total_rate() const
{
  double s = 0.0;
  for (const Demand& d : demands) s += d.rate;
  return s;
}

DemandSet parse_demand(std::string_view json_text, std::optional<double> window_override)
{
  using namespace detail;
  const json doc = parse_json(json_text, "demand");
  require_known_keys(doc, {"operating_window_min", "total_population", "regions", "demands"},
                     "demand");

  DemandSet out;
  out.operating_window_min = get_number(doc, "operating_window_min", "demand");
  if (window_override) out.operating_window_min = *window_override;
  if (!(out.operating_window_min > 0) || !std::isfinite(out.operating_window_min))
    throw SchemaError("demand: operating_window_min must be positive");

  std::set<int> region_ids;
  for (const json& jr : get_array(doc, "regions", "demand")) {
    constexpr std::string_view ctx = "demand.regions[]";
    require_known_keys(jr, {"id", "population", "budget"}, ctx);
    Region r;
    r.id = static_cast<int>(get_integer(jr, "id", ctx));
    r.population = get_number(jr, "population", ctx);
    r.budget = get_number(jr, "budget", ctx);
    if (!(r.population >= 0) || !(r.budget >= 0))
      throw SchemaError("demand.regions[]: population and budget must be nonnegative");
    if (!region_ids.insert(r.id).second)
      throw SchemaError("demand.regions[]: duplicate region id " + std::to_string(r.id));
    out.regions.push_back(r);
  }

  if (doc.contains("total_population")) {
    const double declared = get_number(doc, "total_population", "demand");
    const double sum = out.total_population();
    if (std::abs(declared - sum) > 1e-9 * std::max(1.0, std::abs(declared)))
      throw SchemaError("demand: region populations sum to " + format_number(sum) +
                        " but total_population is " + format_number(declared));
  }

  std::set<std::tuple<long long, long long, bool>> classes;
  int next_id = 0;
  for (const json& jd : get_array(doc, "demands", "demand")) {
    constexpr std::string_view ctx = "demand.demands[]";
    require_known_keys(jd, {"origin", "destination", "daily_users", "region", "bike_capable"},
                       ctx);
    Demand d;
    d.origin = get_integer(jd, "origin", ctx);
    d.destination = get_integer(jd, "destination", ctx);
    const double daily = get_number(jd, "daily_users", ctx);
    d.region = static_cast<int>(get_integer(jd, "region", ctx));
    d.bike_capable = get_bool(jd, "bike_capable", ctx);
    if (!(daily >= 0) || !std::isfinite(daily))
      throw SchemaError("demand.demands[]: daily_users must be finite and nonnegative");
    if (!region_ids.count(d.region))
      throw SchemaError("demand.demands[]: unknown region " + std::to_string(d.region));
    if (!classes.insert({d.origin, d.destination, d.bike_capable}).second)
      throw PartitionError("demand: region " + std::to_string(d.region) + " lists " +
                           std::to_string(d.origin) + "->" + std::to_string(d.destination) +
                           (d.bike_capable ? " (bike-capable)" : " (bike-incapable)") +
                           " more than once");
    if (daily == 0.0) continue;
    d.rate = daily / out.operating_window_min;
    d.id = next_id++;
    out.demands.push_back(d);
  }
  return out;
}

DemandSet load_demand(const std::filesystem::path& path, std::optional<double> window_override)
{
  return parse_demand(read_text_file(path), window_override);
}

std::string demand_to_json(const DemandSet& dem)
{
  using detail::ordered_json;
  ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["operating_window_min"] = dem.operating_window_min;
  doc["total_population"] = dem.total_population();
  ordered_json regions = ordered_json::array();
  for (const Region& r : dem.regions)
    regions.push_back({{"id", r.id}, {"population", r.population}, {"budget", r.budget}});
  ordered_json demands = ordered_json::array();
  for (const Demand& d : dem.demands)
    demands.push_back({{"origin", d.origin},
                       {"destination", d.destination},
                       {"daily_users", d.rate * dem.operating_window_min},
                       {"region", d.region},
                       {"bike_capable", d.bike_capable}});
  doc["regions"] = std::move(regions);
  doc["demands"] = std::move(demands);
  return doc.dump(1) + "\n";
}

DemandSet split_by_bike_share(const DemandSet& dem, const std::map<int, double>& share_incapable)
{
  DemandSet out;
  out.regions = dem.regions;
  out.operating_window_min = dem.operating_window_min;
  int next_id = 0;
  for (const Demand& d : dem.demands) {
    if (!d.bike_capable) {
      Demand copy = d;
      copy.id = next_id++;
      out.demands.push_back(copy);
      continue;
    }
    auto it = share_incapable.find(d.region);
    const double share = it == share_incapable.end() ? 0.0 : it->second;
    const double incapable = share * d.rate;
    const double capable = d.rate - incapable;
    if (capable > 0.0) {
      Demand c = d;
      c.id = next_id++;
      c.rate = capable;
      c.bike_capable = true;
      out.demands.push_back(c);
    }
    if (incapable > 0.0) {
      Demand c = d;
      c.id = next_id++;
      c.rate = incapable;
      c.bike_capable = false;
      out.demands.push_back(c);
    }
  }
  return out;
}

std::vector<Violation> check_demand_references(const Network& net, const DemandSet& dem)
{
  std::vector<Violation> out;
  auto report = [&out](std::string subject, Rule rule) {
    out.push_back({std::move(subject), rule, std::string(describe(rule))});
  };
  for (const Demand& d : dem.demands) {
    const std::string subject = "demand " + std::to_string(d.id);
    const Node* o = net.find_node(d.origin);
    const Node* t = net.find_node(d.destination);
    if (!o || o->layer != Layer::origin || !t || t->layer != Layer::destination)
      report(subject, Rule::unknown_demand_node);
    if (!dem.find_region(d.region)) report(subject, Rule::unknown_region);
    if (o && o->layer == Layer::origin && o->region != d.region)
      report(subject, Rule::origin_region_mismatch);
  }
  return out;
}

}  // namespace equiflow
