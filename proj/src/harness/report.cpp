#include "fairimpute/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>

#include <json.hpp>

#include "fairimpute/errors.hpp"
#include "fairimpute/harness/csv.hpp"

namespace fairimpute::harness {

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      "scenario,imputer,metric,threshold,group,point,mean,std,lower,upper,n,n_undefined,n_errors,status\n";
  for (const auto& r : rows) {
    out += csv_field(r.scenario) + ',' + csv_field(r.imputer) + ',' + csv_field(r.metric) + ',' +
           opt(r.threshold) + ',' + r.group + ',' + opt(r.point) + ',' + opt(r.mean) + ',' +
           opt(r.std) + ',' + opt(r.lower) + ',' + opt(r.upper) + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.n_undefined) + ',' + std::to_string(r.n_errors) + ',' +
           csv_field(r.status) + '\n';
  }
  return out;
}

std::vector<GapViolation> audit_gaps(const std::vector<ReportRow>& rows, double tolerance) {
  using Key = std::tuple<std::string, std::string, std::string, std::optional<double>>;
  std::map<Key, std::map<std::string, std::size_t>> index;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    index[{r.scenario, r.imputer, r.metric, r.threshold}][r.group] = i;
  }
  std::vector<GapViolation> bad;
  for (const auto& [key, groups] : index) {
    auto gi = groups.find("gap");
    auto mi = groups.find("marginalised");
    auto ri = groups.find("rest");
    if (gi == groups.end() || mi == groups.end() || ri == groups.end()) continue;
    const auto& g = rows[gi->second];
    const auto& m = rows[mi->second];
    const auto& r = rows[ri->second];
    auto check = [&](const std::optional<double>& gv, const std::optional<double>& mv,
                     const std::optional<double>& rv) {
      if (!gv || !mv || !rv) return;
      const double re = *mv - *rv;
      if (!(std::abs(*gv - re) <= tolerance)) bad.push_back({gi->second, *gv, re});
    };
    check(g.mean, m.mean, r.mean);
    check(g.point, m.point, r.point);
  }
  return bad;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string manifest_json(const ExperimentConfig& config, std::string_view command,
                          const std::vector<std::string>& files) {
  using nlohmann::json;
  json cfg = json::parse(config_to_json(config));
  json hashed = cfg;
  hashed.erase("output");
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(hashed.dump())));
  json j;
  j["tool"] = "fairimpute";
  j["version"] = kVersion;
  j["command"] = command;
  j["seed"] = config.seed;
  j["config_hash"] = hash;
  j["config"] = cfg;
  j["files"] = files;
  return j.dump(2) + "\n";
}

std::string region_scan_csv(const std::vector<RegionCell>& cells) {
  std::string out = "rho_g,rho_ng,delta_pop,delta_group,diff,t3,dotted,feasible\n";
  for (const auto& c : cells) {
    out += format_double(c.rho_g) + ',' + format_double(c.rho_ng) + ',' + format_double(c.delta_pop) +
           ',' + format_double(c.delta_group) + ',' + format_double(c.diff) + ',' +
           (c.t3 ? "1" : "0") + ',' + (c.dotted ? "1" : "0") + ',' + (c.feasible ? "1" : "0") + '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace fairimpute::harness
