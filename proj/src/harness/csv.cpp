#include "fairimpute/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fairimpute/errors.hpp"
#include "fairimpute/rng.hpp"

namespace fairimpute::harness {

namespace {

std::vector<std::vector<std::string>> split_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cur.empty()) {
        fields.push_back(std::move(cur));
        records.push_back(std::move(fields));
      }
      fields.clear();
      cur.clear();
      any = false;
    } else {
      cur.push_back(c);
      any = true;
    }
  }
  if (quoted) throw SchemaError("csv: unterminated quoted field");
  if (any || !cur.empty()) {
    fields.push_back(std::move(cur));
    records.push_back(std::move(fields));
  }
  return records;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t')) --b;
  return std::string(s.substr(a, b - a));
}

std::size_t column_index(const CsvTable& t, const std::string& name) {
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] == name) return j;
  }
  throw SchemaError("csv: column '" + name + "' not found");
}

BinaryLabels read_binary(const CsvTable& t, const BinaryColumn& col) {
  const std::size_t j = column_index(t, col.column);
  BinaryLabels out(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string v = trim(t.rows[i][j]);
    auto it = col.values.find(v);
    if (it == col.values.end()) {
      throw SchemaError("csv: column '" + col.column + "' has value '" + v + "' on line " +
                        std::to_string(i + 2) + " outside its binary mapping");
    }
    out[i] = it->second;
  }
  return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  auto records = split_records(text);
  if (records.empty()) throw SchemaError("csv: missing header row");
  CsvTable t;
  for (auto& h : records.front()) t.header.push_back(trim(h));
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw SchemaError("csv: line " + std::to_string(r + 1) + " has " +
                        std::to_string(records[r].size()) + " fields, header has " +
                        std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("csv: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

IngestedCohort ingest(const CsvTable& table, const CsvSource& source) {
  if (table.rows.empty()) throw SchemaError("csv: no data rows");
  const BinaryLabels group = read_binary(table, source.group);
  const BinaryLabels outcome = read_binary(table, source.outcome);
  std::vector<BinaryLabels> aux;
  for (const auto& a : source.auxiliary_groups) aux.push_back(read_binary(table, a));

  std::vector<std::string> names = source.covariates;
  if (names.empty()) {
    for (const auto& h : table.header) {
      bool used = h == source.group.column || h == source.outcome.column;
      for (const auto& a : source.auxiliary_groups) used = used || h == a.column;
      if (!used) names.push_back(h);
    }
  }
  if (names.empty()) throw SchemaError("csv: no covariate columns");
  std::vector<std::size_t> cols;
  for (const auto& n : names) cols.push_back(column_index(table, n));

  const std::size_t n = table.rows.size();
  const std::size_t d = cols.size();
  std::vector<double> values(n * d, 0.0);
  ObservationMask mask(n, d, true);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const std::string cell = trim(table.rows[i][cols[j]]);
      if (cell.empty()) {
        mask.set(i, j, false);
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw SchemaError("csv: column '" + names[j] + "' line " + std::to_string(i + 2) +
                          ": '" + cell + "' is not a number");
      }
      values[i * d + j] = v;
    }
  }
  Cohort cohort(Matrix(n, d, std::move(values)), group, outcome, names);
  if (!aux.empty()) cohort = cohort.with_auxiliary_groups(std::move(aux));
  return {std::move(cohort), std::move(mask)};
}

IngestedCohort ingest(const CsvSource& source) { return ingest(read_csv(source.path), source); }

CsvSource write_standin_csv(const StandinSpec& spec, const std::filesystem::path& path) {
  if (spec.rows < 2 || spec.covariates < 1 || spec.informative > spec.covariates) {
    throw ConfigError("stand-in: inconsistent sizes");
  }
  Rng rng(spec.seed);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("stand-in: cannot write " + path.string());
  for (std::size_t j = 0; j < spec.covariates; ++j) out << 'x' << (j + 1) << ',';
  out << "group,outcome\n";
  std::vector<double> x(spec.covariates);
  for (std::size_t i = 0; i < spec.rows; ++i) {
    const bool marg = rng.bernoulli(spec.marginalised_share);
    const bool pos = rng.bernoulli(spec.prevalence);
    for (std::size_t j = 0; j < spec.covariates; ++j) {
      x[j] = rng.normal();
      if (j < spec.informative) {
        x[j] += (pos ? spec.signal : 0.0) + (marg ? spec.group_shift : 0.0);
      }
    }
    for (std::size_t j = 0; j < spec.covariates; ++j) {
      const double u = rng.uniform();
      const double v = rng.uniform();
      const double p_self = marg ? spec.mask_probability : spec.rest_mask_probability;
      const bool hidden = (j < spec.informative && x[j] > spec.mask_threshold && u < p_self) ||
                          v < spec.background_missing;
      if (!hidden) out << format_double(x[j]);
      out << ',';
    }
    out << (marg ? "minority" : "majority") << ',' << (pos ? 1 : 0) << '\n';
  }
  if (!out) throw ConfigError("stand-in: write failed for " + path.string());
  CsvSource src;
  src.path = path;
  src.group = {"group", {{"minority", 1}, {"majority", 0}}};
  src.outcome = {"outcome", {{"0", 0}, {"1", 1}}};
  return src;
}

}  // namespace fairimpute::harness
