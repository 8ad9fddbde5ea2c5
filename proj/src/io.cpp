#include "carclust/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "carclust/errors.hpp"

namespace carclust {

namespace {

using json = nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::vector<std::string>& expected_header,
                                               std::size_t min_fields) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + " is empty");
  const auto header = split_csv_line(line);
  for (std::size_t i = 0; i < expected_header.size(); ++i)
    if (i >= header.size() || header[i] != expected_header[i])
      throw InputError(path.string() + ": expected header starting with '" +
                       [&] {
                         std::string h;
                         for (const auto& f : expected_header) h += (h.empty() ? "" : ",") + f;
                         return h;
                       }() +
                       "', got '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() < min_fields)
      throw InputError(path.string() + ": malformed row '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("cannot parse number '" + s + "' in " + context);
  }
}

long long parse_int(const std::string& s, const std::string& context) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError("cannot parse integer '" + s + "' in " + context);
  return v;
}

bool all_numeric_ids(const std::set<std::string>& ids) {
  for (const auto& id : ids) {
    if (id.empty()) return false;
    for (char c : id)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

LoadedDataset load_dataset(const std::filesystem::path& data_csv,
                           const std::filesystem::path& edges_csv,
                           const std::optional<std::filesystem::path>& areas_csv) {
  std::ifstream probe(data_csv);
  if (!probe) throw InputError("cannot open " + data_csv.string());
  std::string header_line;
  std::getline(probe, header_line);
  probe.close();
  const auto header = split_csv_line(header_line);
  if (header.size() < 3 || header[0] != "unit" || header[1] != "period")
    throw InputError(data_csv.string() + ": expected header unit,period,{y|count}");
  const bool has_counts = header[2] == "count";
  if (!has_counts && header[2] != "y")
    throw InputError(data_csv.string() + ": third column must be 'y' or 'count'");
  if (has_counts && !areas_csv)
    throw InputError("count data needs an areas table to form densities");

  const auto rows = read_csv(data_csv, {"unit", "period", header[2]}, 3);
  if (rows.empty()) throw InputError(data_csv.string() + " has no data rows");

  std::set<std::string> id_set;
  std::set<double> period_set;
  for (const auto& row : rows) {
    id_set.insert(row[0]);
    period_set.insert(parse_double(row[1], data_csv.string()));
  }

  std::vector<std::string> unit_ids(id_set.begin(), id_set.end());
  if (all_numeric_ids(id_set))
    std::sort(unit_ids.begin(), unit_ids.end(), [](const std::string& a, const std::string& b) {
      return std::stoll(a) < std::stoll(b);
    });
  std::map<std::string, int> unit_index;
  for (std::size_t i = 0; i < unit_ids.size(); ++i) unit_index[unit_ids[i]] = static_cast<int>(i);

  std::vector<double> periods(period_set.begin(), period_set.end());
  std::map<double, int> period_index;
  for (std::size_t i = 0; i < periods.size(); ++i) period_index[periods[i]] = static_cast<int>(i);

  const int n = static_cast<int>(unit_ids.size());
  const int t = static_cast<int>(periods.size());
  Eigen::MatrixXd values(n, t);
  std::vector<std::vector<char>> filled(n, std::vector<char>(t, 0));
  for (const auto& row : rows) {
    const int i = unit_index.at(row[0]);
    const int s = period_index.at(parse_double(row[1], data_csv.string()));
    if (filled[i][s])
      throw InputError(data_csv.string() + ": duplicate row for unit " + row[0] + ", period " +
                       row[1]);
    filled[i][s] = 1;
    values(i, s) = parse_double(row[2], data_csv.string());
  }
  std::string gaps;
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < t; ++s)
      if (!filled[i][s]) {
        if (!gaps.empty()) gaps += "; ";
        if (gaps.size() < 200) gaps += "(" + unit_ids[i] + ", " + format_double(periods[s]) + ")";
      }
  if (!gaps.empty()) throw InputError(data_csv.string() + ": missing cells " + gaps);

  Eigen::MatrixXd y(n, t);
  Eigen::MatrixXd counts;
  if (has_counts) {
    counts = values;
    std::map<std::string, double> areas;
    for (const auto& row : read_csv(*areas_csv, {"unit", "area_sq_miles"}, 2)) {
      const double a = parse_double(row[1], areas_csv->string());
      if (!(a > 0.0)) throw InputError(areas_csv->string() + ": non-positive area for " + row[0]);
      if (!areas.emplace(row[0], a).second)
        throw InputError(areas_csv->string() + ": duplicate unit " + row[0]);
    }
    for (int i = 0; i < n; ++i) {
      const auto it = areas.find(unit_ids[i]);
      if (it == areas.end())
        throw InputError(areas_csv->string() + ": no area for unit " + unit_ids[i]);
      for (int s = 0; s < t; ++s) {
        if (values(i, s) < 0.0)
          throw InputError(data_csv.string() + ": negative count for unit " + unit_ids[i]);
        y(i, s) = ihs_transform(values(i, s), it->second);
      }
    }
  } else {
    y = values;
  }

  std::vector<std::pair<int, int>> edges;
  for (const auto& row : read_csv(edges_csv, {"i", "j"}, 2)) {
    const auto a = unit_index.find(row[0]);
    const auto b = unit_index.find(row[1]);
    if (a == unit_index.end())
      throw InputError(edges_csv.string() + ": unknown unit '" + row[0] + "' in edge list");
    if (b == unit_index.end())
      throw InputError(edges_csv.string() + ": unknown unit '" + row[1] + "' in edge list");
    edges.emplace_back(a->second, b->second);
  }

  return LoadedDataset{Dataset::from_periods(std::move(y), periods),
                       AdjacencyGraph(n, edges), std::move(unit_ids), std::move(periods),
                       std::move(counts)};
}

void write_dataset_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& unit_ids,
                       const std::vector<double>& periods, const Eigen::MatrixXd& y,
                       const Eigen::MatrixXd* counts) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << (counts ? "unit,period,y,count\n" : "unit,period,y\n");
  for (int i = 0; i < y.rows(); ++i)
    for (int s = 0; s < y.cols(); ++s) {
      out << unit_ids[i] << ',' << format_double(periods[s]) << ',' << format_double(y(i, s));
      if (counts) out << ',' << format_double((*counts)(i, s));
      out << '\n';
    }
}

void write_edges_csv(const std::filesystem::path& path, const AdjacencyGraph& graph,
                     const std::vector<std::string>& unit_ids) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "i,j\n";
  for (const auto& [a, b] : graph.edges()) out << unit_ids[a] << ',' << unit_ids[b] << '\n';
}

void write_particles_csv(const std::filesystem::path& path,
                         const std::vector<Particle>& particles,
                         const std::vector<std::string>& unit_ids) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "particle,unit,alpha_cluster,beta_cluster\n";
  for (std::size_t l = 0; l < particles.size(); ++l)
    for (int u = 0; u < particles[l].alpha.n_units(); ++u)
      out << l << ',' << unit_ids[u] << ',' << particles[l].alpha.label_of(u) << ','
          << particles[l].beta.label_of(u) << '\n';
}

std::vector<Particle> read_particles_csv(const std::filesystem::path& path,
                                         const AdjacencyGraph& graph) {
  const auto rows = read_csv(path, {"particle", "unit", "alpha_cluster", "beta_cluster"}, 4);
  const int n = graph.n_units();
  std::map<long long, std::pair<std::vector<int>, std::vector<int>>> by_particle;
  std::map<long long, int> seen_units;
  for (const auto& row : rows) {
    const long long l = parse_int(row[0], path.string());
    auto& [la, lb] = by_particle.try_emplace(l, std::vector<int>(n, -1), std::vector<int>(n, -1))
                         .first->second;
    const int u = seen_units[l]++;
    if (u >= n) throw InputError(path.string() + ": too many rows for particle");
    // rows are written unit-major in id order
    la[u] = static_cast<int>(parse_int(row[2], path.string()));
    lb[u] = static_cast<int>(parse_int(row[3], path.string()));
  }
  std::vector<Particle> particles;
  for (const auto& [l, labels] : by_particle) {
    if (seen_units[l] != n) throw InputError(path.string() + ": missing unit rows");
    particles.push_back(Particle{SpatialPartition::from_assignment(graph, labels.first),
                                 SpatialPartition::from_assignment(graph, labels.second)});
  }
  return particles;
}

void write_weights_csv(const std::filesystem::path& path, const ParticleSet& ps,
                       const std::vector<double>& bma_w) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "particle,weight,bma_weight,log_post,k_alpha,k_beta\n";
  for (std::size_t l = 0; l < ps.particles.size(); ++l)
    out << l << ',' << format_double(ps.weights[l]) << ',' << format_double(bma_w[l]) << ','
        << format_double(ps.log_post[l]) << ',' << ps.particles[l].alpha.n_clusters() << ','
        << ps.particles[l].beta.n_clusters() << '\n';
}

std::vector<WeightsRow> read_weights_csv(const std::filesystem::path& path) {
  std::vector<WeightsRow> rows;
  for (const auto& row :
       read_csv(path, {"particle", "weight", "bma_weight", "log_post", "k_alpha", "k_beta"}, 6)) {
    WeightsRow r;
    r.weight = parse_double(row[1], path.string());
    r.bma_weight = parse_double(row[2], path.string());
    r.log_post = parse_double(row[3], path.string());
    r.k_alpha = static_cast<int>(parse_int(row[4], path.string()));
    r.k_beta = static_cast<int>(parse_int(row[5], path.string()));
    rows.push_back(r);
  }
  return rows;
}

void write_estimates_csv(const std::filesystem::path& path,
                         const std::vector<std::string>& unit_ids, const Eigen::VectorXd& alpha,
                         const Eigen::VectorXd& beta) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "unit,alpha,beta\n";
  for (int i = 0; i < alpha.size(); ++i)
    out << unit_ids[i] << ',' << format_double(alpha(i)) << ',' << format_double(beta(i))
        << '\n';
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> read_estimates_csv(
    const std::filesystem::path& path) {
  const auto rows = read_csv(path, {"unit", "alpha", "beta"}, 3);
  Eigen::VectorXd alpha(rows.size()), beta(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    alpha(i) = parse_double(rows[i][1], path.string());
    beta(i) = parse_double(rows[i][2], path.string());
  }
  return {alpha, beta};
}

void write_trace_jsonl(const std::filesystem::path& path,
                       const std::vector<SweepRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& rec : trace) {
    json j;
    j["sweep"] = rec.sweep;
    j["objective"] = rec.objective;
    j["log_post"] = rec.log_post;
    j["weights"] = rec.weights;
    j["k_alpha"] = rec.k_alpha;
    j["k_beta"] = rec.k_beta;
    out << j.dump() << '\n';
  }
}

void write_truth_json(const std::filesystem::path& path, const SyntheticSpec& spec,
                      const SyntheticTruth& truth) {
  json j;
  j["alpha"] = std::vector<double>(truth.alpha.data(), truth.alpha.data() + truth.alpha.size());
  j["beta"] = std::vector<double>(truth.beta.data(), truth.beta.data() + truth.beta.size());
  j["alpha_partition"] = truth.layout.alpha.assignment();
  j["beta_partition"] = truth.layout.beta.assignment();
  j["y_next"] =
      std::vector<double>(truth.y_next.data(), truth.y_next.data() + truth.y_next.size());
  j["x_star"] = truth.x_star;
  j["spec"] = {{"grid_side", spec.grid_side},
               {"delta_alpha", spec.delta_alpha},
               {"delta_beta", spec.delta_beta},
               {"n_periods", spec.n_periods},
               {"sigma2", spec.sigma2},
               {"car_rho", spec.car_rho},
               {"car_scale", spec.car_scale},
               {"car_sd", spec.car_sd},
               {"alpha_shift", spec.alpha_shift},
               {"dgp", to_string(spec.dgp)},
               {"seed", spec.seed}};
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

LoadedTruth read_truth_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  LoadedTruth t;
  const auto alpha = j.at("alpha").get<std::vector<double>>();
  const auto beta = j.at("beta").get<std::vector<double>>();
  t.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), alpha.size());
  t.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
  t.alpha_assignment = j.at("alpha_partition").get<std::vector<int>>();
  t.beta_assignment = j.at("beta_partition").get<std::vector<int>>();
  if (j.contains("y_next")) {
    const auto y = j.at("y_next").get<std::vector<double>>();
    t.y_next = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  }
  t.x_star = j.value("x_star", 0.0);
  if (j.contains("spec")) t.sigma2 = j["spec"].value("sigma2", 0.0);
  return t;
}

}  // namespace carclust
