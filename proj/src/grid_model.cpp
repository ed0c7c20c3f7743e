#include "laa/grid_model.hpp"

#include "laa/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <queue>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>

namespace laa {

using Json = nlohmann::json;

std::vector<int> GridCase::generator_bus_ids() const {
  std::vector<int> ids;
  ids.reserve(generators.size());
  for (const auto& g : generators) ids.push_back(g.bus);
  return ids;
}

std::vector<int> GridCase::load_bus_ids() const {
  std::vector<int> ids;
  ids.reserve(loads.size());
  for (const auto& l : loads) ids.push_back(l.bus);
  return ids;
}

std::optional<std::size_t> GridCase::load_index(int bus_id) const {
  for (std::size_t k = 0; k < loads.size(); ++k)
    if (loads[k].bus == bus_id) return k;
  return std::nullopt;
}

std::optional<std::size_t> GridCase::generator_index(int bus_id) const {
  for (std::size_t k = 0; k < generators.size(); ++k)
    if (generators[k].bus == bus_id) return k;
  return std::nullopt;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open case file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool finite(double v) { return std::isfinite(v); }

void check_connected(const GridCase& grid) {
  std::unordered_map<int, std::vector<int>> adj;
  for (const auto& b : grid.buses) adj[b.id];
  for (const auto& br : grid.branches) {
    adj[br.from].push_back(br.to);
    adj[br.to].push_back(br.from);
  }
  std::set<int> seen;
  std::queue<int> q;
  q.push(grid.buses.front().id);
  seen.insert(grid.buses.front().id);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u])
      if (seen.insert(v).second) q.push(v);
  }
  for (const auto& b : grid.buses)
    if (!seen.count(b.id))
      throw ValidationError("bus " + std::to_string(b.id) +
                            " is not connected to bus " +
                            std::to_string(grid.buses.front().id) +
                            " (network is islanded)");
}

}  // namespace

void validate_case(GridCase& grid) {
  if (!(grid.base_mva > 0) || !finite(grid.base_mva))
    throw ValidationError("base_mva must be positive");
  if (!(grid.nominal_hz > 0) || !finite(grid.nominal_hz))
    throw ValidationError("nominal_hz must be positive");
  if (grid.buses.empty()) throw ValidationError("case has no buses");

  std::sort(grid.buses.begin(), grid.buses.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });
  std::map<int, BusKind> kinds;
  for (const auto& b : grid.buses) {
    if (!kinds.emplace(b.id, b.kind).second)
      throw ValidationError("bus " + std::to_string(b.id) + " is defined twice");
  }

  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    const auto& br = grid.branches[k];
    const std::string tag = "branch #" + std::to_string(k + 1) + " (" +
                            std::to_string(br.from) + "-" + std::to_string(br.to) + ")";
    if (!kinds.count(br.from) || !kinds.count(br.to))
      throw ValidationError(tag + " references an unknown bus");
    if (br.from == br.to) throw ValidationError(tag + " is a self-loop");
    if (!finite(br.susceptance) || br.susceptance == 0.0)
      throw ValidationError(tag + " has a zero or non-finite susceptance");
  }

  std::sort(grid.generators.begin(), grid.generators.end(),
            [](const auto& a, const auto& b) { return a.bus < b.bus; });
  std::set<int> gen_seen;
  for (const auto& g : grid.generators) {
    const std::string tag = "generator at bus " + std::to_string(g.bus);
    auto it = kinds.find(g.bus);
    if (it == kinds.end()) throw ValidationError(tag + " references an unknown bus");
    if (it->second != BusKind::Generator)
      throw ValidationError(tag + " sits on a load bus");
    if (!gen_seen.insert(g.bus).second) throw ValidationError(tag + " is defined twice");
    if (!finite(g.inertia) || !finite(g.damping) || !finite(g.kp) || !finite(g.ki))
      throw ValidationError(tag + " has a non-finite parameter");
    if (!(g.inertia > 0)) throw ValidationError(tag + " has nonpositive inertia");
  }

  std::map<int, LoadParams> loads;
  for (const auto& l : grid.loads) {
    const std::string tag = "load at bus " + std::to_string(l.bus);
    auto it = kinds.find(l.bus);
    if (it == kinds.end()) throw ValidationError(tag + " references an unknown bus");
    if (it->second != BusKind::Load) throw ValidationError(tag + " sits on a generator bus");
    if (!finite(l.secure) || !finite(l.vulnerable_cap))
      throw ValidationError(tag + " has a non-finite value");
    if (l.vulnerable_cap < 0) throw ValidationError(tag + " has a negative vulnerable cap");
    if (!loads.emplace(l.bus, l).second) throw ValidationError(tag + " is defined twice");
  }

  std::size_t n_gen = 0;
  for (const auto& [id, kind] : kinds) {
    if (kind == BusKind::Generator) {
      ++n_gen;
      if (!gen_seen.count(id))
        throw ValidationError("generator bus " + std::to_string(id) +
                              " has no generator parameters");
    } else if (!loads.count(id)) {
      loads.emplace(id, LoadParams{id, 0.0, 0.0});
    }
  }
  if (n_gen == 0) throw ValidationError("case has no generator buses");
  if (loads.empty()) throw ValidationError("case has no load buses");

  grid.loads.clear();
  for (auto& [id, l] : loads) grid.loads.push_back(l);

  check_connected(grid);
}

// ---------------------------------------------------------------------------
// native JSON

namespace {

BusKind parse_kind(const std::string& s, int id) {
  if (s == "generator" || s == "gen") return BusKind::Generator;
  if (s == "load") return BusKind::Load;
  throw ParseError("bus " + std::to_string(id) + ": unknown kind '" + s + "'");
}

double load_field(const Json& j, const std::string& stem, double base, const std::string& tag) {
  if (j.contains(stem + "_pu")) return j.at(stem + "_pu").get<double>();
  if (j.contains(stem + "_mw")) return j.at(stem + "_mw").get<double>() / base;
  if (stem == "vulnerable") return 0.0;
  throw ParseError(tag + ": missing '" + stem + "_mw' or '" + stem + "_pu'");
}

}  // namespace

GridCase parse_native_case(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("case JSON: ") + e.what());
  }
  GridCase grid;
  try {
    grid.name = doc.value("name", std::string{});
    grid.base_mva = doc.value("base_mva", 100.0);
    grid.nominal_hz = doc.value("nominal_hz", 60.0);

    const auto& buses = doc.at("buses");
    for (std::size_t k = 0; k < buses.size(); ++k) {
      const auto& b = buses[k];
      int id = b.at("id").get<int>();
      grid.buses.push_back({id, parse_kind(b.at("kind").get<std::string>(), id)});
    }
    const auto& branches = doc.at("branches");
    for (std::size_t k = 0; k < branches.size(); ++k) {
      const auto& b = branches[k];
      Branch br{b.at("from").get<int>(), b.at("to").get<int>(), 0.0};
      if (b.contains("susceptance")) {
        br.susceptance = b.at("susceptance").get<double>();
      } else if (b.contains("x")) {
        br.susceptance = 1.0 / b.at("x").get<double>();
      } else {
        throw ParseError("branch #" + std::to_string(k + 1) +
                         ": needs 'susceptance' or 'x'");
      }
      grid.branches.push_back(br);
    }
    for (const auto& g : doc.at("generators")) {
      grid.generators.push_back({g.at("bus").get<int>(), g.at("inertia").get<double>(),
                                 g.value("damping", 0.0), g.value("kp", 0.0),
                                 g.value("ki", 0.0)});
    }
    if (doc.contains("loads")) {
      for (const auto& l : doc.at("loads")) {
        int bus = l.at("bus").get<int>();
        const std::string tag = "load at bus " + std::to_string(bus);
        grid.loads.push_back({bus, load_field(l, "secure", grid.base_mva, tag),
                              load_field(l, "vulnerable", grid.base_mva, tag)});
      }
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("case JSON: ") + e.what());
  }
  validate_case(grid);
  return grid;
}

std::string serialize_case(const GridCase& grid) {
  Json doc;
  doc["name"] = grid.name;
  doc["base_mva"] = grid.base_mva;
  doc["nominal_hz"] = grid.nominal_hz;
  doc["buses"] = Json::array();
  for (const auto& b : grid.buses)
    doc["buses"].push_back(
        {{"id", b.id}, {"kind", b.kind == BusKind::Generator ? "generator" : "load"}});
  doc["branches"] = Json::array();
  for (const auto& br : grid.branches)
    doc["branches"].push_back({{"from", br.from}, {"to", br.to}, {"susceptance", br.susceptance}});
  doc["generators"] = Json::array();
  for (const auto& g : grid.generators)
    doc["generators"].push_back({{"bus", g.bus},
                                 {"inertia", g.inertia},
                                 {"damping", g.damping},
                                 {"kp", g.kp},
                                 {"ki", g.ki}});
  doc["loads"] = Json::array();
  for (const auto& l : grid.loads)
    doc["loads"].push_back(
        {{"bus", l.bus}, {"secure_pu", l.secure}, {"vulnerable_pu", l.vulnerable_cap}});
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// MATPOWER-style text

namespace {

using Table = std::vector<std::vector<double>>;

std::string strip_comments(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool comment = false;
  for (char c : text) {
    if (c == '%') comment = true;
    if (c == '\n') comment = false;
    if (!comment) out.push_back(c);
  }
  return out;
}

std::optional<Table> find_table(const std::string& text, const std::string& name) {
  const std::regex re("mpc\\." + name + "\\s*=\\s*\\[([^\\]]*)\\]");
  std::smatch m;
  if (!std::regex_search(text, m, re)) return std::nullopt;
  Table rows;
  std::string body = m[1].str();
  std::replace(body.begin(), body.end(), ';', '\n');
  std::istringstream lines(body);
  std::string line;
  while (std::getline(lines, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::replace(line.begin(), line.end(), '\t', ' ');
    std::istringstream cells(line);
    std::vector<double> row;
    std::string tok;
    while (cells >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("mpc." + name + ": bad number '" + tok + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<double> find_scalar(const std::string& text, const std::string& name) {
  const std::regex re("mpc\\." + name + "\\s*=\\s*([-+0-9.eE]+)\\s*;");
  std::smatch m;
  if (!std::regex_search(text, m, re)) return std::nullopt;
  return std::stod(m[1].str());
}

void need_columns(const std::vector<double>& row, std::size_t n, const std::string& tag) {
  if (row.size() < n)
    throw ParseError(tag + ": expected at least " + std::to_string(n) + " columns, got " +
                     std::to_string(row.size()));
}

}  // namespace

GridCase parse_matpower_case(const std::string& raw) {
  const std::string text = strip_comments(raw);
  GridCase grid;
  grid.name = "matpower";
  {
    const std::regex fn("function\\s+mpc\\s*=\\s*(\\w+)");
    std::smatch m;
    if (std::regex_search(text, m, fn)) grid.name = m[1].str();
  }
  grid.base_mva = find_scalar(text, "baseMVA").value_or(100.0);
  grid.nominal_hz = find_scalar(text, "nominal_hz").value_or(60.0);

  auto bus = find_table(text, "bus");
  auto branch = find_table(text, "branch");
  auto gen = find_table(text, "gen");
  if (!bus || !branch || !gen) throw ParseError("MATPOWER case needs mpc.bus, mpc.branch and mpc.gen");

  // Aggregate in-service machines per bus.
  std::map<int, GeneratorParams> gens;
  std::map<int, double> gen_rating;
  for (std::size_t k = 0; k < gen->size(); ++k) {
    const auto& r = (*gen)[k];
    const std::string tag = "mpc.gen row " + std::to_string(k + 1);
    need_columns(r, 2, tag);
    if (r.size() >= 8 && r[7] <= 0) continue;
    int b = static_cast<int>(r[0]);
    double rating = r.size() >= 9 ? std::max(r[8], std::abs(r[1])) : std::abs(r[1]);
    gens[b].bus = b;
    gen_rating[b] += std::max(rating, 1.0);
  }

  auto dyn = find_table(text, "gendyn");
  if (dyn) {
    std::map<int, GeneratorParams> explicit_params;
    for (std::size_t k = 0; k < dyn->size(); ++k) {
      const auto& r = (*dyn)[k];
      need_columns(r, 5, "mpc.gendyn row " + std::to_string(k + 1));
      int b = static_cast<int>(r[0]);
      if (!gens.count(b))
        throw ValidationError("mpc.gendyn row " + std::to_string(k + 1) +
                              ": bus " + std::to_string(b) + " has no in-service generator");
      explicit_params[b] = {b, r[1], r[2], r[3], r[4]};
    }
    for (auto& [b, g] : gens) {
      auto it = explicit_params.find(b);
      if (it == explicit_params.end())
        throw ValidationError("generator at bus " + std::to_string(b) +
                              " is missing from mpc.gendyn");
      g = it->second;
    }
  } else {
    // Rating-based defaults: H = 5 s, 5 % droop, unit damping, integral gain
    // of 0.5 p.u./rad per p.u. of rating.
    const double ws = 2.0 * std::numbers::pi * grid.nominal_hz;
    for (auto& [b, g] : gens) {
      const double s = gen_rating[b] / grid.base_mva;
      g.inertia = 2.0 * 5.0 * s / ws;
      g.damping = s / ws;
      g.kp = s / (0.05 * ws);
      g.ki = 0.5 * s;
    }
  }

  std::map<int, double> vulnerable;
  if (auto vt = find_table(text, "vulnerable")) {
    for (std::size_t k = 0; k < vt->size(); ++k) {
      const auto& r = (*vt)[k];
      need_columns(r, 2, "mpc.vulnerable row " + std::to_string(k + 1));
      vulnerable[static_cast<int>(r[0])] = r[1] / grid.base_mva;
    }
  }

  for (std::size_t k = 0; k < bus->size(); ++k) {
    const auto& r = (*bus)[k];
    need_columns(r, 3, "mpc.bus row " + std::to_string(k + 1));
    int id = static_cast<int>(r[0]);
    bool is_gen = gens.count(id) > 0;
    grid.buses.push_back({id, is_gen ? BusKind::Generator : BusKind::Load});
    if (!is_gen) {
      double v = vulnerable.count(id) ? vulnerable[id] : 0.0;
      grid.loads.push_back({id, r[2] / grid.base_mva, v});
    }
  }
  for (const auto& [b, g] : gens) grid.generators.push_back(g);

  // Parallel circuits are merged so that serialization stays canonical.
  std::map<std::pair<int, int>, double> merged;
  std::vector<std::pair<int, int>> order;
  for (std::size_t k = 0; k < branch->size(); ++k) {
    const auto& r = (*branch)[k];
    const std::string tag = "mpc.branch row " + std::to_string(k + 1);
    need_columns(r, 4, tag);
    if (r.size() >= 11 && r[10] <= 0) continue;
    if (r[3] == 0.0) throw ValidationError(tag + ": zero reactance");
    int f = static_cast<int>(r[0]);
    int t = static_cast<int>(r[1]);
    auto key = std::minmax(f, t);
    std::pair<int, int> k2{key.first, key.second};
    if (!merged.count(k2)) order.push_back(k2);
    merged[k2] += 1.0 / r[3];
  }
  for (const auto& key : order) grid.branches.push_back({key.first, key.second, merged[key]});

  validate_case(grid);
  return grid;
}

CaseFormat detect_case_format(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".m") return CaseFormat::Matpower;
  return CaseFormat::NativeJson;
}

GridCase parse_case(const std::filesystem::path& path, CaseFormat format) {
  const std::string text = read_file(path);
  return format == CaseFormat::Matpower ? parse_matpower_case(text) : parse_native_case(text);
}

GridCase parse_case(const std::filesystem::path& path) {
  return parse_case(path, detect_case_format(path));
}

// ---------------------------------------------------------------------------
// susceptance assembly and Kron reduction

SusceptancePartition build_partition(const GridCase& grid) {
  const auto gen_ids = grid.generator_bus_ids();
  const auto load_ids = grid.load_bus_ids();
  const Eigen::Index ng = static_cast<Eigen::Index>(gen_ids.size());
  const Eigen::Index nl = static_cast<Eigen::Index>(load_ids.size());
  std::unordered_map<int, Eigen::Index> pos;
  for (Eigen::Index k = 0; k < ng; ++k) pos[gen_ids[k]] = k;
  for (Eigen::Index k = 0; k < nl; ++k) pos[load_ids[k]] = ng + k;

  SusceptancePartition p;
  p.bus = Eigen::MatrixXd::Zero(ng + nl, ng + nl);
  for (const auto& br : grid.branches) {
    const auto i = pos.at(br.from);
    const auto j = pos.at(br.to);
    p.bus(i, i) += br.susceptance;
    p.bus(j, j) += br.susceptance;
    p.bus(i, j) -= br.susceptance;
    p.bus(j, i) -= br.susceptance;
  }
  p.gg = p.bus.topLeftCorner(ng, ng);
  p.gl = p.bus.topRightCorner(ng, nl);
  p.lg = p.bus.bottomLeftCorner(nl, ng);
  p.ll = p.bus.bottomRightCorner(nl, nl);

  if ((p.lg - p.gl.transpose()).cwiseAbs().maxCoeff() != 0.0)
    throw NumericalError("B^LG is not the transpose of B^GL");

  Eigen::FullPivLU<Eigen::MatrixXd> lu(p.ll);
  if (!lu.isInvertible())
    throw NumericalError("B^LL is singular (islanded load buses or degenerate network)");
  return p;
}

KronReduction kron_reduce(const SusceptancePartition& p, const KronOptions& options) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.ll, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double lo = ev.cwiseAbs().minCoeff();
  const double hi = ev.cwiseAbs().maxCoeff();
  KronReduction out;
  out.ll_condition = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(out.ll_condition <= options.max_condition))
    throw NumericalError("B^LL condition number " + std::to_string(out.ll_condition) +
                         " exceeds cap " + std::to_string(options.max_condition));

  // B^LL is symmetric, so B^M = (B^LL^-1 B^LG)^T.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(p.ll);
  out.bm = lu.solve(p.lg).transpose();
  out.gg_eff = p.gg - out.bm * p.lg;

  const double asym = (out.gg_eff - out.gg_eff.transpose()).norm();
  const double scale = std::max(out.gg_eff.norm(), 1.0);
  if (asym > options.symmetry_tol * scale)
    throw NumericalError("Kron-reduced matrix is not symmetric (relative asymmetry " +
                         std::to_string(asym / scale) + ")");
  out.gg_eff = (0.5 * (out.gg_eff + out.gg_eff.transpose())).eval();
  return out;
}

}  // namespace laa
