#include "wtmp/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wtmp/version.hpp"

namespace wtmp {

namespace {

using njson = nlohmann::json;

void require_stream(const std::ios& s, const std::string& path,
                    const char* what) {
  if (!s.good())
    throw io_error(std::string(what) + " failed for '" + path + "'");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Binary channel dumps
// ---------------------------------------------------------------------------

void write_channel_dump(const std::string& path,
                        const std::vector<ChannelSnapshot>& snaps) {
  if (snaps.empty())
    throw config_error("write_channel_dump: no snapshots to write");
  const Eigen::Index n_t = snaps.front().h.rows();
  const Eigen::Index n_f = snaps.front().h.cols();
  if (n_t < 1 || n_f < 1)
    throw config_error("write_channel_dump: empty channel matrix");
  for (const auto& s : snaps)
    if (s.h.rows() != n_t || s.h.cols() != n_f)
      throw config_error("write_channel_dump: ragged snapshot shapes");

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require_stream(f, path, "open for write");
  f.write(kChannelMagic, sizeof kChannelMagic);
  const uint64_t dims[3] = {uint64_t(snaps.size()), uint64_t(n_t),
                            uint64_t(n_f)};
  f.write(reinterpret_cast<const char*>(dims), sizeof dims);
  std::vector<double> row(2 * std::size_t(n_t));
  for (const auto& s : snaps) {
    f.write(reinterpret_cast<const char*>(&s.t), sizeof s.t);
    for (Eigen::Index c = 0; c < n_f; ++c) {
      for (Eigen::Index r = 0; r < n_t; ++r) {
        row[2 * std::size_t(r)] = s.h(r, c).real();
        row[2 * std::size_t(r) + 1] = s.h(r, c).imag();
      }
      f.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size() * sizeof(double)));
    }
  }
  f.flush();
  require_stream(f, path, "write");
}

std::vector<ChannelSnapshot> read_channel_dump(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f.good()) throw io_error("cannot open channel dump '" + path + "'");

  char magic[sizeof kChannelMagic];
  f.read(magic, sizeof magic);
  if (!f.good() || std::memcmp(magic, kChannelMagic, sizeof magic) != 0)
    throw io_error("'" + path + "' is not a channel dump (bad magic)");

  uint64_t dims[3];
  f.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!f.good()) throw io_error("truncated channel dump header in '" + path + "'");
  const uint64_t n_snaps = dims[0], n_t = dims[1], n_f = dims[2];
  if (n_snaps < 1 || n_snaps > (1u << 20) || n_t < 1 || n_t > (1u << 24) ||
      n_f < 1 || n_f > (1u << 20))
    throw io_error("implausible channel dump dimensions in '" + path + "'");

  std::vector<ChannelSnapshot> out(n_snaps);
  std::vector<double> row(2 * std::size_t(n_t));
  for (auto& s : out) {
    f.read(reinterpret_cast<char*>(&s.t), sizeof s.t);
    s.h.resize(Eigen::Index(n_t), Eigen::Index(n_f));
    for (uint64_t c = 0; c < n_f; ++c) {
      f.read(reinterpret_cast<char*>(row.data()),
             std::streamsize(row.size() * sizeof(double)));
      for (uint64_t r = 0; r < n_t; ++r)
        s.h(Eigen::Index(r), Eigen::Index(c)) =
            cxd(row[2 * std::size_t(r)], row[2 * std::size_t(r) + 1]);
    }
    if (!f.good()) throw io_error("truncated channel dump payload in '" + path + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV tables
// ---------------------------------------------------------------------------

void write_results_csv(const std::string& path,
                       const std::vector<ExperimentResult>& results) {
  std::ofstream f(path, std::ios::trunc);
  require_stream(f, path, "open for write");
  f << "series,metric,axis_name,axis,mean,stderr,n\n";
  for (const auto& r : results) {
    if (r.axis.size() != r.mean.size() || r.axis.size() != r.stderr_of_mean.size())
      throw config_error("write_results_csv: result '" + r.series +
                         "' has inconsistent axis/summary sizes");
    for (Eigen::Index i = 0; i < r.axis.size(); ++i)
      f << r.series << ',' << r.metric << ',' << r.axis_name << ','
        << fmt_double(r.axis(i)) << ',' << fmt_double(r.mean(i)) << ','
        << fmt_double(r.stderr_of_mean(i)) << ',' << r.sample_count() << '\n';
  }
  f.flush();
  require_stream(f, path, "write");
}

void write_kv_csv(const std::string& path,
                  const std::vector<std::pair<std::string, double>>& rows) {
  std::ofstream f(path, std::ios::trunc);
  require_stream(f, path, "open for write");
  f << "quantity,value\n";
  for (const auto& [k, v] : rows) f << k << ',' << fmt_double(v) << '\n';
  f.flush();
  require_stream(f, path, "write");
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

namespace {

const char* variant_name(PencilVariant v) {
  return v == PencilVariant::difference ? "difference" : "standard";
}

PencilVariant variant_from_name(const std::string& s) {
  if (s == "standard") return PencilVariant::standard;
  if (s == "difference") return PencilVariant::difference;
  throw config_error("config: unknown pencil variant '" + s + "'");
}

const char* wavefront_name(WavefrontMode m) {
  switch (m) {
    case WavefrontMode::planar: return "planar";
    case WavefrontMode::exact: return "exact";
    default: return "fresnel";
  }
}

WavefrontMode wavefront_from_name(const std::string& s) {
  if (s == "planar") return WavefrontMode::planar;
  if (s == "fresnel") return WavefrontMode::fresnel;
  if (s == "exact") return WavefrontMode::exact;
  throw config_error("config: unknown wavefront mode '" + s + "'");
}

/// Reject keys outside the section's schema.
void check_keys(const njson& obj, const std::string& section,
                const std::set<std::string>& allowed) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw config_error("config: unknown key '" + item.key() + "' in " +
                         section);
}

double get_num(const njson& obj, const char* key, const std::string& section) {
  const auto& v = obj.at(key);
  if (!v.is_number())
    throw config_error("config: " + section + "." + key + " must be a number");
  return v.get<double>();
}

int get_int(const njson& obj, const char* key, const std::string& section) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer())
    throw config_error("config: " + section + "." + key +
                       " must be an integer");
  return v.get<int>();
}

std::string get_str(const njson& obj, const char* key,
                    const std::string& section) {
  const auto& v = obj.at(key);
  if (!v.is_string())
    throw config_error("config: " + section + "." + key + " must be a string");
  return v.get<std::string>();
}

void parse_scenario(const njson& s, RunConfig& cfg) {
  check_keys(s, "scenario",
             {"f_c_hz", "delta_f_hz", "n_f", "t_slot_s", "n_s",
              "f1_offset_hz", "wavefront"});
  auto& sc = cfg.exp.scenario;
  const double old_fc = sc.f_c_hz;
  if (s.contains("f_c_hz")) sc.f_c_hz = get_num(s, "f_c_hz", "scenario");
  if (s.contains("delta_f_hz"))
    sc.delta_f_hz = get_num(s, "delta_f_hz", "scenario");
  if (s.contains("n_f")) sc.n_f = get_int(s, "n_f", "scenario");
  if (s.contains("t_slot_s")) sc.t_slot_s = get_num(s, "t_slot_s", "scenario");
  if (s.contains("n_s")) sc.n_s = get_int(s, "n_s", "scenario");
  if (s.contains("f1_offset_hz"))
    sc.f1_offset_hz = get_num(s, "f1_offset_hz", "scenario");
  if (s.contains("wavefront"))
    cfg.exp.mode = wavefront_from_name(get_str(s, "wavefront", "scenario"));
  // A carrier change moves the half-wavelength pitch; keep the array at
  // half-wavelength unless the file pins the pitches itself (the geometry
  // section is applied after this and wins).
  if (sc.f_c_hz != old_fc && sc.f_c_hz > 0) {
    cfg.exp.geom.d_h = 0.5 * sc.wavelength();
    cfg.exp.geom.d_v = 0.5 * sc.wavelength();
  }
}

void parse_geometry(const njson& g, RunConfig& cfg) {
  check_keys(g, "geometry", {"n_h", "n_v", "d_h", "d_v"});
  auto& geom = cfg.exp.geom;
  if (g.contains("n_h")) geom.n_h = get_int(g, "n_h", "geometry");
  if (g.contains("n_v")) geom.n_v = get_int(g, "n_v", "geometry");
  if (g.contains("d_h")) geom.d_h = get_num(g, "d_h", "geometry");
  if (g.contains("d_v")) geom.d_v = get_num(g, "d_v", "geometry");
}

void parse_generator(const njson& g, RunConfig& cfg) {
  check_keys(g, "generator",
             {"n_clusters", "rays_per_cluster", "r_min", "r_max", "speed_mps",
              "n_ports", "spreads"});
  auto& gen = cfg.exp.gen;
  if (g.contains("n_clusters"))
    gen.n_clusters = get_int(g, "n_clusters", "generator");
  if (g.contains("rays_per_cluster"))
    gen.rays_per_cluster = get_int(g, "rays_per_cluster", "generator");
  if (g.contains("r_min")) gen.r_min = get_num(g, "r_min", "generator");
  if (g.contains("r_max")) gen.r_max = get_num(g, "r_max", "generator");
  if (g.contains("speed_mps"))
    gen.speed_mps = get_num(g, "speed_mps", "generator");
  if (g.contains("n_ports")) gen.n_ports = get_int(g, "n_ports", "generator");
  if (g.contains("spreads")) {
    const auto& sp = g.at("spreads");
    check_keys(sp, "generator.spreads", {"eod", "aod", "eoa", "aoa"});
    if (sp.contains("eod"))
      gen.spreads.eod = get_num(sp, "eod", "generator.spreads");
    if (sp.contains("aod"))
      gen.spreads.aod = get_num(sp, "aod", "generator.spreads");
    if (sp.contains("eoa"))
      gen.spreads.eoa = get_num(sp, "eoa", "generator.spreads");
    if (sp.contains("aoa"))
      gen.spreads.aoa = get_num(sp, "aoa", "generator.spreads");
  }
}

void parse_paths(const njson& arr, RunConfig& cfg) {
  if (!arr.is_array())
    throw config_error("config: paths must be an array of path objects");
  cfg.paths.clear();
  for (const auto& p : arr) {
    check_keys(p, "paths[]", {"theta", "phi", "r", "tau0", "omega_hz", "gains"});
    PathParams path;
    path.theta = get_num(p, "theta", "paths[]");
    path.phi = p.contains("phi") ? get_num(p, "phi", "paths[]") : 0.0;
    path.r = get_num(p, "r", "paths[]");
    path.tau0 = p.contains("tau0") ? get_num(p, "tau0", "paths[]")
                                   : path.r / kSpeedOfLight;
    path.omega_hz =
        p.contains("omega_hz") ? get_num(p, "omega_hz", "paths[]") : 0.0;
    const auto& gains = p.at("gains");
    if (!gains.is_array() || gains.empty())
      throw config_error("config: paths[].gains must be a non-empty array");
    for (const auto& g : gains) {
      if (!g.is_array() || g.size() != 2 || !g[0].is_number() ||
          !g[1].is_number())
        throw config_error(
            "config: paths[].gains entries must be [re, im] pairs");
      path.gains.emplace_back(g[0].get<double>(), g[1].get<double>());
    }
    cfg.paths.push_back(std::move(path));
  }
}

void parse_algorithm(const njson& a, RunConfig& cfg) {
  check_keys(a, "algorithm",
             {"gamma1", "variant", "pencil_size", "omp_max_paths",
              "omp_residual_tol", "grid_thetas", "grid_ranges"});
  auto& e = cfg.exp;
  if (a.contains("gamma1")) e.gamma1 = get_num(a, "gamma1", "algorithm");
  if (a.contains("variant"))
    e.variant = variant_from_name(get_str(a, "variant", "algorithm"));
  if (a.contains("pencil_size"))
    e.pencil_size = get_int(a, "pencil_size", "algorithm");
  if (a.contains("omp_max_paths"))
    e.omp_max_paths = get_int(a, "omp_max_paths", "algorithm");
  if (a.contains("omp_residual_tol"))
    e.omp_residual_tol = get_num(a, "omp_residual_tol", "algorithm");
  if (a.contains("grid_thetas"))
    e.grid_thetas = get_int(a, "grid_thetas", "algorithm");
  if (a.contains("grid_ranges"))
    e.grid_ranges = get_int(a, "grid_ranges", "algorithm");
}

void parse_experiment(const njson& x, RunConfig& cfg) {
  check_keys(x, "experiment",
             {"n_ues", "csi_delay_slots", "snr_grid_db", "obs_snr_db",
              "n_seeds", "seed0", "n_predict", "baselines"});
  auto& e = cfg.exp;
  if (x.contains("n_ues")) e.n_ues = get_int(x, "n_ues", "experiment");
  if (x.contains("csi_delay_slots"))
    e.csi_delay_slots = get_int(x, "csi_delay_slots", "experiment");
  if (x.contains("snr_grid_db")) {
    const auto& grid = x.at("snr_grid_db");
    if (!grid.is_array() || grid.empty())
      throw config_error(
          "config: experiment.snr_grid_db must be a non-empty array");
    e.snr_grid_db.resize(Eigen::Index(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid[i].is_number())
        throw config_error(
            "config: experiment.snr_grid_db entries must be numbers");
      e.snr_grid_db(Eigen::Index(i)) = grid[i].get<double>();
    }
  }
  if (x.contains("obs_snr_db")) {
    const auto& v = x.at("obs_snr_db");
    if (v.is_string() && v.get<std::string>() == "inf")
      e.obs_snr_db = std::numeric_limits<double>::infinity();
    else if (v.is_number())
      e.obs_snr_db = v.get<double>();
    else
      throw config_error(
          "config: experiment.obs_snr_db must be a number or \"inf\"");
  }
  if (x.contains("n_seeds")) e.n_seeds = get_int(x, "n_seeds", "experiment");
  if (x.contains("seed0")) {
    const auto& v = x.at("seed0");
    if (!v.is_number_unsigned())
      throw config_error("config: experiment.seed0 must be a non-negative integer");
    e.seed0 = v.get<uint64_t>();
  }
  if (x.contains("n_predict"))
    cfg.n_predict = get_int(x, "n_predict", "experiment");
  if (x.contains("baselines")) {
    const auto& arr = x.at("baselines");
    if (!arr.is_array())
      throw config_error("config: experiment.baselines must be an array");
    cfg.baselines.clear();
    for (const auto& b : arr) {
      if (!b.is_string())
        throw config_error("config: experiment.baselines entries must be strings");
      cfg.baselines.push_back(baseline_from_name(b.get<std::string>()));
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  exp.validate();
  if (n_predict < -1)
    throw config_error("config: experiment.n_predict must be >= 0 (or omitted)");
  if (!paths.empty()) {
    const std::size_t ports = paths.front().gains.size();
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto& p = paths[i];
      if (p.r <= 0.0)
        throw config_error("config: paths[" + std::to_string(i) +
                           "].r must be positive");
      if (p.tau0 < 0.0)
        throw config_error("config: paths[" + std::to_string(i) +
                           "].tau0 must be non-negative");
      if (p.gains.empty() || p.gains.size() != ports)
        throw config_error(
            "config: every path needs the same non-zero number of gains");
    }
  }
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg;  // desk-scale defaults live on ExperimentConfig itself
  if (name == "desk") return cfg;
  if (name == "paper") {
    const double half_lambda = 0.5 * cfg.exp.scenario.wavelength();
    cfg.exp.geom = ArrayGeometry{256, 2, half_lambda, half_lambda};
    cfg.exp.n_ues = 16;
    cfg.exp.gen.n_clusters = 30;
    cfg.exp.gen.rays_per_cluster = 6;  // 180 paths
    return cfg;
  }
  throw config_error("unknown preset '" + name + "' (expected desk or paper)");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream f(path);
  if (!f.good()) throw io_error("cannot open config file '" + path + "'");
  njson root;
  try {
    root = njson::parse(f);
  } catch (const njson::parse_error& e) {
    throw config_error("config: '" + path + "' is not valid JSON: " + e.what());
  }
  if (!root.is_object())
    throw config_error("config: top level must be an object");
  check_keys(root, "top level",
             {"schema_version", "scenario", "geometry", "generator", "paths",
              "algorithm", "experiment"});
  if (!root.contains("schema_version") ||
      !root.at("schema_version").is_number_integer() ||
      root.at("schema_version").get<int>() != 1)
    throw config_error("config: schema_version must be present and equal 1");

  // Scenario first so a carrier change can re-derive pitches before an
  // explicit geometry section overrides them.
  if (root.contains("scenario")) parse_scenario(root.at("scenario"), cfg);
  if (root.contains("geometry")) parse_geometry(root.at("geometry"), cfg);
  if (root.contains("generator")) parse_generator(root.at("generator"), cfg);
  if (root.contains("paths")) parse_paths(root.at("paths"), cfg);
  if (root.contains("algorithm")) parse_algorithm(root.at("algorithm"), cfg);
  if (root.contains("experiment")) parse_experiment(root.at("experiment"), cfg);
  cfg.validate();
}

std::string canonical_config_json(const RunConfig& cfg) {
  const auto& e = cfg.exp;
  njson root;
  root["schema_version"] = 1;
  root["scenario"] = {{"f_c_hz", e.scenario.f_c_hz},
                      {"delta_f_hz", e.scenario.delta_f_hz},
                      {"n_f", e.scenario.n_f},
                      {"t_slot_s", e.scenario.t_slot_s},
                      {"n_s", e.scenario.n_s},
                      {"f1_hz", e.scenario.f1_hz()},
                      {"wavefront", wavefront_name(e.mode)}};
  root["geometry"] = {{"n_h", e.geom.n_h},
                      {"n_v", e.geom.n_v},
                      {"d_h", e.geom.d_h},
                      {"d_v", e.geom.d_v}};
  root["generator"] = {{"n_clusters", e.gen.n_clusters},
                       {"rays_per_cluster", e.gen.rays_per_cluster},
                       {"r_min", e.gen.r_min},
                       {"r_max", e.gen.r_max},
                       {"speed_mps", e.gen.speed_mps},
                       {"n_ports", e.gen.n_ports},
                       {"spreads",
                        {{"eod", e.gen.spreads.eod},
                         {"aod", e.gen.spreads.aod},
                         {"eoa", e.gen.spreads.eoa},
                         {"aoa", e.gen.spreads.aoa}}}};
  njson paths = njson::array();
  for (const auto& p : cfg.paths) {
    njson gains = njson::array();
    for (const auto& g : p.gains) gains.push_back({g.real(), g.imag()});
    paths.push_back({{"theta", p.theta},
                     {"phi", p.phi},
                     {"r", p.r},
                     {"tau0", p.tau0},
                     {"omega_hz", p.omega_hz},
                     {"gains", gains}});
  }
  root["paths"] = paths;
  root["algorithm"] = {{"gamma1", e.gamma1},
                       {"variant", variant_name(e.variant)},
                       {"pencil_size", e.pencil_size},
                       {"omp_max_paths", e.omp_max_paths},
                       {"omp_residual_tol", e.omp_residual_tol},
                       {"grid_thetas", e.grid_thetas},
                       {"grid_ranges", e.grid_ranges}};
  njson baselines = njson::array();
  for (const BaselineKind b : cfg.baselines)
    baselines.push_back(baseline_name(b));
  root["experiment"] = {
      {"n_ues", e.n_ues},
      {"csi_delay_slots", e.csi_delay_slots},
      {"snr_grid_db",
       std::vector<double>(e.snr_grid_db.begin(), e.snr_grid_db.end())},
      {"obs_snr_db", std::isfinite(e.obs_snr_db) ? njson(e.obs_snr_db)
                                                 : njson("inf")},
      {"n_seeds", e.n_seeds},
      {"seed0", e.seed0},
      {"n_predict", cfg.predict_horizon()},
      {"baselines", baselines}};
  return root.dump();
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= uint64_t(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_manifest(const std::string& path, const RunManifest& m) {
  const std::string config = canonical_config_json(m.config);
  njson root;
  root["schema_version"] = 1;
  root["command"] = m.command;
  root["git_revision"] = kGitRevision;
  root["threads"] = thread_budget();
  root["seed0"] = m.config.exp.seed0;
  root["config_hash"] = hex64(fnv1a64(config));
  root["config"] = njson::parse(config);
  root["outputs"] = m.outputs;
  root["details"] = m.details;

  std::ofstream f(path, std::ios::trunc);
  require_stream(f, path, "open for write");
  f << root.dump(2) << '\n';
  f.flush();
  require_stream(f, path, "write");
}

}  // namespace wtmp
