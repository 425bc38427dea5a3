#include "pmrd/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pmrd/scenario.hpp"

namespace pmrd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << data;
}

}  // namespace

void write_snapshot_csv(const std::string& path, const Grid& g, const Snapshot& snap) {
  if (int(snap.u.size()) != g.size())
    throw std::invalid_argument("write_snapshot_csv: field size mismatch");
  std::ostringstream out;
  const bool has_v = !snap.v.empty();
  out << "t,x" << (g.dim == 2 ? ",y" : "") << ",u" << (has_v ? ",v" : "") << "\n";
  for (int k = 0; k < g.size(); ++k) {
    auto p = g.point(k);
    out << fmt17(snap.t) << ',' << fmt17(p[0]);
    if (g.dim == 2) out << ',' << fmt17(p[1]);
    out << ',' << fmt17(snap.u[k]);
    if (has_v) out << ',' << fmt17(snap.v[k]);
    out << "\n";
  }
  spit(path, out.str());
}

Snapshot read_snapshot_csv(const std::string& path, const Grid& g) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read snapshot: " + path);
  std::string header;
  std::getline(in, header);
  const bool has_y = header.find(",y,") != std::string::npos;
  const bool has_v = header.size() >= 2 && header.substr(header.size() - 2) == ",v";
  Snapshot snap;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
    std::size_t expect = 3 + (has_y ? 1 : 0) + (has_v ? 1 : 0);  // t, x[, y], u[, v]
    if (cells.size() != expect) throw std::runtime_error("malformed snapshot row in " + path);
    if (first) {
      snap.t = cells[0];
      first = false;
    }
    snap.u.push_back(cells[has_y ? 3 : 2]);
    if (has_v) snap.v.push_back(cells.back());
  }
  if (int(snap.u.size()) != g.size())
    throw std::runtime_error("snapshot node count mismatch in " + path);
  return snap;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t hash_file(const std::string& path) { return fnv1a(slurp(path)); }

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_run(const std::string& dir, const json& config, const Trajectory& traj, const Grid& g) {
  fs::create_directories(fs::path(dir) / "snapshots");
  const std::string config_str = config.dump(2) + "\n";
  spit((fs::path(dir) / "config.json").string(), config_str);

  std::ostringstream steps;
  for (const StepStats& s : traj.steps) {
    json j{{"t", s.t},
           {"newton_iters", s.newton_iters},
           {"residual", s.residual},
           {"sup_u", s.sup_u},
           {"energy", s.energy},
           {"dissipation", s.dissipation},
           {"reaction_power", s.reaction_power}};
    steps << j.dump() << "\n";
  }
  spit((fs::path(dir) / "steps.jsonl").string(), steps.str());

  std::ostringstream index;
  index << "index,t,file\n";
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%04zu.csv", s);
    Snapshot snap;
    snap.t = traj.times[s];
    snap.u = traj.states[s].values;
    if (traj.has_v()) snap.v = traj.vstates[s].values;
    write_snapshot_csv((fs::path(dir) / "snapshots" / name).string(), g, snap);
    index << s << ',' << fmt17(traj.times[s]) << ",snapshots/" << name << "\n";
  }
  spit((fs::path(dir) / "snapshots" / "index.csv").string(), index.str());

  json manifest;
  manifest["config_hash"] = hash_hex(fnv1a(config_str));
  manifest["failed"] = traj.failed;
  if (traj.failed) manifest["failure"] = traj.failure;
  json files = json::object();
  std::vector<std::string> rels{"config.json", "steps.jsonl", "snapshots/index.csv"};
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    char name[40];
    std::snprintf(name, sizeof name, "snapshots/snap_%04zu.csv", s);
    rels.push_back(name);
  }
  for (const std::string& rel : rels)
    files[rel] = hash_hex(hash_file((fs::path(dir) / rel).string()));
  manifest["files"] = files;
  spit((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

std::string verify_run(const std::string& dir) {
  const std::string mpath = (fs::path(dir) / "manifest.json").string();
  if (!fs::exists(mpath)) return "missing manifest.json";
  json manifest = json::parse(slurp(mpath));
  for (auto& [rel, expected] : manifest.at("files").items()) {
    const std::string full = (fs::path(dir) / rel).string();
    if (!fs::exists(full)) return "missing file: " + rel;
    if (hash_hex(hash_file(full)) != expected.get<std::string>())
      return "checksum mismatch: " + rel;
  }
  return "";
}

LoadedRun load_run(const std::string& dir) {
  LoadedRun run;
  run.config = json::parse(slurp((fs::path(dir) / "config.json").string()));
  Scenario sc = parse_scenario(run.config);
  run.grid = sc.make_grid();
  const RangeTag tag = sc.coupled() ? RangeTag::nonneg : RangeTag::signed_open;

  // snapshots via the index
  std::ifstream idx((fs::path(dir) / "snapshots" / "index.csv").string());
  if (!idx) throw std::runtime_error("missing snapshots/index.csv in " + dir);
  std::string line;
  std::getline(idx, line);  // header
  while (std::getline(idx, line)) {
    if (line.empty()) continue;
    auto last = line.rfind(',');
    std::string rel = line.substr(last + 1);
    Snapshot snap = read_snapshot_csv((fs::path(dir) / rel).string(), run.grid);
    run.traj.times.push_back(snap.t);
    StateField f = StateField::zeros(run.grid, tag);
    f.values = snap.u;
    run.traj.states.push_back(std::move(f));
    if (!snap.v.empty()) {
      StateField v = StateField::zeros(run.grid, RangeTag::nonneg);
      v.values = snap.v;
      run.traj.vstates.push_back(std::move(v));
    }
  }
  run.traj.coupled = run.traj.has_v();

  std::ifstream steps((fs::path(dir) / "steps.jsonl").string());
  while (std::getline(steps, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    StepStats s;
    s.t = j.at("t");
    s.newton_iters = j.at("newton_iters");
    s.residual = j.at("residual");
    s.sup_u = j.at("sup_u");
    s.energy = j.at("energy");
    s.dissipation = j.at("dissipation");
    s.reaction_power = j.at("reaction_power");
    run.traj.steps.push_back(s);
  }
  json manifest = json::parse(slurp((fs::path(dir) / "manifest.json").string()));
  run.traj.failed = manifest.value("failed", false);
  run.traj.failure = manifest.value("failure", std::string());
  return run;
}

std::string run_fingerprint(const std::string& dir) {
  return hash_hex(hash_file((fs::path(dir) / "manifest.json").string()));
}

}  // namespace pmrd
