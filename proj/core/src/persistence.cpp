#include "warpflow/persistence.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "warpflow/errors.hpp"

namespace warpflow {

using nlohmann::json;

namespace {

json spec_to_json(const WarpedProductSpec& spec) {
  json fibers = json::array();
  for (const auto& f : spec.fibers) fibers.push_back({{"dim", f.dim}, {"mu", f.mu}, {"offset", f.offset}});
  return {{"base_dim", spec.base_dim}, {"fibers", fibers}};
}

WarpedProductSpec spec_from_json(const json& j) {
  WarpedProductSpec spec;
  spec.base_dim = j.at("base_dim").get<int>();
  for (const auto& f : j.at("fibers"))
    spec.fibers.push_back(FiberSpec{f.at("dim").get<int>(), f.at("mu").get<double>(), f.at("offset").get<double>()});
  return spec;
}

constexpr char kMagic[8] = {'W', 'F', 'T', 'R', 'J', '0', '0', '1'};

void put_u64(std::ofstream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
void put_f64(std::ofstream& out, double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
void put_vec(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
}

std::uint64_t get_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double get_f64(std::ifstream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::vector<double> get_vec(std::ifstream& in, std::size_t n) {
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const WarpedProductSpec& spec, const FlowState& s) {
  json j;
  j["format"] = "warpflow-checkpoint";
  j["version"] = kCheckpointVersion;
  j["spec"] = spec_to_json(spec);
  j["t"] = s.t;
  j["x"] = s.x;
  j["phi"] = s.phi;
  j["v"] = s.v;
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write " + path);
  out << j.dump() << '\n';
}

void load_checkpoint(const std::string& path, WarpedProductSpec& spec, FlowState& s) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::io, path + ": " + e.what());
  }
  if (j.value("format", "") != "warpflow-checkpoint") fail(ErrorCode::schema, path + " is not a checkpoint");
  if (j.value("version", 0) != kCheckpointVersion)
    fail(ErrorCode::schema, path + ": unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  try {
    spec = spec_from_json(j.at("spec"));
    s.t = j.at("t").get<double>();
    s.x = j.at("x").get<std::vector<double>>();
    s.phi = j.at("phi").get<std::vector<double>>();
    s.v = j.at("v").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, path + ": " + e.what());
  }
  validate_state(spec, s);
}

void save_trajectory(const std::string& path, const Trajectory& tr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path);
  out.write(kMagic, sizeof kMagic);
  const std::string spec = spec_to_json(tr.spec).dump();
  put_u64(out, spec.size());
  out.write(spec.data(), std::streamsize(spec.size()));
  const std::size_t n = tr.frames.empty() ? tr.radius.size() : tr.frames.front().size();
  const std::size_t A = tr.spec.num_fibers();
  put_u64(out, n);
  put_u64(out, A);
  put_u64(out, tr.frames.size());
  put_u64(out, tr.steps);
  put_f64(out, tr.min_dt);
  put_vec(out, tr.radius);
  for (const auto& f : tr.frames) {
    put_f64(out, f.t);
    put_vec(out, f.x);
    put_vec(out, f.phi);
    for (const auto& va : f.v) put_vec(out, va);
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path);
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) fail(ErrorCode::schema, path + " is not a WFTRJ001 trajectory");
  Trajectory tr;
  const std::uint64_t len = get_u64(in);
  if (len > (1u << 20)) fail(ErrorCode::schema, path + ": corrupt header");
  std::string spec(len, '\0');
  in.read(spec.data(), std::streamsize(len));
  try {
    tr.spec = spec_from_json(json::parse(spec));
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, path + ": " + e.what());
  }
  const std::size_t n = get_u64(in), A = get_u64(in), F = get_u64(in);
  if (A != tr.spec.num_fibers()) fail(ErrorCode::schema, path + ": fiber count mismatch");
  tr.steps = get_u64(in);
  tr.min_dt = get_f64(in);
  tr.radius = get_vec(in, n);
  tr.frames.resize(F);
  for (auto& f : tr.frames) {
    f.t = get_f64(in);
    f.x = get_vec(in, n);
    f.phi = get_vec(in, n);
    f.v.resize(A);
    for (auto& va : f.v) va = get_vec(in, n);
  }
  if (!in) fail(ErrorCode::io, path + " is truncated");
  return tr;
}

}  // namespace warpflow
