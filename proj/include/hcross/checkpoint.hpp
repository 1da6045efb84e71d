#pragma once
// Binary state checkpoints: 8-byte magic, u32 format version, u64 header
// length, a JSON header, then the coefficients as interleaved (re, im) doubles
// in native byte order. Round trips are bit exact.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "hcross/lattice.hpp"
#include "hcross/potentials.hpp"
#include "hcross/spin.hpp"

namespace hcross {

inline constexpr char checkpoint_magic[8] = {'H', 'C', 'R', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t checkpoint_version = 1;

inline nlohmann::json potential_to_json(const PotentialSpec& p) {
  nlohmann::json j;
  j["epsilon"] = p.epsilon;
  j["pair_interaction"] = p.pair_interaction;
  j["nuclei"] = nlohmann::json::array();
  for (const auto& nu : p.nuclei) {
    nlohmann::json e{{"Z", nu.Z}, {"trajectory", nu.path.coeffs}, {"t_begin", nu.path.t_begin}};
    if (std::isfinite(nu.path.t_end)) e["t_end"] = nu.path.t_end;
    j["nuclei"].push_back(e);
  }
  return j;
}

inline PotentialSpec potential_from_json(const nlohmann::json& j) {
  PotentialSpec p;
  p.epsilon = j.value("epsilon", 0.1);
  p.pair_interaction = j.value("pair_interaction", true);
  if (j.contains("nuclei"))
    for (const auto& e : j.at("nuclei")) {
      Nucleus nu;
      nu.Z = e.at("Z").get<double>();
      if (e.contains("position")) {
        nu.path = NucleusPath::fixed(e.at("position").get<std::vector<double>>());
      } else {
        nu.path.coeffs = e.at("trajectory").get<std::vector<std::vector<double>>>();
      }
      nu.path.t_begin = e.value("t_begin", 0.0);
      if (e.contains("t_end")) nu.path.t_end = e.at("t_end").get<double>();
      p.nuclei.push_back(std::move(nu));
    }
  return p;
}

struct Checkpoint {
  WaveState state;
  nlohmann::json header;  ///< grid, rep, t, plus caller metadata (partition, potential, scheme, step)
};

inline void save_checkpoint(const std::string& path, const WaveState& u, nlohmann::json meta = nlohmann::json::object()) {
  const GridSpec& g = *u.grid;
  meta["grid"] = {{"d", g.d}, {"N", g.N}, {"L", g.L}, {"n", g.n}};
  meta["rep"] = to_string(u.rep);
  meta["t"] = u.t;
  meta["coefficients"] = u.size();
  const std::string head = meta.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os.write(checkpoint_magic, sizeof checkpoint_magic);
  const std::uint32_t ver = checkpoint_version;
  const std::uint64_t len = head.size();
  os.write(reinterpret_cast<const char*>(&ver), sizeof ver);
  os.write(reinterpret_cast<const char*>(&len), sizeof len);
  os.write(head.data(), static_cast<std::streamsize>(len));
  os.write(reinterpret_cast<const char*>(u.coeffs.data()), static_cast<std::streamsize>(u.size() * sizeof(cplx)));
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  std::uint32_t ver = 0;
  std::uint64_t len = 0;
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, checkpoint_magic, sizeof magic) != 0) throw std::runtime_error("not a checkpoint file");
  is.read(reinterpret_cast<char*>(&ver), sizeof ver);
  if (ver != checkpoint_version)
    throw std::runtime_error("checkpoint format version " + std::to_string(ver) + " is not supported");
  is.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!is || len > (std::uint64_t{1} << 30)) throw std::runtime_error("corrupt checkpoint header");
  std::string head(len, '\0');
  is.read(head.data(), static_cast<std::streamsize>(len));
  Checkpoint c;
  try {
    c.header = nlohmann::json::parse(head);
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error("corrupt checkpoint header");
  }
  const auto& gj = c.header.at("grid");
  auto g = make_grid(gj.at("d").get<int>(), gj.at("N").get<int>(), gj.at("L").get<double>(), gj.at("n").get<int>());
  const Rep rep = c.header.at("rep").get<std::string>() == "space" ? Rep::space : Rep::frequency;
  c.state = WaveState(g, rep, c.header.at("t").get<double>());
  if (c.header.at("coefficients").get<std::size_t>() != g->modes) throw std::runtime_error("corrupt checkpoint size");
  is.read(reinterpret_cast<char*>(c.state.coeffs.data()), static_cast<std::streamsize>(g->modes * sizeof(cplx)));
  if (!is) throw std::runtime_error("truncated checkpoint");
  is.peek();
  if (!is.eof()) throw std::runtime_error("trailing bytes in checkpoint");
  return c;
}

}  // namespace hcross
