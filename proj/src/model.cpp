#include "fluctlab/model.hpp"

#include <sstream>

namespace fluctlab {

double total_energy(const VelocityField& p) {
  double e = 0.0;
  for (double v : p.p) e += v * v;
  return 0.5 * e;
}

double current(const VelocityField& p, int bond, const Coupling& a) {
  const int n = p.size();
  const int n_bonds = p.topology == Topology::periodic ? n : n - 1;
  if (bond < 0 || bond >= n_bonds) throw std::out_of_range("current: invalid bond index");
  const double px = p.p[static_cast<std::size_t>(bond)];
  const double ps = p.p[static_cast<std::size_t>((bond + 1) % n)];
  return current_pair(px, ps, a);
}

VelocityField sample_equilibrium(const ModelParams& params, Rng& rng) {
  params.validate();
  VelocityField f;
  f.topology = params.topology;
  f.p.resize(static_cast<std::size_t>(params.n_sites));
  for (auto& v : f.p) v = params.y * rng.normal();
  return f;
}

std::string Coupling::format(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Coupling Coupling::parse(const std::string& text) {
  const auto fail = [&]() -> Coupling {
    throw std::invalid_argument("coupling: cannot parse '" + text + "'");
  };
  const auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      const auto pos = s.find(':', start);
      parts.push_back(s.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return parts;
  };
  const auto parts = split(text);
  try {
    if (parts[0] == "constant" && parts.size() == 2) return Coupling::constant(std::stod(parts[1]));
    if (parts[0] == "gaussian-bump" && parts.size() == 3)
      return Coupling::gaussian_bump(std::stod(parts[1]), std::stod(parts[2]));
  } catch (const std::invalid_argument&) {
    return fail();
  }
  return fail();
}

}  // namespace fluctlab
