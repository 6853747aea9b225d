#include "bohm/io/presets.hpp"

#include <map>

#include "bohm/error.hpp"

namespace bohm::io {

namespace {

struct Preset {
  const char* summary;
  std::string text;
};

const std::map<std::string, Preset>& presets() {
  static const std::map<std::string, Preset> p{
      {"free-gaussian",
       {"free electron packet, closed-form startup, 2000 equilibrium trajectories", R"([scenario]
name = free-gaussian

[units]
mass = 1 me

[grid]
x_min = -60 nm
x_max = 80 nm
dx = 1 A

[state]
kind = gaussian
width = 5 nm
center = -20 nm
k = 5e8 1/m

[solver]
kind = tdse
duration = 200 fs

[ensemble]
size = 2000
seed = 1
)"}},
      {"rtd",
       {"GaAs double barrier (2 nm / 0.3 eV, 7 nm well), packet at the resonance, transmission scan", R"([scenario]
name = rtd

[units]
mass = 0.067 me

[grid]
x_min = -200 nm
x_max = 250 nm
dx = 1 A

[potential]
barrier = 15 nm, 17 nm, 0.3 eV
barrier = 24 nm, 26 nm, 0.3 eV

[state]
kind = gaussian
width = 20 nm
center = -60 nm
energy = 0.0554 eV

[solver]
kind = tdse
duration = 250 fs

[ensemble]
size = 1000
seed = 1

[scan]
emin = 1 meV
emax = 300 meV
de = 1 meV
)"}},
      {"rtd-scattering",
       {"stationary scattering state of the double barrier at its resonance, with trajectories", R"([scenario]
name = rtd-scattering

[units]
mass = 0.067 me

[grid]
x_min = -0.05 nm
x_max = 40.05 nm
dx = 1 A

[potential]
barrier = 15 nm, 17 nm, 0.3 eV
barrier = 24 nm, 26 nm, 0.3 eV

[solver]
kind = tise-scatter
energy = resonance
dt = 0.02 fs
duration = 60 fs
frame_every = 1

[ensemble]
size = 200
sampling = quantile

[outputs]
snapshot_every = 30

[scan]
emin = 30 meV
emax = 70 meV
de = 0.05 meV
)"}},
      {"double-packet",
       {"two packets approaching the double barrier from opposite sides", R"([scenario]
name = double-packet

[units]
mass = 0.067 me

[grid]
x_min = -150 nm
x_max = 190 nm
dx = 1 A

[potential]
barrier = 15 nm, 17 nm, 0.3 eV
barrier = 24 nm, 26 nm, 0.3 eV

[state]
kind = two-gaussian
width = 15 nm
center = -50 nm
energy = 0.0554 eV
width2 = 15 nm
center2 = 90 nm
k2 = -4e8 1/m
weight2 = 1

[solver]
kind = tdse
duration = 200 fs

[ensemble]
size = 1000
seed = 1
)"}},
      {"momentum-measurement",
       {"n = 4 box eigenstate released at t = 0 into a flat potential", R"([scenario]
name = momentum-measurement

[units]
mass = 1 me

[grid]
x_min = -520 nm
x_max = 530 nm
dx = 1 A

[state]
kind = eigenstate
index = 4
box = 0 nm, 10 nm

[solver]
kind = tdse
duration = 2400 fs

[ensemble]
size = 1000
sampling = quantile
)"}},
      {"sequential-measurement",
       {"packet split by a 2 nm / 0.1 eV barrier into transmitted and reflected parts", R"([scenario]
name = sequential-measurement

[units]
mass = 1 me

[grid]
x_min = -150 nm
x_max = 150 nm
dx = 1 A

[potential]
barrier = 0 nm, 2 nm, 0.1 eV

[state]
kind = gaussian
width = 6 nm
center = -40 nm
energy = 0.1 eV

[solver]
kind = tdse
duration = 400 fs

[ensemble]
size = 1000
seed = 1
)"}},
      {"two-particle-coulomb",
       {"two electrons with softened Coulomb repulsion at a 3 nm / 20 meV barrier, exact 2D", R"([scenario]
name = two-particle-coulomb

[units]
mass = 1 me

[grid]
x_min = -80 nm
x_max = 60 nm
dx = 0.35 nm

[potential]
barrier = 0 nm, 3 nm, 20 meV

[state]
kind = product
width = 8 nm
center = -50 nm
k = 1e9 1/m
width2 = 8 nm
center2 = -30 nm
k2 = 5e8 1/m

[interaction]
kind = coulomb
eps_r = 12.9
softening = 3 nm

[solver]
kind = manybody-exact
duration = 800 fs
positions = -50 nm, -30 nm

[ensemble]
size = 4
seed = 1
)"}},
  };
  return p;
}

}  // namespace

std::vector<PresetInfo> preset_list() {
  std::vector<PresetInfo> out;
  for (const auto& [name, p] : presets()) out.push_back({name, p.summary});
  return out;
}

bool has_preset(const std::string& name) { return presets().count(name) != 0; }

const std::string& preset_text(const std::string& name) {
  auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'", 0, name);
  return it->second.text;
}

}  // namespace bohm::io
