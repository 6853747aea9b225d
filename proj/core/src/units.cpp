#include "bohm/units.hpp"

#include <cmath>
#include <string>

#include "bohm/error.hpp"

namespace bohm {

UnitSystem::UnitSystem(double mass, double hbar, double energy_unit)
    : hbar_(hbar), mass_(mass), energy_unit_(energy_unit) {
  if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) throw DomainError("hbar must be positive");
  if (!(mass_ > 0.0) || !std::isfinite(mass_)) throw DomainError("mass must be positive");
  if (!(energy_unit_ > 0.0)) throw DomainError("energy unit must be positive");
}

UnitSystem UnitSystem::electron(double mass_ratio) {
  return UnitSystem(mass_ratio * si::electron_mass);
}

double UnitSystem::wave_number(double energy) const {
  if (energy < 0.0) throw DomainError("negative kinetic energy " + std::to_string(energy) + " J");
  return std::sqrt(2.0 * mass_ * energy) / hbar_;
}

}  // namespace bohm
