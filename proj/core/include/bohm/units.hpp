#pragma once

namespace bohm {

/// CODATA 2018 values in SI units.
namespace si {
inline constexpr double hbar = 1.054571817e-34;            // J s
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double electron_volt = 1.602176634e-19;   // J
inline constexpr double elementary_charge = 1.602176634e-19;
inline constexpr double vacuum_permittivity = 8.8541878128e-12;
inline constexpr double pi = 3.141592653589793238462643383279502884;
/// e^2 / (4 pi eps0), J m.
inline constexpr double coulomb_strength =
    elementary_charge * elementary_charge / (4.0 * pi * vacuum_permittivity);
inline constexpr double angstrom = 1e-10;
inline constexpr double nanometer = 1e-9;
inline constexpr double femtosecond = 1e-15;
}  // namespace si

/// Reduced Planck constant, particle mass and the eV->J conversion shared by
/// every solver. All quantities are SI.
class UnitSystem {
 public:
  explicit UnitSystem(double mass, double hbar = si::hbar,
                      double energy_unit = si::electron_volt);

  /// Electron with an optional effective-mass ratio (0.067 for GaAs).
  static UnitSystem electron(double mass_ratio = 1.0);

  double hbar() const noexcept { return hbar_; }
  double mass() const noexcept { return mass_; }
  double energy_unit() const noexcept { return energy_unit_; }

  double joules(double ev) const noexcept { return ev * energy_unit_; }
  double electron_volts(double joules) const noexcept { return joules / energy_unit_; }

  /// Wave number of a free particle with kinetic energy `energy` (J).
  double wave_number(double energy) const;
  /// Kinetic energy (J) of a plane wave with wave number k.
  double kinetic_energy(double k) const noexcept { return hbar_ * hbar_ * k * k / (2.0 * mass_); }

  UnitSystem with_mass(double mass) const { return UnitSystem(mass, hbar_, energy_unit_); }

 private:
  double hbar_;
  double mass_;
  double energy_unit_;
};

}  // namespace bohm
