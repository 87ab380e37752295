#pragma once

#include <vector>

namespace dnar::hydro {

/// Periodic 1D cell averages on [0, length). Cell i covers
/// [i*dx, (i+1)*dx) with centre (i+1/2)*dx.
struct GridField1D {
  double length = 1.0;
  std::vector<double> rho;  // mass density, >= 0
  std::vector<double> w;    // preferred velocity
  double t = 0.0;

  int cells() const { return static_cast<int>(rho.size()); }
  double dx() const { return length / static_cast<double>(rho.size()); }
  double center(int i) const { return (static_cast<double>(i) + 0.5) * dx(); }
  double mass() const;

  void validate() const;
};

}  // namespace dnar::hydro
