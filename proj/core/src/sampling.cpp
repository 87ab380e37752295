#include <cmath>
#include <random>

#include "dnar/error.hpp"
#include "dnar/particle.hpp"

namespace dnar::particle {

void sample(std::vector<double>& out, int count, int dim, Layout layout, double center, double scale,
            std::uint64_t seed) {
  require(count >= 1 && dim >= 1, "sampling needs count >= 1 and dim >= 1");
  require(std::isfinite(scale) && scale >= 0.0, "sampling scale must be finite and >= 0");
  out.assign(static_cast<std::size_t>(count) * dim, center);
  std::mt19937_64 rng(seed);

  switch (layout) {
    case Layout::UniformBox: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (double& z : out) z = center + scale * u(rng);
      break;
    }
    case Layout::Gaussian: {
      std::normal_distribution<double> g(0.0, 1.0);
      for (double& z : out) z = center + scale * g(rng);
      break;
    }
    case Layout::Lattice: {
      // Smallest side length m with m^d >= count; points fill the grid in
      // lexicographic order, cell-centred in [center-scale, center+scale]^d.
      int side = 1;
      while (std::pow(static_cast<double>(side), dim) < count) ++side;
      for (int i = 0; i < count; ++i) {
        int rem = i;
        for (int c = 0; c < dim; ++c) {
          const int k = rem % side;
          rem /= side;
          out[i * dim + c] = center - scale + scale * (2.0 * k + 1.0) / side;
        }
      }
      break;
    }
  }
}

void remove_mean(std::vector<double>& values, int count, int dim) {
  require(values.size() == static_cast<std::size_t>(count) * dim, "remove_mean: size mismatch");
  for (int c = 0; c < dim; ++c) {
    double m = 0.0;
    for (int i = 0; i < count; ++i) m += values[i * dim + c];
    m /= count;
    for (int i = 0; i < count; ++i) values[i * dim + c] -= m;
  }
}

}  // namespace dnar::particle
