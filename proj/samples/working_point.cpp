// Decomposes the Gaussian source at sigma_x^2 = 25, sigma_y^2 = 1, theta = pi/4,
// then prints the leading Schmidt weights and the photon-number distribution at mean 1
// next to its thermal and Poisson references.

#include <cstdio>
#include <numbers>

#include "pdcstats/pdcstats.hpp"

int main() {
  const auto params = pdc::GaussianParams::from_variances(25.0, 1.0, std::numbers::pi / 4);

  pdc::Warnings warnings;
  const auto svd = pdc::decompose_gaussian(params, pdc::DecompositionMethod::Svd, 800,
                                           pdc::kDefaultEpsLambda, 7.0, &warnings);
  const auto mehler = pdc::decompose_mehler_to_tolerance(params);

  std::printf("K (svd, 800^2) = %.12f\n", pdc::schmidt_number(svd));
  std::printf("K (mehler)     = %.12f\n", pdc::schmidt_number(mehler));
  for (std::size_t k = 0; k < 5; ++k) {
    std::printf("  lambda_%zu  %.12f  %.12f\n", k, svd.eigenvalues[k], mehler.eigenvalues[k]);
  }

  const double coupling = pdc::solve_coupling(svd, 1.0);
  const auto cmp = pdc::compare_with_references(pdc::bank_from_spectrum(svd, coupling), 1e-10);
  std::printf("coupling for mean 1: %.12f\n", coupling);
  std::printf("  n   p(n)          thermal       poisson\n");
  for (std::size_t n = 0; n < 8; ++n) {
    std::printf("%3zu  %.10f  %.10f  %.10f\n", n, cmp.pnd.probs[n], cmp.thermal.probs[n],
                cmp.poisson.probs[n]);
  }
  std::printf("distance to thermal %.3e, to poisson %.3e\n",
              pdc::variational_distance(cmp.pnd, cmp.thermal).value,
              pdc::variational_distance(cmp.pnd, cmp.poisson).value);
  for (const auto& w : warnings) std::printf("warning: %s\n", w.message.c_str());
}
