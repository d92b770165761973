#pragma once

namespace mosco {

// Surface area of the unit sphere in R^d.
double sphere_area(int d);

// Normalization of the fractional Laplacian,
//   C_{d,alpha} = alpha 2^{alpha-1} Gamma((d+alpha)/2) / (pi^{d/2} Gamma(1-alpha/2)),
// so that (-Delta)^{alpha/2} has symbol |xi|^alpha.
double fractional_constant(int d, double alpha);

// C_{d,alpha} / (2 d w_{d-1} (2-alpha)).
double normalization_ratio(int d, double alpha);

// C_{d,alpha} w_{d-1} / (2 d (2-alpha)); tends to 1 as alpha -> 2.
double normalization_ratio_corrected(int d, double alpha);

}  // namespace mosco
