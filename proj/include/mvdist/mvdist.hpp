#pragma once

// Multivariate normal and location-shifted noncentral t distributions, with
// and without box truncation: densities, rectangle probabilities by
// randomized-lattice quasi-Monte Carlo, equicoordinate quantiles, and
// pseudo-random sampling.

#include "density.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "matrix.hpp"
#include "probability.hpp"
#include "quantile.hpp"
#include "sampling.hpp"
#include "special_functions.hpp"
#include "types.hpp"
