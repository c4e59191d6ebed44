#pragma once

// Brillouin spectrum reconstruction toolkit: spectrum synthesis, seeded white
// noise, maximum-entropy and wavelet-shrinkage denoising, Lorentzian peak
// fitting, the shift-estimation variance bound, and a Monte Carlo estimator
// benchmark.

#include "bench.hpp"
#include "config.hpp"
#include "config_map.hpp"
#include "crlb.hpp"
#include "csv.hpp"
#include "mer.hpp"
#include "noise.hpp"
#include "peak_fit.hpp"
#include "rng.hpp"
#include "spectrum.hpp"
#include "svg.hpp"
#include "wavelet.hpp"
