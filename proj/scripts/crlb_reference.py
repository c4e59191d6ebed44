#!/usr/bin/env python3
"""Independent high-precision reference for the shift-variance lower bound.

Evaluates, with 50-digit arithmetic,

    var = (pi*Delta / (4*X^2)) * (alpha*(Gamma + gamma))^3 / SNR^2
          * (1 + 2*I)^2 / (alpha^2 * I^2)        [Hz^2]

at the default simulation geometry:
    Delta = 6.5 um, X = 16.6 mm, N = 120 pixels, bandwidth = 60 GHz,
    alpha = N*Delta/bandwidth, Gamma = 1 GHz, gamma = 0, I = 0.1, SNR = 1.

The printed value is frozen as a golden constant in the acceptance suite.
"""

import mpmath as mp

mp.mp.dps = 50

delta = mp.mpf("6.5e-6")
X = mp.mpf("16.6e-3")
n_pixels = 120
bandwidth = mp.mpf("60e9")
alpha = n_pixels * delta / bandwidth
gamma_b = mp.mpf("1e9")       # Brillouin FWHM, Hz
gamma_resp = mp.mpf("0")      # response FWHM, Hz
rel_intensity = mp.mpf("0.1")
snr = mp.mpf("1")

var = (mp.pi * delta / (4 * X * X)) \
    * (alpha * (gamma_b + gamma_resp)) ** 3 / snr ** 2 \
    * (1 + 2 * rel_intensity) ** 2 / (alpha ** 2 * rel_intensity ** 2)

print("alpha        =", mp.nstr(alpha, 25))
print("var [Hz^2]   =", mp.nstr(var, 25))
print("std [Hz]     =", mp.nstr(mp.sqrt(var), 25))
