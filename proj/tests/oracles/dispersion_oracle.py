#!/usr/bin/env python3
"""Independent oracle for the dispersion / gain-model test constants.

Evaluates the BBO dispersion formula (Eimerl et al., J. Appl. Phys. 62, 1968
(1987)) and derived quantities (phase-matching angle, phase mismatch, spectral
FWHM ratios, mode counts) with plain numpy, independent of the C++ code paths
under test.  Frozen values printed here are pasted into the C++ test sources.

Run:  python3 tests/oracles/dispersion_oracle.py
"""

import numpy as np

C = 299792458.0  # m/s

# BBO (beta-BaB2O4), lambda in micrometres, valid 0.22-1.06 um (Eimerl 1987)
def n_o_sq(lam_um):
    return 2.7405 + 0.0184 / (lam_um**2 - 0.0179) - 0.0155 * lam_um**2

def n_e_sq(lam_um):
    return 2.3730 + 0.0128 / (lam_um**2 - 0.0156) - 0.0044 * lam_um**2

def n_o(lam_nm):
    return np.sqrt(n_o_sq(lam_nm * 1e-3))

def n_e_principal(lam_nm):
    return np.sqrt(n_e_sq(lam_nm * 1e-3))

def n_e_theta(lam_nm, theta_deg):
    th = np.radians(theta_deg)
    no2 = n_o_sq(lam_nm * 1e-3)
    ne2 = n_e_sq(lam_nm * 1e-3)
    return 1.0 / np.sqrt(np.cos(th)**2 / no2 + np.sin(th)**2 / ne2)

LP = 354.7   # pump nm
LDEG = 2 * LP

def conj(lam_nm):
    return 1.0 / (1.0 / LP - 1.0 / lam_nm)

def delta_k(lam_s_nm, theta_deg):
    """Collinear type-I mismatch k_p - k_s - k_i in 1/m."""
    lam_i = conj(lam_s_nm)
    return 2 * np.pi * (n_e_theta(LP, theta_deg) / (LP * 1e-9)
                        - n_o(lam_s_nm) / (lam_s_nm * 1e-9)
                        - n_o(lam_i) / (lam_i * 1e-9))

def find_theta0():
    # coarse grid scan for sign change at 0.01 deg resolution, then bisection
    grid = np.arange(1.0, 89.99, 0.01)
    dk = np.array([delta_k(LDEG, t) for t in grid])
    idx = np.where(np.sign(dk[:-1]) != np.sign(dk[1:]))[0]
    assert len(idx) == 1, idx
    lo, hi = grid[idx[0]], grid[idx[0] + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sign(delta_k(LDEG, mid)) == np.sign(delta_k(LDEG, lo)):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)

def mode_photon_number(G, delta):
    t2 = G * G - delta * delta
    if t2 > 0:
        t = np.sqrt(t2)
        s = np.sinh(t) / t
    elif t2 < 0:
        t = np.sqrt(-t2)
        s = np.sin(t) / t
    else:
        s = 1.0
    return (G * s) ** 2

def spectrum(lams, G, theta, L=2e-3):
    return np.array([mode_photon_number(G, delta_k(l, theta) * L / 2) for l in lams])

def fwhm(x, y):
    y = np.asarray(y, float)
    base = y.min()
    half = base + 0.5 * (y.max() - base)
    imax = int(np.argmax(y))
    assert 0 < imax < len(y) - 1
    # walk left
    il = imax
    while il > 0 and y[il] > half:
        il -= 1
    assert y[il] <= half
    xl = x[il] + (x[il+1]-x[il]) * (half - y[il]) / (y[il+1] - y[il])
    ir = imax
    while ir < len(y) - 1 and y[ir] > half:
        ir += 1
    assert y[ir] <= half
    xr = x[ir-1] + (x[ir]-x[ir-1]) * (half - y[ir-1]) / (y[ir] - y[ir-1])
    return xr - xl

def low_gain_spectrum(lams, theta, L=2e-3):
    # G->0 limit: N proportional to sinc^2(delta)
    out = []
    for l in lams:
        d = delta_k(l, theta) * L / 2
        out.append((np.sinc(d / np.pi)) ** 2)
    return np.array(out)

theta0 = find_theta0()
print(f"theta0 (deg)                 = {theta0:.12f}")
print(f"n_o(709.4 nm)                = {n_o(709.4):.9f}")
print(f"n_o(354.7 nm)                = {n_o(354.7):.9f}")
print(f"n_e principal (354.7 nm)     = {n_e_principal(354.7):.9f}")
print(f"n_e(354.7, theta0)           = {n_e_theta(354.7, theta0):.9f}")
print(f"n_o(702.4 nm)                = {n_o(702.4):.9f}")
print(f"conj(702.4)                  = {conj(702.4):.6f}")
print(f"dk(700.0, theta0)  [1/m]     = {delta_k(700.0, theta0):.9f}")
print(f"dk(709.4, theta0)  [1/m]     = {delta_k(LDEG, theta0):.3e}")
print(f"dk(700.0, theta0+0.0025)     = {delta_k(700.0, theta0 + 0.0025):.6f}")

lams = np.arange(640.0, 790.0, 0.02)
s65 = spectrum(lams, 6.5, theta0)
s39 = spectrum(lams, 3.9, theta0)
slow = low_gain_spectrum(lams, theta0)
f65, f39, flow = fwhm(lams, s65), fwhm(lams, s39), fwhm(lams, slow)
print(f"FWHM G=6.5                   = {f65:.4f} nm")
print(f"FWHM G=3.9                   = {f39:.4f} nm")
print(f"FWHM low-gain sinc^2         = {flow:.4f} nm")
print(f"ratio 6.5/3.9                = {f65/f39:.4f}   (paper: 1.12 +- 0.04)")
print(f"ratio 6.5/low                = {f65/flow:.4f}   (paper: 1.27 +- 0.05)")
s648 = spectrum(lams, 6.48, theta0)
print(f"FWHM G=6.48                  = {fwhm(lams, s648):.4f} nm")

# peak behaviour under the paper's 0.0025 deg orientation offset
for dth in (+0.0025, -0.0025):
    s = spectrum(lams, 6.5, theta0 + dth)
    pk = lams[np.argmax(s)]
    print(f"offset {dth:+.4f}: peak at {pk:.2f} nm, FWHM {fwhm(lams, s):.4f} nm")

# mode count with the shipped defaults (shape constants a_s = a_t = 1)
beam_area = 5.6e-8      # m^2   (0.1 mJ / 18 ps at 10 GW/cm^2)
gate_time = 18e-12      # s     (pulse duration)
domega = 6.9e-6         # sr    (0.17 deg full angle)
dlam = 0.2e-9           # m
lam = 709.4e-9
v_det = beam_area * C * gate_time
v_coh = lam**4 / (domega * dlam)
print(f"mode_count(defaults, 709.4)  = {v_det / v_coh:.6f}")

# pairing-plan multiplicity ratio: envelope integral over the sum-frequency
# constraint for the degenerate self-pair vs a generic conjugate pair
# (continuum limit: pairs with both legs in the degenerate bin occupy half
# the bin because each pair has one leg either side of the degeneracy)
dbin = 2.0  # nm, coarse bin
lo, hi = LDEG - dbin / 2, LDEG + dbin / 2
xs = np.linspace(lo, hi, 20001)
inside = (conj(xs) >= lo) & (conj(xs) <= hi)
frac = np.trapz(inside.astype(float), xs) / dbin
print(f"deg self-pair weight (2 nm)  = {frac:.4f}  (0.5 envelope integral ratio)")
