"""Regenerates the synthetic effective-index tables in this directory.

Telecom band: Taylor expansion of beta(omega) around 1550 nm, with beta2 and
beta4 chosen so a 12 mm guide has its first sinc^2 zero at 29 THz detuning and
half maximum at 18 THz. Pump band: MgO:LN extraordinary Sellmeier (Gayer et al.)
shifted to n_eff = 2.1669 at 775 nm.
"""

from pathlib import Path

import numpy as np
from scipy.optimize import brentq

C = 299792458.0
LENGTH_M = 0.012
HERE = Path(__file__).resolve().parent

LAM0 = 1550e-9
W0 = 2 * np.pi * C / LAM0
N0 = 2.1152
NG = 2.2650
BETA3 = 3.0e-40  # s^3/m


def telecom_coefficients():
    # u = a x^2 + b x^4 with x the detuning in THz
    xhm = brentq(lambda u: (np.sin(u) / u) ** 2 - 0.5, 1, 2)
    a, b = np.linalg.solve(np.array([[29**2, 29**4], [18**2, 18**4]]), np.array([np.pi, xhm]))
    k = 2 * np.pi * 1e12
    return 2 * a / (LENGTH_M * k**2), 12 * 2 * b / (LENGTH_M * k**4)


def beta_telecom(w, beta2, beta4):
    d = w - W0
    return 2 * np.pi * N0 / LAM0 + NG / C * d + beta2 / 2 * d**2 + BETA3 / 6 * d**3 + beta4 / 24 * d**4


def n_extraordinary(lam_um, temp_c=21.0):
    f = (temp_c - 24.5) * (temp_c + 570.82)
    a1, a2, a3, a4, a5, a6 = 5.756, 0.0983, 0.2020, 189.32, 12.52, 1.32e-2
    b1, b2, b3, b4 = 2.860e-6, 4.700e-8, 6.113e-8, 1.516e-4
    l2 = lam_um**2
    return np.sqrt(
        a1 + b1 * f + (a2 + b2 * f) / (l2 - (a3 + b3 * f) ** 2) + (a4 + b4 * f) / (l2 - a5**2) - a6 * l2
    )


def write_table(path, lams, ns):
    with open(path, "w") as fh:
        fh.write("wavelength_nm,n_eff\n")
        for lam, n in zip(lams, ns):
            fh.write(f"{lam:.1f},{n:.8f}\n")


def main():
    beta2, beta4 = telecom_coefficients()
    lams = np.arange(1300, 1901, 10.0)
    w = 2 * np.pi * C / (lams * 1e-9)
    write_table(HERE / "dispersion_telecom.csv", lams, C * beta_telecom(w, beta2, beta4) / w)

    offset = 2.1669 - n_extraordinary(0.775)
    lp = np.arange(740, 811, 5.0)
    write_table(HERE / "dispersion_pump.csv", lp, n_extraordinary(lp / 1000) + offset)


if __name__ == "__main__":
    main()
