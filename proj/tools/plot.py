"""Plots tbent CSV outputs.

    python tools/plot.py fringe out/fringe.csv -o fringe.png
    python tools/plot.py rates out/rates.csv
    python tools/plot.py qpm out/qpm.csv
    python tools/plot.py jsi out/qpm_jsi.csv
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def plot_fringe(d, ax):
    ax.plot(d["theta_i_deg"], d["counts"], "o", ms=4, label="counts")
    ax.plot(d["theta_i_deg"], d["model"], "-", label="fit")
    ax.set_xlabel("idler HWP angle (deg)")
    ax.set_ylabel("counts")
    ax.legend()


def plot_rates(d, ax):
    ax.errorbar(d["power_mw"], d["pgr_hz"] / 1e6, yerr=d["pgr_sigma_hz"] / 1e6, fmt="o", label="PGR")
    ax.set_xlabel("pump power (mW)")
    ax.set_ylabel("PGR (MHz)")
    ax2 = ax.twinx()
    ax2.plot(d["power_mw"], d["car"], "s-", color="C1", label="CAR")
    ax2.set_ylabel("CAR")
    ax2.set_yscale("log")


def plot_qpm(d, ax):
    ax.plot(d["signal_nm"], d["intensity"])
    ax.set_xlabel("signal wavelength (nm)")
    ax.set_ylabel("normalized intensity")


def plot_jsi(d, ax):
    s = np.unique(d["signal_nm"])
    i = np.unique(d["idler_nm"])
    z = d["intensity"].reshape(len(s), len(i))
    m = ax.pcolormesh(i, s, z, shading="auto")
    ax.set_xlabel("idler (nm)")
    ax.set_ylabel("signal (nm)")
    plt.colorbar(m, ax=ax)


PLOTS = {"fringe": plot_fringe, "rates": plot_rates, "qpm": plot_qpm, "jsi": plot_jsi}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("kind", choices=sorted(PLOTS))
    p.add_argument("csv")
    p.add_argument("-o", "--out", help="image path (default: CSV path with .png)")
    a = p.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4))
    PLOTS[a.kind](load(a.csv), ax)
    fig.tight_layout()
    out = a.out or a.csv.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
