"""Harmonic oscillator: coherent state against its closed form, and the squeezed limit."""

import argparse

import numpy as np

from qrelax.oscillator import CoherentParams, SqueezedParams, coherent_dynamics, coherent_numeric, squeezed_dynamics


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--n-max", type=int, default=40)
    ap.add_argument("--position", type=float, default=0.7)
    args = ap.parse_args()

    t = np.linspace(0, 4 * np.pi / args.omega, 801)
    p = CoherentParams(args.alpha, args.omega, args.n_max)
    num, ref = coherent_numeric(p, t), coherent_dynamics(p, t)
    for name in ("survival", "Q", "P", "dQ2", "dP2"):
        print(f"coherent {name:8s} max deviation {np.max(np.abs(num[name] - ref[name])):.2e}")

    for n_max in (50, 200, 800):
        sq = squeezed_dynamics(SqueezedParams(args.position, args.omega, n_max), t)
        cos_err = np.max(np.abs(sq["Q"] - sq["Q"][0] * np.cos(args.omega * t)))
        print(f"squeezed n_max={n_max:4d}: a_eff {sq.meta['a_effective']:.4f}, "
              f"survival at t=pi/(2 omega) {np.interp(np.pi / 2 / args.omega, t, sq['survival']):.2e}, "
              f"|Q - Q0 cos| {cos_err:.1e}")


if __name__ == "__main__":
    main()
