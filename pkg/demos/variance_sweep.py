"""Time-averaged photon-number variance of cavity 1 against Omega.

The special state fluctuates most near the transition; a state started
in cavity 2 shows no such maximum.  The full grid takes about half a
minute on one core; pass --workers N to spread it out.

Run:  python demos/variance_sweep.py [--plot] [--workers N]
"""

import sys

from adtc import ExperimentSpec, omega_sweep

from _plot import pyplot, wants_plot

workers = int(sys.argv[sys.argv.index("--workers") + 1]) if "--workers" in sys.argv else 1

sweeps = {kind: omega_sweep(ExperimentSpec(initial=kind), workers=workers) for kind in ("special", "cavity2")}

special = sweeps["special"]
print(f"special: max variance {special.variance.max():.4f} at Omega = {special.argmax_variance} Omega_TC")
print(f"special: endpoints {special.variance[0]:.4f} (0.1) and {special.variance[-1]:.4f} (3.0)")
print(f"cavity2: interior peak? {sweeps['cavity2'].has_interior_peak()}")
print("regimes:", " ".join(f"{x:g}:{k[0]}" for x, k in zip(special.axis, special.regimes)))

if wants_plot():
    plt = pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for kind, sweep in sweeps.items():
        ax.plot(sweep.axis, sweep.variance, "o-", ms=3, label=kind)
    ax.axvline(1.0, color="grey", lw=0.5)
    ax.set_xlabel("Omega / Omega_TC")
    ax.set_ylabel("time-averaged variance")
    ax.legend()
    fig.tight_layout()
    fig.savefig("variance_sweep.png", dpi=120)
    print("wrote variance_sweep.png")
