"""Loschmidt echo below and above the critical coupling.

Two cavities coupled with strength Omega, the second one coupled to a
51-mode ring resonator.  The comb of the perturbed copy is shifted by a
relative epsilon and we watch how fast the two evolutions separate.

Run:  python demos/echo_regimes.py [--plot]
"""

from dataclasses import replace

from adtc import ExperimentSpec, SystemParams, run_echo_experiment, window_mean

from _plot import pyplot, wants_plot

# %% reference system, Omega in units of Omega_TC = g / sqrt(2)
base = SystemParams()
print(f"T_B = {base.round_trip_time:.1f} / omega0, Omega_TC = {base.omega_tc:.3e} omega0")

# %% epsilon = 1e-5 dephases slowly; 1e-3 shows the contrast within 400 T_B
runs = {}
for eps in (1e-5, 1e-3):
    for ratio in (0.5, 10.0):
        spec = ExperimentSpec(params=replace(base.with_omega_ratio(ratio), epsilon=eps), dt=0.05)
        echo, _, _ = run_echo_experiment(spec)
        runs[eps, ratio] = echo
        print(f"eps={eps:g}  Omega={ratio:>4} Omega_TC  mean echo [200,400] T_B = {window_mean(echo, 200, 400):.3f}")

# %% the special state keeps its memory; above Omega_TC it is lost
if wants_plot():
    plt = pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.5), sharey=True)
    for ax, eps in zip(axes, (1e-5, 1e-3)):
        for ratio in (0.5, 10.0):
            echo = runs[eps, ratio]
            ax.plot(echo.t, echo.values, lw=0.6, label=f"Omega = {ratio} Omega_TC")
        ax.set_title(f"epsilon = {eps:g}")
        ax.set_xlabel("t / T_B")
    axes[0].set_ylabel("L(t)")
    axes[0].legend()
    fig.tight_layout()
    fig.savefig("echo_regimes.png", dpi=120)
    print("wrote echo_regimes.png")
