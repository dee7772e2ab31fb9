"""Return probability of the special state and its revival period.

Below Omega_TC the excitation leaves cavity 1 and comes back every second
round trip; far above it the revivals follow the resonator period.

Run:  python demos/period_doubling.py [--plot]
"""

from adtc import ExperimentSpec, SystemParams, run_return_experiment

from _plot import pyplot, wants_plot

base = SystemParams()

results = {}
for ratio in (0.5, 10.0):
    spec = ExperimentSpec(params=base.with_omega_ratio(ratio), t_max=40.0)
    p, period, rate = run_return_experiment(spec)
    results[ratio] = p
    gamma_tb = spec.params.gamma * base.round_trip_time
    print(f"Omega = {ratio:>4} Omega_TC: period {period.period:.3f} T_B, "
          f"early decay {rate:.3f} / T_B (gamma T_B = {gamma_tb:.3f})")

# %% at 10 Omega_TC gamma is far outside its perturbative range, so the
# fit reports NaN once p(t) drops under the fit floor
if wants_plot():
    plt = pyplot()
    fig, ax = plt.subplots(figsize=(8, 3.5))
    for ratio, p in results.items():
        ax.plot(p.t, p.values, lw=0.8, label=f"Omega = {ratio} Omega_TC")
    ax.set_xlabel("t / T_B")
    ax.set_ylabel("p(t)")
    ax.legend()
    fig.tight_layout()
    fig.savefig("period_doubling.png", dpi=120)
    print("wrote period_doubling.png")
