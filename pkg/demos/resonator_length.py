"""Shrinking the resonator at fixed Omega.

delta_omega ~ 1/l and g ~ l^(-1/2), so gamma stays put while Omega_TC
grows.  At 10 lambda0 the echo no longer decays.  The revival period
there is set by the strongly coupled cavity pair rather than by 2 T_B;
see the README for the numbers.

Run:  python demos/resonator_length.py [--plot]
"""

from adtc import ExperimentSpec, length_sweep
from adtc.experiments import run_echo_experiment

from _plot import pyplot, wants_plot

reference = ExperimentSpec(epsilon_override=1e-3, length=250.0)
sweep = length_sweep(reference, [10.0, 25.0, 50.0, 100.0, 250.0], omega_absolute=1e-2)

print(" l/lambda0  delta_omega      g    Omega/Omega_TC  echo   period/T_B  gamma")
for pt in sweep.points:
    p = pt.params
    print(f"{pt.length:9g}  {p.delta_omega:11.4g}  {p.g:7.4g}  {p.omega_ratio:14.3f}  "
          f"{pt.echo_mean:5.3f}  {pt.period:10.3f}  {pt.gamma:.6g}")

if wants_plot():
    from dataclasses import replace

    plt = pyplot()
    fig, ax = plt.subplots(figsize=(8, 3.5))
    for pt in (sweep.points[0], sweep.points[-1]):
        spec = replace(reference, params=pt.params, dt=0.05)
        echo, _, _ = run_echo_experiment(spec)
        ax.plot(echo.t, echo.values, lw=0.6, label=f"l = {pt.length:g} lambda0")
    ax.set_xlabel("t / T_B")
    ax.set_ylabel("L(t)")
    ax.legend()
    fig.tight_layout()
    fig.savefig("resonator_length.png", dpi=120)
    print("wrote resonator_length.png")
