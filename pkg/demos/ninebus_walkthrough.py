"""Decouple the 9-bus post-fault model and compare the three targets in the time domain.

Run with ``python3 demos/ninebus_walkthrough.py``.
"""

import warnings

import numpy as np

from oscdecouple.decouple import IntraModalTarget, build_smib_target, run_decoupling
from oscdecouple.energy import clearing_states
from oscdecouple.fixtures import X_SEP, ninebus_fault_scenario, ninebus_physical_equilibrium, ninebus_post_fault
from oscdecouple.io import mode_table, oscillator_table
from oscdecouple.modal import check_resonance, eigendecompose, normalize_basis
from oscdecouple.oscillators import to_real
from oscdecouple.power import make_jet
from oscdecouple.simulate import compare_targets


def main():
    jet = make_jet(ninebus_post_fault(), X_SEP, 3)
    basis = normalize_basis(eigendecompose(jet))
    print("oscillatory eigenvalues:", np.round(basis.eigenvalues[0::2], 4))
    print("dropped real eigenvalues:", np.round(basis.dropped_eigenvalues.real, 4))
    exact = [r for r in check_resonance(basis.eigenvalues, 3, 1e-6 * np.max(np.abs(basis.eigenvalues))) if r.exact]
    print("resonances up to order 3:", exact or "none")

    djet, _ = run_decoupling(jet, basis, IntraModalTarget.st(), 3)
    for mode in range(basis.n_modes):
        print()
        print(mode_table(djet, mode), end="")
        print(oscillator_table(to_real(djet, mode)), end="")

    targets = {
        "smib": build_smib_target(basis, ninebus_physical_equilibrium(), 3),
        "st": IntraModalTarget.st(),
        "nf": IntraModalTarget.nf(),
    }
    scenario, _ = ninebus_fault_scenario()
    durations = (0.01, 0.05, 0.10, 0.15)
    print(f"\n{'FD (s)':>8}" + "".join(f"{name + ' E[e]':>14}{name + ' Std':>12}" for name in targets))
    for fd, x in zip(durations, clearing_states(scenario, durations)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            comp = compare_targets(jet, basis, 3, scenario.to_post(x), targets, 1e-3, 10.0)
        row = "".join(f"{comp.reports[n].mean:>14.4g}{comp.reports[n].std:>12.4g}" for n in targets)
        print(f"{fd:>8.2f}{row}")


if __name__ == "__main__":
    main()
