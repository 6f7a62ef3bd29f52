"""Energy-function stability sweep of the 9-bus fault, mode by mode.

Run with ``python3 demos/stability_sweep.py``.
"""

import numpy as np

from oscdecouple.decouple import IntraModalTarget, run_decoupling
from oscdecouple.energy import cct_sweep, energy_function
from oscdecouple.fixtures import X_SEP, ninebus_fault_scenario, ninebus_post_fault
from oscdecouple.io import cct_table
from oscdecouple.modal import eigendecompose, normalize_basis
from oscdecouple.oscillators import simplify_undamped, to_real
from oscdecouple.power import make_jet


def main():
    jet = make_jet(ninebus_post_fault(), X_SEP, 3)
    basis = normalize_basis(eigendecompose(jet))
    djet, chain = run_decoupling(jet, basis, IntraModalTarget.st(), 3)
    efs = []
    for mode in range(basis.n_modes):
        osc = simplify_undamped(to_real(djet, mode))
        ef = energy_function(osc)
        efs.append(ef)
        v = osc.force_coefficients()
        print(f"mode {mode + 1}: f(w) = {v[0]:.4g} w + {v[1]:.4g} w^2 + {v[2]:.4g} w^3, "
              f"w_uep = {ef.w_uep:.4f}, V_crit = {ef.v_crit:.4f}")
    scenario, _ = ninebus_fault_scenario()
    durations = np.round(np.arange(0.0, 0.41, 0.02), 2)
    report = cct_sweep(scenario, chain, efs, durations, basis)
    print()
    print(cct_table(report), end="")


if __name__ == "__main__":
    main()
