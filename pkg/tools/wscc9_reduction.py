"""Rebuild the 3-machine 9-bus fault scenario from the standard WSCC network data.

Runs a load flow, converts loads to constant impedances, adds generator
transient reactances and Kron-reduces to the internal machine nodes for the
pre-fault, fault-on (bolted fault at bus 5) and post-fault (line 5-7 tripped)
networks. Prints the post-fault coupling terms next to the shipped fixture and
writes the fault scenario to ``src/oscdecouple/data/ninebus_fault.json``.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import fsolve
from scipy.optimize import root as solve_root

OMEGA_S = 2 * np.pi * 60
H = np.array([23.64, 6.4, 3.01])
XD = np.array([0.0608, 0.1198, 0.1813])
# uniform damping ratio D/(2H) = 0.5 1/s, as in the post-fault fixture
DAMPING = 0.5
BRANCHES = [
    (1, 4, 0.0, 0.0576, 0.0),
    (2, 7, 0.0, 0.0625, 0.0),
    (3, 9, 0.0, 0.0586, 0.0),
    (4, 5, 0.010, 0.085, 0.176),
    (4, 6, 0.017, 0.092, 0.158),
    (5, 7, 0.032, 0.161, 0.306),
    (6, 9, 0.039, 0.170, 0.358),
    (7, 8, 0.0085, 0.072, 0.149),
    (8, 9, 0.0119, 0.1008, 0.209),
]
LOADS = {5: 1.25 + 0.5j, 6: 0.9 + 0.3j, 8: 1.0 + 0.35j}
P_GEN = {2: 1.63, 3: 0.85}
V_SET = {1: 1.04, 2: 1.025, 3: 1.025}


def bus_admittance(branches) -> np.ndarray:
    y = np.zeros((9, 9), dtype=complex)
    for a, b, r, x, bsh in branches:
        i, j = a - 1, b - 1
        ys = 1.0 / complex(r, x)
        y[i, i] += ys + 0.5j * bsh
        y[j, j] += ys + 0.5j * bsh
        y[i, j] -= ys
        y[j, i] -= ys
    return y


def load_flow(ybus: np.ndarray) -> np.ndarray:
    pq = [3, 4, 5, 6, 7, 8]
    sload = np.zeros(9, dtype=complex)
    for bus, s in LOADS.items():
        sload[bus - 1] = s

    def voltages(u):
        ang = np.r_[0.0, u[:8]]
        mag = np.ones(9)
        mag[:3] = [V_SET[1], V_SET[2], V_SET[3]]
        mag[pq] = u[8:]
        return mag * np.exp(1j * ang)

    def mismatch(u):
        v = voltages(u)
        s = v * np.conj(ybus @ v) + sload
        out = [s[1].real - P_GEN[2], s[2].real - P_GEN[3]]
        out += list(s[pq].real) + list(s[pq].imag)
        return out

    u0 = np.r_[np.zeros(8), np.ones(6)]
    u = fsolve(mismatch, u0, xtol=1e-13)
    return voltages(u)


def reduce(ybus: np.ndarray, keep_ground=None) -> np.ndarray:
    """Kron reduction onto internal machine nodes; ``keep_ground`` buses are shorted."""
    n = 12
    y = np.zeros((n, n), dtype=complex)
    y[:9, :9] = ybus
    for g in range(3):
        yg = 1.0 / complex(0.0, XD[g])
        y[9 + g, 9 + g] += yg
        y[g, g] += yg
        y[g, 9 + g] -= yg
        y[9 + g, g] -= yg
    net = [i for i in range(9) if keep_ground is None or i != keep_ground - 1]
    gen = [9, 10, 11]
    a = y[np.ix_(gen, gen)]
    b = y[np.ix_(gen, net)]
    c = y[np.ix_(net, net)]
    return a - b @ np.linalg.solve(c, b.T)


def swing_field(yred: np.ndarray, e: np.ndarray, pm: np.ndarray) -> dict:
    """Physical swing field as explicit trig terms (state delta_1, omega_1, ...)."""
    gain = OMEGA_S / (2 * H)
    const = np.zeros(6)
    lin = np.zeros((6, 6))
    terms = []
    for i in range(3):
        lin[2 * i, 2 * i + 1] = 1.0
        lin[2 * i + 1, 2 * i + 1] = -DAMPING
        const[2 * i + 1] = gain[i] * (pm[i] - e[i] ** 2 * yred[i, i].real)
        for j in range(3):
            if j == i:
                continue
            d = [0] * 6
            d[2 * i], d[2 * j] = 1, -1
            cij = e[i] * e[j] * yred[i, j].imag
            dij = e[i] * e[j] * yred[i, j].real
            terms.append({"row": 2 * i + 1, "coeff": -gain[i] * cij, "func": "sin", "direction": d, "phase": 0.0})
            terms.append({"row": 2 * i + 1, "coeff": -gain[i] * dij, "func": "cos", "direction": d, "phase": 0.0})
    return {"constant": const.tolist(), "linear": lin.tolist(), "terms": terms, "angle_indices": [0, 2, 4]}


def post_fault_equilibrium(yred, e, pm, guess):
    gain = OMEGA_S / (2 * H)

    def residual(d):
        delta = np.r_[0.0, d]
        pe = np.array([
            e[i] ** 2 * yred[i, i].real
            + sum(
                e[i] * e[j] * (yred[i, j].imag * np.sin(delta[i] - delta[j]) + yred[i, j].real * np.cos(delta[i] - delta[j]))
                for j in range(3) if j != i
            )
            for i in range(3)
        ])
        # common-frequency equilibrium: equal accelerations, removing the drift
        acc = gain * (pm - pe)
        return acc[1:] - acc[0]

    sol = solve_root(residual, guess[1:] - guess[0], method="lm", tol=1e-15)
    if np.max(np.abs(residual(sol.x))) > 1e-10:
        raise RuntimeError("post-fault equilibrium did not converge")
    delta = np.r_[0.0, sol.x]
    pe = [
        e[i] ** 2 * yred[i, i].real
        + sum(
            e[i] * e[j] * (yred[i, j].imag * np.sin(delta[i] - delta[j]) + yred[i, j].real * np.cos(delta[i] - delta[j]))
            for j in range(3) if j != i
        )
        for i in range(3)
    ]
    drift = float(gain[0] * (pm[0] - pe[0]) / DAMPING)
    return delta + guess[0], drift


def main(out: Path) -> None:
    ybus_pre = bus_admittance(BRANCHES)
    v = load_flow(ybus_pre)
    sgen = v * np.conj(ybus_pre @ v)
    for bus, s in LOADS.items():
        sgen[bus - 1] += s
        ybus_pre[bus - 1, bus - 1] += np.conj(s) / abs(v[bus - 1]) ** 2
    current = np.conj(sgen[:3] / v[:3])
    eint = v[:3] + 1j * XD * current
    e, delta0 = np.abs(eint), np.angle(eint)
    pm = sgen[:3].real

    ybus_post = bus_admittance([b for b in BRANCHES if (b[0], b[1]) != (5, 7)])
    for bus, s in LOADS.items():
        ybus_post[bus - 1, bus - 1] += np.conj(s) / abs(v[bus - 1]) ** 2
    y_pre = reduce(ybus_pre)
    y_fault = reduce(ybus_pre, keep_ground=5)
    y_post = reduce(ybus_post)

    gain = OMEGA_S / (2 * H)
    print("load flow |V|:", np.round(np.abs(v), 4), "angles (deg):", np.round(np.degrees(np.angle(v)), 2))
    print("E:", np.round(e, 4), "delta0 (rad):", np.round(delta0, 4), "Pm:", np.round(pm, 4))
    print("post-fault gain*E_iE_j*B_ij, gain*E_iE_j*G_ij (fixture uses the negatives):")
    for i, j in [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]:
        print(f"  {i + 1}{j + 1}: {gain[i] * e[i] * e[j] * y_post[i, j].imag:8.3f} {gain[i] * e[i] * e[j] * y_post[i, j].real:8.3f}")

    x_pre = np.zeros(6)
    x_pre[[0, 2, 4]] = delta0
    post, drift = post_fault_equilibrium(y_post, e, pm, delta0)
    print("post-fault equilibrium angle differences:", np.round(post[1:] - post[0], 4))
    print(f"post-fault common drift speed: {drift:.4f} rad/s")
    const = gain * (pm - e**2 * np.diag(y_post).real) - DAMPING * drift
    print("post-fault speed constants in the drifting frame:", np.round(const, 3))
    x_post = np.zeros(6)
    x_post[[0, 2, 4]] = post
    # speeds settle on the common drift; the common mode is dropped downstream anyway
    x_post[[1, 3, 5]] = drift
    data = {
        "description": "bolted three-phase fault at bus 5 cleared by tripping line 5-7; reduced from the standard WSCC 9-bus data",
        "fault_on": swing_field(y_fault, e, pm),
        "pre_fault_state": x_pre.tolist(),
        "post_fault_reference": x_post.tolist(),
        "durations": [round(0.01 * i, 2) for i in range(0, 21)],
        "dt": 1e-3,
    }
    out.write_text(json.dumps(data, indent=1) + "\n")
    print("wrote", out)


if __name__ == "__main__":
    root = Path(__file__).resolve().parents[1]
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else root / "src/oscdecouple/data/ninebus_fault.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    main(target)
