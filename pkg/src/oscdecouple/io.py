"""Reading system definitions and writing coefficient tables, trajectories and reports.

System files are JSON. A swing-equation system looks like::

    {
      "name": "two-machine",
      "omega_s": 376.99111843077515,
      "machines": [{"H": 5.0, "D": 5.0, "Pm": 0.5, "E": 1.0}, ...],
      "network": {"G": [...], "C": [[...]], "Dij": [[...]]},
      "guess": [...],
      "steady_angles": [...]
    }

and an explicit field uses a ``trig_field`` section instead of ``machines``/``network``::

    "trig_field": {
      "constant": [...], "linear": [[...]], "angle_indices": [0, 2, 4],
      "terms": [{"row": 1, "coeff": -6.25, "func": "sin",
                 "direction": [1, 0, -1, 0, 0, 0], "phase": -0.728}, ...]
    }

A polynomial system already centred at its equilibrium (as written by the
``synth`` command) uses a ``poly_field`` section holding a coefficient table
in the format of :func:`poly_map_to_dict`, plus ``angle_indices``.

Optional keys: ``x_sep`` (equilibrium; solved from ``guess`` when absent),
``steady_angles`` (physical rotor angles used for SMIB targets, defaults to
the angles of ``x_sep``) and ``fault`` with ``fault_on`` (a trig field),
``pre_fault_state``, ``post_fault_reference``, ``durations`` and ``dt``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .decouple import DecoupledJet, TransformChain
from .energy import CctReport, FaultScenario
from .errors import DecouplingError
from .poly import TrigTerm, TrigVectorField, TruncatedPolyMap
from .power import (
    EquilibriumJet,
    MachineParams,
    NetworkParams,
    PowerSystem,
    build_swing_field,
    find_equilibrium,
    make_jet,
    poly_jet,
)


class InputError(DecouplingError, ValueError):
    """Malformed or inconsistent input file."""


@dataclass(frozen=True, eq=False)
class LoadedSystem:
    name: str
    field: TrigVectorField | TruncatedPolyMap
    x_sep: np.ndarray
    steady_angles: np.ndarray | None = None
    power_system: PowerSystem | None = None
    fault: FaultScenario | None = None
    durations: tuple = ()
    poly_angles: tuple = ()

    def physical_equilibrium(self) -> np.ndarray:
        """``x_sep`` with its angles replaced by ``steady_angles`` when given."""
        x = self.x_sep.copy()
        if self.steady_angles is not None:
            x[list(self.angle_indices)] = self.steady_angles
        return x

    @property
    def is_polynomial(self) -> bool:
        return isinstance(self.field, TruncatedPolyMap)

    @property
    def angle_indices(self) -> tuple:
        if self.is_polynomial:
            return self.poly_angles or tuple(range(0, self.field.n_vars, 2))
        return tuple(self.field.angle_indices)

    def jet(self, k: int) -> EquilibriumJet:
        """Degree-``k`` jet at ``x_sep``."""
        if self.is_polynomial:
            return poly_jet(self.field.truncated(k), self.angle_indices)
        return make_jet(self.field, self.x_sep, k)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def g6(x) -> str:
    """Six significant digits, the format used for all printed numbers."""
    return format(float(x), ".6g")


# ---------------------------------------------------------------------------
# trig fields and systems


def trig_field_to_dict(field: TrigVectorField) -> dict:
    return {
        "constant": field.constant.tolist(),
        "linear": field.linear.tolist(),
        "angle_indices": list(field.angle_indices),
        "terms": [
            {
                "row": t.row,
                "coeff": t.coeff,
                "func": t.func,
                "direction": list(t.direction),
                "phase": t.phase,
            }
            for t in field.terms
        ],
    }


def trig_field_from_dict(d: dict) -> TrigVectorField:
    try:
        terms = tuple(
            TrigTerm(int(t["row"]), float(t["coeff"]), t["func"], t["direction"], float(t.get("phase", 0.0)))
            for t in d.get("terms", [])
        )
        angles = d.get("angle_indices")
        return TrigVectorField(
            np.asarray(d["constant"], dtype=float),
            np.asarray(d["linear"], dtype=float),
            terms,
            None if angles is None else tuple(int(a) for a in angles),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad trig_field section: {exc}") from exc


def power_system_from_dict(d: dict) -> PowerSystem:
    try:
        machines = [MachineParams(float(m["H"]), float(m["D"]), float(m["Pm"]), float(m["E"])) for m in d["machines"]]
        net = d["network"]
        network = NetworkParams(np.asarray(net["G"], float), np.asarray(net["C"], float), np.asarray(net["Dij"], float))
        return PowerSystem(tuple(machines), network, float(d.get("omega_s", 2 * np.pi * 60)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad machines/network section: {exc}") from exc


def power_system_to_dict(system: PowerSystem) -> dict:
    return {
        "omega_s": system.omega_s,
        "machines": [{"H": m.H, "D": m.D, "Pm": m.Pm, "E": m.E} for m in system.machines],
        "network": {
            "G": system.network.G.tolist(),
            "C": system.network.C.tolist(),
            "Dij": system.network.Dij.tolist(),
        },
    }


def fault_from_dict(d: dict) -> tuple[FaultScenario, tuple]:
    try:
        scenario = FaultScenario(
            trig_field_from_dict(d["fault_on"]),
            np.asarray(d["pre_fault_state"], dtype=float),
            np.asarray(d["post_fault_reference"], dtype=float),
            float(d.get("dt", 1e-3)),
            d.get("description", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad fault section: {exc}") from exc
    return scenario, tuple(float(t) for t in d.get("durations", ()))


def fault_to_dict(scenario: FaultScenario, durations=()) -> dict:
    return {
        "description": scenario.name,
        "fault_on": trig_field_to_dict(scenario.fault_field),
        "pre_fault_state": np.asarray(scenario.x_pre).tolist(),
        "post_fault_reference": np.asarray(scenario.post_reference).tolist(),
        "durations": [float(t) for t in durations],
        "dt": scenario.dt,
    }


def system_from_dict(d: dict, name: str = "") -> LoadedSystem:
    if not isinstance(d, dict):
        raise InputError("system file must hold a JSON object")
    power = None
    if "poly_field" in d:
        try:
            field = poly_map_from_dict(d["poly_field"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad poly_field section: {exc}") from exc
        angles = tuple(int(a) for a in d.get("angle_indices", range(0, field.n_vars, 2)))
        return LoadedSystem(d.get("name", name), field, np.zeros(field.n_vars), poly_angles=angles)
    if "trig_field" in d:
        field = trig_field_from_dict(d["trig_field"])
    elif "machines" in d and "network" in d:
        power = power_system_from_dict(d)
        try:
            field = build_swing_field(power)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    else:
        raise InputError("need either a trig_field section or machines and network sections")
    if "x_sep" in d:
        x_sep = np.asarray(d["x_sep"], dtype=float)
    else:
        guess = np.asarray(d.get("guess", np.zeros(field.n)), dtype=float)
        x_sep = find_equilibrium(field, guess)
    if x_sep.shape != (field.n,):
        raise InputError(f"x_sep has {x_sep.size} entries, field has {field.n} states")
    steady = d.get("steady_angles")
    fault, durations = (None, ())
    if "fault" in d:
        fault, durations = fault_from_dict(d["fault"])
    return LoadedSystem(
        d.get("name", name),
        field,
        x_sep,
        None if steady is None else np.asarray(steady, dtype=float),
        power,
        fault,
        durations,
    )


def system_to_dict(system: LoadedSystem) -> dict:
    out = {"name": system.name}
    if system.is_polynomial:
        out["poly_field"] = poly_map_to_dict(system.field)
        out["angle_indices"] = list(system.angle_indices)
        return out
    if system.power_system is not None:
        out.update(power_system_to_dict(system.power_system))
    else:
        out["trig_field"] = trig_field_to_dict(system.field)
    out["x_sep"] = system.x_sep.tolist()
    if system.steady_angles is not None:
        out["steady_angles"] = system.steady_angles.tolist()
    if system.fault is not None:
        out["fault"] = fault_to_dict(system.fault, system.durations)
    return out


def load_system(path) -> LoadedSystem:
    """Read a system file, or the built-in ``ninebus`` fixture when ``path == "ninebus"``."""
    if str(path) == "ninebus":
        from .fixtures import ninebus_system

        return ninebus_system()
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise InputError(f"cannot read {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{p} is not valid JSON: {exc}") from exc
    return system_from_dict(data, p.stem)


def save_system(system: LoadedSystem, path) -> None:
    Path(path).write_text(json.dumps(system_to_dict(system), indent=1) + "\n")


def read_package_json(name: str) -> dict:
    return json.loads(resources.files("oscdecouple").joinpath("data").joinpath(name).read_text())


# ---------------------------------------------------------------------------
# coefficient tables


def _cplx(c) -> list:
    c = complex(c)
    return [c.real, c.imag]


def poly_map_to_dict(m: TruncatedPolyMap) -> dict:
    return {
        "n_vars": m.n_vars,
        "max_degree": m.max_degree,
        "linear": {"re": m.linear.real.tolist(), "im": m.linear.imag.tolist()},
        "nonlinear": [
            [{"exponents": list(e), "re": complex(c).real, "im": complex(c).imag} for e, c in sorted(poly.items())]
            for poly in m.nonlinear
        ],
    }


def poly_map_from_dict(d: dict) -> TruncatedPolyMap:
    lin = np.asarray(d["linear"]["re"]) + 1j * np.asarray(d["linear"]["im"])
    nonlinear = tuple(
        {tuple(t["exponents"]): complex(t["re"], t["im"]) for t in comp} for comp in d["nonlinear"]
    )
    return TruncatedPolyMap(lin, nonlinear, int(d["max_degree"]))


def chain_to_dict(chain: TransformChain) -> dict:
    inv = np.asarray(chain.modal_inverse)
    return {
        "k": chain.k,
        "modal": poly_map_to_dict(chain.modal),
        "modal_inverse": {"re": inv.real.tolist(), "im": inv.imag.tolist()},
        "steps": [poly_map_to_dict(s) for s in chain.steps],
        "inverse_steps": [poly_map_to_dict(s) for s in chain.inverse_steps],
    }


def chain_from_dict(d: dict) -> TransformChain:
    inv = np.asarray(d["modal_inverse"]["re"]) + 1j * np.asarray(d["modal_inverse"]["im"])
    return TransformChain(
        poly_map_from_dict(d["modal"]),
        inv,
        tuple(poly_map_from_dict(s) for s in d["steps"]),
        tuple(poly_map_from_dict(s) for s in d["inverse_steps"]),
        int(d["k"]),
    )


def decoupled_to_dict(djet: DecoupledJet, chain: TransformChain, oscillators=()) -> dict:
    modes = []
    for mode in range(djet.basis.n_modes):
        eq = djet.mode_equation(mode)
        a, _ = djet.basis.mode_groups[mode]
        modes.append(
            {
                "mode": mode + 1,
                "eigenvalue": _cplx(djet.eigenvalues[a]),
                "coefficients": [
                    {"exponents": list(e), "re": complex(c).real, "im": complex(c).imag}
                    for e, c in sorted(eq.items(), key=lambda kv: (sum(kv[0]), kv[0]))
                ],
            }
        )
    out = {"k": djet.k, "target": djet.target.variant, "modes": modes}
    if oscillators:
        out["real_form"] = [
            {
                "mode": o.mode + 1,
                "scale": o.meta.get("scale"),
                "velocity": [{"exponents": list(e), "value": v} for e, v in sorted(o.velocity.items())],
                "displacement": [{"exponents": list(e), "value": v} for e, v in sorted(o.displacement.items())],
            }
            for o in oscillators
        ]
    out["chain"] = chain_to_dict(chain)
    return out


def mode_table(djet: DecoupledJet, mode: int) -> str:
    """Aligned text table of one mode's complex coefficients (``z1**a z2**b``)."""
    eq = djet.mode_equation(mode)
    lines = [f"mode {mode + 1}  target {djet.target.variant}", f"{'a':>3} {'b':>3} {'re':>14} {'im':>14}"]
    for (a, b), c in sorted(eq.items(), key=lambda kv: (sum(kv[0]), kv[0])):
        c = complex(c)
        lines.append(f"{a:>3} {b:>3} {g6(c.real):>14} {g6(c.imag):>14}")
    return "\n".join(lines) + "\n"


def _monomial(j: int, l: int) -> str:
    parts = [name if p == 1 else f"{name}^{p}" for name, p in (("w1", j), ("w2", l)) if p]
    return "*".join(parts)


def oscillator_table(osc) -> str:
    lines = [f"mode {osc.mode + 1} real form (w1 speed-like, w2 displacement-like)"]
    for label, poly in (("dw1/dt", osc.velocity), ("dw2/dt", osc.displacement)):
        text = ""
        for (j, l), v in sorted(poly.items(), key=lambda kv: (sum(kv[0]), kv[0][1])):
            sign = "-" if v < 0 else "+"
            text += f" {sign} {g6(abs(v))}*{_monomial(j, l)}" if text else f"{g6(v)}*{_monomial(j, l)}"
        lines.append(f"  {label} = " + (text or "0"))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# trajectories, errors, reports


def state_names(n: int, space: str = "original") -> list[str]:
    if space == "original":
        names = []
        for i in range(n // 2):
            names += [f"delta_{i + 1}", f"omega_{i + 1}"]
        return names
    return [f"z{i + 1}" for i in range(n)]


def write_trajectory_csv(traj, path, names=None) -> None:
    states = traj.states
    cplx = np.iscomplexobj(states)
    names = names or state_names(traj.n, traj.space)
    header = ["t"]
    for nm in names:
        header += [f"{nm}_re", f"{nm}_im"] if cplx else [nm]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, row in zip(traj.times, states):
            vals = []
            for v in row:
                vals += [_fmt(v.real), _fmt(v.imag)] if cplx else [_fmt(v)]
            w.writerow([_fmt(t)] + vals)


def write_error_csv(rows, path) -> None:
    """``rows`` is a list of ``(label, {target: ErrorReport})``."""
    targets = list(rows[0][1]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["case"]
        for t in targets:
            header += [f"{t}_mean_deg", f"{t}_std_deg"]
        w.writerow(header)
        for label, reports in rows:
            vals = [label]
            for t in targets:
                vals += [_fmt(reports[t].mean), _fmt(reports[t].std)]
            w.writerow(vals)


def write_error_series(report, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "e_deg"])
        for t, e in zip(report.times, report.e):
            w.writerow([_fmt(t), _fmt(e)])


def error_table(rows) -> str:
    targets = list(rows[0][1]) if rows else []
    head = f"{'case':>10}" + "".join(f" {t + ' E[e]':>14} {t + ' Std[e]':>14}" for t in targets)
    lines = [head]
    for label, reports in rows:
        lines.append(
            f"{label:>10}" + "".join(f" {g6(reports[t].mean):>14} {g6(reports[t].std):>14}" for t in targets)
        )
    return "\n".join(lines) + "\n"


def cct_table(report: CctReport) -> str:
    n = report.energies.shape[1]
    head = f"{'duration':>10}" + "".join(f" {'V' + str(m + 1):>12}" for m in range(n)) + "  verdict"
    lines = [head]
    for d, e, v in report.rows():
        verdict = "stable" if all(x.value == "stable" for x in v) else "unstable"
        lines.append(f"{g6(d):>10}" + "".join(f" {g6(x):>12}" for x in e) + f"  {verdict}")
    lines.append("critical  " + "".join(f" {g6(c):>12}" for c in report.critical))
    bound = ">= " if report.cct_is_lower_bound else ""
    lines.append(f"CCT {bound}{g6(report.cct)} s")
    if report.binding_mode is not None:
        lines.append(f"binding mode {report.binding_mode + 1}")
    return "\n".join(lines) + "\n"


def write_cct_csv(report: CctReport, path) -> None:
    n = report.energies.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["duration"] + [f"V{m + 1}" for m in range(n)] + [f"verdict{m + 1}" for m in range(n)])
        for d, e, v in report.rows():
            w.writerow([_fmt(d)] + [_fmt(x) for x in e] + [x.value for x in v])
