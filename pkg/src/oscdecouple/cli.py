"""Command-line driver: ``oscdecouple {decouple,simulate,compare,stability,synth}``.

Exit codes: 0 success, 2 input error, 3 resonance or small-divisor abort,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .decouple import TRANSFERS, VARIANTS, IntraModalTarget, build_smib_target, inverse_map, run_decoupling
from .energy import FaultScenario, cct_sweep, clearing_states, energy_function
from .errors import DecouplingError, SmallDivisor
from .io import (
    InputError,
    LoadedSystem,
    cct_table,
    decoupled_to_dict,
    error_table,
    g6,
    load_system,
    mode_table,
    oscillator_table,
    save_system,
    write_cct_csv,
    write_error_csv,
    write_error_series,
    write_trajectory_csv,
)
from .modal import ORIENTATIONS, check_resonance, eigendecompose, normalize_basis
from .oscillators import simplify_undamped, to_real
from .power import build_swing_field
from .simulate import Trajectory, compare_targets, error_report, integrate, project, reconstruct
from .synth import random_swing_system, random_system

EXIT_OK, EXIT_INPUT, EXIT_RESONANCE, EXIT_NUMERIC = 0, 2, 3, 4
RESONANCE_RTOL = 1e-6
DEFAULT_DURATIONS = (0.01, 0.05, 0.10, 0.15)
DEFAULT_SCALES = (0.25, 0.5, 0.75, 1.0)


@dataclass
class Pipeline:
    system: LoadedSystem
    jet: object
    basis: object
    k: int


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _order(text: str) -> int:
    k = int(text)
    if k < 2:
        raise argparse.ArgumentTypeError("order must be at least 2")
    return k


def _positive(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _prepare(args) -> Pipeline:
    system = load_system(args.input)
    jet = system.jet(args.order)
    basis = normalize_basis(eigendecompose(jet), args.orient)
    return Pipeline(system, jet, basis, args.order)


def _target(name: str, pipe: Pipeline) -> IntraModalTarget:
    if name == "smib":
        return build_smib_target(pipe.basis, pipe.system.physical_equilibrium(), pipe.k)
    return IntraModalTarget(name)


def _resonance_report(pipe: Pipeline) -> list[str]:
    lam = pipe.basis.eigenvalues
    tol = RESONANCE_RTOL * float(np.max(np.abs(lam)))
    found = check_resonance(lam, pipe.k, tol)
    lines = ["eigenvalues:"]
    for m, (a, _) in enumerate(pipe.basis.mode_groups):
        lines.append(f"  mode {m + 1}: {g6(lam[a].real)} +/- j{g6(abs(lam[a].imag))}")
    if len(pipe.basis.dropped):
        lines.append("dropped real eigenvalues: " + ", ".join(g6(v.real) for v in pipe.basis.dropped_eigenvalues))
    if not found:
        lines.append(f"resonances up to order {pipe.k}: none")
    for r in found:
        kind = "exact" if r.exact else "near"
        lines.append(f"{kind} resonance: lambda_{r.target_index + 1} ~ multipliers {r.multipliers}, residual {g6(r.residual)}")
    return lines


def _initial_states(args, pipe: Pipeline) -> list[tuple[str, np.ndarray]]:
    """Labelled initial conditions in jet coordinates."""
    system = pipe.system
    if args.durations is not None or (system.fault is not None and args.offset is None):
        if system.fault is None:
            raise InputError("--durations needs a system with a fault section")
        durations = args.durations if args.durations is not None else DEFAULT_DURATIONS
        states = clearing_states(system.fault, durations)
        return [(f"fd={g6(d)}", system.fault.to_post(x)) for d, x in zip(durations, states)]
    n = pipe.jet.n
    if args.offset is None:
        offset = np.zeros(n)
        offset[system.angle_indices[0]] = 0.1
    else:
        offset = np.asarray(args.offset, dtype=float)
        if offset.shape != (n,):
            raise InputError(f"--offset needs {n} values, got {offset.size}")
    return [(f"scale={g6(s)}", s * offset) for s in args.scales]


def cmd_decouple(args) -> int:
    pipe = _prepare(args)
    for line in _resonance_report(pipe):
        print(line)
    djet, chain = run_decoupling(pipe.jet, pipe.basis, _target(args.target, pipe), pipe.k, args.transfer)
    oscillators = []
    for mode in range(pipe.basis.n_modes):
        print()
        print(mode_table(djet, mode), end="")
        osc = to_real(djet, mode)
        oscillators.append(osc)
        print(oscillator_table(osc), end="")
    inter = djet.inter_modal_terms()
    print(f"\ninter-modal terms remaining: {len(inter)}")
    out = _out_dir(args)
    if out is not None:
        data = decoupled_to_dict(djet, chain, oscillators)
        (out / "decoupled.json").write_text(json.dumps(data, indent=1) + "\n")
        for mode in range(pipe.basis.n_modes):
            (out / f"mode{mode + 1}.txt").write_text(mode_table(djet, mode) + oscillator_table(oscillators[mode]))
    return EXIT_OK


def cmd_simulate(args) -> int:
    pipe = _prepare(args)
    # the largest requested initial condition
    label, x0 = _initial_states(args, pipe)[-1]
    print(f"initial condition {label}")
    x_abs = pipe.system.x_sep + x0
    full = integrate(pipe.system.field, x_abs, args.dt, args.horizon)
    full_rel = Trajectory(full.times, full.states - pipe.system.x_sep)
    reference = integrate(pipe.jet.jet, x0, args.dt, args.horizon)
    djet, chain = run_decoupling(pipe.jet, pipe.basis, _target(args.target, pipe), pipe.k, args.transfer)
    z = integrate(djet.system, inverse_map(chain, x0), args.dt, args.horizon, space="decoupled")
    recon = reconstruct(chain, z)
    angles = pipe.system.angle_indices
    rows = [
        ("jet", error_report(project(pipe.basis, full_rel), project(pipe.basis, reference), angles)),
        (args.target, error_report(project(pipe.basis, reference), recon, angles)),
    ]
    print(f"{'compared':>24} {'E[e] deg':>12} {'Std[e] deg':>12}")
    print(f"{'k-jet vs full field':>24} {g6(rows[0][1].mean):>12} {g6(rows[0][1].std):>12}")
    print(f"{args.target + ' vs k-jet':>24} {g6(rows[1][1].mean):>12} {g6(rows[1][1].std):>12}")
    out = _out_dir(args)
    if out is not None:
        write_trajectory_csv(full_rel, out / "full.csv")
        write_trajectory_csv(reference, out / "jet.csv")
        write_trajectory_csv(recon, out / f"{args.target}.csv")
        write_trajectory_csv(z, out / f"{args.target}_z.csv")
        write_error_series(rows[1][1], out / f"{args.target}_error.csv")
    return EXIT_OK


def cmd_compare(args) -> int:
    pipe = _prepare(args)
    targets = {name: _target(name, pipe) for name in args.targets}
    rows = []
    for label, x0 in _initial_states(args, pipe):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            comp = compare_targets(pipe.jet, pipe.basis, pipe.k, x0, targets, args.dt, args.horizon, args.transfer)
        for w in caught:
            print(f"warning ({label}): {w.message}", file=sys.stderr)
        rows.append((label, comp.reports))
    print(error_table(rows), end="")
    out = _out_dir(args)
    if out is not None:
        write_error_csv(rows, out / "errors.csv")
        (out / "errors.txt").write_text(error_table(rows))
    return EXIT_OK


def cmd_stability(args) -> int:
    pipe = _prepare(args)
    scenario: FaultScenario | None = pipe.system.fault
    if scenario is None:
        raise InputError("stability needs a system with a fault section")
    durations = args.durations if args.durations is not None else pipe.system.durations
    if not durations:
        raise InputError("no fault durations given")
    if list(durations) != sorted(durations):
        raise InputError("durations must be ascending")
    djet, chain = run_decoupling(pipe.jet, pipe.basis, IntraModalTarget.st(), pipe.k, args.transfer)
    efs = [energy_function(simplify_undamped(to_real(djet, m))) for m in range(pipe.basis.n_modes)]
    for ef in efs:
        uep = "none" if ef.w_uep is None else g6(ef.w_uep)
        crit = "inf" if ef.v_crit is None else g6(ef.v_crit)
        print(f"mode {ef.mode + 1}: w_uep {uep}, critical energy {crit}")
    report = cct_sweep(scenario, chain, efs, durations, pipe.basis)
    print(cct_table(report), end="")
    out = _out_dir(args)
    if out is not None:
        write_cct_csv(report, out / "stability.csv")
        (out / "stability.txt").write_text(cct_table(report))
    return EXIT_OK


def cmd_synth(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.kind == "poly":
        synth = random_system(args.modes, args.order, rng)
        system = LoadedSystem(f"synth-{args.seed}", synth.field, np.zeros(synth.n), poly_angles=synth.angle_indices)
        for m, lam in enumerate(synth.eigenvalues[0::2]):
            print(f"mode {m + 1}: {g6(lam.real)} +/- j{g6(abs(lam.imag))}")
    else:
        power, x_sep = random_swing_system(args.machines, rng)
        system = LoadedSystem(f"swing-{args.seed}", build_swing_field(power), x_sep, None, power)
        print(f"{args.machines}-machine swing system, equilibrium angles " + ", ".join(g6(a) for a in x_sep[0::2]))
    out = _out_dir(args)
    if out is not None:
        path = out / f"{system.name}.json"
        save_system(system, path)
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oscdecouple", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, target=True):
        p.add_argument("input", help="system JSON file, or 'ninebus' for the built-in fixture")
        p.add_argument("--order", type=_order, default=3, help="jet order k (default 3)")
        if target:
            p.add_argument("--target", choices=VARIANTS, default="st")
        p.add_argument("--transfer", choices=TRANSFERS, default="exact")
        p.add_argument("--orient", choices=ORIENTATIONS, default="participation")
        p.add_argument("--out", help="output directory")

    def timing(p):
        p.add_argument("--dt", type=_positive, default=1e-3)
        p.add_argument("--horizon", type=_positive, default=10.0)

    def initial(p):
        p.add_argument("--durations", type=_floats, help="fault durations giving the initial states")
        p.add_argument("--offset", type=_floats, help="initial offset from the equilibrium")
        p.add_argument("--scales", type=_floats, default=DEFAULT_SCALES, help="multipliers of --offset")

    p = sub.add_parser("decouple", help="decouple a system and print coefficient tables")
    common(p)
    p.set_defaults(func=cmd_decouple)

    p = sub.add_parser("simulate", help="simulate full field, k-jet and decoupled system")
    common(p)
    timing(p)
    initial(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="time-domain errors of the targets against the k-jet")
    common(p, target=False)
    p.add_argument("--targets", type=lambda s: tuple(s.split(",")), default=VARIANTS)
    timing(p)
    initial(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("stability", help="energy-function sweep over fault durations")
    common(p, target=False)
    p.add_argument("--durations", type=_floats, help="fault durations (default: those in the input)")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("synth", help="write a random synthetic system")
    p.add_argument("--kind", choices=("poly", "swing"), default="poly")
    p.add_argument("--modes", type=int, default=2, help="oscillatory modes (poly)")
    p.add_argument("--machines", type=int, default=3, help="machines (swing)")
    p.add_argument("--order", type=_order, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "targets", None):
        bad = [t for t in args.targets if t not in VARIANTS]
        if bad:
            parser.error(f"unknown target(s) {bad}; choose from {VARIANTS}")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SmallDivisor as exc:
        print(f"resonance: component {exc.component}, exponents {exc.exponents}, divisor {g6(abs(exc.divisor))}", file=sys.stderr)
        return EXIT_RESONANCE
    except (DecouplingError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
