import numpy as np
import pytest

from oscdecouple.decouple import IntraModalTarget, build_smib_target, run_decoupling
from oscdecouple.fixtures import X_SEP, ninebus_physical_equilibrium, ninebus_post_fault
from oscdecouple.modal import eigendecompose, normalize_basis
from oscdecouple.oscillators import simplify_undamped, to_real
from oscdecouple.poly import TruncatedPolyMap, monomials
from oscdecouple.power import make_jet


def random_poly_map(rng, n, k, scale=1.0, density=1.0, linear=None, complex_coeffs=True):
    """Random map with degrees 2..k; identity linear part unless ``linear`` is given."""
    comps = []
    for _ in range(n):
        poly = {}
        for d in range(2, k + 1):
            for e in monomials(n, d):
                if rng.random() < density:
                    c = rng.standard_normal()
                    if complex_coeffs:
                        c = c + 1j * rng.standard_normal()
                    poly[e] = scale * c
        comps.append(poly)
    lin = np.eye(n) if linear is None else linear
    return TruncatedPolyMap(lin, tuple(comps), k)


def coeffwise_close(a: TruncatedPolyMap, b: TruncatedPolyMap, tol: float) -> bool:
    if not np.allclose(a.linear, b.linear, atol=tol, rtol=0):
        return False
    for pa, pb in zip(a.nonlinear, b.nonlinear):
        for e in set(pa) | set(pb):
            if abs(pa.get(e, 0.0) - pb.get(e, 0.0)) > tol:
                return False
    return True


def slope(amps, values) -> float:
    return float(np.polyfit(np.log(amps), np.log(values), 1)[0])


@pytest.fixture(scope="session")
def ninebus_field():
    return ninebus_post_fault()


@pytest.fixture(scope="session")
def ninebus_jet(ninebus_field):
    return make_jet(ninebus_field, X_SEP, 3)


@pytest.fixture(scope="session")
def ninebus_basis(ninebus_jet):
    return normalize_basis(eigendecompose(ninebus_jet))


@pytest.fixture(scope="session")
def ninebus_st(ninebus_jet, ninebus_basis):
    return run_decoupling(ninebus_jet, ninebus_basis, IntraModalTarget.st(), 3)


@pytest.fixture(scope="session")
def ninebus_smib_target(ninebus_basis):
    return build_smib_target(ninebus_basis, ninebus_physical_equilibrium(), 3)


@pytest.fixture(scope="session")
def ninebus_simplified(ninebus_st):
    djet, _ = ninebus_st
    return [simplify_undamped(to_real(djet, m)) for m in range(2)]


ACCEPTANCE_LINES = []


def record(number, passed: bool, detail: str, label: str = "") -> bool:
    """Log one acceptance line; shown in the terminal summary and on stdout."""
    tag = label or f"criterion {number:>2}"
    line = f"{tag}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
