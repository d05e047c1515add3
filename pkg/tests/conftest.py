import time
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from biham import wdvv
from biham.jets import DiffPoly
from biham.operators import OperatorMatrix
from biham.pipeline import BiHamiltonianSystem, derive
from biham.transform import change_coordinates

settings.register_profile(
    "suite",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def stage_times():
    """Wall-clock seconds of the expensive shared stages, for the budget checks."""
    return {}


@pytest.fixture(scope="session")
def wdvv_bundle():
    return wdvv.builtin_fixture()


@pytest.fixture(scope="session")
def wdvv_a2_flat(wdvv_bundle, stage_times):
    t0 = time.perf_counter()
    a2 = change_coordinates(wdvv_bundle.a2_source, wdvv_bundle.transform)
    stage_times["transform_a2"] = time.perf_counter() - t0
    return a2


@pytest.fixture(scope="session")
def wdvv_system(wdvv_bundle, wdvv_a2_flat):
    return wdvv_bundle.system(a2_flat=wdvv_a2_flat, validate=False)


@pytest.fixture(scope="session")
def wdvv_derivation(wdvv_system, stage_times):
    result = derive(wdvv_system)
    stage_times.update(result.timings)
    return result


@pytest.fixture(scope="session")
def toy_system():
    """Constant-coefficient two-component pair: A1 = K Dx, A2 = K Dx^3."""
    coords = ("u1", "u2")
    K = ((Fraction(2), Fraction(0)), (Fraction(0), Fraction(1)))
    a2 = OperatorMatrix.from_constant_matrix(coords, K, 3)
    h = (DiffPoly.base(coords, 0) ** 2 + DiffPoly.base(coords, 1) ** 2) * Fraction(1, 2)
    return BiHamiltonianSystem(coords=coords, K=K, A2=a2, hamiltonian=h)
