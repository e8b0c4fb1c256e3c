"""Shared session fixtures; the expensive objects are built once per run."""

from __future__ import annotations

import pytest

from nikishin import equilibrium as eqm
from nikishin.config import load_config, shipped_config
from nikishin.measures import build_mu_hierarchy
from nikishin.mop import mop_sequence
from nikishin.recurrence import extract_sequence
from nikishin.secondkind import SecondKind


class SecondKindCache(dict):
    def __init__(self, h, recs):
        super().__init__()
        self.h, self.recs = h, recs

    def __missing__(self, n):
        sk = SecondKind(self.h, self.recs[n])
        self[n] = sk
        return sk


@pytest.fixture(scope="session")
def p2_config():
    return load_config(shipped_config("example-p2"))


@pytest.fixture(scope="session")
def p2_hierarchy(p2_config):
    return build_mu_hierarchy(p2_config.system, p2_config.quad_order, p2_config.precision_bits)


@pytest.fixture(scope="session")
def p2_records(p2_hierarchy, p2_config):
    return mop_sequence(p2_hierarchy, p2_config.n_max)


@pytest.fixture(scope="session")
def p2_an(p2_records):
    return extract_sequence(p2_records)


@pytest.fixture(scope="session")
def p2_sk(p2_hierarchy, p2_records):
    return SecondKindCache(p2_hierarchy, p2_records)


@pytest.fixture(scope="session")
def p2_eq(p2_config):
    return eqm.solve_vector_equilibrium([(float(a), float(b)) for a, b in p2_config.system.intervals], M=400)


@pytest.fixture(scope="session")
def legendre_config():
    return load_config(shipped_config("legendre"))


@pytest.fixture(scope="session")
def legendre_hierarchy(legendre_config):
    c = legendre_config
    return build_mu_hierarchy(c.system, c.quad_order, c.precision_bits)


@pytest.fixture(scope="session")
def legendre_records(legendre_hierarchy, legendre_config):
    return mop_sequence(legendre_hierarchy, legendre_config.n_max)


@pytest.fixture(scope="session")
def legendre_an(legendre_records):
    return extract_sequence(legendre_records)


@pytest.fixture(scope="session")
def unit_eq():
    return eqm.solve_vector_equilibrium([(0.0, 1.0)], M=2000)
