import json
import random
from pathlib import Path

import numpy as np
import pytest

from loopflow import (
    FlowNetwork,
    basis_from_steps,
    build_loop_system,
    load_document,
)

DATA = Path(__file__).parent / "data"


def load_fixture(name: str):
    return load_document((DATA / name).read_text())


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def k4_doc():
    """4-vertex, 6-edge example: 2 inlets, 1 outlet, face cycle basis."""
    return load_fixture("k4.json")


@pytest.fixture(scope="session")
def k4_system(k4_doc):
    basis = basis_from_steps(k4_doc.network, k4_doc.cycle_basis)
    return build_loop_system(k4_doc.network, basis=basis, psi=k4_doc.reference_flow)


@pytest.fixture(scope="session")
def k4_x0():
    return np.array([1.38, 1.0, 0.93])


@pytest.fixture(scope="session")
def triple_doc():
    """2-vertex, 3-parallel-edge example: 1 inlet, 1 outlet, cycles of length 2."""
    return load_fixture("triple.json")


@pytest.fixture(scope="session")
def triple_system(triple_doc):
    basis = basis_from_steps(triple_doc.network, triple_doc.cycle_basis)
    return build_loop_system(triple_doc.network, basis=basis, psi=triple_doc.reference_flow)


@pytest.fixture(scope="session")
def single_pipe_doc():
    return load_fixture("single_pipe.json")


def make_network(n, edge_pairs, w, mu=None):
    """Small helper for hand-built networks in tests."""
    doc = {
        "nodes": [{"id": v + 1, "inflow": float(w[v])} for v in range(n)],
        "edges": [
            {
                "id": i + 1,
                "from": a,
                "to": b,
                "mu": 1.0 if mu is None else float(mu[i]),
            }
            for i, (a, b) in enumerate(edge_pairs)
        ],
    }
    return load_document(json.dumps(doc)).network


def random_network(rng: random.Random, max_n: int = 8, max_m: int = 14, random_mu: bool = False) -> FlowNetwork:
    """Connected network with k >= 1: a random spanning tree plus extra edges.

    Parallel edges are allowed; inflows are mean-centered uniforms, so the
    balance constraint holds to floating-point accuracy.
    """
    n = rng.randint(3, max_n)
    pairs = []
    for v in range(2, n + 1):
        p = rng.randint(1, v - 1)
        pairs.append((p, v))
    extra = rng.randint(1, max(1, min(6, max_m - len(pairs))))
    for _ in range(extra):
        a, b = rng.sample(range(1, n + 1), 2)
        pairs.append((min(a, b), max(a, b)))
    w = np.array([rng.uniform(-5.0, 5.0) for _ in range(n)])
    w -= w.mean()
    mu = [rng.uniform(0.5, 2.0) for _ in pairs] if random_mu else None
    return make_network(n, pairs, w, mu)
