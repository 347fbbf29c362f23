"""Shared fixtures for the fracpow test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from fracpow.kernel import FractionalOrder
from fracpow.operator import artificial_operator

ALPHAS = (0.25, 0.5, 0.75)
LAMBDAS = (1.0, 1e3, 1e8, 1e16)

EPS = np.finfo(float).eps


def rounding_floor(lam: float, alpha: float) -> float:
    """Absolute error attributable to double precision at lambda^{-alpha}."""
    return 64.0 * EPS * lam ** (-alpha)


@pytest.fixture
def half() -> FractionalOrder:
    return FractionalOrder(0.5)


@pytest.fixture(params=ALPHAS, ids=lambda a: f"alpha={a}")
def order(request) -> FractionalOrder:
    return FractionalOrder(request.param)


@pytest.fixture(scope="session")
def scex():
    """diag(1..100)^8."""
    return artificial_operator()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _runtime_env(monkeypatch):
    monkeypatch.setenv("FRACPOW_THREADS", "2")
    monkeypatch.delenv("FRACPOW_DEBUG", raising=False)
    monkeypatch.delenv("FRACPOW_LOG_LEVEL", raising=False)


def log_uniform(rng: np.random.Generator, low: float, high: float, size: int) -> np.ndarray:
    return np.exp(rng.uniform(math.log(low), math.log(high), size))
