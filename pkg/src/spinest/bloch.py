"""Bloch-ball geometry for a single qubit.

Every operator used in this package has the form ``w*I + v.sigma`` with real
``v``, so states and observable directions are plain real 3-vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

UNIT_TOL = 1e-9
DEFAULT_NODES = 64


@dataclass(frozen=True)
class BlochVector:
    """Real 3-vector inside (or on) the Bloch ball."""

    x: float
    y: float
    z: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z], dtype=dtype or float)

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(np.asarray(self)))

    @classmethod
    def from_array(cls, v) -> "BlochVector":
        v = as_vector(v)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "BlochVector":
        s = np.sin(theta)
        return cls(s * np.cos(phi), s * np.sin(phi), np.cos(theta))


X_AXIS = BlochVector(1.0, 0.0, 0.0)
Y_AXIS = BlochVector(0.0, 1.0, 0.0)
Z_AXIS = BlochVector(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class SphereAverageSpec:
    node_count: int = DEFAULT_NODES

    def __post_init__(self):
        if int(self.node_count) < 1:
            raise ValueError(f"node_count must be >= 1, got {self.node_count}")


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    return arr


def unit(v, tol: float = UNIT_TOL) -> np.ndarray:
    """Return ``v`` as an array, raising if it is not of unit length."""
    arr = as_vector(v)
    n = np.linalg.norm(arr)
    if abs(n - 1.0) > tol:
        raise ValueError(f"direction must be a unit vector, |v| = {n!r}")
    return arr


def sphere_point(u_cos: np.ndarray | float, u_phi: np.ndarray | float) -> np.ndarray:
    """Map uniforms on [0, 1) to points on the unit sphere.

    ``cos(theta) = 2*u_cos - 1`` and ``phi = 2*pi*u_phi``.  Works elementwise;
    the last axis of the result holds (x, y, z).
    """
    z = 2.0 * np.asarray(u_cos, dtype=float) - 1.0
    phi = 2.0 * np.pi * np.asarray(u_phi, dtype=float)
    s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=-1)


def sample_pure_state(rng_stream) -> BlochVector:
    """Draw a pure state uniformly from the Bloch sphere.

    ``rng_stream`` is anything with a ``random(size)`` method returning floats
    in [0, 1): a :class:`spinest.rng.TrialStream` or a ``numpy`` Generator.
    """
    u = np.asarray(rng_stream.random(2), dtype=float)
    return BlochVector.from_array(sphere_point(u[0], u[1]))


def expectation(direction, state) -> float:
    """Expectation of the spin observable ``direction . sigma`` in ``state``."""
    return float(unit(direction) @ as_vector(state))


def angle_between(a, b) -> float:
    c = float(unit(a) @ unit(b))
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def average_over_sphere(f: Callable, spec: SphereAverageSpec | None = None) -> float:
    """Average of ``f(<A>)`` over pure states, i.e. ``(1/2) * int_{-1}^{1} f(u) du``.

    Gauss-Legendre with ``spec.node_count`` nodes; exact for polynomials of
    degree up to ``2*node_count - 1``.  ``f`` is called once on the node array.
    """
    spec = spec or SphereAverageSpec()
    x, w = leggauss(int(spec.node_count))
    vals = np.asarray(f(x), dtype=float)
    if vals.shape == ():
        vals = np.full_like(x, float(vals))
    return 0.5 * float(w @ vals)


def trace_distance(r1, r2) -> float:
    return float(np.linalg.norm(as_vector(r1) - as_vector(r2)))


def directions_for_angle(eta: float) -> tuple[BlochVector, BlochVector]:
    """Canonical pair ``a = z``, ``b`` in the xz-plane at angle ``eta`` from ``a``."""
    return Z_AXIS, BlochVector(float(np.sin(eta)), 0.0, float(np.cos(eta)))
