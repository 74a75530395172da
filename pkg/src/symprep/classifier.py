"""
SLOCC class of a symmetric N-qubit state from the roots of its Majorana
polynomial

    p(z) = sum_k c_k sqrt(binomial(N, k)) z^k = (<g| + z <e|)^{(x)N} |psi>.

A degree drop of N - d counts as N - d roots at infinity.  Two symmetric
states are SLOCC equivalent exactly when a Moebius map sends one root
multiset onto the other, so the multiplicity pattern of the roots (the
degeneracy configuration) labels the class.

Roots are grouped on the Riemann sphere by single linkage in chordal
distance.  Numerically an m-fold root comes back as a cluster of radius
~eps^(1/m), far above any fixed chordal threshold for m >= 3, so a merge is
also accepted when the polynomial rebuilt from the merged roots reproduces
the state to within ``rel_tol`` (backward error).  Results whose decision
margin lies within a factor ``MARGIN`` of the threshold carry a ``marginal``
flag.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .states import SymmetricCoefficients

DEGREE_TOL = 1e-14
DEFAULT_REL_TOL = 1e-6
MARGIN = 10.0


@dataclass(frozen=True)
class MajoranaPolynomial:
    N: int
    a: np.ndarray  # a_k for k = 0..N, lowest power first

    @classmethod
    def from_coefficients(cls, c: SymmetricCoefficients | Sequence[complex]) -> "MajoranaPolynomial":
        if not isinstance(c, SymmetricCoefficients):
            c = SymmetricCoefficients(c)
        N = c.N
        a = np.array([c.c[k] * np.sqrt(comb(N, k)) for k in range(N + 1)], dtype=complex)
        return cls(N, a)

    @property
    def degree(self) -> int:
        scale = np.max(np.abs(self.a))
        nz = np.nonzero(np.abs(self.a) > DEGREE_TOL * scale)[0]
        return int(nz[-1])

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.a)

    def derivative(self, z):
        return np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(self.a))


@dataclass(frozen=True)
class RootSet:
    """Extended-complex root multiset: finite roots plus a count at infinity."""

    finite: np.ndarray
    n_infinite: int

    @property
    def N(self) -> int:
        return self.finite.size + self.n_infinite

    def sphere_points(self) -> np.ndarray:
        """Unit vectors on the Riemann sphere; infinity is the north pole."""
        z = self.finite
        d = 1.0 + np.abs(z) ** 2
        pts = np.column_stack([2 * z.real / d, 2 * z.imag / d, (np.abs(z) ** 2 - 1) / d])
        north = np.tile([0.0, 0.0, 1.0], (self.n_infinite, 1))
        return np.vstack([pts.reshape(-1, 3), north])

    def to_list(self) -> list[dict]:
        out = [{"re": float(z.real), "im": float(z.imag), "at_infinity": False} for z in self.finite]
        out += [{"re": 0.0, "im": 0.0, "at_infinity": True}] * self.n_infinite
        return out


def chordal_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Chordal distance between two sphere points, scaled to lie in [0, 1]."""
    return float(np.linalg.norm(u - v) / 2.0)


def _from_sphere(p: np.ndarray) -> complex:
    x, y, zc = p
    if zc >= 1.0 - 1e-15:
        return complex(np.inf)
    return complex(x, y) / (1.0 - zc)


def _newton(a: np.ndarray, r: complex) -> complex:
    pp = np.polynomial.polynomial
    f = pp.polyval(r, a)
    fp = pp.polyval(r, pp.polyder(a))
    if fp == 0:
        return r
    r2 = r - f / fp
    return r2 if abs(pp.polyval(r2, a)) < abs(f) else r


def root_residual(P: MajoranaPolynomial, r: complex) -> float:
    """|p(r)| / max|a_k|, measured through z -> 1/z when |r| > 1.

    Outside the unit disk the reversed polynomial at 1/r is used, which is
    |p(r)| / |r|^d for a degree-d polynomial; double precision cannot do
    better than eps * |r|^d for the plain value.
    """
    d = P.degree
    scale = np.max(np.abs(P.a))
    if abs(r) <= 1:
        return float(abs(P(r)) / scale)
    return float(abs(np.polynomial.polynomial.polyval(1 / r, P.a[: d + 1][::-1])) / scale)


def majorana_roots(c: SymmetricCoefficients | Sequence[complex]) -> RootSet:
    """All N roots of the Majorana polynomial, one Newton polish per finite root.

    Roots outside the unit disk are polished as 1/r on the reversed
    polynomial.
    """
    P = MajoranaPolynomial.from_coefficients(c)
    d = P.degree
    if d == 0:
        return RootSet(np.zeros(0, dtype=complex), P.N)
    a = P.a[: d + 1]
    roots = np.roots(a[::-1]).astype(complex)
    for i, r in enumerate(roots):
        if abs(r) <= 1 or r == 0:
            roots[i] = _newton(a, r)
        else:
            roots[i] = 1 / _newton(a[::-1], 1 / r)
    return RootSet(np.sort_complex(roots), P.N - d)


def _coeffs_from_points(points: list[complex], N: int) -> np.ndarray:
    finite = [z for z in points if np.isfinite(z)]
    mono = np.poly(finite) if finite else np.ones(1)  # highest power first
    a = np.zeros(N + 1, dtype=complex)
    a[: len(finite) + 1] = mono[::-1]
    c = a / np.sqrt([comb(N, k) for k in range(N + 1)])
    return c / np.linalg.norm(c)


def coefficients_from_roots(roots: RootSet | Sequence[complex], N: int | None = None) -> SymmetricCoefficients:
    """Vieta inversion: elementary symmetric functions of the finite roots.

    Plain sequences may mark roots at infinity with ``complex('inf')``.
    """
    if isinstance(roots, RootSet):
        pts = list(roots.finite) + [complex(np.inf)] * roots.n_infinite
    else:
        pts = [complex(z) for z in roots]
    if N is None:
        N = len(pts)
    if len(pts) != N:
        raise ValueError(f"need exactly N={N} roots (counting infinity), got {len(pts)}")
    return SymmetricCoefficients(_coeffs_from_points(pts, N))


@dataclass(frozen=True)
class DegeneracyConfig:
    multiplicities: tuple

    def __post_init__(self):
        m = tuple(sorted((int(x) for x in self.multiplicities), reverse=True))
        if not m or min(m) < 1:
            raise ValueError("multiplicities must be positive")
        object.__setattr__(self, "multiplicities", m)

    @property
    def N(self) -> int:
        return sum(self.multiplicities)

    @property
    def separable(self) -> bool:
        return len(self.multiplicities) == 1

    @property
    def label(self) -> str:
        return "D_{" + ",".join(str(m) for m in self.multiplicities) + "}"

    def __eq__(self, other):
        if isinstance(other, DegeneracyConfig):
            return self.multiplicities == other.multiplicities
        return self.multiplicities == tuple(sorted(other, reverse=True))

    def __hash__(self):
        return hash(self.multiplicities)


def _backward_error(c: np.ndarray, points: np.ndarray, labels: np.ndarray, N: int) -> float:
    merged = []
    for lab in np.unique(labels):
        members = points[labels == lab]
        centre = members.mean(axis=0)
        nrm = np.linalg.norm(centre)
        centre = centre / nrm if nrm > 0 else members[0]
        merged += [_from_sphere(centre)] * len(members)
    c2 = _coeffs_from_points(merged, N)
    ov = np.vdot(c2, c)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(c - phase * c2))


@dataclass(frozen=True)
class Clustering:
    config: DegeneracyConfig
    labels: np.ndarray
    marginal: bool
    backward_error: float


def cluster_roots(roots: RootSet, rel_tol: float = DEFAULT_REL_TOL) -> Clustering:
    """Coarsest cut of the single-linkage dendrogram that is still acceptable.

    A cut is acceptable when every merge in it is within ``rel_tol`` in
    chordal distance, or when the whole merged root set reproduces the state
    to backward error ``rel_tol``.
    """
    N = roots.N
    pts = roots.sphere_points()
    c = _coeffs_from_points(list(roots.finite) + [complex(np.inf)] * roots.n_infinite, N)
    best = (np.arange(N), 0.0)
    worst_accepted, best_rejected = 0.0, np.inf
    if N > 1:
        Z = linkage(pts, method="single", metric=lambda u, v: chordal_distance(u, v))
        for height in np.unique(Z[:, 2]):
            labels = fcluster(Z, t=height, criterion="distance")
            err = _backward_error(c, pts, labels, N)
            score = min(float(height), err)
            if score <= rel_tol:
                best = (labels, err)
                worst_accepted = max(worst_accepted, score)
            else:
                best_rejected = min(best_rejected, score)
    labels, err = best
    _, labels = np.unique(labels, return_inverse=True)
    marginal = worst_accepted > rel_tol / MARGIN or best_rejected < rel_tol * MARGIN
    return Clustering(DegeneracyConfig(tuple(np.bincount(labels))), labels, bool(marginal), float(err))


def degeneracy_config(roots: RootSet, rel_tol: float = DEFAULT_REL_TOL) -> DegeneracyConfig:
    return cluster_roots(roots, rel_tol).config


@dataclass(frozen=True)
class Classification:
    config: DegeneracyConfig
    roots: RootSet
    marginal: bool

    @property
    def label(self) -> str:
        return self.config.label

    @property
    def separable(self) -> bool:
        return self.config.separable

    def describe(self) -> str:
        text = self.label + (" separable" if self.separable else "")
        return text + (" (marginal)" if self.marginal else "")

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": list(self.config.multiplicities),
                "label": self.label,
                "separable": self.separable,
                "roots": self.roots.to_list(),
                "marginal": self.marginal,
            }
        )


def classify(c: SymmetricCoefficients | Sequence[complex], rel_tol: float = DEFAULT_REL_TOL) -> Classification:
    roots = majorana_roots(c)
    cl = cluster_roots(roots, rel_tol)
    return Classification(cl.config, roots, cl.marginal)


def mobius_transform(c: SymmetricCoefficients | Sequence[complex], A: np.ndarray) -> SymmetricCoefficients:
    """Coefficients of A^{(x)N} |psi> for an invertible 2x2 A, via the polynomial.

    p'(z) = (A00 + z A10)^N p(w) with w = (A01 + z A11) / (A00 + z A10), so a
    root r of p becomes the root z of p' with w(z) = r.
    """
    P = MajoranaPolynomial.from_coefficients(c)
    N = P.N
    A = np.asarray(A, dtype=complex)
    if abs(np.linalg.det(A)) < 1e-14:
        raise ValueError("Moebius map needs an invertible matrix")
    num = np.array([A[0, 1], A[1, 1]])  # lowest power first
    den = np.array([A[0, 0], A[1, 0]])
    pp = np.polynomial.polynomial
    q = np.zeros(N + 1, dtype=complex)
    for k, ak in enumerate(P.a):
        if ak == 0:
            continue
        term = ak * pp.polymul(pp.polypow(num, k), pp.polypow(den, N - k))
        q[: term.size] += term
    return SymmetricCoefficients(q / np.sqrt([comb(N, k) for k in range(N + 1)]))


def mobius_map_root(r: complex, A: np.ndarray) -> complex:
    """Image of a root of p under the map of :func:`mobius_transform`."""
    A = np.asarray(A, dtype=complex)
    # solve (A01 + z A11) = r (A00 + z A10) for z
    if np.isinf(r):
        # w = infinity where A00 + z A10 vanishes
        return complex(np.inf) if A[1, 0] == 0 else complex(-A[0, 0] / A[1, 0])
    den = A[1, 1] - r * A[1, 0]
    if den == 0:
        return complex(np.inf)
    return complex((r * A[0, 0] - A[0, 1]) / den)
