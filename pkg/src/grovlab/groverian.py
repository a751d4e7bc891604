"""Groverian measure: P_max = max |<e_1 ... e_n|psi>|^2 and G = sqrt(1 - P_max).

Three numeric routes are provided and are meant to check one another:

* ``pmax_alternating``: higher-order power iteration over all n factors.
* ``pmax_reduced``: the same ascent over n-1 factors with the identity on the
  remaining qubit; the value is the squared norm of the conditioned vector.
* ``pmax_bloch``: three-qubit only, ascent over the Bloch vectors of the two
  qubits that survive tracing out one qubit.

Closed forms cover the generalized W family (triangle circumradius) and the
four-term family (cyclic quadrangle circumradius).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import root

from .qcore import TOL, PureState, X, Y, Z, ket_from_bloch_vector, partial_trace

PAULIS = (X, Y, Z)

DEFAULT_RESTARTS = 32
DEFAULT_MAX_ITER = 1000


@dataclass(frozen=True)
class ProductState:
    factors: tuple

    def __post_init__(self):
        fs = []
        for f in self.factors:
            f = np.array(f, dtype=complex)
            if f.shape != (2,) or abs(np.linalg.norm(f) - 1.0) > TOL.algebra:
                raise ValueError("product factors must be unit 2-vectors")
            f.setflags(write=False)
            fs.append(f)
        object.__setattr__(self, "factors", tuple(fs))

    def __len__(self):
        return len(self.factors)

    def state(self) -> PureState:
        out = np.ones(1, dtype=complex)
        for f in self.factors:
            out = np.kron(out, f)
        return PureState(out)


@dataclass(frozen=True)
class GroverianResult:
    p_max: float
    maximizer: ProductState
    method: str
    restarts_used: int
    converged: bool
    g_measure: float = field(init=False)

    def __post_init__(self):
        p = min(1.0, max(0.0, float(self.p_max)))
        object.__setattr__(self, "p_max", p)
        object.__setattr__(self, "g_measure", math.sqrt(1.0 - p))


@dataclass(frozen=True)
class BlochData:
    r2: np.ndarray
    r3: np.ndarray
    g: np.ndarray

    def value(self, s2, s3) -> float:
        return 0.25 * (1 + s2 @ self.r2 + s3 @ self.r3 + s2 @ self.g @ s3)

    def residuals(self, s2, s3, lambda1, lambda2) -> tuple[float, float]:
        res1 = np.linalg.norm(self.r2 + self.g @ s3 - lambda1 * s2)
        res2 = np.linalg.norm(self.r3 + self.g.T @ s2 - lambda2 * s3)
        return float(res1), float(res2)


@dataclass(frozen=True)
class StationaryPoint:
    s2: np.ndarray
    s3: np.ndarray
    lambda1: float
    lambda2: float
    value: float
    branch: str = ""
    residual: float = 0.0

    @classmethod
    def at(cls, data: BlochData, s2, s3, lambda1=None, lambda2=None, branch="") -> "StationaryPoint":
        """Build a point, taking the multipliers from projections when not given."""
        s2 = np.asarray(s2, dtype=float)
        s3 = np.asarray(s3, dtype=float)
        if lambda1 is None:
            lambda1 = float(s2 @ (data.r2 + data.g @ s3))
        if lambda2 is None:
            lambda2 = float(s3 @ (data.r3 + data.g.T @ s2))
        res = max(data.residuals(s2, s3, lambda1, lambda2))
        return cls(s2, s3, float(lambda1), float(lambda2), float(data.value(s2, s3)), branch, res)


# --------------------------------------------------------------------------
# contraction helpers, batched over restarts
# --------------------------------------------------------------------------


def _random_factors(rng: np.random.Generator, restarts: int, n: int) -> np.ndarray:
    # uniform on the Bloch sphere <=> Haar on C^2 up to phase
    z = rng.normal(size=(restarts, n, 2)) + 1j * rng.normal(size=(restarts, n, 2))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def _contract(t: np.ndarray, factors: np.ndarray, skip: tuple) -> np.ndarray:
    """Contract psi with conj(factors) on every qubit not in ``skip``.

    ``t`` has shape (2,)*n, ``factors`` (R, n, 2); returns (R, 2, ..., 2) with
    one axis per skipped qubit in ascending order.
    """
    n = t.ndim
    out = np.broadcast_to(t, (factors.shape[0],) + t.shape)
    for q in reversed(range(n)):
        if q in skip:
            continue
        out = np.einsum("r...a,ra->r...", np.moveaxis(out, q + 1, -1), factors[:, q].conj())
    return out


def _check_input(state: PureState, restarts: int):
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if abs(np.linalg.norm(state.amplitudes) - 1.0) > TOL.algebra:
        raise ValueError("state is not normalized")


def _overlap_sq(t: np.ndarray, factors: np.ndarray) -> np.ndarray:
    return np.abs(_contract(t, factors, ())) ** 2


def hopm_sweep(t: np.ndarray, factors: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """One Gauss-Seidel sweep; returns new factors and the value after each update."""
    factors = factors.copy()
    values = []
    for i in range(t.ndim):
        v = _contract(t, factors, (i,))
        nv = np.linalg.norm(v, axis=-1)
        ok = nv > 0
        factors[ok, i] = v[ok] / nv[ok, None]
        values.append(nv**2)
    return factors, values


def _extrapolate(value_fn, old: np.ndarray, new: np.ndarray, new_value: np.ndarray, axis=-1, max_doublings: int = 20):
    """Monotone step acceleration along the sweep direction.

    Flat maxima make plain coordinate ascent sublinear.  For each restart we
    try old + w (new - old) with w = 2, 4, 8, ... and keep the best point only
    when it beats the plain sweep, so the value sequence never decreases.
    """
    d = new - old
    best, best_val = new.copy(), new_value.copy()
    active = np.ones(len(new), dtype=bool)
    w = 1.0
    for _ in range(max_doublings):
        w *= 2
        cand = old + w * d
        cand /= np.linalg.norm(cand, axis=axis, keepdims=True)
        val = value_fn(cand)
        better = active & (val > best_val)
        best[better] = cand[better]
        best_val[better] = val[better]
        active &= better
        if not active.any():
            break
    return best, best_val


def pmax_alternating(
    state: PureState,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = TOL.pmax_gain,
    max_iter: int = DEFAULT_MAX_ITER,
    seed=0,
    initial: Optional[np.ndarray] = None,
    accelerate: bool = True,
) -> GroverianResult:
    """Best rank-1 approximation of the amplitude tensor by power iteration.

    Each factor update sets e_i to the normalized contraction of psi against
    the other factors, which is the exact maximizer over e_i, so the overlap
    never decreases.  ``initial`` (shape (R, n, 2)) overrides random starts.
    With ``accelerate`` each sweep is followed by a monotone extrapolation.
    """
    _check_input(state, restarts)
    t = state.tensor()
    if initial is not None:
        factors = np.array(initial, dtype=complex)
        factors /= np.linalg.norm(factors, axis=-1, keepdims=True)
    else:
        factors = _random_factors(np.random.default_rng(seed), restarts, state.n_qubits)
    value = _overlap_sq(t, factors)
    done = np.zeros(len(factors), dtype=bool)
    for _ in range(max_iter):
        prev = factors
        factors, vals = hopm_sweep(t, prev)
        new = vals[-1]
        if accelerate:
            factors, new = _extrapolate(lambda f: _overlap_sq(t, f), prev, factors, new)
        done = new - value < tol
        value = new
        if done.all():
            break
    # post-hoc stationarity: one more sweep must not move the value
    check, vals = hopm_sweep(t, factors)
    stationary = vals[-1] - value < tol
    value = vals[-1]
    best = int(np.argmax(np.round(value, 14)))
    return GroverianResult(
        p_max=float(value[best]),
        maximizer=ProductState(tuple(check[best])),
        method="alternating",
        restarts_used=len(factors),
        converged=bool(done[best] and stationary[best]),
    )


def pmax_reduced(
    state: PureState,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = TOL.pmax_gain,
    max_iter: int = DEFAULT_MAX_ITER,
    seed=0,
    free: Optional[int] = None,
    accelerate: bool = True,
) -> GroverianResult:
    """Ascent over n-1 projectors with the identity on qubit ``free``.

    The objective is || (<e_1|...<e_{n-1}| (x) 1) psi ||^2; for fixed other
    factors it is a 2x2 Hermitian form in e_i, maximized by its top eigenvector.
    """
    _check_input(state, restarts)
    n = state.n_qubits
    if n < 2:
        raise ValueError("reduced optimization needs at least two qubits")
    free = n - 1 if free is None else free
    if not 0 <= free < n:
        raise IndexError("free qubit out of range")
    t = state.tensor()
    opt = [q for q in range(n) if q != free]
    factors = _random_factors(np.random.default_rng(seed), restarts, n)

    def sweep(factors):
        factors = factors.copy()
        top = None
        for i in opt:
            m = _contract(t, factors, tuple(sorted((i, free))))
            if i > free:
                m = np.swapaxes(m, 1, 2)
            h = m @ np.swapaxes(m.conj(), 1, 2)
            w, vecs = np.linalg.eigh(h)
            factors[:, i] = vecs[:, :, -1]
            top = w[:, -1]
        return factors, top

    def reduced_value(f):
        m = _contract(t, f, (free,))
        return np.sum(np.abs(m) ** 2, axis=-1)

    value = np.full(restarts, -np.inf)
    done = np.zeros(restarts, dtype=bool)
    for _ in range(max_iter):
        prev = factors
        factors, new = sweep(prev)
        if accelerate:
            # the free factor is not a variable here; extrapolate the others only
            factors, new = _extrapolate(reduced_value, prev, factors, new)
        done = new - value < tol
        value = new
        if done.all():
            break
    factors, new = sweep(factors)
    stationary = new - value < tol
    value = new
    best = int(np.argmax(np.round(value, 14)))
    # fill in the free factor from the conditioned vector
    v = _contract(t, factors[best : best + 1], (free,))[0]
    factors[best, free] = v / np.linalg.norm(v)
    return GroverianResult(
        p_max=float(value[best]),
        maximizer=ProductState(tuple(factors[best])),
        method="reduced",
        restarts_used=restarts,
        converged=bool(done[best] and stationary[best]),
    )


# --------------------------------------------------------------------------
# Bloch formulation (three qubits)
# --------------------------------------------------------------------------


def bloch_data(state: PureState, traced: int = 0) -> BlochData:
    if state.n_qubits != 3:
        raise ValueError("bloch_data needs a three-qubit state")
    keep = [q for q in range(3) if q != traced]
    rho_pair = partial_trace(state, keep).matrix
    rho_b = partial_trace(state, [keep[0]]).matrix
    rho_c = partial_trace(state, [keep[1]]).matrix
    r2 = np.array([np.trace(rho_b @ p).real for p in PAULIS])
    r3 = np.array([np.trace(rho_c @ p).real for p in PAULIS])
    g = np.array([[np.trace(rho_pair @ np.kron(p, q)).real for q in PAULIS] for p in PAULIS])
    return BlochData(r2, r3, g)


def _bloch_values(data: BlochData, pair: np.ndarray) -> np.ndarray:
    s2, s3 = pair[:, 0], pair[:, 1]
    return 0.25 * (1 + s2 @ data.r2 + s3 @ data.r3 + np.einsum("ri,ij,rj->r", s2, data.g, s3))


def _unit_rows(rng, k):
    v = rng.normal(size=(k, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def pmax_bloch(
    state: PureState,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = TOL.pmax_gain,
    max_iter: int = 20000,
    seed=0,
    traced: int = 0,
    residual_tol: float = 1e-9,
    accelerate: bool = True,
) -> tuple[GroverianResult, StationaryPoint]:
    """Maximize (1/4)[1 + s2.r2 + s3.r3 + s2^T g s3] over unit s2, s3.

    Alternates s2 <- normalize(r2 + g s3) and s3 <- normalize(r3 + g^T s2);
    the pre-normalization norms are the Lagrange multipliers.  Iteration stops
    once the leading restart's value gain is below ``tol`` and both of its
    Lagrange residuals are below ``residual_tol``.
    """
    _check_input(state, restarts)
    data = bloch_data(state, traced)
    rng = np.random.default_rng(seed)
    s2 = _unit_rows(rng, restarts)
    s3 = _unit_rows(rng, restarts)
    redraws = 0
    value = np.full(restarts, -np.inf)
    done = np.zeros(restarts, dtype=bool)
    tiny = 1e-14
    for _ in range(max_iter):
        prev = np.stack([s2, s3], axis=1)
        # a vanishing update means the objective is flat in that block: keep it
        v2 = data.r2 + s3 @ data.g.T
        n2 = np.linalg.norm(v2, axis=1)
        s2 = np.where((n2 > tiny)[:, None], v2 / np.maximum(n2, tiny)[:, None], s2)
        v3 = data.r3 + s2 @ data.g
        n3 = np.linalg.norm(v3, axis=1)
        s3 = np.where((n3 > tiny)[:, None], v3 / np.maximum(n3, tiny)[:, None], s3)
        stuck = (n2 <= tiny) & (n3 <= tiny)
        if stuck.any():
            if redraws >= 10 * restarts:
                if stuck.all():
                    raise RuntimeError("every restart hit a degenerate update")
            else:
                k = int(stuck.sum())
                s2[stuck], s3[stuck] = _unit_rows(rng, k), _unit_rows(rng, k)
                redraws += k
        new = _bloch_values(data, np.stack([s2, s3], axis=1))
        if accelerate:
            pair, new = _extrapolate(lambda x: _bloch_values(data, x), prev, np.stack([s2, s3], axis=1), new)
            s2, s3 = pair[:, 0].copy(), pair[:, 1].copy()
        w2 = data.r2 + s3 @ data.g.T
        w3 = data.r3 + s2 @ data.g
        res = np.maximum(
            np.linalg.norm(w2 - np.linalg.norm(w2, axis=1)[:, None] * s2, axis=1),
            np.linalg.norm(w3 - np.linalg.norm(w3, axis=1)[:, None] * s3, axis=1),
        )
        done = (new - value < tol) & (res < residual_tol)
        value = new
        # restarts crawling toward a flat, already-attained maximum need not finish
        if done[int(np.argmax(np.round(value, 14)))]:
            break
    best = int(np.argmax(np.round(value, 14)))
    b2, b3 = s2[best], s3[best]
    lam1 = float(np.linalg.norm(data.r2 + data.g @ b3))
    lam2 = float(np.linalg.norm(data.r3 + data.g.T @ b2))
    point = StationaryPoint.at(data, b2, b3, lam1, lam2, branch="numeric")

    keep = [q for q in range(3) if q != traced]
    factors = np.zeros((1, 3, 2), dtype=complex)
    factors[0, keep[0]] = ket_from_bloch_vector(b2)
    factors[0, keep[1]] = ket_from_bloch_vector(b3)
    v = _contract(state.tensor(), factors, (traced,))[0]
    factors[0, traced] = v / np.linalg.norm(v)
    result = GroverianResult(
        p_max=point.value,
        maximizer=ProductState(tuple(factors[0])),
        method="bloch",
        restarts_used=restarts + redraws,
        converged=bool(done[best]),
    )
    return result, point


def stationary_second1(a: float, b: float) -> list[StationaryPoint]:
    """Closed-form stationary points for a|000> + b|010> + c|100> + |111>/sqrt2.

    Branch ``"first"``: s3z = ((a^2-b^2) + 2b^2(a^2+b^2)) / ((a^2+b^2)(1-2b^2))
    with s3x = 2ab sqrt(1-2(a^2+b^2)) / ((a^2+b^2)(1-2b^2)),
    s2 = (2ab, 0, a^2-b^2)/(a^2+b^2), Lambda1 = 1, Lambda2 = 1-2b^2.

    Branch ``"second"``: s3z = +-b sqrt((1-2(a^2+b^2)) / ((a^2-b^2)(1-2b^2))),
    s3x = +-sqrt(1-s3z^2) (sign picked to minimize the Lagrange residual) and
    s2 the normalized r2 + g s3.  These points are returned as the formula
    states them; their ``residual`` field records how well they actually
    satisfy the multiplier equations.
    """
    s = a * a + b * b
    if s > 0.5 + TOL.algebra or a < 0 or b < 0:
        raise ValueError("need a, b >= 0 with a^2 + b^2 <= 1/2")
    d = 1 - 2 * b * b
    q = math.sqrt(max(0.0, 1 - 2 * s))
    data = BlochData(
        np.array([2 * a * b, 0.0, -2 * b * b]),
        np.zeros(3),
        np.array([[q, 0.0, 2 * a * b], [0.0, -q, 0.0], [0.0, 0.0, d]]),
    )
    points = []
    if s > 0 and d > 0:
        s3 = np.array([2 * a * b * q, 0.0, (a * a - b * b) + 2 * b * b * s]) / (s * d)
        s2 = np.array([2 * a * b, 0.0, a * a - b * b]) / s
        points.append(StationaryPoint.at(data, s2, s3, 1.0, d, branch="first"))
    denom = (a * a - b * b) * d
    if abs(a * a - b * b) > TOL.algebra and d > 0:
        arg = (1 - 2 * s) / denom
        if arg >= 0 and b * b * arg <= 1.0:
            z = b * math.sqrt(arg)
            for sz in (z, -z) if z > 0 else (z,):
                best = None
                for sx in (math.sqrt(1 - sz * sz), -math.sqrt(1 - sz * sz)):
                    s3 = np.array([sx, 0.0, sz])
                    v = data.r2 + data.g @ s3
                    if np.linalg.norm(v) < 1e-14:
                        continue
                    p = StationaryPoint.at(data, v / np.linalg.norm(v), s3, branch="second")
                    if best is None or p.residual < best.residual:
                        best = p
                if best is not None:
                    points.append(best)
    return points


def ghz_like_bloch_data(a: float, b: float) -> BlochData:
    """Bloch data of the GHZ-like family traced over qubit 0, in closed form."""
    s = a * a + b * b
    q = math.sqrt(max(0.0, 1 - 2 * s))
    return BlochData(
        np.array([2 * a * b, 0.0, -2 * b * b]),
        np.zeros(3),
        np.array([[q, 0.0, 2 * a * b], [0.0, -q, 0.0], [0.0, 0.0, 1 - 2 * b * b]]),
    )


def enumerate_stationary(data: BlochData, starts: int = 400, seed=0, tol: float = 1e-11) -> list[StationaryPoint]:
    """All Lagrange stationary points of the Bloch objective found by Newton
    root-finding from random starts, deduplicated, sorted by value descending."""
    rng = np.random.default_rng(seed)

    def eqs(x):
        s2, s3, l1, l2 = x[:3], x[3:6], x[6], x[7]
        return np.r_[data.r2 + data.g @ s3 - l1 * s2, data.r3 + data.g.T @ s2 - l2 * s3, s2 @ s2 - 1, s3 @ s3 - 1]

    found: list[StationaryPoint] = []
    for _ in range(starts):
        x0 = rng.normal(size=8)
        x0[:3] /= np.linalg.norm(x0[:3])
        x0[3:6] /= np.linalg.norm(x0[3:6])
        sol = root(eqs, x0, tol=1e-14)
        if np.linalg.norm(eqs(sol.x)) > tol:
            continue
        p = StationaryPoint.at(data, sol.x[:3], sol.x[3:6], sol.x[6], sol.x[7], branch="numeric")
        if not any(np.allclose(p.s2, f.s2, atol=1e-7) and np.allclose(p.s3, f.s3, atol=1e-7) for f in found):
            found.append(p)
    return sorted(found, key=lambda p: -p.value)


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------


def circumradius(a: float, b: float, c: float) -> float:
    """R = abc / (4 Area) with Heron's area."""
    sides = sorted((a, b, c))
    if sides[0] < 0:
        raise ValueError("side lengths must be nonnegative")
    # Kahan's stable ordering of Heron's product
    z, y, x = sides
    prod = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))
    if prod <= 0 or min(sides) == 0:
        raise ValueError(f"degenerate triangle ({a}, {b}, {c})")
    area = 0.25 * math.sqrt(prod)
    return a * b * c / (4 * area)


def pmax_generalized_w(a: float, b: float, c: float, boundary_tol: float = TOL.boundary) -> tuple[float, str]:
    """P_max of a|001> + b|010> + c|100> with its closed-form branch.

    ``"vertex"``: alpha^2 = max coefficient^2 when alpha^2 >= beta^2 + gamma^2.
    ``"circumradius"``: 4R^2 of the triangle (a, b, c) otherwise.  Within
    ``boundary_tol`` of the right-triangle cone the circumradius branch is
    reported; a right triangle with a zero leg has the limiting value alpha^2.
    """
    if min(a, b, c) < 0:
        raise ValueError("coefficients must be nonnegative")
    norm = a * a + b * b + c * c
    if abs(norm - 1.0) > TOL.algebra:
        raise ValueError(f"coefficients are not normalized (sum of squares {norm!r})")
    alpha, beta, gamma = sorted((a, b, c), reverse=True)
    gap = alpha**2 - beta**2 - gamma**2
    if gap > boundary_tol:
        return alpha**2, "vertex"
    if gamma <= 1e-12 * alpha or beta + gamma - alpha <= 1e-15:
        return alpha**2, "circumradius"
    assert alpha < beta + gamma
    r = circumradius(a, b, c)
    return 4 * r * r, "circumradius"


@dataclass(frozen=True)
class QuadrangleSpec:
    a: tuple
    ordered: tuple
    applicable: bool

    @classmethod
    def of(cls, a1, a2, a3, a4) -> "QuadrangleSpec":
        coeffs = (float(a1), float(a2), float(a3), float(a4))
        if min(coeffs) < 0:
            raise ValueError("coefficients must be nonnegative")
        if abs(sum(x * x for x in coeffs) - 1.0) > TOL.algebra:
            raise ValueError("coefficients are not normalized")
        al, be, ga, de = sorted(coeffs, reverse=True)
        ok = al**2 <= be**2 + ga**2 + de**2 + 2 * be * ga * de / al + TOL.algebra
        return cls(coeffs, (al, be, ga, de), ok)


def pmax_quadrangle(a1: float, a2: float, a3: float, a4: float) -> float:
    """4R^2 for the cyclic quadrangle with sides a1..a4.

    Coefficients are those of a1|100> + a2|010> + a3|001> + a4|111>.
    R^2 = (a1a2 + a3a4)(a1a3 + a2a4)(a1a4 + a2a3) / (4w^2 - r^2) with
    w = a1a2 + a3a4 and r = a1^2 + a2^2 - a3^2 - a4^2.
    """
    spec = QuadrangleSpec.of(a1, a2, a3, a4)
    if not spec.applicable:
        raise ValueError("formula branch not applicable: alpha^2 > beta^2+gamma^2+delta^2+2 beta gamma delta/alpha")
    w = a1 * a2 + a3 * a4
    r = a1 * a1 + a2 * a2 - a3 * a3 - a4 * a4
    den = 4 * w * w - r * r
    if abs(den) < 1e-14:
        raise ValueError("degenerate quadrangle (4w^2 = r^2)")
    r_sq = (a1 * a2 + a3 * a4) * (a1 * a3 + a2 * a4) * (a1 * a4 + a2 * a3) / den
    return 4 * r_sq
