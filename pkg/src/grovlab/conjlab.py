"""State families, parameter scans and the P_max = 1/2 teleportation experiment."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import brentq

from . import groverian as gv
from .protocols import superdense_check, teleport_feasible
from .qcore import TOL, PureState, qubit, random_state, random_unitary

SQRT_HALF = math.sqrt(0.5)

FAMILIES = ("ghz", "w", "w1", "gw", "phi", "four_term", "ghz_like")
FAMILY_PARAMS = {
    "ghz": (),
    "w": (),
    "w1": (),
    "gw": ("a", "b", "c"),
    "phi": ("theta1", "phi1", "theta2", "phi2"),
    "four_term": ("a", "b"),
    "ghz_like": ("a", "b"),
}
# phi1 is fixed to 0 in scans: a diagonal unitary on qubit 2 removes it
SCAN_AXES = {
    "gw": ("theta", "phi"),
    "phi": ("theta1", "theta2", "phi2"),
    "four_term": ("a", "b"),
    "ghz_like": ("r", "angle"),
}


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        fam = normalize_family(self.family)
        object.__setattr__(self, "family", fam)
        defaults = {"phi": {"theta1": 0.0, "phi1": 0.0, "theta2": math.pi, "phi2": 0.0}}
        params = {**defaults.get(fam, {}), **{k: float(v) for k, v in self.params.items()}}
        missing = [p for p in FAMILY_PARAMS[fam] if p not in params]
        extra = [p for p in params if p not in FAMILY_PARAMS[fam]]
        if missing or extra:
            raise ValueError(f"{fam} takes parameters {FAMILY_PARAMS[fam]}, got {sorted(params)}")
        object.__setattr__(self, "params", params)

    def key(self) -> tuple:
        return tuple(self.params[p] for p in FAMILY_PARAMS[self.family])


def normalize_family(name: str) -> str:
    fam = name.lower().replace("-", "_")
    if fam not in FAMILY_PARAMS:
        raise ValueError(f"unknown family {name!r}; choose from {FAMILIES}")
    return fam


def _sqrt_rest(x: float) -> float:
    """sqrt of a complementary weight; radicands at rounding level count as 0.

    Without this, a = 1/sqrt2 evaluated one ulp off gives a spurious 1e-8
    coefficient from sqrt(1e-16).
    """
    return math.sqrt(x) if x > 1e-15 else 0.0


def _amps(**terms) -> np.ndarray:
    v = np.zeros(8, dtype=complex)
    for bits, c in terms.items():
        v[int(bits[1:], 2)] = c
    return v


def family_state(spec: FamilySpec) -> PureState:
    p, fam = spec.params, spec.family
    tol = TOL.algebra
    if fam == "ghz":
        return PureState(_amps(k000=SQRT_HALF, k111=SQRT_HALF))
    if fam == "w":
        return PureState(_amps(k001=1, k010=1, k100=1) / math.sqrt(3))
    if fam == "w1":
        return PureState(_amps(k100=0.5, k010=0.5, k001=SQRT_HALF))
    if fam == "gw":
        a, b, c = p["a"], p["b"], p["c"]
        if min(a, b, c) < 0 or abs(a * a + b * b + c * c - 1) > tol:
            raise ValueError("gw needs nonnegative a, b, c with a^2 + b^2 + c^2 = 1")
        return PureState(_amps(k001=a, k010=b, k100=c))
    if fam == "phi":
        q1 = qubit(p["theta1"], p["phi1"])
        q2 = qubit(p["theta2"], p["phi2"])
        v = np.kron([1, 0, 0, 0], q1) + np.kron([0, 0, 0, 1], q2)
        return PureState(v / math.sqrt(2))
    if fam == "four_term":
        a, b = p["a"], p["b"]
        if not (-tol <= a <= SQRT_HALF + tol and -tol <= b <= SQRT_HALF + tol):
            raise ValueError("four_term needs 0 <= a, b <= 1/sqrt(2)")
        return PureState(
            _amps(
                k100=_sqrt_rest(0.5 - b * b),
                k010=b,
                k001=a,
                k111=_sqrt_rest(0.5 - a * a),
            )
        )
    if fam == "ghz_like":
        a, b = p["a"], p["b"]
        if a * a + b * b > 0.5 + tol:
            raise ValueError("ghz_like needs a^2 + b^2 <= 1/2")
        return PureState(_amps(k000=a, k010=b, k100=_sqrt_rest(0.5 - a * a - b * b), k111=SQRT_HALF))
    raise AssertionError(fam)


def quadrangle_sides(a: float, b: float) -> tuple:
    """(a1, a2, a3, a4) for the four-term family."""
    return (_sqrt_rest(0.5 - b * b), b, a, _sqrt_rest(0.5 - a * a))


def analytic_pmax(spec: FamilySpec) -> tuple[Optional[float], str]:
    """Closed-form P_max where one applies, with a tag naming the formula."""
    p, fam = spec.params, spec.family
    if fam == "ghz":
        return 0.5, "constant"
    if fam == "w":
        return gv.pmax_generalized_w(*(1 / math.sqrt(3),) * 3)
    if fam == "w1":
        return gv.pmax_generalized_w(SQRT_HALF, 0.5, 0.5)
    if fam == "gw":
        return gv.pmax_generalized_w(p["a"], p["b"], p["c"])
    if fam == "phi":
        return 0.5, "constant"
    if fam == "four_term":
        try:
            return gv.pmax_quadrangle(*quadrangle_sides(p["a"], p["b"])), "quadrangle"
        except ValueError:
            return None, "degenerate"
    if fam == "ghz_like":
        pts = [s for s in gv.stationary_second1(p["a"], p["b"]) if s.branch == "first"]
        if not pts:
            return None, "degenerate"
        return max(s.value for s in pts), "stationary"
    raise AssertionError(fam)


# --------------------------------------------------------------------------
# scans
# --------------------------------------------------------------------------


@dataclass
class ScanRecord:
    family: str
    params: dict
    pmax_numeric: float
    pmax_analytic: Optional[float]
    branch: str
    teleport: tuple
    dense: tuple
    necessary_ok: bool
    sufficient_ok: bool
    extra: dict = field(default_factory=dict)

    @property
    def consistent_with_conjecture(self) -> bool:
        return self.necessary_ok and self.sufficient_ok

    @property
    def any_teleport(self) -> bool:
        return any(self.teleport)

    def flat(self) -> dict:
        row = {"family": self.family, **self.params, **self.extra}
        row.update(
            pmax_numeric=self.pmax_numeric,
            pmax_analytic=self.pmax_analytic,
            branch=self.branch,
        )
        row.update({f"teleport_bob{k}": v for k, v in enumerate(self.teleport)})
        row.update({f"dense_alice{k}": v for k, v in enumerate(self.dense)})
        row.update(necessary_ok=self.necessary_ok, sufficient_ok=self.sufficient_ok)
        return row


def evaluate_state(
    state: PureState,
    family: str,
    params: dict,
    seed,
    tol: float = TOL.conjecture,
    analytic: tuple = (None, ""),
    restarts: int = gv.DEFAULT_RESTARTS,
) -> ScanRecord:
    num = gv.pmax_alternating(state, restarts=restarts, seed=seed)
    tele = tuple(teleport_feasible(state, k) for k in range(3))
    dense = tuple(superdense_check(state, k).feasible for k in range(3))
    half = abs(num.p_max - 0.5) < tol
    return ScanRecord(
        family=family,
        params=dict(params),
        pmax_numeric=num.p_max,
        pmax_analytic=analytic[0],
        branch=analytic[1],
        teleport=tele,
        dense=dense,
        necessary_ok=(not any(tele)) or half,
        sufficient_ok=(not half) or any(tele),
        extra={"converged": num.converged},
    )


def family_grid(family: str, grid: int) -> list[FamilySpec]:
    """Parameter points, inclusive endpoints, in row-major grid order."""
    fam = normalize_family(family)
    if grid < 1:
        raise ValueError("empty grid")
    if fam in ("ghz", "w", "w1"):
        return [FamilySpec(fam)]
    if grid < 2:
        raise ValueError("grid needs at least 2 points per axis for parametric families")
    if fam == "four_term":
        xs = np.linspace(0.0, SQRT_HALF, grid)
        return [FamilySpec(fam, {"a": a, "b": b}) for a, b in itertools.product(xs, xs)]
    if fam == "ghz_like":
        rs = np.linspace(0.0, SQRT_HALF, grid)
        ts = np.linspace(0.0, math.pi / 2, grid)
        return [
            FamilySpec(fam, {"a": r * math.cos(t), "b": r * math.sin(t)}) for r, t in itertools.product(rs, ts)
        ]
    if fam == "gw":
        ang = np.linspace(0.0, math.pi / 2, grid)
        out = []
        for th, ph in itertools.product(ang, ang):
            a, b, c = math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)
            n = math.sqrt(a * a + b * b + c * c)
            out.append(FamilySpec(fam, {"a": a / n, "b": b / n, "c": c / n}))
        return out
    if fam == "phi":
        th = np.linspace(0.0, math.pi, grid)
        ph = np.linspace(0.0, 2 * math.pi, grid, endpoint=False)
        return [
            FamilySpec(fam, {"theta1": t1, "phi1": 0.0, "theta2": t2, "phi2": p2})
            for t1, t2, p2 in itertools.product(th, th, ph)
        ]
    raise ValueError(f"unknown family {family!r}")


def scan_family(
    family: str,
    grid=21,
    tol: float = TOL.conjecture,
    seed: int = 0,
    restarts: int = gv.DEFAULT_RESTARTS,
) -> list[ScanRecord]:
    """One record per grid point; point i is optimized with seed (seed, i).

    ``grid`` is either a per-axis point count or an explicit list of
    parameter dicts.
    """
    if isinstance(grid, int):
        specs = family_grid(family, grid)
    else:
        specs = [FamilySpec(family, g) for g in grid]
    if not specs:
        raise ValueError("empty grid")
    if len(specs) > 100_000:
        raise ValueError("grid exceeds 1e5 points")
    records = []
    for i, spec in enumerate(specs):
        state = family_state(spec)
        rec = evaluate_state(state, spec.family, spec.params, [seed, i], tol, analytic_pmax(spec), restarts)
        if spec.family == "phi":
            q1 = qubit(spec.params["theta1"], spec.params["phi1"])
            q2 = qubit(spec.params["theta2"], spec.params["phi2"])
            rec.extra["q_overlap"] = float(abs(np.vdot(q1, q2)))
        records.append(rec)
    return records


def random_feasible_state(rng: np.random.Generator) -> tuple[PureState, int]:
    """Random resource whose Bob qubit (random slot) is maximally entangled.

    Built as (|A0>|0> + |A1>|1>)/sqrt2 with a Haar-random orthonormal pair
    on Alice's two qubits, a Haar unitary on Bob, and Bob moved to a random slot.
    """
    u = random_unitary(4, rng)
    ub = random_unitary(2, rng)
    t = (np.kron(u[:, 0], ub[:, 0]) + np.kron(u[:, 1], ub[:, 1])) / math.sqrt(2)
    bob = int(rng.integers(3))
    order = [0, 1]
    order.insert(bob, 2)
    t = np.transpose(t.reshape(2, 2, 2), order).reshape(-1)
    return PureState(t / np.linalg.norm(t)), bob


def counterexample_search(
    n_states: int = 10_000,
    seed: int = 0,
    tol: float = TOL.conjecture,
    feasible_fraction: float = 0.5,
    restarts: int = gv.DEFAULT_RESTARTS,
) -> list[ScanRecord]:
    """Random 3-qubit resources, a share of them constructed to be teleportation-feasible.

    Haar-random states are almost never feasible, so without the constructed
    stratum the necessary direction would be tested vacuously.
    """
    rng = np.random.default_rng(seed)
    n_feasible = int(round(n_states * feasible_fraction))
    records = []
    for i in range(n_states):
        if i < n_feasible:
            state, bob = random_feasible_state(rng)
            fam, params = "random_feasible", {"index": i, "bob": bob}
        else:
            state = random_state(3, rng)
            fam, params = "random_haar", {"index": i}
        records.append(evaluate_state(state, fam, params, [seed, i], tol, restarts=restarts))
    return records


# --------------------------------------------------------------------------
# singular states of the generalized W family
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SingularClass:
    cls: str  # "inside" | "on-circle" | "outside"
    p_max: float
    branch: str
    gap: float  # alpha^2 - beta^2 - gamma^2


def classify_singular(a: float, b: float, c: float, band: float = TOL.boundary) -> SingularClass:
    alpha, beta, gamma = sorted((a, b, c), reverse=True)
    gap = alpha**2 - beta**2 - gamma**2
    if abs(gap) <= band:
        cls = "on-circle"
    elif gap < 0:
        cls = "inside"
    else:
        cls = "outside"
    p, branch = gv.pmax_generalized_w(a, b, c, boundary_tol=band)
    return SingularClass(cls, p, branch, gap)


def kappa_coefficients(kappa: float) -> tuple:
    a = 1 / math.sqrt(1 + kappa**2 + kappa**4)
    return a, kappa * a, kappa**2 * a


def kappa_pmax(kappa: float) -> tuple[float, str]:
    return gv.pmax_generalized_w(*kappa_coefficients(kappa))


def _kappa_gap(kappa: float) -> float:
    a, b, c = sorted(kappa_coefficients(kappa), reverse=True)
    return a * a - b * b - c * c


@dataclass(frozen=True)
class Crossing:
    kappa: float
    p_left: float
    p_right: float
    p_at: float
    deriv_left: float
    deriv_right: float
    noise_floor: float
    second_left: float = float("nan")
    second_right: float = float("nan")

    @property
    def jump(self) -> float:
        return abs(self.deriv_right - self.deriv_left)

    @property
    def continuous(self) -> bool:
        return abs(self.p_right - self.p_left) < 1e-8

    @property
    def derivative_jump(self) -> bool:
        return self.jump > 10 * self.noise_floor

    @property
    def second_jump(self) -> float:
        return abs(self.second_right - self.second_left)


@dataclass(frozen=True)
class KappaSweep:
    points: list  # (kappa, p_max, dP/dkappa centered estimate, branch)
    crossings: list  # Crossing
    flagged: list  # grid indices whose centered stencil straddles a crossing


def _one_sided(f, x, h, side):
    # second-order one-sided difference
    s = 1 if side > 0 else -1
    return s * (-3 * f(x) + 4 * f(x + s * h) - f(x + 2 * s * h)) / (2 * h)


def _one_sided_second(f, x, h, side):
    s = 1 if side > 0 else -1
    return (2 * f(x) - 5 * f(x + s * h) + 4 * f(x + 2 * s * h) - f(x + 3 * s * h)) / h**2


def analyse_crossing(kappa_star: float, h: float = 1e-4) -> Crossing:
    f = lambda k: kappa_pmax(k)[0]  # noqa: E731
    eps = 1e-12
    d_left = _one_sided(f, kappa_star - eps, h, -1)
    d_right = _one_sided(f, kappa_star + eps, h, +1)
    # noise floor: disagreement of each one-sided estimate with its half-step version
    noise = max(
        abs(d_left - _one_sided(f, kappa_star - eps, h / 2, -1)),
        abs(d_right - _one_sided(f, kappa_star + eps, h / 2, +1)),
        np.finfo(float).eps / h,
    )
    return Crossing(
        kappa=kappa_star,
        p_left=f(kappa_star - eps),
        p_right=f(kappa_star + eps),
        p_at=f(kappa_star),
        deriv_left=d_left,
        deriv_right=d_right,
        noise_floor=float(noise),
        second_left=_one_sided_second(f, kappa_star - eps, 1e-3, -1),
        second_right=_one_sided_second(f, kappa_star + eps, 1e-3, +1),
    )


def kappa_sweep(kappa_min: float, kappa_max: float, steps: int) -> KappaSweep:
    """P_max along b = kappa a, c = kappa^2 a with centered derivatives.

    Right-triangle crossings are located by root-finding the branch condition
    and checked for continuity and a one-sided derivative jump.
    """
    if not 0 < kappa_min < kappa_max:
        raise ValueError("need 0 < kappa_min < kappa_max")
    if steps < 3:
        raise ValueError("need at least 3 steps")
    ks = np.linspace(kappa_min, kappa_max, steps)
    vals = [kappa_pmax(k) for k in ks]
    ps = np.array([v[0] for v in vals])
    deriv = np.gradient(ps, ks)
    gaps = np.array([_kappa_gap(k) for k in ks])
    crossings, flagged = [], []
    for i in range(steps - 1):
        if gaps[i] == 0 or np.sign(gaps[i]) != np.sign(gaps[i + 1]):
            if gaps[i] == 0:
                k_star = float(ks[i])
            else:
                k_star = brentq(_kappa_gap, ks[i], ks[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            crossings.append(analyse_crossing(k_star))
            flagged.extend(j for j in (i, i + 1) if j not in flagged)
    points = [(float(k), float(p), float(d), v[1]) for k, p, d, v in zip(ks, ps, deriv, vals)]
    return KappaSweep(points, crossings, flagged)


KAPPA_STAR = math.sqrt((math.sqrt(5) - 1) / 2)


# --------------------------------------------------------------------------
# conjecture summary
# --------------------------------------------------------------------------


def conjecture_report(records: Iterable[ScanRecord], tol: float = TOL.conjecture) -> dict:
    """Counts and full parameter tuples of every record violating either direction.

    The sufficiency direction is descriptive: a violation there is a state
    with P_max = 1/2 but no perfect-teleportation assignment.
    """
    records = list(records)
    if not records:
        raise ValueError("no records")
    nec = [r for r in records if not r.necessary_ok]
    suf = [r for r in records if not r.sufficient_ok]
    feasible = [r for r in records if r.any_teleport]
    half = [r for r in records if abs(r.pmax_numeric - 0.5) < tol]
    by_family: dict = {}
    for r in records:
        fam = by_family.setdefault(
            r.family, {"points": 0, "teleport_feasible": 0, "pmax_half": 0, "necessary_violations": 0, "sufficient_violations": 0}
        )
        fam["points"] += 1
        fam["teleport_feasible"] += r.any_teleport
        fam["pmax_half"] += abs(r.pmax_numeric - 0.5) < tol
        fam["necessary_violations"] += not r.necessary_ok
        fam["sufficient_violations"] += not r.sufficient_ok
    dev = [abs(r.pmax_numeric - 0.5) for r in feasible]
    return {
        "points": len(records),
        "teleport_feasible": len(feasible),
        "pmax_half": len(half),
        "necessary_violations": len(nec),
        "sufficient_violations": len(suf),
        "max_feasible_deviation_from_half": max(dev) if dev else None,
        "necessary_violation_params": [{"family": r.family, **r.params, "pmax": r.pmax_numeric} for r in nec],
        "sufficient_violation_params": [{"family": r.family, **r.params, "pmax": r.pmax_numeric} for r in suf],
        "by_family": by_family,
        "summary": f"{len(records)} point{'s' if len(records) != 1 else ''}, {len(nec)} violation{'s' if len(nec) != 1 else ''}",
        "note": "necessary direction: feasible teleportation implies P_max = 1/2; "
        "sufficient direction is reported as evidence only",
    }
