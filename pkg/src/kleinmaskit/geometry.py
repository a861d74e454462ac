"""Round spheres and balls in the compactified R^n, plus half-space geometry.

Closed balls are handled in inversive coordinates: a ball is
{x : alpha |x|^2 - 2 b.x + gamma <= 0} with |b|^2 - alpha gamma = 1, so
spheres, complements of spheres and half-spaces share one predicate set.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import ContractError
from .moebius import (
    INF,
    AffineDecomposition,
    VahlenMatrix,
    apply,
    chordal_distance,
    decompose,
    image_of_infinity,
    is_inf,
    poincare_apply,
    stereo_drop,
    stereo_lift,
)

DELTA_GEO = 1e-9


class Tri(enum.Enum):
    YES = "yes"
    NO = "no"
    MARGINAL = "marginal"

    def __bool__(self):
        raise TypeError("tri-state verdicts have no truth value; compare with Tri.YES")


@dataclass(frozen=True, eq=False)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0 or not np.all(np.isfinite(c)):
            raise ContractError("sphere needs finite center and positive radius")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def to_dict(self) -> dict:
        return {"type": "euclidean", "center": [float(v) for v in self.center], "radius": self.radius}

    def __repr__(self):
        return f"Sphere(center={np.round(self.center, 12).tolist()}, radius={self.radius:.12g})"


@dataclass(frozen=True, eq=False)
class Plane:
    """Hyperplane u.x = s together with infinity."""
    normal: np.ndarray
    offset: float

    def __post_init__(self):
        u = np.asarray(self.normal, dtype=float)
        nu = np.linalg.norm(u)
        if not nu > 0:
            raise ContractError("plane normal must be nonzero")
        object.__setattr__(self, "normal", u / nu)
        object.__setattr__(self, "offset", float(self.offset) / nu)

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def to_dict(self) -> dict:
        return {"type": "plane", "normal": [float(v) for v in self.normal], "offset": self.offset}

    def __repr__(self):
        return f"Plane(normal={np.round(self.normal, 12).tolist()}, offset={self.offset:.12g})"


RoundSphere = Sphere | Plane


def sphere_from_dict(d: dict) -> RoundSphere:
    kind = d.get("type")
    if kind == "euclidean":
        return Sphere(np.asarray(d["center"], dtype=float), float(d["radius"]))
    if kind == "plane":
        return Plane(np.asarray(d["normal"], dtype=float), float(d["offset"]))
    raise ContractError(f"unknown sphere type {kind!r}")


SIDES = {Sphere: ("inside", "outside"), Plane: ("below", "above")}


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed ball bounded by ``sphere``; side is inside/outside or below/above (u.x <= s / >= s)."""
    sphere: RoundSphere
    side: str

    def __post_init__(self):
        if self.side not in SIDES[type(self.sphere)]:
            raise ContractError(f"side {self.side!r} invalid for {type(self.sphere).__name__}")

    @property
    def dim(self) -> int:
        return self.sphere.dim

    def complement(self) -> "Ball":
        a, b = SIDES[type(self.sphere)]
        return Ball(self.sphere, b if self.side == a else a)

    def vector(self):
        """(alpha, b, gamma) with the ball equal to {q <= 0}."""
        S = self.sphere
        if isinstance(S, Sphere):
            c, r = S.center, S.radius
            v = (1.0 / r, c / r, (c @ c - r * r) / r)
            sgn = 1.0 if self.side == "inside" else -1.0
        else:
            v = (0.0, -S.normal, -2.0 * S.offset)
            sgn = 1.0 if self.side == "below" else -1.0
        return sgn * v[0], sgn * v[1], sgn * v[2]

    def q(self, x) -> float:
        """Defining form scaled by 1/(1+|x|^2); at infinity this is alpha."""
        al, b, ga = self.vector()
        if is_inf(x):
            return al
        x = np.asarray(x, dtype=float)
        s = x @ x
        return (al * s - 2 * b @ x + ga) / (1.0 + s)

    def to_dict(self) -> dict:
        return {"sphere": self.sphere.to_dict(), "side": self.side}

    def __repr__(self):
        return f"Ball({self.sphere!r}, {self.side})"


@dataclass(frozen=True, eq=False)
class BallPair:
    sphere: RoundSphere
    b1_side: str

    def __post_init__(self):
        if self.b1_side not in SIDES[type(self.sphere)]:
            raise ContractError(f"side {self.b1_side!r} invalid for {type(self.sphere).__name__}")

    @property
    def b2_side(self) -> str:
        a, b = SIDES[type(self.sphere)]
        return b if self.b1_side == a else a

    def ball(self, m: int) -> Ball:
        return Ball(self.sphere, self.b1_side if m == 1 else self.b2_side)

    def side(self, p, delta: float = DELTA_GEO):
        """1 or 2 for the open ball containing p, 0 on the sphere (within the band)."""
        s = side_of(self.ball(1), p, delta)
        return {"inside": 1, "outside": 2, "on": 0}[s]

    def to_dict(self) -> dict:
        return {**self.sphere.to_dict(), "b1": self.b1_side}


def side_tests(pair: BallPair, p, delta: float = DELTA_GEO):
    return pair.side(p, delta)


def side_of(ball: Ball, p, delta: float = DELTA_GEO) -> str:
    """'inside' (open ball), 'outside' (open complement) or 'on' (tolerance band)."""
    S = ball.sphere
    inner = ball.side in ("inside", "below")
    if is_inf(p):
        if isinstance(S, Plane):
            return "on"
        return "outside" if inner else "inside"
    x = np.asarray(p, dtype=float)
    if isinstance(S, Sphere):
        dist = float(np.linalg.norm(x - S.center))
        val = dist - S.radius
        band = delta * max(S.radius, dist)
    else:
        val = float(S.normal @ x - S.offset)
        band = delta * max(1.0, abs(S.offset), float(np.linalg.norm(x)))
    if abs(val) <= band:
        return "on"
    return "inside" if (val < 0) == inner else "outside"


def sample_sphere(S: RoundSphere, k: int, rng=None) -> np.ndarray:
    """k finite points on S (planes sampled in a unit-scale disc around the foot point)."""
    rng = np.random.default_rng(0) if rng is None else rng
    n = S.dim
    dirs = rng.normal(size=(k, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    if isinstance(S, Sphere):
        return S.center + S.radius * dirs
    u = S.normal
    tang = dirs - np.outer(dirs @ u, u)
    scale = np.tan(rng.uniform(0, 1.4, size=(k, 1)))
    return S.offset * u + tang * scale


def _sphere_probe_points(S: RoundSphere) -> list:
    n = S.dim
    E = np.eye(n)
    if isinstance(S, Sphere):
        return [S.center + S.radius * s * e for e in E for s in (1.0, -1.0)]
    u = S.normal
    base = S.offset * u
    pts = [INF, base]
    for e in E:
        w = e - (e @ u) * u
        nw = np.linalg.norm(w)
        if nw > 1e-6:
            pts += [base + w / nw, base - w / nw]
    return pts


# images under Moebius maps

def image_sphere(g: VahlenMatrix, S: RoundSphere) -> RoundSphere:
    dec = decompose(g)
    if isinstance(dec, AffineDecomposition):
        A, lam, t = dec.A, dec.scale, dec.t
        if isinstance(S, Sphere):
            return Sphere(lam * A @ S.center + t, lam * S.radius)
        Au = A @ S.normal
        return Plane(Au, lam * S.offset + Au @ t)
    a, b, r, A = dec.a, dec.b, dec.r, dec.A
    r2 = r * r
    # inversion in the sphere (b, r)
    if isinstance(S, Sphere):
        cp = S.center - b
        D = cp @ cp - S.radius ** 2
        if abs(D) <= 1e-12 * (cp @ cp + S.radius ** 2):
            nc = math.sqrt(cp @ cp)
            u = cp / nc
            inv = Plane(u, u @ b + r2 / (2 * nc))
        else:
            inv = Sphere(b + r2 * cp / D, r2 * S.radius / abs(D))
    else:
        u = S.normal
        sp = S.offset - u @ b
        if abs(sp) <= 1e-12 * (1.0 + abs(S.offset) + abs(u @ b)):
            inv = Plane(u, u @ b)
        else:
            inv = Sphere(b + r2 * u / (2 * sp), r2 / (2 * abs(sp)))
    # then x -> a + A (x - b)
    if isinstance(inv, Sphere):
        return Sphere(a + A @ (inv.center - b), inv.radius)
    Au = A @ inv.normal
    return Plane(Au, inv.offset - inv.normal @ b + Au @ a)


def _interior_candidates(ball: Ball) -> list:
    S = ball.sphere
    n = ball.dim
    E = np.eye(n)
    if isinstance(S, Sphere):
        c, r = S.center, S.radius
        if ball.side == "inside":
            return [c] + [c + 0.5 * r * s * e for e in E for s in (1, -1)]
        return [INF] + [c + 2.0 * r * s * e for e in E for s in (1, -1)]
    sgn = -1.0 if ball.side == "below" else 1.0
    base = S.offset * S.normal + sgn * S.normal
    return [base, base + sgn * S.normal] + [base + e for e in E]


def image_ball(g: VahlenMatrix, ball: Ball, delta: float = DELTA_GEO) -> Ball:
    S2 = image_sphere(g, ball.sphere)
    names = SIDES[type(S2)]
    best = None
    for q in _interior_candidates(ball):
        y = apply(g, q)
        if is_inf(y) and isinstance(S2, Plane):
            continue
        s = side_of(Ball(S2, names[0]), y, delta)
        if s == "on":
            continue
        best = names[0] if s == "inside" else names[1]
        break
    if best is None:
        raise ContractError("could not orient image ball")
    return Ball(S2, best)


def _same_sphere(S1: RoundSphere, S2: RoundSphere, tol: float) -> bool:
    """Centre and radius (or normal and offset) agree relative to the sphere's own size."""
    if isinstance(S1, Sphere) and isinstance(S2, Sphere):
        r = max(S1.radius, S2.radius)
        return bool(np.linalg.norm(S1.center - S2.center) + abs(S1.radius - S2.radius) <= tol * r)
    if isinstance(S1, Plane) and isinstance(S2, Plane):
        s = max(1.0, abs(S1.offset), abs(S2.offset))
        same = np.linalg.norm(S1.normal - S2.normal) <= tol and abs(S1.offset - S2.offset) <= tol * s
        flip = np.linalg.norm(S1.normal + S2.normal) <= tol and abs(S1.offset + S2.offset) <= tol * s
        return bool(same or flip)
    return False


def spheres_equal(S1: RoundSphere, S2: RoundSphere, tol: float = 1e-9) -> bool:
    return _same_sphere(S1, S2, tol)


# pairwise ball relations

def _pairing(A: Ball, B: Ball):
    """Inversive product of the two ball vectors, computed without cancellation,
    and the size of the terms it is built from (for the tolerance band)."""
    SA, SB = A.sphere, B.sphere
    sgn = (1.0 if A.side in ("inside", "below") else -1.0) * (1.0 if B.side in ("inside", "below") else -1.0)
    if isinstance(SA, Sphere) and isinstance(SB, Sphere):
        d2 = float(np.sum((SA.center - SB.center) ** 2))
        rr = 2.0 * SA.radius * SB.radius
        p = (SA.radius ** 2 + SB.radius ** 2 - d2) / rr
        scale = 1.0 + (SA.radius ** 2 + SB.radius ** 2 + d2) / rr
    elif isinstance(SA, Plane) and isinstance(SB, Plane):
        p = float(SA.normal @ SB.normal)
        scale = 1.0
    else:
        P, Q = (SA, SB) if isinstance(SA, Plane) else (SB, SA)
        h = float(P.offset - P.normal @ Q.center)
        p = h / Q.radius
        scale = 1.0 + (abs(P.offset) + abs(P.normal @ Q.center)) / Q.radius
    return sgn * p, scale


def _signed(B: Ball, x) -> float:
    """Negative inside the closed ball B, positive outside; relative to B's size."""
    S = B.sphere
    inner = B.side in ("inside", "below")
    if is_inf(x):
        if isinstance(S, Plane):
            return 0.0
        val = 1.0
    elif isinstance(S, Sphere):
        val = (float(np.linalg.norm(np.asarray(x, dtype=float) - S.center)) - S.radius) / S.radius
    else:
        val = float(S.normal @ np.asarray(x, dtype=float) - S.offset)
    return val if inner else -val


def relation(A: Ball, B: Ball, delta: float = DELTA_GEO) -> str:
    """One of equal, complement, cross, disjoint, cover, a_in_b, b_in_a,
    tangent_out (p ~ -1, A nearly outside B), tangent_in (p ~ +1)."""
    if _same_sphere(A.sphere, B.sphere, delta):
        if isinstance(A.sphere, Plane) and A.sphere.normal @ B.sphere.normal < 0:
            same_side = A.side != B.side
        else:
            same_side = A.side == B.side
        return "equal" if same_side else "complement"
    p, scale = _pairing(A, B)
    band = delta * scale
    if abs(p) < 1.0 - band:
        return "cross"
    vals = [_signed(B, x) for x in _sphere_probe_points(A.sphere)]
    k = int(np.argmax(np.abs(vals)))
    sa_outside_b = vals[k] > 0
    if abs(abs(p) - 1.0) <= band:
        if p < 0:
            return "tangent_out" if sa_outside_b else "cover"
        return "tangent_in"
    if p < 0:
        return "disjoint" if sa_outside_b else "cover"
    return "b_in_a" if sa_outside_b else "a_in_b"


def interiors_disjoint(A: Ball, B: Ball, delta: float = DELTA_GEO) -> Tri:
    rel = relation(A, B, delta)
    if rel in ("complement", "disjoint"):
        return Tri.YES
    if rel == "tangent_out":
        return Tri.MARGINAL
    return Tri.NO


def balls_disjoint(A: Ball, B: Ball, delta: float = DELTA_GEO) -> Tri:
    """Closed balls disjoint."""
    rel = relation(A, B, delta)
    if rel == "disjoint":
        return Tri.YES
    if rel == "tangent_out":
        return Tri.MARGINAL
    return Tri.NO


def ball_contains(A: Ball, B: Ball, delta: float = DELTA_GEO) -> Tri:
    """A contains B (closed balls)."""
    rel = relation(A, B, delta)
    if rel in ("equal", "b_in_a"):
        return Tri.YES
    if rel == "tangent_in":
        vals = [_signed(A, x) for x in _sphere_probe_points(B.sphere)]
        k = int(np.argmax(np.abs(vals)))
        return Tri.MARGINAL if vals[k] < 0 else Tri.NO
    return Tri.NO


def ball_strictly_contains(A: Ball, B: Ball, delta: float = DELTA_GEO) -> Tri:
    """A contains B and the boundary spheres do not meet."""
    rel = relation(A, B, delta)
    if rel == "b_in_a":
        return Tri.YES
    if rel == "tangent_in":
        return Tri.MARGINAL
    return Tri.NO


def spheres_cross(S1: RoundSphere, S2: RoundSphere, delta: float = DELTA_GEO) -> Tri:
    rel = relation(Ball(S1, SIDES[type(S1)][0]), Ball(S2, SIDES[type(S2)][0]), delta)
    if rel == "cross":
        return Tri.YES
    if rel in ("tangent_in", "tangent_out"):
        return Tri.MARGINAL
    return Tri.NO


# chordal diameters

def _extremal_points(S: RoundSphere):
    if isinstance(S, Sphere):
        c = S.center
        nc = np.linalg.norm(c)
        u = c / nc if nc > 1e-300 else np.eye(S.dim)[0]
        return c + S.radius * u, c - S.radius * u
    return S.offset * S.normal, INF


def chordal_diameter(obj) -> float:
    """Chordal diameter of a round sphere, or of a closed ball."""
    if isinstance(obj, Ball):
        S = obj.sphere
        diam = chordal_diameter(S)
        p1, p2 = _extremal_points(S)
        P1 = stereo_lift(p1)
        P2 = np.eye(S.dim + 1)[-1] if is_inf(p2) else stereo_lift(p2)
        M = 0.5 * (P1 + P2)
        nm = np.linalg.norm(M)
        if nm < 1e-15:
            return 2.0
        pole = stereo_drop(M / nm)
        return diam if side_of(obj, pole, 0.0) == "inside" else 2.0
    p1, p2 = _extremal_points(obj)
    return chordal_distance(p1, p2)


# Dirichlet half-spaces in upper half-space

@dataclass(frozen=True, eq=False)
class DirichletHalfSpace:
    """Points y of H^{n+1} with d(y, a) <= d(y, g a), bounded by ``wall``.

    For a Sphere wall ``inside`` selects the hemisphere interior; for a Plane
    wall it selects u.y <= s.
    """
    wall: RoundSphere
    inside: bool
    a: np.ndarray = field(repr=False)
    ga: np.ndarray = field(repr=False)

    def contains(self, y, delta: float = 0.0) -> bool:
        y = np.asarray(y, dtype=float)
        W = self.wall
        if isinstance(W, Sphere):
            d2 = float(np.sum((y[:-1] - W.center) ** 2) + y[-1] ** 2)
            val = d2 - W.radius ** 2
        else:
            val = float(W.normal @ y[:-1] - W.offset)
        return val <= delta if self.inside else val >= -delta


class DegenerateBisector(ValueError):
    pass


def dirichlet_halfspace(a, g: VahlenMatrix) -> DirichletHalfSpace:
    a = np.asarray(a, dtype=float)
    b = poincare_apply(g, a)
    if np.linalg.norm(b - a) <= 1e-12 * (1 + np.linalg.norm(a)):
        raise DegenerateBisector("g fixes the base point")
    ah, bh = a[-1], b[-1]
    if abs(bh - ah) <= 1e-12 * max(ah, bh):
        w = (b - a)[:-1]
        nw = np.linalg.norm(w)
        wall = Plane(w / nw, (b @ b - a @ a) / (2 * nw))
        return DirichletHalfSpace(wall, True, a, b)
    c = (bh * a - ah * b) / (bh - ah)
    r2 = c @ c - (bh * (a @ a) - ah * (b @ b)) / (bh - ah)
    return DirichletHalfSpace(Sphere(c[:-1], math.sqrt(r2)), bool(bh > ah), a, b)


# Euclidean stabilizers of infinity

@dataclass(frozen=True, eq=False)
class TranslationRank:
    k: int
    basis: np.ndarray  # rows are lattice vectors


def _isometry_parts(g: VahlenMatrix, tol: float):
    if not is_inf(image_of_infinity(g)):
        raise ContractError("translation_rank needs generators fixing infinity")
    dec = decompose(g)
    if abs(dec.scale - 1.0) > tol:
        raise ContractError("generator is not a Euclidean isometry")
    A = dec.A
    if np.abs(A.T @ A - np.eye(A.shape[0])).max() > 1e-8:
        raise ContractError("linear part is not orthogonal")
    return A, dec.t


def translation_rank(gens, depth: int = 8, tol: float = 1e-9, max_elements: int = 50_000) -> TranslationRank:
    if not gens:
        return TranslationRank(0, np.zeros((0, 0)))
    n = gens[0].dim_n
    parts = []
    for g in gens:
        A, t = _isometry_parts(g, tol)
        parts += [(A, t), (A.T, -A.T @ t)]

    def key(A, t):
        return tuple(np.round(np.concatenate([A.ravel(), t]) / 1e-7).astype(np.int64))

    seen = {key(np.eye(n), np.zeros(n))}
    frontier = [(np.eye(n), np.zeros(n))]
    transl = []
    for _ in range(depth):
        nxt = []
        for A, t in frontier:
            for B, s in parts:
                C, u = A @ B, A @ s + t
                kk = key(C, u)
                if kk in seen:
                    continue
                seen.add(kk)
                nxt.append((C, u))
                if np.abs(C - np.eye(n)).max() < 1e-8 and np.linalg.norm(u) > 1e-8:
                    transl.append(u)
        frontier = nxt
        if not frontier or len(seen) > max_elements:
            break
    if not transl:
        return TranslationRank(0, np.zeros((0, n)))
    T = np.array(sorted(transl, key=lambda v: (round(float(np.linalg.norm(v)), 9), tuple(np.round(-v, 9)))))
    basis = []
    for v in T:
        trial = np.array(basis + [v])
        sv = np.linalg.svd(trial, compute_uv=False)
        if sv[-1] > 1e-8 * sv[0]:
            basis.append(v)
    return TranslationRank(len(basis), np.array(basis))


# cusp neighbourhoods

def _axis_projector(n: int, k: int, axis):
    if axis is None:
        Q = np.eye(n)[:k]
    else:
        Q = np.linalg.qr(np.asarray(axis, dtype=float).T)[0].T[:k]
    return np.eye(n) - Q.T @ Q


@dataclass(frozen=True, eq=False)
class PeakDomain:
    """h^{-1}{x : |P x|^2 > t}, P the projection orthogonal to the translation axis.

    Without an explicit axis the axis is spanned by the first k coordinates.
    """
    h: VahlenMatrix
    k: int
    t: float
    axis: np.ndarray | None = None

    def __post_init__(self):
        n = self.h.dim_n
        if not 0 <= self.k < n or not self.t > 0:
            raise ContractError("peak domain needs 0 <= k < n and t > 0")

    def projector(self) -> np.ndarray:
        return _axis_projector(self.h.dim_n, self.k, self.axis)

    def contains(self, x) -> bool:
        y = apply(self.h, x)
        if is_inf(y):
            return False
        py = self.projector() @ y
        return bool(py @ py > self.t)


@dataclass(frozen=True, eq=False)
class ExtendedHoroball:
    """Closed region of upper half-space with |P x|^2 + height^2 >= t after h."""
    h: VahlenMatrix
    k: int
    t: float
    axis: np.ndarray | None = None

    def contains(self, p) -> bool:
        y = poincare_apply(self.h, p)
        P = _axis_projector(self.h.dim_n, self.k, self.axis)
        py = P @ y[:-1]
        return bool(py @ py + y[-1] ** 2 >= self.t)


def peak_domain_disjoint(U: PeakDomain, S: RoundSphere, delta: float = DELTA_GEO) -> Tri:
    S2 = image_sphere(U.h, S)
    P = U.projector()
    if isinstance(S2, Sphere):
        m = float(np.linalg.norm(P @ S2.center)) + S2.radius
        top = m * m
    else:
        # a hyperplane stays in a tube about the axis only if it contains every
        # direction orthogonal to its normal, i.e. the complement is spanned by u
        u = S2.normal
        if U.k != U.h.dim_n - 1 or abs(np.linalg.norm(P @ u) - 1.0) > 1e-9:
            return Tri.NO
        top = S2.offset ** 2
    band = delta * max(1.0, U.t)
    if top < U.t - band:
        return Tri.YES
    if top > U.t + band:
        return Tri.NO
    return Tri.MARGINAL
