"""Vahlen matrices acting on the compactified R^n and on upper half-space."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import (
    CliffordNumber,
    ContractError,
    array_to_vector,
    grade_factors,
    left_operator,
    product_array,
    vector_to_array,
)

EPS_ID = 1e-9


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(p) -> bool:
    return p is INF


class FixesInfinity(ValueError):
    pass


class Unresolved(RuntimeError):
    pass


# batched matrix arithmetic on arrays of shape (..., 2, 2, D)

def mat_product(A: np.ndarray, B: np.ndarray, n_gen: int) -> np.ndarray:
    P = product_array(A[..., :, :, None, :], B[..., None, :, :, :], n_gen)
    return P.sum(axis=-3)


def left_matrix_operator(m: np.ndarray, n_gen: int) -> np.ndarray:
    """Operator on flattened (2, 2, D) arrays implementing M -> m @ M."""
    D = m.shape[-1]
    op = np.zeros((2, 2, D, 2, 2, D))
    for i in range(2):
        for j in range(2):
            L = left_operator(m[i, j], n_gen)
            for k in range(2):
                op[i, k, :, j, k, :] = L
    return op.reshape(4 * D, 4 * D)


def mat_reverse(m: np.ndarray, n_gen: int) -> np.ndarray:
    return m * grade_factors(n_gen)[1]


def mat_inverse(m: np.ndarray, n_gen: int) -> np.ndarray:
    r = mat_reverse(m, n_gen)
    out = np.empty_like(m)
    out[..., 0, 0, :] = r[..., 1, 1, :]
    out[..., 0, 1, :] = -r[..., 0, 1, :]
    out[..., 1, 0, :] = -r[..., 1, 0, :]
    out[..., 1, 1, :] = r[..., 0, 0, :]
    return out


def identity_array(n_gen: int) -> np.ndarray:
    m = np.zeros((2, 2, 1 << n_gen))
    m[0, 0, 0] = m[1, 1, 0] = 1.0
    return m


def separation_array(M: np.ndarray) -> np.ndarray:
    """min ||M -+ I||_F over blade coefficients, batched."""
    I = identity_array(int(math.log2(M.shape[-1])))
    axes = (-3, -2, -1)
    dm = np.sqrt(((M - I) ** 2).sum(axis=axes))
    dp = np.sqrt(((M + I) ** 2).sum(axis=axes))
    return np.minimum(dm, dp)


def projective_distance_array(M: np.ndarray, N: np.ndarray) -> np.ndarray:
    axes = (-3, -2, -1)
    return np.minimum(np.sqrt(((M - N) ** 2).sum(axis=axes)), np.sqrt(((M + N) ** 2).sum(axis=axes)))


def canonical_sign(m: np.ndarray) -> float:
    """+-1 making the entry of largest norm have a nonnegative leading coefficient."""
    norms = np.sqrt((m ** 2).sum(axis=-1)).ravel()
    top = norms.max()
    if top == 0.0:
        return 1.0
    k = int(np.flatnonzero(norms >= top * (1 - 1e-9))[0])
    entry = m.reshape(4, -1)[k]
    lead = entry[np.flatnonzero(np.abs(entry) >= 1e-9 * top)[0]]
    return -1.0 if lead < 0 else 1.0


def _as_clifford(x, dim_n: int) -> CliffordNumber:
    if isinstance(x, CliffordNumber):
        if x.dim_n != dim_n:
            raise ContractError("entry dimension mismatch")
        return x
    return CliffordNumber.from_text(dim_n, x)


class VahlenMatrix:
    """Normalized 2x2 Clifford matrix (a, b; c, d) acting by (ax+b)(cx+d)^-1."""

    __slots__ = ("dim_n", "_m")

    def __init__(self, a, b, c, d, dim_n: int | None = None, check: bool = True, tol: float = 1e-9):
        if dim_n is None:
            for e in (a, b, c, d):
                if isinstance(e, CliffordNumber):
                    dim_n = e.dim_n
                    break
            else:
                raise ContractError("dim_n required when no entry is a CliffordNumber")
        ents = [_as_clifford(e, dim_n) for e in (a, b, c, d)]
        m = np.array([[ents[0].array, ents[1].array], [ents[2].array, ents[3].array]])
        n_gen = dim_n - 1
        if check:
            for name, e in zip("abcd", ents):
                if e.norm() > tol and not e.is_clifford_group(tol):
                    raise ContractError(f"entry {name} is not in the Clifford group")
            A, B, C, Dd = ents
            if not (A * B.reversion()).is_vector(tol) or not (C * Dd.reversion()).is_vector(tol):
                raise ContractError("a*rev(b) and c*rev(d) must be vectors")
        p = pdet_array(m, n_gen)
        s = p[0]
        if s <= 0.0 or np.abs(p[1:]).max(initial=0.0) > tol * max(1.0, s):
            raise ContractError(f"pseudo-determinant must be a positive real, got {p}")
        m = m / math.sqrt(s)
        m = m * canonical_sign(m)
        m.setflags(write=False)
        self.dim_n = dim_n
        self._m = m

    @classmethod
    def _wrap(cls, dim_n: int, m: np.ndarray, normalize: bool = True) -> "VahlenMatrix":
        obj = object.__new__(cls)
        m = np.array(m, dtype=float)
        if normalize:
            s = pdet_array(m, dim_n - 1)[0]
            if s > 0:
                m = m / math.sqrt(s)
            m = m * canonical_sign(m)
        m.setflags(write=False)
        obj.dim_n = dim_n
        obj._m = m
        return obj

    @classmethod
    def identity(cls, dim_n: int) -> "VahlenMatrix":
        return cls._wrap(dim_n, identity_array(dim_n - 1))

    @property
    def n_gen(self) -> int:
        return self.dim_n - 1

    @property
    def array(self) -> np.ndarray:
        return self._m

    def entry(self, i: int, j: int) -> CliffordNumber:
        return CliffordNumber._wrap(self.dim_n, self._m[i, j])

    a = property(lambda self: self.entry(0, 0))
    b = property(lambda self: self.entry(0, 1))
    c = property(lambda self: self.entry(1, 0))
    d = property(lambda self: self.entry(1, 1))

    def __matmul__(self, other: "VahlenMatrix") -> "VahlenMatrix":
        return compose(self, other)

    def __neg__(self):
        obj = object.__new__(VahlenMatrix)
        m = -self._m
        m.setflags(write=False)
        obj.dim_n, obj._m = self.dim_n, m
        return obj

    def inverse(self) -> "VahlenMatrix":
        return invert(self)

    def __pow__(self, k: int) -> "VahlenMatrix":
        base = self if k >= 0 else invert(self)
        out = VahlenMatrix.identity(self.dim_n)
        k = abs(k)
        while k:
            if k & 1:
                out = compose(out, base)
            base = compose(base, base)
            k >>= 1
        return out

    def pseudo_determinant(self) -> CliffordNumber:
        return CliffordNumber._wrap(self.dim_n, pdet_array(self._m, self.n_gen))

    def frob2(self) -> float:
        return float((self._m ** 2).sum())

    def separation(self) -> float:
        """Projective distance from the identity."""
        return float(separation_array(self._m))

    def is_identity(self, eps: float = EPS_ID) -> bool:
        return self.separation() < eps

    def distance(self, other: "VahlenMatrix") -> float:
        return float(projective_distance_array(self._m, other._m))

    def projectively_equal(self, other: "VahlenMatrix", eps: float = EPS_ID) -> bool:
        return self.dim_n == other.dim_n and self.distance(other) < eps

    def lift(self) -> "VahlenMatrix":
        """Same matrix over C_n (one more generator), used for the half-space action."""
        D = self._m.shape[-1]
        m = np.zeros((2, 2, 2 * D))
        m[..., :D] = self._m
        return VahlenMatrix._wrap(self.dim_n + 1, m, normalize=False)

    def to_text(self) -> dict:
        return {k: self.entry(i, j).to_text() for k, (i, j) in zip("abcd", [(0, 0), (0, 1), (1, 0), (1, 1)])}

    def __repr__(self):
        return f"VahlenMatrix(a={self.a!r}, b={self.b!r}, c={self.c!r}, d={self.d!r})"


def pdet_array(m: np.ndarray, n_gen: int) -> np.ndarray:
    rev = grade_factors(n_gen)[1]
    return (product_array(m[..., 0, 0, :], m[..., 1, 1, :] * rev, n_gen)
            - product_array(m[..., 0, 1, :], m[..., 1, 0, :] * rev, n_gen))


def compose(g: VahlenMatrix, h: VahlenMatrix) -> VahlenMatrix:
    if g.dim_n != h.dim_n:
        raise ContractError("dimension mismatch")
    return VahlenMatrix._wrap(g.dim_n, mat_product(g.array, h.array, g.n_gen))


def invert(g: VahlenMatrix) -> VahlenMatrix:
    return VahlenMatrix._wrap(g.dim_n, mat_inverse(g.array, g.n_gen))


# action on points

def _clifford_inverse_array(x: np.ndarray, n_gen: int) -> np.ndarray:
    conj = x * grade_factors(n_gen)[2]
    return conj / (x ** 2).sum(axis=-1, keepdims=True)


def apply_array(m: np.ndarray, X: np.ndarray, n: int):
    """Apply matrices (..., 2, 2, D) to finite points (..., n).

    Returns (Y, inf_mask); rows of Y under the mask are nan.
    """
    n_gen = n - 1
    x = vector_to_array(X)
    num = product_array(m[..., 0, 0, :], x, n_gen) + m[..., 0, 1, :]
    den = product_array(m[..., 1, 0, :], x, n_gen) + m[..., 1, 1, :]
    dn = np.sqrt((den ** 2).sum(axis=-1))
    nn = np.sqrt((num ** 2).sum(axis=-1))
    inf_mask = dn <= 1e-14 * (nn + dn)
    safe = np.where(inf_mask[..., None], 1.0, den)
    y = product_array(num, _clifford_inverse_array(safe, n_gen), n_gen)
    Y = array_to_vector(y, n)
    Y[inf_mask] = np.nan
    return Y, inf_mask


def image_of_infinity(g: VahlenMatrix):
    c = g.array[1, 0]
    scale = math.sqrt(g.frob2())
    if np.linalg.norm(c) <= 1e-14 * scale:
        return INF
    y = product_array(g.array[0, 0], _clifford_inverse_array(c, g.n_gen), g.n_gen)
    return array_to_vector(y, g.dim_n)


def apply(g: VahlenMatrix, p):
    if is_inf(p):
        return image_of_infinity(g)
    x = np.asarray(p, dtype=float)
    if x.shape != (g.dim_n,):
        raise ContractError(f"point must have {g.dim_n} coordinates")
    Y, mask = apply_array(g.array, x, g.dim_n)
    return INF if bool(mask) else Y


def poincare_apply(g: VahlenMatrix, p) -> np.ndarray:
    """Isometric extension to upper half-space; p = (x0, .., x_{n-1}, x_n), x_n > 0."""
    p = np.asarray(p, dtype=float)
    if p.shape != (g.dim_n + 1,) or p[-1] <= 0:
        raise ContractError("half-space point needs n+1 coordinates with positive height")
    G = g.lift()
    Y, mask = apply_array(G.array, p, g.dim_n + 1)
    return Y


def poincare_apply_array(g: VahlenMatrix, P: np.ndarray) -> np.ndarray:
    Y, _ = apply_array(g.lift().array, P, g.dim_n + 1)
    return Y


# metrics

def chordal_distance(p, q) -> float:
    if is_inf(p) and is_inf(q):
        return 0.0
    if is_inf(p):
        p, q = q, p
    x = np.asarray(p, dtype=float)
    if is_inf(q):
        return 2.0 / math.sqrt(1.0 + x @ x)
    y = np.asarray(q, dtype=float)
    return 2.0 * float(np.linalg.norm(x - y)) / math.sqrt((1.0 + x @ x) * (1.0 + y @ y))


def stereo_lift(p) -> np.ndarray:
    """Point of R^n (or INF) on the unit sphere of R^{n+1}."""
    if is_inf(p):
        raise ContractError("use north_pole(n) for infinity")
    x = np.asarray(p, dtype=float)
    s = x @ x
    return np.concatenate([2 * x, [s - 1.0]]) / (s + 1.0)


def north_pole(n: int) -> np.ndarray:
    out = np.zeros(n + 1)
    out[-1] = 1.0
    return out


def stereo_drop(X: np.ndarray):
    if X[-1] >= 1.0 - 1e-15:
        return INF
    return X[:-1] / (1.0 - X[-1])


def hyperbolic_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p[-1] <= 0 or q[-1] <= 0:
        raise ContractError("heights must be positive")
    diff = p - q
    return float(np.arccosh(1.0 + diff @ diff / (2.0 * p[-1] * q[-1])))


# isometric spheres and the similarity decomposition

def isometric_sphere(g: VahlenMatrix):
    from .geometry import Sphere

    c = g.c
    if c.norm() <= 1e-14 * math.sqrt(g.frob2()):
        raise FixesInfinity("c = 0: the map fixes infinity")
    center = apply(invert(g), INF)
    return Sphere(np.asarray(center), 1.0 / c.norm())


@dataclass(frozen=True)
class AffineDecomposition:
    """g(x) = scale * A x + t."""
    A: np.ndarray
    scale: float
    t: np.ndarray

    def __call__(self, x):
        if is_inf(x):
            return INF
        return self.scale * (self.A @ np.asarray(x, dtype=float)) + self.t


@dataclass(frozen=True)
class InversiveDecomposition:
    """g(x) = a + r^2 A (x - b) / |x - b|^2."""
    a: np.ndarray
    b: np.ndarray
    r: float
    A: np.ndarray

    def __call__(self, x):
        if is_inf(x):
            return self.a.copy()
        y = np.asarray(x, dtype=float) - self.b
        s = y @ y
        if s == 0.0:
            return INF
        return self.a + self.r ** 2 * (self.A @ y) / s


def decompose(g: VahlenMatrix):
    n = g.dim_n
    basis = np.eye(n)
    if isinstance(image_of_infinity(g), _Infinity):
        Y, _ = apply_array(g.array, np.vstack([np.zeros(n), basis]), n)
        t = Y[0]
        cols = (Y[1:] - t).T
        scale = float(np.mean(np.linalg.norm(cols, axis=0)))
        return AffineDecomposition(cols / scale, scale, t)
    b = np.asarray(apply(invert(g), INF))
    a = np.asarray(image_of_infinity(g))
    r = 1.0 / g.c.norm()
    Y, _ = apply_array(g.array, b + basis, n)
    cols = ((Y - a) / r ** 2).T
    return InversiveDecomposition(a, b, r, cols)


# classification

@dataclass(frozen=True)
class MoebiusClass:
    kind: str  # identity | loxodromic | parabolic | elliptic | unresolved
    fixed_points: tuple = ()
    attracting: object = None
    repelling: object = None
    note: str = ""
    growth: tuple = field(default=(), repr=False)


def _complex_axis(g: VahlenMatrix):
    """Generator index k if every entry lies in span{1, e_k} (0 if all scalar), else None."""
    nz = np.flatnonzero(np.abs(g.array).reshape(4, -1).max(axis=0) > 1e-15)
    hi = [int(m) for m in nz if m != 0]
    if not hi:
        return 0
    if len(hi) == 1 and bin(hi[0]).count("1") == 1:
        return hi[0].bit_length()
    return None


def _complex_entries(g: VahlenMatrix, k: int):
    m = g.array
    im = (1 << (k - 1)) if k else None
    return [complex(m[i, j, 0], m[i, j, im] if im is not None else 0.0) for i, j in ((0, 0), (0, 1), (1, 0), (1, 1))]


def _complex_to_point(z: complex, n: int, k: int) -> np.ndarray:
    x = np.zeros(n)
    x[0] = z.real
    x[k if k else 1] = z.imag
    return x


def _affine_fixed(g: VahlenMatrix, tol: float):
    dec = decompose(g)
    n = g.dim_n
    L = dec.scale * dec.A
    if abs(dec.scale - 1.0) > 1e-12:
        x = np.linalg.solve(np.eye(n) - L, dec.t)
        if dec.scale < 1:
            return MoebiusClass("loxodromic", (x, INF), attracting=x, repelling=INF)
        return MoebiusClass("loxodromic", (x, INF), attracting=INF, repelling=x)
    # absolute cutoff: for a translation I - L is pure rounding noise
    U, sv, Vt = np.linalg.svd(np.eye(n) - L)
    keep = sv > 1e-9
    x = Vt[keep].T @ ((U[:, keep].T @ dec.t) / sv[keep])
    resid = np.linalg.norm((np.eye(n) - L) @ x - dec.t)
    if resid <= tol * (1.0 + np.linalg.norm(dec.t)):
        return MoebiusClass("elliptic", (x, INF))
    return MoebiusClass("parabolic", (INF,))


def classify(g: VahlenMatrix, eps_id: float = EPS_ID, max_squarings: int = 40,
             bound: float = 1e6) -> MoebiusClass:
    """Classify by the growth of ||g^(2^m)||^2 = 2 cosh d(e_n, g^(2^m) e_n).

    Bounded growth over 2^max_squarings iterates means elliptic, polynomial
    growth parabolic and exponential growth loxodromic.
    """
    if g.is_identity(eps_id):
        return MoebiusClass("identity")
    growth = []
    h = g
    kind = None
    for _ in range(max_squarings + 1):
        f = h.frob2()
        growth.append(f)
        if f > bound:
            h2 = compose(h, h)
            f2 = h2.frob2()
            ratio = math.log(f2) / math.log(f) if math.isfinite(f2) else float("inf")
            kind = "loxodromic" if ratio > 1.5 else "parabolic"
            break
        h = compose(h, h)
    else:
        kind = "elliptic"
    growth = tuple(growth)
    if isinstance(image_of_infinity(g), _Infinity):
        aff = _affine_fixed(g, 1e-9)
        if aff.kind != kind:
            return MoebiusClass("unresolved", note=f"growth says {kind}, affine solve says {aff.kind}", growth=growth)
        return MoebiusClass(aff.kind, aff.fixed_points, aff.attracting, aff.repelling, growth=growth)
    k = _complex_axis(g)
    if k is not None:
        a, b, c, d = _complex_entries(g, k)
        n = g.dim_n
        if kind == "parabolic":
            z = (a - d) / (2 * c)
            return MoebiusClass(kind, (_complex_to_point(z, n, k),), growth=growth)
        disc = np.sqrt(complex((d - a) ** 2 + 4 * b * c))
        z1, z2 = (a - d + disc) / (2 * c), (a - d - disc) / (2 * c)
        if kind == "loxodromic":
            if abs(c * z1 + d) < abs(c * z2 + d):
                z1, z2 = z2, z1
            p1, p2 = _complex_to_point(z1, n, k), _complex_to_point(z2, n, k)
            return MoebiusClass(kind, (p1, p2), attracting=p1, repelling=p2, growth=growth)
        return MoebiusClass(kind, (_complex_to_point(z1, n, k), _complex_to_point(z2, n, k)), growth=growth)
    if kind == "loxodromic":
        att = _power_limit(g)
        rep = _power_limit(invert(g))
        if att is None or rep is None:
            return MoebiusClass("unresolved", note="fixed points did not converge", growth=growth)
        return MoebiusClass(kind, (att, rep), attracting=att, repelling=rep, growth=growth)
    if kind == "parabolic":
        p = _power_limit(g, target=1e16)
        if p is None:
            return MoebiusClass("unresolved", note="parabolic point did not converge", growth=growth)
        return MoebiusClass(kind, (p,), growth=growth)
    return MoebiusClass(kind, growth=growth)


def _power_limit(g: VahlenMatrix, target: float = 1e24):
    """lim g^k(x) via repeated squaring, checked from three seeds."""
    h = g
    for _ in range(80):
        if h.frob2() > target:
            break
        h = compose(h, h)
    rng = np.random.default_rng(7)
    pts = [apply(h, rng.normal(size=g.dim_n) * 3) for _ in range(3)]
    if all(is_inf(p) for p in pts):
        return INF
    for p in pts:
        agree = sum(chordal_distance(p, q) < 1e-6 for q in pts)
        if agree >= 2:
            return p
    return None
