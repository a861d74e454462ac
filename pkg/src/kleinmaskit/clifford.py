"""Real Clifford algebra on generators e1..e_{n-1} with e_i^2 = -1.

Blades are stored as bitmasks (bit i-1 set means e_i is a factor) and a
number is a dense coefficient vector of length 2^(n-1) indexed by bitmask.
The dense layout keeps batched products vectorized; the sparse blade map
is available through ``coeffs`` and the text form.
"""
from __future__ import annotations

import functools
import re

import numpy as np

TOL = 1e-12


class ContractError(ValueError):
    pass


class NotInvertible(ArithmeticError):
    pass


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _blade_sign(a: int, b: int) -> float:
    # transpositions needed to sort the concatenated factors, then one -1
    # for every generator that squares away
    swaps = 0
    x = a >> 1
    while x:
        swaps += _popcount(x & b)
        x >>= 1
    swaps += _popcount(a & b)
    return -1.0 if swaps & 1 else 1.0


@functools.lru_cache(maxsize=None)
def tables(n_gen: int):
    """Sign table, grade array and per-row permutations for n_gen generators."""
    D = 1 << n_gen
    sign = np.array([[_blade_sign(a, b) for b in range(D)] for a in range(D)])
    grade = np.array([_popcount(a) for a in range(D)])
    idx = np.arange(D)
    perms = [idx ^ i for i in range(D)]
    psign = [sign[i, idx ^ i] for i in range(D)]
    for arr in (sign, grade):
        arr.setflags(write=False)
    return sign, grade, perms, psign


@functools.lru_cache(maxsize=None)
def grade_factors(n_gen: int):
    _, grade, _, _ = tables(n_gen)
    main = np.where(grade % 2 == 1, -1.0, 1.0)
    rev = np.where((grade * (grade - 1) // 2) % 2 == 1, -1.0, 1.0)
    conj = main * rev
    for arr in (main, rev, conj):
        arr.setflags(write=False)
    return main, rev, conj


def product_array(x: np.ndarray, y: np.ndarray, n_gen: int) -> np.ndarray:
    """Geometric product of coefficient arrays (..., D), broadcasting batch axes."""
    D = 1 << n_gen
    # (x * y)_k = sum_ij x_i P[i, k, j] y_j
    L = (x @ _left_basis(n_gen).reshape(D, D * D)).reshape(x.shape[:-1] + (D, D))
    return (L @ y[..., None])[..., 0]


@functools.lru_cache(maxsize=None)
def _left_basis(n_gen: int) -> np.ndarray:
    # P[i] is the matrix of y -> blade_i * y
    sign, _, _, _ = tables(n_gen)
    D = 1 << n_gen
    P = np.zeros((D, D, D))
    for i in range(D):
        for j in range(D):
            P[i, i ^ j, j] = sign[i, j]
    return P


def left_operator(x: np.ndarray, n_gen: int) -> np.ndarray:
    """Matrix L with L @ y == x * y."""
    return np.tensordot(x, _left_basis(n_gen), axes=(0, 0))


def right_operator(x: np.ndarray, n_gen: int) -> np.ndarray:
    """Matrix R with R @ y == y * x."""
    sign, _, _, _ = tables(n_gen)
    D = 1 << n_gen
    R = np.zeros((D, D))
    for j in range(D):
        if x[j] == 0.0:
            continue
        for i in range(D):
            R[i ^ j, i] += sign[i, j] * x[j]
    return R


def blade_name(mask: int) -> str:
    if mask == 0:
        return "1"
    return "".join(f"e{i + 1}" for i in range(mask.bit_length()) if mask >> i & 1)


_BLADE_RE = re.compile(r"e(\d+)")


def parse_blade(name: str, n_gen: int) -> tuple[int, float]:
    """Blade text to (bitmask, sign). Unsorted factors like 'e2e1' are reordered."""
    name = name.strip()
    if name in ("1", ""):
        return 0, 1.0
    if _BLADE_RE.sub("", name):
        raise ContractError(f"bad blade literal {name!r}")
    mask, sgn = 0, 1.0
    for tok in _BLADE_RE.findall(name):
        i = int(tok)
        if not 1 <= i <= n_gen:
            raise ContractError(f"blade index e{i} out of range for {n_gen} generators")
        bit = 1 << (i - 1)
        sgn *= _blade_sign(mask, bit)
        mask ^= bit
    return mask, sgn


class CliffordNumber:
    """Immutable element of C_{n-1}; ``dim_n`` is the ambient dimension n."""

    __slots__ = ("dim_n", "_v")

    def __init__(self, dim_n: int, coeffs=None):
        if dim_n < 2:
            raise ContractError("dim_n must be at least 2")
        n_gen = dim_n - 1
        v = np.zeros(1 << n_gen)
        if coeffs is None:
            pass
        elif isinstance(coeffs, dict):
            for key, val in coeffs.items():
                if isinstance(key, str):
                    mask, sgn = parse_blade(key, n_gen)
                else:
                    mask, sgn = 0, 1.0
                    for i in key:
                        if not 1 <= i <= n_gen:
                            raise ContractError(f"blade index {i} out of range")
                        bit = 1 << (i - 1)
                        sgn *= _blade_sign(mask, bit)
                        mask ^= bit
                v[mask] += sgn * float(val)
        else:
            arr = np.asarray(coeffs, dtype=float)
            if arr.shape != v.shape:
                raise ContractError(f"expected {v.shape[0]} coefficients, got {arr.shape}")
            v[:] = arr
        if not np.all(np.isfinite(v)):
            raise ContractError("non-finite coefficient")
        v.setflags(write=False)
        self.dim_n = dim_n
        self._v = v

    @classmethod
    def _wrap(cls, dim_n: int, v: np.ndarray) -> "CliffordNumber":
        obj = object.__new__(cls)
        v = np.array(v, dtype=float)
        v.setflags(write=False)
        obj.dim_n = dim_n
        obj._v = v
        return obj

    @classmethod
    def scalar(cls, dim_n: int, s: float = 1.0) -> "CliffordNumber":
        v = np.zeros(1 << (dim_n - 1))
        v[0] = s
        return cls._wrap(dim_n, v)

    @classmethod
    def basis(cls, dim_n: int, i: int) -> "CliffordNumber":
        """e_i for 1 <= i <= n-1; i = 0 gives the unit."""
        v = np.zeros(1 << (dim_n - 1))
        v[0 if i == 0 else 1 << (i - 1)] = 1.0
        return cls._wrap(dim_n, v)

    @classmethod
    def vector(cls, x) -> "CliffordNumber":
        """Point (x0, x1, .., x_{n-1}) of R^n as x0 + sum x_i e_i."""
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        return cls._wrap(n, vector_to_array(x))

    @property
    def n_gen(self) -> int:
        return self.dim_n - 1

    @property
    def array(self) -> np.ndarray:
        return self._v

    @property
    def coeffs(self) -> dict:
        """Sparse map from sorted index tuples to nonzero coefficients."""
        out = {}
        for mask in sorted(map(int, np.flatnonzero(self._v)), key=lambda m: (_popcount(m), blade_indices(m))):
            out[blade_indices(mask)] = float(self._v[mask])
        return out

    def _check(self, other: "CliffordNumber"):
        if self.dim_n != other.dim_n:
            raise ContractError(f"dimension mismatch: {self.dim_n} vs {other.dim_n}")

    def _coerce(self, other):
        if isinstance(other, CliffordNumber):
            self._check(other)
            return other
        if np.isscalar(other):
            return CliffordNumber.scalar(self.dim_n, float(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CliffordNumber._wrap(self.dim_n, self._v + o._v)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CliffordNumber._wrap(self.dim_n, self._v - o._v)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return CliffordNumber._wrap(self.dim_n, -self._v)

    def __mul__(self, other):
        if isinstance(other, CliffordNumber):
            return multiply(self, other)
        if np.isscalar(other):
            return CliffordNumber._wrap(self.dim_n, self._v * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return CliffordNumber._wrap(self.dim_n, self._v * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return CliffordNumber._wrap(self.dim_n, self._v / float(other))
        if isinstance(other, CliffordNumber):
            return self * inverse(other)
        return NotImplemented

    def isclose(self, other, tol: float = TOL) -> bool:
        o = self._coerce(other)
        scale = 1.0 + max(np.abs(self._v).max(), np.abs(o._v).max())
        return bool(np.abs(self._v - o._v).max() <= tol * scale)

    def __eq__(self, other):
        if not isinstance(other, (CliffordNumber, int, float)):
            return NotImplemented
        if isinstance(other, CliffordNumber) and other.dim_n != self.dim_n:
            return False
        return self.isclose(other)

    __hash__ = None

    def main(self):
        return CliffordNumber._wrap(self.dim_n, self._v * grade_factors(self.n_gen)[0])

    def reversion(self):
        return CliffordNumber._wrap(self.dim_n, self._v * grade_factors(self.n_gen)[1])

    def conjugate(self):
        return CliffordNumber._wrap(self.dim_n, self._v * grade_factors(self.n_gen)[2])

    def inverse(self):
        return inverse(self)

    def norm(self) -> float:
        return float(np.linalg.norm(self._v))

    @property
    def scalar_part(self) -> float:
        return float(self._v[0])

    def is_zero(self, tol: float = TOL) -> bool:
        return bool(np.abs(self._v).max() <= tol)

    def is_vector(self, tol: float = TOL) -> bool:
        _, grade, _, _ = tables(self.n_gen)
        hi = np.abs(self._v[grade > 1])
        return bool(hi.size == 0 or hi.max() <= tol * (1.0 + self.norm()))

    def is_clifford_group(self, tol: float = 1e-9) -> bool:
        return norm_and_grade(self, tol)[2]

    def vector_part(self) -> np.ndarray:
        """Coordinates (x0, .., x_{n-1}) of the grade <= 1 part."""
        return array_to_vector(self._v, self.dim_n)

    def to_text(self) -> dict:
        out = {}
        for mask in range(self._v.shape[0]):
            if self._v[mask] != 0.0:
                out[blade_name(mask)] = float(self._v[mask])
        return out

    @classmethod
    def from_text(cls, dim_n: int, data) -> "CliffordNumber":
        if isinstance(data, (int, float)):
            return cls.scalar(dim_n, float(data))
        if not isinstance(data, dict):
            raise ContractError(f"blade map expected, got {type(data).__name__}")
        return cls(dim_n, data)

    def __repr__(self):
        terms = self.to_text()
        if not terms:
            return "0"
        return " + ".join(f"{v:g}" if k == "1" else f"{v:g}*{k}" for k, v in terms.items())


def blade_indices(mask: int) -> tuple:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def vector_to_array(x: np.ndarray) -> np.ndarray:
    """Coordinates (..., n) to coefficient arrays (..., 2^(n-1))."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-1] + (1 << (n - 1),))
    out[..., 0] = x[..., 0]
    for i in range(1, n):
        out[..., 1 << (i - 1)] = x[..., i]
    return out


def array_to_vector(v: np.ndarray, n: int) -> np.ndarray:
    idx = [0] + [1 << (i - 1) for i in range(1, n)]
    return np.array(v[..., idx], dtype=float)


def multiply(a: CliffordNumber, b: CliffordNumber) -> CliffordNumber:
    a._check(b)
    return CliffordNumber._wrap(a.dim_n, product_array(a.array, b.array, a.n_gen))


def involutions(a: CliffordNumber):
    """(main involution, reversion, Clifford conjugate)."""
    return a.main(), a.reversion(), a.conjugate()


def inverse(a: CliffordNumber, tol: float = 1e-9) -> CliffordNumber:
    c = a.conjugate()
    p = multiply(a, c)
    s = p.scalar_part
    rest = np.abs(p.array[1:]).max() if p.array.shape[0] > 1 else 0.0
    if s <= 0.0 or rest > tol * s:
        raise NotInvertible(f"{a!r} has no Clifford inverse")
    return c * (1.0 / s)


def norm_and_grade(a: CliffordNumber, tol: float = 1e-9):
    """(norm, is_vector, is_clifford_group)."""
    nrm = a.norm()
    is_vec = a.is_vector()
    if nrm <= TOL:
        return nrm, is_vec, False
    p = multiply(a, a.conjugate())
    s = p.scalar_part
    if s <= 0.0 or np.abs(p.array[1:]).max(initial=0.0) > tol * s:
        return nrm, is_vec, False
    inv_main = inverse(a.main())
    for i in range(a.dim_n):
        e = CliffordNumber.basis(a.dim_n, i)
        if not multiply(multiply(a, e), inv_main).is_vector(tol):
            return nrm, is_vec, False
    return nrm, is_vec, True
