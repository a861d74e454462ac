"""Amalgamated products G1 *_J G2: letters, normal forms, cosets, Phi.

Canonical normal forms are built right to left: the rightmost letter is any
alphabet element of G_m - J, every other letter is the chosen representative
of a nontrivial left J-coset. Distinct canonical forms are inequivalent by
construction, so enumeration never needs to compare words.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .clifford import ContractError
from .geometry import BallPair
from .moebius import (
    EPS_ID,
    VahlenMatrix,
    compose,
    identity_array,
    invert,
    left_matrix_operator,
    mat_inverse,
    mat_product,
    projective_distance_array,
    separation_array,
)

NODE_BUDGET = 2_000_000


class Membership(enum.Enum):
    YES = "yes"
    NO = "no"
    UNDECIDED = "undecided"


@dataclass(frozen=True, eq=False)
class Generator:
    name: str
    matrix: VahlenMatrix


def inverse_token(tok: str) -> str:
    return tok[:-3] if tok.endswith("^-1") else tok + "^-1"


def word_label(word) -> str:
    return "*".join(word) if word else "id"


# J membership oracles

@dataclass(eq=False)
class JOracle:
    generators: tuple
    eps: float = EPS_ID
    kind: str = field(init=False, default="")

    def membership(self, g: VahlenMatrix) -> Membership:
        return Membership(self.membership_array(g.array[None])[0])

    def membership_array(self, M: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(eq=False)
class FiniteListOracle(JOracle):
    """J given by generators of a finite group; the element list is their closure."""
    max_elements: int = 10_000
    elements: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.kind = "finite"
        if not self.generators:
            raise ContractError("finite J needs at least one generator (use the identity)")
        n_gen = self.generators[0].matrix.n_gen
        elems = [identity_array(n_gen)]
        frontier = list(elems)
        gens = [g.matrix.array for g in self.generators]
        while frontier:
            nxt = []
            for m in frontier:
                for gm in gens:
                    p = mat_product(m, gm, n_gen)
                    stack = np.array(elems)
                    if projective_distance_array(stack, p).min() < self.eps:
                        continue
                    elems.append(p)
                    nxt.append(p)
                    if len(elems) > self.max_elements:
                        raise ContractError("J generators do not close up to a finite group")
            frontier = nxt
        self.elements = np.array(elems)

    def membership_array(self, M):
        d = projective_distance_array(M[:, None], self.elements[None]).min(axis=1)
        out = np.full(d.shape, Membership.NO.value, dtype=object)
        out[d < self.eps] = Membership.YES.value
        out[(d >= self.eps) & (d <= 1e-6)] = Membership.UNDECIDED.value
        return out


@dataclass(eq=False)
class IntegerMatrixOracle(JOracle):
    """J = classical 2x2 integer matrices of determinant 1 (scalar blades only)."""

    def __post_init__(self):
        self.kind = "integer"

    def membership_array(self, M):
        M = np.asarray(M)
        scal = M[..., 0]
        hi = np.abs(M[..., 1:]).reshape(M.shape[0], -1).max(axis=1, initial=0.0)
        scale = np.maximum(1.0, np.abs(scal).reshape(M.shape[0], -1).max(axis=1))
        frac = np.abs(scal - np.round(scal)).reshape(M.shape[0], -1).max(axis=1)
        bad = np.maximum(hi, frac)
        out = np.full(bad.shape, Membership.NO.value, dtype=object)
        out[bad <= self.eps * scale] = Membership.YES.value
        out[(bad > self.eps * scale) & (bad <= 1e-6 * scale)] = Membership.UNDECIDED.value
        return out


def j_membership(g: VahlenMatrix, oracle: JOracle) -> Membership:
    return oracle.membership(g)


# group specification

@dataclass(eq=False)
class GroupSpec:
    """Generators of G1 and G2 beyond J, the J oracle and the ball pair.

    Factor m is generated by the J generators followed by its own list; that
    order, with each generator before its inverse, is the lexicographic order
    used for canonical words.
    """
    dim_n: int
    g1: list
    g2: list
    j: JOracle
    balls: BallPair
    letter_depth: int = 2
    name: str = "custom"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        names = [g.name for g in self.j.generators] + [g.name for g in self.g1] + [g.name for g in self.g2]
        if len(set(names)) != len(names):
            raise ContractError("generator names must be unique")
        for g in list(self.j.generators) + list(self.g1) + list(self.g2):
            if g.matrix.dim_n != self.dim_n:
                raise ContractError(f"generator {g.name} has the wrong dimension")
        for g in self.j.generators:
            if self.j.membership(g.matrix) is not Membership.YES:
                raise ContractError(f"J generator {g.name} fails the J oracle")
        if self.balls.sphere.dim != self.dim_n:
            raise ContractError("sphere dimension does not match n")
        self._tokens = {}
        for g in list(self.j.generators) + list(self.g1) + list(self.g2):
            self._tokens[g.name] = g.matrix
            self._tokens[g.name + "^-1"] = invert(g.matrix)

    @property
    def n_gen(self) -> int:
        return self.dim_n - 1

    def factor_generators(self, m: int) -> list:
        return list(self.j.generators) + list(self.g1 if m == 1 else self.g2)

    def tokens(self, m: int) -> list:
        out = []
        for g in self.factor_generators(m):
            out.append((g.name, self._tokens[g.name]))
            out.append((g.name + "^-1", self._tokens[g.name + "^-1"]))
        return out

    def j_tokens(self) -> list:
        out = []
        for g in self.j.generators:
            out.append((g.name, self._tokens[g.name]))
            out.append((g.name + "^-1", self._tokens[g.name + "^-1"]))
        return out

    def evaluate_word(self, word) -> VahlenMatrix:
        m = identity_array(self.n_gen)
        for tok in word:
            if tok not in self._tokens:
                raise ContractError(f"unknown generator token {tok!r}")
            m = mat_product(m, self._tokens[tok].array, self.n_gen)
        return VahlenMatrix._wrap(self.dim_n, m)

    def membership(self, g: VahlenMatrix) -> Membership:
        return self.j.membership(g)

    def alphabet(self, m: int) -> "Alphabet":
        key = ("alphabet", m)
        if key not in self._cache:
            self._cache[key] = build_alphabet(self, m, self.letter_depth)
        return self._cache[key]


# letters and normal forms

@dataclass(frozen=True, eq=False)
class Letter:
    factor: int
    word: tuple
    matrix: VahlenMatrix
    index: int = -1  # position in the factor alphabet, -1 for merged letters

    @property
    def label(self) -> str:
        return word_label(self.word)

    def to_dict(self) -> dict:
        return {"factor": self.factor, "word": list(self.word)}


@dataclass(frozen=True, eq=False)
class JElement:
    matrix: VahlenMatrix
    word: tuple = ()


@dataclass(frozen=True)
class Undecided:
    reason: str


@dataclass(frozen=True, eq=False)
class NormalForm:
    """Alternating letters, leftmost applied last."""
    letters: tuple

    def __post_init__(self):
        if not self.letters:
            raise ContractError("normal form needs at least one letter")
        for x, y in zip(self.letters, self.letters[1:]):
            if x.factor == y.factor:
                raise ContractError("adjacent letters must come from different factors")

    @property
    def length(self) -> int:
        return len(self.letters)

    @property
    def label(self) -> str:
        return "[" + ", ".join(x.label for x in self.letters) + "]"

    def phi(self) -> VahlenMatrix:
        return phi(self)

    def to_dict(self) -> dict:
        return {"letters": [x.to_dict() for x in self.letters]}

    def __repr__(self):
        return f"NormalForm{self.label}"


@dataclass(frozen=True)
class FormType:
    m: int
    k: int
    sign: str


def form_type(w: NormalForm) -> FormType:
    m, k = w.letters[0].factor, w.letters[-1].factor
    return FormType(m, k, "positive" if k == 1 else "negative")


def phi(w: NormalForm) -> VahlenMatrix:
    n_gen = w.letters[0].matrix.n_gen
    m = identity_array(n_gen)
    for x in w.letters:
        m = mat_product(m, x.matrix.array, n_gen)
    return VahlenMatrix._wrap(w.letters[0].matrix.dim_n, m)


def evaluate_letters(spec: GroupSpec, letters) -> VahlenMatrix:
    """Matrix of a list of {factor, word} dicts (or (factor, word) pairs)."""
    m = identity_array(spec.n_gen)
    for x in letters:
        word = x["word"] if isinstance(x, dict) else x[1]
        m = mat_product(m, spec.evaluate_word(word).array, spec.n_gen)
    return VahlenMatrix._wrap(spec.dim_n, m)


def form_from_words(spec: GroupSpec, letters) -> NormalForm:
    """Normal form from (factor, word) pairs; raises if a letter lies in J."""
    out = []
    for factor, word in letters:
        allowed = {t for t, _ in spec.tokens(factor)}
        if not set(word) <= allowed:
            raise ContractError(f"word {word} is not over factor {factor}")
        M = spec.evaluate_word(word)
        if spec.membership(M) is not Membership.NO:
            raise ContractError(f"letter {word_label(word)} is not certified outside J")
        out.append(Letter(factor, tuple(word), M))
    return NormalForm(tuple(out))


def multiply(u: NormalForm, v: NormalForm, spec: GroupSpec):
    """Concatenate and contract; returns a NormalForm, a JElement or Undecided."""
    left = list(u.letters)
    right = list(v.letters)
    pend = None
    while left and right and left[-1].factor == right[0].factor:
        x = left.pop()
        y = right.pop(0)
        M = x.matrix if pend is None else compose(x.matrix, pend.matrix)
        M = compose(M, y.matrix)
        word = x.word + (pend.word if pend else ()) + y.word
        mem = spec.membership(M)
        if mem is Membership.UNDECIDED:
            return Undecided(f"J membership of {word_label(word)} is undecided")
        if mem is Membership.YES:
            pend = JElement(M, word)
            continue
        left.append(Letter(x.factor, word, M))
        pend = None
        break
    if pend is not None:
        if left:
            x = left.pop()
            left.append(Letter(x.factor, x.word + pend.word, compose(x.matrix, pend.matrix)))
        elif right:
            y = right.pop(0)
            right.insert(0, Letter(y.factor, pend.word + y.word, compose(pend.matrix, y.matrix)))
        else:
            return JElement(pend.matrix, pend.word)
    return NormalForm(tuple(left + right))


def shuffle(w: NormalForm, i: int, j_word, spec: GroupSpec) -> NormalForm:
    """Replace letters (x_i, x_{i+1}) by (x_i j, j^-1 x_{i+1}) for the J word j."""
    jm = spec.evaluate_word(j_word)
    jinv = tuple(inverse_token(t) for t in reversed(j_word))
    letters = list(w.letters)
    x, y = letters[i], letters[i + 1]
    letters[i] = Letter(x.factor, x.word + tuple(j_word), compose(x.matrix, jm))
    letters[i + 1] = Letter(y.factor, jinv + y.word, compose(invert(jm), y.matrix))
    return NormalForm(tuple(letters))


# alphabets and coset tables

@dataclass(eq=False)
class Alphabet:
    factor: int
    elements: list  # Letters of G_m - J, shortest-then-lexicographic
    reps: list  # indices into elements, one per nontrivial J-coset
    coset_of: list  # element index -> position in reps
    flagged: list = field(default_factory=list)


def _word_bfs(spec: GroupSpec, tokens, depth: int, eps: float, max_elements: int = NODE_BUDGET):
    """Distinct elements reachable by words of length <= depth, in BFS order."""
    n_gen = spec.n_gen
    seen = [identity_array(n_gen)]
    out = []
    level = [((), identity_array(n_gen))]
    truncated = False
    for _ in range(depth):
        nxt = []
        for word, M in level:
            for tok, T in tokens:
                W = mat_product(M, T.array, n_gen)
                if projective_distance_array(np.array(seen), W).min() < eps:
                    continue
                seen.append(W)
                nxt.append((word + (tok,), W))
                out.append((word + (tok,), W))
                if len(out) >= max_elements:
                    return out, True
        level = nxt
        if not level:
            break
    return out, truncated


def build_alphabet(spec: GroupSpec, m: int, depth: int) -> Alphabet:
    elems, _ = _word_bfs(spec, spec.tokens(m), depth, spec.j.eps)
    letters, reps, coset_of, flagged = [], [], [], []
    for word, W in elems:
        M = VahlenMatrix._wrap(spec.dim_n, W)
        mem = spec.membership(M)
        if mem is Membership.YES:
            continue
        if mem is Membership.UNDECIDED:
            flagged.append(f"J membership of {word_label(word)} undecided; kept as a letter")
        idx = len(letters)
        letters.append(Letter(m, word, M, idx))
        home = None
        for pos, r in enumerate(reps):
            q = spec.membership(compose(invert(letters[r].matrix), M))
            if q is Membership.YES:
                home = pos
                break
            if q is Membership.UNDECIDED:
                flagged.append(f"coset test {word_label(letters[r].word)} vs {word_label(word)} undecided")
        if home is None:
            reps.append(idx)
            home = len(reps) - 1
        coset_of.append(home)
    return Alphabet(m, letters, reps, coset_of, flagged)


@dataclass(frozen=True, eq=False)
class CosetRep:
    label: str
    matrix: VahlenMatrix
    length: int
    word: tuple = ()  # generator word (factor tables)
    form: NormalForm | None = None  # normal form (whole-group table)
    sign: str | None = None


@dataclass(eq=False)
class CosetTable:
    side: str  # "G1", "G2" or "G"
    reps: list  # CosetRep, the J coset first
    max_length: int
    flagged: list = field(default_factory=list)
    truncated: bool = False


def enumerate_cosets(spec: GroupSpec, side, L: int, budget: int = NODE_BUDGET) -> CosetTable:
    side = str(side).upper().replace("G", "")
    ident = CosetRep("id", VahlenMatrix.identity(spec.dim_n), 0)
    if side in ("1", "2"):
        m = int(side)
        elems, truncated = _word_bfs(spec, spec.tokens(m), L, spec.j.eps, budget)
        reps = [ident]
        flagged = []
        for word, W in elems:
            M = VahlenMatrix._wrap(spec.dim_n, W)
            new = True
            for r in reps:
                q = spec.membership(compose(invert(r.matrix), M))
                if q is Membership.YES:
                    new = False
                    break
                if q is Membership.UNDECIDED:
                    flagged.append(f"coset test {r.label} vs {word_label(word)} undecided")
            if new:
                reps.append(CosetRep(word_label(word), M, len(word), word=word))
        return CosetTable(f"G{m}", reps, L, flagged, truncated)
    if side != "":
        raise ContractError(f"unknown side {side!r}")
    levels = enumerate_levels(spec, L, reps_only=True, budget=budget)
    reps = [ident]
    flagged = []
    if not levels.levels:
        return CosetTable("G", reps, L, flagged, levels.truncated)
    allM = np.concatenate([ident.matrix.array[None]] + [lv.mats for lv in levels.levels])
    N = allM.shape[0]
    keep = np.ones(N, dtype=bool)
    if isinstance(spec.j, FiniteListOracle):
        # g ~ h iff h^-1 g in J iff g = h j for some j; look up every g j among earlier entries
        V = allM.reshape(N, -1)
        r = spec.j.eps * (1.0 + np.linalg.norm(V, axis=1).max())
        tree = cKDTree(np.concatenate([V, -V]))
        Jel = spec.j.elements
        for i in range(1, N):
            variants = mat_product(allM[i][None], Jel, spec.n_gen).reshape(len(Jel), -1)
            for hits in tree.query_ball_point(variants, r):
                if any(k % N < i and keep[k % N] for k in hits):
                    keep[i] = False
                    break
    else:
        for i in range(1, N):
            kept = np.flatnonzero(keep[:i])
            Minv = mat_inverse(allM[i], spec.n_gen)
            mem = spec.j.membership_array(mat_product(Minv[None], allM[kept], spec.n_gen))
            if (mem == Membership.YES.value).any():
                keep[i] = False
            elif (mem == Membership.UNDECIDED.value).any():
                flagged.append(f"coset test for entry {i} undecided")
    pos = 1
    for lev in levels.levels:
        for i in range(len(lev)):
            if keep[pos]:
                w = levels.form(lev.length, i)
                reps.append(CosetRep(w.label, VahlenMatrix._wrap(spec.dim_n, lev.mats[i]), w.length, form=w,
                                     sign=form_type(w).sign))
            pos += 1
    return CosetTable("G", reps, L, flagged, levels.truncated)


# breadth-first levels of canonical normal forms

@dataclass(eq=False)
class Level:
    length: int
    parent: np.ndarray
    letter: np.ndarray  # global letter ids
    lead: np.ndarray  # factor of the leftmost letter
    mats: np.ndarray  # (N, 2, 2, D)

    def __len__(self):
        return self.mats.shape[0]


@dataclass(eq=False)
class LevelSet:
    spec: GroupSpec
    letters: list  # global letter table
    levels: list
    truncated: bool

    def form(self, length: int, i: int) -> NormalForm:
        out = []
        for ell in range(length, 0, -1):
            lev = self.levels[ell - 1]
            out.append(self.letters[int(lev.letter[i])])
            i = int(lev.parent[i])
        return NormalForm(tuple(out))

    def count(self) -> int:
        return sum(len(lv) for lv in self.levels)

    def iter_forms(self):
        for lev in self.levels:
            for i in range(len(lev)):
                yield self.form(lev.length, i)


def enumerate_levels(spec: GroupSpec, L: int, reps_only: bool = False, budget: int = NODE_BUDGET) -> LevelSet:
    A1, A2 = spec.alphabet(1), spec.alphabet(2)
    letters = list(A1.elements) + list(A2.elements)
    rep_ids = [i for i in A1.reps] + [len(A1.elements) + i for i in A2.reps]
    D = 1 << spec.n_gen
    levels = []
    truncated = False
    if L < 1:
        return LevelSet(spec, letters, levels, truncated)
    first = rep_ids if reps_only else list(range(len(letters)))
    if len(first) > budget:
        first, truncated = first[:budget], True
    mats = np.array([letters[i].matrix.array for i in first]).reshape(len(first), 2, 2, D)
    levels.append(Level(1, np.full(len(first), -1), np.array(first, dtype=np.int64),
                        np.array([letters[i].factor for i in first], dtype=np.int64), mats))
    used = len(first)
    ops = {i: left_matrix_operator(letters[i].matrix.array, spec.n_gen) for i in rep_ids}
    for ell in range(2, L + 1):
        prev = levels[-1]
        if len(prev) == 0 or truncated:
            break
        flat = prev.mats.reshape(len(prev), -1)
        par, let, lead, chunks = [], [], [], []
        for r in rep_ids:
            f = letters[r].factor
            idx = np.flatnonzero(prev.lead != f)
            room = budget - used
            if room <= 0:
                truncated = True
                break
            if len(idx) > room:
                idx, truncated = idx[:room], True
            chunks.append((flat[idx] @ ops[r].T).reshape(len(idx), 2, 2, D))
            par.append(idx)
            let.append(np.full(len(idx), r, dtype=np.int64))
            lead.append(np.full(len(idx), f, dtype=np.int64))
            used += len(idx)
        if not chunks:
            break
        levels.append(Level(ell, np.concatenate(par), np.concatenate(let), np.concatenate(lead),
                            np.concatenate(chunks)))
    return LevelSet(spec, letters, levels, truncated)


class NormalFormStream:
    """Iterable of canonical normal forms with a ``truncated`` flag."""

    def __init__(self, spec: GroupSpec, L: int, budget: int = NODE_BUDGET, dedup: bool = True,
                 eps: float = EPS_ID, reps_only: bool = False):
        self.levelset = enumerate_levels(spec, L, reps_only=reps_only, budget=budget)
        self.truncated = self.levelset.truncated
        self.dedup = dedup
        self.eps = eps
        self.duplicates = 0
        self.min_nonzero_separation = float("inf")

    def __iter__(self):
        ls = self.levelset
        if not ls.levels:
            return
        keep, min_sep = projective_unique(np.concatenate([lv.mats for lv in ls.levels]), self.eps)
        self.min_nonzero_separation = min_sep
        self.duplicates = int((~keep).sum())
        pos = 0
        for lev in ls.levels:
            for i in range(len(lev)):
                if keep[pos] or not self.dedup:
                    yield ls.form(lev.length, i)
                pos += 1


def enumerate_normal_forms(spec: GroupSpec, L: int, budget: int = NODE_BUDGET, dedup: bool = True,
                           eps: float = EPS_ID) -> NormalFormStream:
    return NormalFormStream(spec, L, budget, dedup, eps)


def projective_unique(M: np.ndarray, eps: float = EPS_ID):
    """Keep mask for first occurrences up to projective equality, and the
    smallest projective distance between kept distinct elements' neighbours."""
    N = M.shape[0]
    V = M.reshape(N, -1)
    if N == 0:
        return np.zeros(0, dtype=bool), float("inf")
    norms = np.linalg.norm(V, axis=1)
    r = eps * (1.0 + norms.max())
    tree = cKDTree(np.concatenate([V, -V]))
    keep = np.ones(N, dtype=bool)
    pairs = tree.query_pairs(r, output_type="ndarray")
    if len(pairs):
        i, k = pairs[:, 0] % N, pairs[:, 1] % N
        distinct = i != k
        keep[np.maximum(i, k)[distinct]] = False
    kept = np.flatnonzero(keep)
    min_sep = float("inf")
    if len(kept) > 1:
        K = len(kept)
        t2 = cKDTree(np.concatenate([V[kept], -V[kept]]))
        d, idx = t2.query(V[kept], k=3)
        other = (idx % K) != np.arange(K)[:, None]
        if other.any():
            min_sep = float(d[other].min())
    return keep, min_sep


# kernel search

@dataclass(eq=False)
class KernelResult:
    witness: NormalForm | None
    min_separation: float
    examined: int
    truncated: bool
    argmin: NormalForm | None = None


def kernel_search(spec: GroupSpec, L: int, eps: float = EPS_ID, budget: int = NODE_BUDGET) -> KernelResult:
    if L < 1:
        return KernelResult(None, float("inf"), 0, False)
    ls = enumerate_levels(spec, L, budget=budget)
    best, arg, examined = float("inf"), None, 0
    for lev in ls.levels:
        sep = separation_array(lev.mats)
        examined += len(lev)
        hit = np.flatnonzero(sep < eps)
        i = int(np.argmin(sep))
        if sep[i] < best:
            best, arg = float(sep[i]), (lev.length, i)
        if hit.size:
            w = ls.form(lev.length, int(hit[0]))
            return KernelResult(w, float(sep[hit[0]]), examined, ls.truncated, w)
    return KernelResult(None, best, examined, ls.truncated, ls.form(*arg) if arg else None)
