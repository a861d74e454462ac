"""Executable hypothesis checks and conclusion witnesses for amalgamated pairs.

Every check returns a CheckResult whose witness can be replayed in isolation
with ``replay_witness``. Universal checks (invariance, containment) are only
certified up to the configured word length; the report says so.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .amalgam import (
    NODE_BUDGET,
    GroupSpec,
    Membership,
    _word_bfs,
    enumerate_cosets,
    enumerate_levels,
    form_type,
    kernel_search,
    projective_unique,
    word_label,
)
from .clifford import CliffordNumber, ContractError
from .geometry import (
    Ball,
    Plane,
    Sphere,
    Tri,
    PeakDomain,
    ball_contains,
    ball_strictly_contains,
    chordal_diameter,
    image_ball,
    image_sphere,
    interiors_disjoint,
    peak_domain_disjoint,
    relation,
    sample_sphere,
    side_of,
    spheres_equal,
    translation_rank,
)
from .moebius import (
    EPS_ID,
    VahlenMatrix,
    apply,
    chordal_distance,
    classify,
    compose,
    invert,
    is_inf,
)

SCHEMA = "report_v1"
CHECK_ORDER = (
    "precisely_invariant",
    "block",
    "interactive_pair",
    "proper",
    "interactive_lemma",
    "freeness",
    "discreteness",
    "diameter_decay",
    "radii_decay",
    "nesting",
    "classification_survey",
)


@dataclass
class CheckConfig:
    max_length: int = 8
    eps_id: float = EPS_ID
    delta_geo: float = 1e-9
    coset_depth: int = 6
    interactive_length: int = 6
    decay_length: int = 6
    survey_length: int = 4
    nesting_k: int = 5
    j_word_length: int = 3
    parabolic_depth: int = 3
    stabilizer_depth: int = 4
    proper_probes: int = 256
    node_budget: int = NODE_BUDGET
    t_grid: tuple = (1.0, 4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0, 16384.0, 1e5, 1e6)
    seed: int = 0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if k == "t_grid":
                if not v or min(v) <= 0:
                    raise ContractError("t_grid must hold positive thresholds")
            elif k != "seed" and not v > 0:
                raise ContractError(f"CheckConfig.{k} must be positive")
        self.t_grid = tuple(float(t) for t in self.t_grid)

    def echo(self) -> dict:
        d = asdict(self)
        d["t_grid"] = list(self.t_grid)
        return d


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    MARGINAL = "marginal"
    UNDECIDED = "undecided"
    TRUNCATED = "truncated"


@dataclass
class CheckResult:
    check: str
    verdict: Verdict
    witness: dict | None = None
    series: list | None = None
    notes: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"check": self.check, "verdict": self.verdict.value, "witness": _plain(self.witness),
                "series": _plain(self.series), "notes": list(self.notes), "data": _plain(self.data)}


@dataclass
class HypothesisReport:
    spec_name: str
    results: list
    config: CheckConfig
    info: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return any(r.verdict is Verdict.FAIL for r in self.results)

    def result(self, check: str) -> CheckResult:
        for r in self.results:
            if r.check == check:
                return r
        raise KeyError(check)

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "spec": self.spec_name, "config_echo": self.config.echo(),
                "checks": [r.to_dict() for r in self.results], "info": _plain(self.info)}


def _plain(x):
    """JSON-ready copy: numpy to lists, floats rounded to 12 significant digits, INF to 'inf'."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if is_inf(x):
        return "inf"
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        return float(f"{v:.12g}")
    if hasattr(x, "to_dict"):
        return _plain(x.to_dict())
    return str(x)


def _fold(states) -> Verdict:
    """Tri-state aggregation: any NO fails, then MARGINAL, else pass."""
    states = list(states)
    if any(s is Tri.NO for s in states):
        return Verdict.FAIL
    if any(s is Tri.MARGINAL for s in states):
        return Verdict.MARGINAL
    return Verdict.PASS


def _word_of_rep(rep) -> dict:
    if rep.form is not None:
        return {"form": rep.form.to_dict()["letters"]}
    return {"word": list(rep.word)}


def matrix_of_witness(spec: GroupSpec, w: dict) -> VahlenMatrix:
    if "form" in w:
        m = VahlenMatrix.identity(spec.dim_n)
        for x in w["form"]:
            m = compose(m, spec.evaluate_word(x["word"]))
        return m
    return spec.evaluate_word(w.get("word", []))


# precise invariance, interactive pairs, properness

def _j_words(spec: GroupSpec, length: int):
    toks = spec.j_tokens()
    out = []
    for ell in range(1, length + 1):
        for combo in itertools.product(toks, repeat=ell):
            out.append(tuple(t for t, _ in combo))
    return out


def _j_fixes_ball(spec, word, ball, delta) -> bool:
    g = spec.evaluate_word(word)
    img = image_ball(g, ball, delta)
    return spheres_equal(img.sphere, ball.sphere) and img.side == ball.side


def check_precisely_invariant(spec: GroupSpec, m: int, cfg: CheckConfig | None = None) -> CheckResult:
    cfg = cfg or CheckConfig()
    B = spec.balls.ball(m)
    name = "precisely_invariant"
    for word in _j_words(spec, cfg.j_word_length):
        if not _j_fixes_ball(spec, word, B, cfg.delta_geo):
            return CheckResult(name, Verdict.FAIL, {"side": m, "kind": "j_moves_ball", "word": list(word)},
                               notes=[f"J word {word_label(word)} does not preserve B{m}"])
    table = enumerate_cosets(spec, m, cfg.coset_depth, cfg.node_budget)
    states, witness = [], None
    for rep in table.reps[1:]:
        img = image_ball(rep.matrix, B, cfg.delta_geo)
        s = interiors_disjoint(img, B, cfg.delta_geo)
        states.append(s)
        if s is not Tri.YES and witness is None:
            witness = {"side": m, "kind": "overlap", **_word_of_rep(rep), "image": img.to_dict(),
                       "state": s.value}
    verdict = _fold(states)
    notes = [f"{len(table.reps) - 1} coset representatives of G{m} - J up to word length {cfg.coset_depth}"]
    notes += table.flagged
    if witness is None:
        if len(table.reps) > 1:
            rep = table.reps[1]
            witness = {"side": m, "kind": "disjoint", **_word_of_rep(rep),
                       "image": image_ball(rep.matrix, B, cfg.delta_geo).to_dict()}
        else:
            notes.append(f"G{m} = J: vacuous")
    if table.flagged and verdict is Verdict.PASS:
        verdict = Verdict.UNDECIDED
    if table.truncated and verdict is Verdict.PASS:
        verdict = Verdict.TRUNCATED
    return CheckResult(name, verdict, witness, notes=notes, data={"side": m, "representatives": len(table.reps) - 1})


def check_interactive_pair(spec: GroupSpec, cfg: CheckConfig | None = None) -> CheckResult:
    cfg = cfg or CheckConfig()
    name = "interactive_pair"
    sub = [check_precisely_invariant(spec, m, cfg) for m in (1, 2)]
    states, witness, notes = [], None, []
    for m in (1, 2):
        B, target = spec.balls.ball(m), spec.balls.ball(3 - m)
        table = enumerate_cosets(spec, m, cfg.coset_depth, cfg.node_budget)
        for rep in table.reps[1:]:
            img = image_ball(rep.matrix, B, cfg.delta_geo)
            s = ball_contains(target, img, cfg.delta_geo)
            states.append(s)
            if s is not Tri.YES and witness is None:
                witness = {"side": m, "kind": "not_contained", **_word_of_rep(rep), "image": img.to_dict(),
                           "state": s.value}
        notes.append(f"side {m}: {len(table.reps) - 1} representatives contained in B{3 - m}")
    verdict = _fold(states)
    for r in sub:
        if r.verdict is Verdict.FAIL:
            verdict = Verdict.FAIL
            witness = witness or r.witness
        elif r.verdict is not Verdict.PASS and verdict is Verdict.PASS:
            verdict = r.verdict
    if witness is None:
        witness = sub[0].witness or sub[1].witness
    return CheckResult(name, verdict, witness, notes=notes,
                       data={"precisely_invariant": [r.verdict.value for r in sub]})


def _probe_points(ball: Ball, count: int, rng) -> list:
    S = ball.sphere
    n = ball.dim
    pts = []
    dirs = [s * e for e in np.eye(n) for s in (1.0, -1.0)]
    rnd = rng.normal(size=(count, n))
    rnd /= np.linalg.norm(rnd, axis=1, keepdims=True)
    dirs += list(rnd)
    if isinstance(S, Sphere):
        c, r = S.center, S.radius
        fr = (0.5, 0.75, 0.9, 0.25, 0.0) if ball.side == "inside" else (1.25, 1.5, 2.0, 3.0, 10.0)
        for f in fr:
            for u in dirs:
                pts.append(c + f * r * u)
    else:
        sgn = -1.0 if ball.side == "below" else 1.0
        u0 = S.normal
        for h in (0.25, 1.0, 4.0):
            for u in dirs:
                tang = u - (u @ u0) * u0
                for f in (0.0, 1.0, 3.0):
                    pts.append(S.offset * u0 + sgn * h * u0 + f * tang)
    return pts


def check_proper(spec: GroupSpec, cfg: CheckConfig | None = None) -> CheckResult:
    """Search for x in B_{3-m} interior outside every g(B_m), g in G_m - J.

    Existential over an infinite union, so failure to find a witness is
    reported as undecided, never as fail.
    """
    cfg = cfg or CheckConfig()
    rng = np.random.default_rng(cfg.seed)
    truncated = False
    for m in (1, 2):
        table = enumerate_cosets(spec, m, cfg.coset_depth, cfg.node_budget)
        truncated |= table.truncated
        B, X = spec.balls.ball(m), spec.balls.ball(3 - m)
        images = [image_ball(r.matrix, B, cfg.delta_geo) for r in table.reps[1:]]
        cands = _probe_points(X, cfg.proper_probes, rng)
        # centres between image spheres are natural gaps
        cents = [im.sphere.center for im in images if isinstance(im.sphere, Sphere)][:64]
        cands += [0.5 * (a + b) for a, b in itertools.combinations(cents, 2)]
        for x in cands:
            if side_of(X, x, cfg.delta_geo) != "inside":
                continue
            if all(side_of(im, x, cfg.delta_geo) == "outside" for im in images):
                return CheckResult("proper", Verdict.PASS, {"side": m, "point": x},
                                   notes=[f"x lies in B{3 - m} and outside the images of B{m} under "
                                          f"{len(images)} representatives up to length {cfg.coset_depth}"])
    notes = ["no probe point escapes the image balls; properness not established"]
    return CheckResult("proper", Verdict.UNDECIDED, None, notes=notes, data={"truncated": truncated})


def check_interactive_lemma(spec: GroupSpec, cfg: CheckConfig | None = None, proper: bool = True) -> CheckResult:
    """(m,k)-forms map B_k into B_{3-m}; strictly when longer than one letter."""
    cfg = cfg or CheckConfig()
    ls = enumerate_levels(spec, cfg.interactive_length, reps_only=True, budget=cfg.node_budget)
    states, witness, checked = [], None, 0
    for lev in ls.levels:
        for i in range(len(lev)):
            w = ls.form(lev.length, i)
            ft = form_type(w)
            g = VahlenMatrix._wrap(spec.dim_n, lev.mats[i])
            img = image_ball(g, spec.balls.ball(ft.k), cfg.delta_geo)
            target = spec.balls.ball(3 - ft.m)
            strict = proper and w.length > 1
            s = (ball_strictly_contains if strict else ball_contains)(target, img, cfg.delta_geo)
            states.append(s)
            checked += 1
            if s is not Tri.YES and witness is None:
                witness = {"form": w.to_dict()["letters"], "image": img.to_dict(), "strict": strict,
                           "state": s.value}
    verdict = _fold(states)
    if witness is None and ls.levels:
        w = ls.form(ls.levels[-1].length, 0)
        witness = {"form": w.to_dict()["letters"], "strict": proper and w.length > 1}
    if ls.truncated and verdict is Verdict.PASS:
        verdict = Verdict.TRUNCATED
    return CheckResult("interactive_lemma", verdict, witness,
                       notes=[f"{checked} canonical forms up to length {cfg.interactive_length}"])


# cusps and blocks

def cusp_normalizer(z, n: int) -> VahlenMatrix:
    """h with h(z) = infinity: identity at infinity, else x -> -(x - z)^-1."""
    if is_inf(z):
        return VahlenMatrix.identity(n)
    zc = CliffordNumber.vector(np.asarray(z, dtype=float))
    return VahlenMatrix(0, -1, 1, -zc)


@dataclass
class Cusp:
    point: object
    source: str
    rank: int
    basis: np.ndarray
    stabilizer: list


def harvest_cusps(spec: GroupSpec, m: int, cfg: CheckConfig) -> tuple[list, list]:
    """Parabolic fixed points of short words in G_m, with their translation ranks."""
    elems, _ = _word_bfs(spec, spec.tokens(m), cfg.stabilizer_depth, spec.j.eps, cfg.node_budget)
    mats = [(w, VahlenMatrix._wrap(spec.dim_n, W)) for w, W in elems]
    points, notes = [], []
    for w, g in mats:
        if len(w) > cfg.parabolic_depth:
            continue
        c = classify(g, cfg.eps_id)
        if c.kind == "unresolved":
            notes.append(f"classification of {word_label(w)} unresolved")
            continue
        if c.kind != "parabolic":
            continue
        z = c.fixed_points[0]
        if any(_same_point(z, p) for p, _ in points):
            continue
        points.append((z, word_label(w)))
    cusps = []
    for z, src in points:
        h = cusp_normalizer(z, spec.dim_n)
        hinv = invert(h)
        stab = []
        for w, g in mats:
            gz = apply(g, z)
            if not _same_point(gz, z):
                continue
            conj = compose(compose(h, g), hinv)
            if abs(conj.c.norm()) > 1e-9 * math.sqrt(conj.frob2()):
                continue
            stab.append(conj)
        try:
            tr = translation_rank(stab, depth=8)
        except ContractError:
            # loxodromic elements in the stabilizer: keep only the isometries
            stab = [s for s in stab if _is_isometry(s)]
            tr = translation_rank(stab, depth=8)
        cusps.append(Cusp(z, src, tr.k, tr.basis, stab))
    return cusps, notes


def _is_isometry(g: VahlenMatrix) -> bool:
    x0 = apply(g, np.zeros(g.dim_n))
    return all(abs(np.linalg.norm(apply(g, e) - x0) - 1.0) < 1e-9 for e in np.eye(g.dim_n))


def _same_point(p, q, tol: float = 1e-7) -> bool:
    if is_inf(p) or is_inf(q):
        return is_inf(p) and is_inf(q)
    return chordal_distance(p, q) < tol


def check_block(spec: GroupSpec, m: int, cfg: CheckConfig | None = None) -> CheckResult:
    """Examples-grade block test: precise invariance of the interior plus, at every
    harvested parabolic point of rank below n, a peak domain avoiding the sphere."""
    cfg = cfg or CheckConfig()
    pi = check_precisely_invariant(spec, m, cfg)
    cusps, notes = harvest_cusps(spec, m, cfg)
    S = spec.balls.sphere
    states, rows = [], []
    for cu in cusps:
        if cu.rank >= spec.dim_n:
            rows.append({"point": cu.point, "source": cu.source, "rank": cu.rank, "t": None, "state": "full_rank"})
            continue
        h = cusp_normalizer(cu.point, spec.dim_n)
        axis = cu.basis if cu.rank else None
        state, t_found = Tri.NO, None
        for t in cfg.t_grid:
            s = peak_domain_disjoint(PeakDomain(h, cu.rank, t, axis), S, cfg.delta_geo)
            if s is Tri.YES:
                state, t_found = s, t
                break
            if s is Tri.MARGINAL:
                state = s
        states.append(state)
        rows.append({"point": cu.point, "source": cu.source, "rank": cu.rank, "t": t_found, "state": state.value})
    verdict = _fold(states)
    if pi.verdict is not Verdict.PASS:
        verdict = pi.verdict if verdict is Verdict.PASS or pi.verdict is Verdict.FAIL else verdict
    if notes and verdict is Verdict.PASS:
        verdict = Verdict.UNDECIDED
    bad = [r for r in rows if r["state"] not in ("yes", "full_rank")]
    witness = {"side": m, "cusp": bad[0]} if bad else ({"side": m, "cusp": rows[0]} if rows else pi.witness)
    notes = notes + [
        "scope: precise invariance of the interior plus peak-domain disjointness; full equality "
        "of the regions of discontinuity is not tested",
        f"{len(cusps)} parabolic points from words of length <= {cfg.parabolic_depth}",
    ]
    if not cusps:
        notes.append("no parabolic points detected: peak-domain condition vacuous")
    return CheckResult("block", verdict, witness, notes=notes,
                       data={"side": m, "precisely_invariant": pi.verdict.value, "cusps": rows})


# freeness and discreteness

def check_freeness(spec: GroupSpec, cfg: CheckConfig | None = None) -> CheckResult:
    cfg = cfg or CheckConfig()
    r = kernel_search(spec, cfg.max_length, cfg.eps_id, cfg.node_budget)
    data = {"examined": r.examined, "min_separation": r.min_separation, "max_length": cfg.max_length}
    if r.witness is not None:
        return CheckResult("freeness", Verdict.FAIL, {"form": r.witness.to_dict()["letters"],
                                                      "separation": r.min_separation},
                           notes=[f"nontrivial normal form {r.witness.label} evaluates to the identity"], data=data)
    verdict = Verdict.TRUNCATED if r.truncated else Verdict.PASS
    w = {"form": r.argmin.to_dict()["letters"], "separation": r.min_separation} if r.argmin else None
    return CheckResult("freeness", verdict, w,
                       notes=[f"no normal form up to length {cfg.max_length} evaluates to the identity"], data=data)


def discreteness_witness(spec: GroupSpec, cfg: CheckConfig | None = None) -> CheckResult:
    """Bounded evidence only: the smallest distance from +-I over enumerated elements."""
    cfg = cfg or CheckConfig()
    r = kernel_search(spec, cfg.max_length, cfg.eps_id, cfg.node_budget)
    sep = r.min_separation
    w = r.witness or r.argmin
    wit = {"form": w.to_dict()["letters"], "separation": sep} if w else None
    notes = ["bounded witness over enumerated elements, not a proof of discreteness"]
    if sep < 10 * cfg.eps_id:
        return CheckResult("discreteness", Verdict.FAIL, wit, notes=notes, data={"min_separation": sep})
    verdict = Verdict.TRUNCATED if r.truncated else Verdict.PASS
    return CheckResult("discreteness", verdict, wit, notes=notes, data={"min_separation": sep})


# decay series

def _trend(series: list, start: int = 2) -> tuple[bool, bool]:
    """(non-increasing from ``start`` on, last < first)."""
    vals = [v for ell, v in series if ell >= start]
    mono = all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    shrink = len(series) > 1 and series[-1][1] < series[0][1]
    return mono, shrink


def diameter_decay(spec: GroupSpec, side="G", obj: str = "S", cfg: CheckConfig | None = None,
                   L: int | None = None) -> CheckResult:
    """Max chordal diameter of g(S) (or g(B_m)) over coset representatives, per length."""
    cfg = cfg or CheckConfig()
    L = cfg.decay_length if L is None else L
    table = enumerate_cosets(spec, side, L, cfg.node_budget)
    S = spec.balls.sphere
    best = {}
    arg = {}
    for rep in table.reps[1:]:
        if obj == "S":
            img = image_sphere(rep.matrix, S)
            if spheres_equal(img, S):
                continue
        else:
            m = int(str(obj)[-1]) if str(obj)[-1] in "12" else (1 if rep.sign in (None, "positive") else 2)
            img = image_ball(rep.matrix, spec.balls.ball(m), cfg.delta_geo)
        d = chordal_diameter(img)
        if d > best.get(rep.length, -1.0):
            best[rep.length] = d
            arg[rep.length] = rep
    series = sorted(best.items())
    mono, shrink = _trend(series)
    if not series:
        verdict = Verdict.PASS
        notes = ["no nontrivial translates"]
    else:
        verdict = Verdict.PASS if (mono and (shrink or len(series) == 1)) else Verdict.FAIL
        notes = [f"non-increasing from length 2: {mono}; last below first: {shrink}"]
    if table.truncated and verdict is Verdict.PASS:
        verdict = Verdict.TRUNCATED
    witness = None
    if series:
        ell = series[-1][0]
        witness = {**_word_of_rep(arg[ell]), "length": ell, "diameter": series[-1][1]}
    return CheckResult("diameter_decay", verdict, witness, [[ell, v] for ell, v in series], notes,
                       data={"side": str(side), "object": obj})


def radii_decay(spec: GroupSpec, cfg: CheckConfig | None = None, L: int | None = None) -> CheckResult:
    """Isometric-sphere radii of enumerated distinct elements, max per word length."""
    cfg = cfg or CheckConfig()
    L = cfg.decay_length if L is None else L
    ls = enumerate_levels(spec, L, reps_only=False, budget=cfg.node_budget)
    best, arg = {}, {}
    if ls.levels:
        allM = np.concatenate([lv.mats for lv in ls.levels])
        keep, _ = projective_unique(allM, cfg.eps_id)
        pos = 0
        for lev in ls.levels:
            c = np.linalg.norm(lev.mats[:, 1, 0, :], axis=-1)
            scale = np.sqrt((lev.mats ** 2).sum(axis=(1, 2, 3)))
            for i in range(len(lev)):
                if keep[pos + i] and c[i] > 1e-12 * scale[i]:
                    r = 1.0 / c[i]
                    if r > best.get(lev.length, -1.0):
                        best[lev.length], arg[lev.length] = r, i
            pos += len(lev)
    series = sorted(best.items())
    mono, _ = _trend(series, start=2)
    verdict = Verdict.PASS if mono else Verdict.FAIL
    cusp_at_inf = any(is_inf(c.point) for m in (1, 2) for c in harvest_cusps(spec, m, cfg)[0])
    if not cusp_at_inf and series:
        # radii are only controlled when infinity is a parabolic point
        verdict = Verdict.PASS if mono else Verdict.UNDECIDED
    if ls.truncated and verdict is Verdict.PASS:
        verdict = Verdict.TRUNCATED
    witness = None
    if series:
        ell = series[0][0]
        w = ls.form(ell, arg[ell])
        witness = {"form": w.to_dict()["letters"], "radius": series[0][1]}
    notes = [f"max radius non-increasing from length 2: {mono}"] if series else ["every element fixes infinity"]
    if not cusp_at_inf and series:
        notes.append("infinity is not a detected parabolic point, so no decay is implied")
    return CheckResult("radii_decay", verdict, witness, [[ell, float(v)] for ell, v in series], notes,
                       data={"infinity_parabolic": cusp_at_inf})


# nesting

def _sphere_side_points(S, k: int = 32, seed: int = 0) -> np.ndarray:
    if isinstance(S, Sphere):
        return sample_sphere(S, k, np.random.default_rng(seed))
    n = S.dim
    base = S.offset * S.normal
    rng = np.random.default_rng(seed)
    T = rng.normal(size=(k, n)) * 3
    T -= np.outer(T @ S.normal, S.normal)
    return base + T


def _spheres_meet(S1, S2, delta) -> Tri:
    A = Ball(S1, "inside" if isinstance(S1, Sphere) else "below")
    B = Ball(S2, "inside" if isinstance(S2, Sphere) else "below")
    rel = relation(A, B, delta)
    if rel in ("cross", "equal", "complement"):
        return Tri.YES
    if rel.startswith("tangent"):
        return Tri.MARGINAL
    return Tri.NO


def nesting_witness(spec: GroupSpec, form_letters, k_max: int | None = None,
                    cfg: CheckConfig | None = None) -> CheckResult:
    """Spheres g^k(S), k = 1..k_max, for g = Phi(w) loxodromic: pairwise disjoint,
    each separating the attracting point from its predecessor, diameters decreasing."""
    cfg = cfg or CheckConfig()
    k_max = k_max or cfg.nesting_k
    from .amalgam import form_from_words
    w = form_from_words(spec, form_letters)
    g = w.phi()
    cls = classify(g, cfg.eps_id)
    if cls.kind != "loxodromic":
        raise ContractError(f"nesting needs a loxodromic element, got {cls.kind}")
    x = cls.attracting
    spheres = [spec.balls.sphere]
    h = VahlenMatrix.identity(spec.dim_n)
    for _ in range(k_max):
        h = compose(g, h)
        spheres.append(image_sphere(h, spec.balls.sphere))
    states, problems = [], []
    for i, j in itertools.combinations(range(1, k_max + 1), 2):
        s = _spheres_meet(spheres[i], spheres[j], cfg.delta_geo)
        states.append({Tri.YES: Tri.NO, Tri.NO: Tri.YES, Tri.MARGINAL: Tri.MARGINAL}[s])
        if s is not Tri.NO:
            problems.append(f"S{i} meets S{j}")
    for k in range(1, k_max + 1):
        Bk = Ball(spheres[k], "inside" if isinstance(spheres[k], Sphere) else "below")
        sx = side_of(Bk, x, cfg.delta_geo)
        prev = {side_of(Bk, p, cfg.delta_geo) for p in _sphere_side_points(spheres[k - 1], 64, cfg.seed)}
        ok = sx != "on" and prev <= {"inside", "outside"} and len(prev) == 1 and sx not in prev
        states.append(Tri.YES if ok else Tri.NO)
        if not ok:
            problems.append(f"S{k} does not separate x from S{k - 1}")
    diams = [chordal_diameter(S) for S in spheres[1:]]
    dec = all(b < a for a, b in zip(diams, diams[1:]))
    states.append(Tri.YES if dec else Tri.NO)
    if not dec:
        problems.append("diameters do not strictly decrease")
    verdict = _fold(states)
    witness = {"form": w.to_dict()["letters"], "attracting": x, "spheres": [S.to_dict() for S in spheres[1:]]}
    return CheckResult("nesting", verdict, witness, [[k + 1, d] for k, d in enumerate(diams)], problems,
                       data={"k_max": k_max})


def _default_nesting_form(spec: GroupSpec):
    a1, a2 = spec.alphabet(1), spec.alphabet(2)
    if not a1.elements or not a2.elements:
        return None
    return [(1, a1.elements[a1.reps[0]].word), (2, a2.elements[a2.reps[0]].word)]


# classification survey

def classification_survey(spec: GroupSpec, cfg: CheckConfig | None = None) -> CheckResult:
    cfg = cfg or CheckConfig()
    ls = enumerate_levels(spec, cfg.survey_length, reps_only=True, budget=cfg.node_budget)
    cusp_pts = []
    for m in (1, 2):
        cs, _ = harvest_cusps(spec, m, cfg)
        cusp_pts += [c.point for c in cs]
    conj = [VahlenMatrix.identity(spec.dim_n)]
    cl = enumerate_levels(spec, cfg.parabolic_depth, reps_only=False, budget=cfg.node_budget)
    for lev in cl.levels:
        conj += [VahlenMatrix._wrap(spec.dim_n, M) for M in lev.mats]
    rows, flags, unresolved = [], [], 0
    counts = {}
    for lev in ls.levels:
        for i in range(len(lev)):
            w = ls.form(lev.length, i)
            g = VahlenMatrix._wrap(spec.dim_n, lev.mats[i])
            c = classify(g, cfg.eps_id)
            counts[c.kind] = counts.get(c.kind, 0) + 1
            row = {"form": w.label, "length": w.length, "kind": c.kind}
            if c.kind == "unresolved":
                unresolved += 1
            if c.kind == "parabolic":
                p = c.fixed_points[0]
                hit = any(_same_point(apply(h, z), p, 1e-6) for h in conj for z in cusp_pts)
                row["conjugate_to_factor_cusp"] = hit
                if not hit:
                    flags.append(f"parabolic {w.label} not conjugated onto a factor cusp by short words")
            rows.append(row)
    verdict = Verdict.UNDECIDED if unresolved else Verdict.PASS
    witness = {"form": rows[0]["form"], "kind": rows[0]["kind"]} if rows else None
    return CheckResult("classification_survey", verdict, witness, notes=flags,
                       data={"counts": dict(sorted(counts.items())), "rows": rows})


# orchestration and replay

def run_all(spec: GroupSpec, cfg: CheckConfig | None = None) -> HypothesisReport:
    cfg = cfg or CheckConfig()
    results = []
    pis = [check_precisely_invariant(spec, m, cfg) for m in (1, 2)]
    results.append(_merge("precisely_invariant", pis))
    results.append(_merge("block", [check_block(spec, m, cfg) for m in (1, 2)]))
    ip = check_interactive_pair(spec, cfg)
    results.append(ip)
    pr = check_proper(spec, cfg)
    results.append(pr)
    results.append(check_interactive_lemma(spec, cfg, proper=pr.verdict is Verdict.PASS))
    fr = check_freeness(spec, cfg)
    results.append(fr)
    results.append(discreteness_witness(spec, cfg))
    results.append(diameter_decay(spec, "G", "S", cfg))
    results.append(radii_decay(spec, cfg))
    form = _default_nesting_form(spec)
    try:
        if form is None:
            raise ContractError("a factor equals J")
        results.append(nesting_witness(spec, form, cfg.nesting_k, cfg))
    except ContractError as e:
        results.append(CheckResult("nesting", Verdict.UNDECIDED, None, notes=[str(e)]))
    results.append(classification_survey(spec, cfg))
    info = {
        "not_tested": ["constrained fundamental set refinement", "orbifold identification",
                       "geometric finiteness of the combined group"],
        "proper_conclusion": _proper_conclusion(ip, pr, fr),
        "geometric_finiteness_subchecks": {r.check: r.verdict.value for r in results
                                           if r.check in ("block", "interactive_pair", "proper")},
    }
    return HypothesisReport(spec.name, results, cfg, info)


def _proper_conclusion(ip, pr, fr) -> str:
    if pr.verdict is Verdict.PASS:
        return "proper"
    if ip.verdict is Verdict.PASS and fr.verdict is Verdict.FAIL:
        return "not proper: interactive pair with a nontrivial kernel"
    return "unknown"


def _merge(name: str, parts: list) -> CheckResult:
    order = [Verdict.FAIL, Verdict.MARGINAL, Verdict.UNDECIDED, Verdict.TRUNCATED, Verdict.PASS]
    worst = min(parts, key=lambda r: order.index(r.verdict))
    notes = [f"side {r.data.get('side', i + 1)}: {r.verdict.value}" for i, r in enumerate(parts)]
    for r in parts:
        notes += r.notes
    return CheckResult(name, worst.verdict, worst.witness, notes=notes,
                       data={"sides": [r.data for r in parts]})


def replay_witness(spec: GroupSpec, result: CheckResult, cfg: CheckConfig | None = None) -> Verdict:
    """Re-evaluate a single witness in isolation and return the verdict it supports."""
    cfg = cfg or CheckConfig()
    w = result.witness
    name = result.check
    if w is None:
        raise ContractError("result carries no witness")
    if name in ("precisely_invariant", "interactive_pair") and w.get("kind") == "j_moves_ball":
        ok = _j_fixes_ball(spec, tuple(w["word"]), spec.balls.ball(w["side"]), cfg.delta_geo)
        return Verdict.PASS if ok else Verdict.FAIL
    if name == "precisely_invariant" or (name == "interactive_pair" and w.get("kind") in ("overlap", "disjoint")):
        g = matrix_of_witness(spec, w)
        B = spec.balls.ball(w["side"])
        return _fold([interiors_disjoint(image_ball(g, B, cfg.delta_geo), B, cfg.delta_geo)])
    if name == "interactive_pair":
        g = matrix_of_witness(spec, w)
        m = w["side"]
        return _fold([ball_contains(spec.balls.ball(3 - m), image_ball(g, spec.balls.ball(m)), cfg.delta_geo)])
    if name == "proper":
        m = w["side"]
        x = np.asarray(w["point"], dtype=float)
        table = enumerate_cosets(spec, m, cfg.coset_depth, cfg.node_budget)
        B, X = spec.balls.ball(m), spec.balls.ball(3 - m)
        ok = side_of(X, x, cfg.delta_geo) == "inside" and all(
            side_of(image_ball(r.matrix, B, cfg.delta_geo), x, cfg.delta_geo) == "outside" for r in table.reps[1:])
        return Verdict.PASS if ok else Verdict.UNDECIDED
    if name in ("freeness", "discreteness"):
        sep = matrix_of_witness(spec, w).separation()
        bound = cfg.eps_id if name == "freeness" else 10 * cfg.eps_id
        return Verdict.FAIL if sep < bound else Verdict.PASS
    if name == "nesting":
        letters = [(x["factor"], tuple(x["word"])) for x in w["form"]]
        return nesting_witness(spec, letters, len(w["spheres"]), cfg).verdict
    if name == "block":
        cu = w.get("cusp")
        if cu is None:
            return check_precisely_invariant(spec, w["side"], cfg).verdict
        if cu["state"] == "full_rank":
            return Verdict.PASS
        rows = check_block(spec, w["side"], cfg).data["cusps"]
        for r in rows:
            if _same_point(_point(r["point"]), _point(cu["point"])):
                return Verdict.PASS if r["state"] in ("yes", "full_rank") else Verdict.FAIL
        return Verdict.UNDECIDED
    raise ContractError(f"no replay for check {name!r}")


def _point(p):
    from .moebius import INF
    if isinstance(p, str) or is_inf(p):
        return INF
    return np.asarray(p, dtype=float)
