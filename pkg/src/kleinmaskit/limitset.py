"""Orbit approximations of the limit set and exports of sphere translates."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .amalgam import NODE_BUDGET, FiniteListOracle, GroupSpec, _word_bfs, enumerate_cosets, enumerate_levels
from .clifford import ContractError
from .geometry import Plane, Sphere, _pairing, Ball, image_sphere, sample_sphere
from .moebius import (
    INF,
    Unresolved,
    VahlenMatrix,
    apply,
    apply_array,
    chordal_distance,
    classify,
    compose,
    identity_array,
    invert,
    is_inf,
    mat_product,
    north_pole,
    stereo_lift,
)


@dataclass(eq=False)
class PointCloud:
    """Finite points plus a mask for infinity; each tagged with its word length."""
    points: np.ndarray  # (N, n), nan rows where is_inf
    lengths: np.ndarray
    is_inf: np.ndarray
    truncated: bool = False

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.lengths)

    def lifted(self) -> np.ndarray:
        """Coordinates on the unit sphere S^n; infinity is the north pole."""
        out = np.empty((len(self), self.dim + 1))
        for i, (p, inf) in enumerate(zip(self.points, self.is_inf)):
            out[i] = north_pole(self.dim) if inf else stereo_lift(p)
        return out

    def finite(self) -> np.ndarray:
        return self.points[~self.is_inf]


def _j_elements(spec: GroupSpec, j_length: int) -> np.ndarray:
    if isinstance(spec.j, FiniteListOracle):
        return spec.j.elements
    elems, _ = _word_bfs(spec, spec.j_tokens(), j_length, spec.j.eps)
    return np.array([identity_array(spec.n_gen)] + [W for _, W in elems])


def group_elements(spec: GroupSpec, L: int, j_length: int = 2, budget: int = NODE_BUDGET):
    """Matrices of canonical forms up to length L times J (identity first), with lengths."""
    Jel = _j_elements(spec, j_length)
    mats = [Jel]
    lengths = [np.zeros(len(Jel), dtype=np.int64)]
    ls = enumerate_levels(spec, L, reps_only=True, budget=budget)
    for lev in ls.levels:
        M = mat_product(lev.mats[:, None], Jel[None], spec.n_gen).reshape(-1, 2, 2, 1 << spec.n_gen)
        mats.append(M)
        lengths.append(np.full(len(M), lev.length, dtype=np.int64))
    return np.concatenate(mats), np.concatenate(lengths), ls.truncated


def orbit_points(spec: GroupSpec, seeds, L: int, rho: float | None = 1e-4, j_length: int = 2,
                 budget: int = NODE_BUDGET) -> PointCloud:
    """Images of the seeds under every enumerated element of length <= L.

    Ordered by word length, then enumeration order, then seed; chordal
    duplicates within rho are dropped (first occurrence kept).
    """
    n = spec.dim_n
    seeds = list(seeds)
    if L == 0:
        M = identity_array(spec.n_gen)[None]
        lens = np.zeros(1, dtype=np.int64)
        truncated = False
    else:
        M, lens, truncated = group_elements(spec, L, j_length, budget)
    pts, tags, infs = [], [], []
    for s in seeds:
        if is_inf(s):
            # g(inf) = a c^-1: send through the inverse-free route one matrix at a time
            for g, ell in zip(M, lens):
                y = apply(VahlenMatrix._wrap(n, g, normalize=False), INF)
                pts.append(np.full(n, np.nan) if is_inf(y) else y)
                infs.append(is_inf(y))
                tags.append(ell)
            continue
        Y, mask = apply_array(M, np.asarray(s, dtype=float)[None].repeat(len(M), 0), n)
        pts += list(Y)
        infs += list(mask)
        tags += list(lens)
    order = np.argsort(np.array(tags), kind="stable")
    P = np.array(pts).reshape(-1, n)[order]
    T = np.array(tags, dtype=np.int64)[order]
    I = np.array(infs, dtype=bool)[order]
    if rho:
        lifted = np.array([north_pole(n) if inf else stereo_lift(p) for p, inf in zip(P, I)])
        keep = np.ones(len(P), dtype=bool)
        pairs = cKDTree(lifted).query_pairs(rho, output_type="ndarray")
        if len(pairs):
            keep[pairs.max(axis=1)] = False
        P, T, I = P[keep], T[keep], I[keep]
    return PointCloud(P, T, I, truncated)


# sphere translates

@dataclass(frozen=True, eq=False)
class SphereEntry:
    label: str
    words: tuple  # generator words of the letters, leftmost first
    length: int
    sphere: Sphere | Plane
    residual: float

    def to_dict(self) -> dict:
        return {"word": self.label, "letters": [list(w) for w in self.words], "length": self.length,
                **self.sphere.to_dict(), "residual": self.residual}


@dataclass(eq=False)
class SphereSet:
    entries: list
    truncated: bool = False
    crossing_pairs: list = field(default_factory=list)
    marginal_pairs: list = field(default_factory=list)

    @property
    def non_crossing(self) -> bool:
        return not self.crossing_pairs

    def to_dict(self) -> dict:
        return {"spheres": [e.to_dict() for e in self.entries], "truncated": self.truncated,
                "non_crossing": self.non_crossing, "crossing_pairs": self.crossing_pairs,
                "marginal_pairs": self.marginal_pairs}


def sphere_residual(g: VahlenMatrix, S, image, k: int = 16, seed: int = 0) -> float:
    """Largest deviation of g(sampled points of S) from the computed image sphere."""
    X = sample_sphere(S, k, np.random.default_rng(seed))
    Y, mask = apply_array(g.array, X, g.dim_n)
    Y = Y[~mask]
    if not len(Y):
        return 0.0
    if isinstance(image, Sphere):
        d = np.abs(np.linalg.norm(Y - image.center, axis=1) - image.radius) / max(1.0, image.radius)
    else:
        d = np.abs(Y @ image.normal - image.offset) / np.maximum(1.0, np.linalg.norm(Y, axis=1))
    return float(d.max())


def sphere_translates(spec: GroupSpec, L: int, budget: int = NODE_BUDGET, certify: bool = True,
                      delta: float = 1e-9) -> SphereSet:
    S = spec.balls.sphere
    entries = [SphereEntry("id", (), 0, S, 0.0)]
    table = enumerate_cosets(spec, "G", L, budget)
    for rep in table.reps[1:]:
        img = image_sphere(rep.matrix, S)
        words = tuple(x.word for x in rep.form.letters)
        entries.append(SphereEntry(rep.label, words, rep.length, img, sphere_residual(rep.matrix, S, img)))
    out = SphereSet(entries, table.truncated)
    if certify:
        out.crossing_pairs, out.marginal_pairs = crossing_pairs([e.sphere for e in entries], delta)
    return out


def crossing_pairs(spheres: list, delta: float = 1e-9):
    """Index pairs of spheres that cross, and pairs inside the tangency band."""
    idx = [i for i, s in enumerate(spheres) if isinstance(s, Sphere)]
    cross, marg = [], []
    if idx:
        C = np.array([spheres[i].center for i in idx])
        R = np.array([spheres[i].radius for i in idx])
        tree = cKDTree(C)
        # spheres can only meet when their centres are closer than the radius sum
        rmax = R.max()
        for a in range(len(idx)):
            for b in tree.query_ball_point(C[a], R[a] + rmax):
                if b <= a:
                    continue
                d2 = float(np.sum((C[a] - C[b]) ** 2))
                rr = 2 * R[a] * R[b]
                p = (R[a] ** 2 + R[b] ** 2 - d2) / rr
                band = delta * (1.0 + (R[a] ** 2 + R[b] ** 2 + d2) / rr)
                if abs(p) < 1.0 - band:
                    cross.append([idx[a], idx[b]])
                elif abs(abs(p) - 1.0) <= band:
                    marg.append([idx[a], idx[b]])
    planes = [i for i, s in enumerate(spheres) if isinstance(s, Plane)]
    for i in planes:
        for j in range(len(spheres)):
            if j == i or (j in planes and j < i):
                continue
            A = Ball(spheres[i], "below")
            B = Ball(spheres[j], "below" if isinstance(spheres[j], Plane) else "inside")
            p, scale = _pairing(A, B)
            band = delta * scale
            pair = sorted([i, j])
            if abs(p) < 1.0 - band:
                cross.append(pair)
            elif abs(abs(p) - 1.0) <= band:
                marg.append(pair)
    return sorted(cross), sorted(marg)


def entry_matrix(spec: GroupSpec, entry: SphereEntry) -> VahlenMatrix:
    return spec.evaluate_word([t for w in entry.words for t in w])


# fixed points

def attracting_fixed_point(g: VahlenMatrix, seeds: int = 3, budget: int = 80, tol: float = 1e-9):
    """lim g^k(x) for a loxodromic g, from independent seeds via repeated squaring."""
    cls = classify(g)
    if cls.kind != "loxodromic":
        raise ContractError(f"attracting fixed point needs a loxodromic map, got {cls.kind}")
    rng = np.random.default_rng(11)
    starts = [rng.normal(size=g.dim_n) * s for s in (0.5, 2.0, 8.0)[:seeds]]
    h = g
    prev = None
    for _ in range(budget):
        h = compose(h, h)
        pts = [apply(h, x) for x in starts]
        agree = all(chordal_distance(pts[0], p) < tol for p in pts[1:])
        if agree and prev is not None and chordal_distance(prev, pts[0]) < tol:
            return pts[0]
        prev = pts[0]
    raise Unresolved("power iteration did not converge")


def repelling_fixed_point(g: VahlenMatrix, **kw):
    return attracting_fixed_point(invert(g), **kw)


# exports

def write_csv(cloud: PointCloud, path, lifted: bool = False) -> None:
    """Columns x1..xn (x1..x_{n+1} when lifted), word_length. Infinity appears
    only in lifted mode, as the north pole."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        k = cloud.dim + (1 if lifted else 0)
        w.writerow([f"x{i + 1}" for i in range(k)] + ["word_length"])
        coords = cloud.lifted() if lifted else cloud.points
        for p, ell, inf in zip(coords, cloud.lengths, cloud.is_inf):
            if inf and not lifted:
                continue
            w.writerow([f"{v:.12g}" for v in p] + [int(ell)])


def write_ply(cloud: PointCloud, path) -> None:
    if cloud.dim > 3:
        raise ContractError("PLY export needs n <= 3")
    P = cloud.finite()
    L = cloud.lengths[~cloud.is_inf]
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(P)}\nproperty float x\nproperty float y\nproperty float z\n")
        fh.write("property int word_length\nend_header\n")
        for p, ell in zip(P, L):
            xyz = list(p) + [0.0] * (3 - len(p))
            fh.write(" ".join(f"{v:.9g}" for v in xyz) + f" {int(ell)}\n")


def write_spheres(spheres: SphereSet, path) -> None:
    from .verify import _plain
    with open(path, "w") as fh:
        json.dump(_plain(spheres.to_dict()), fh, indent=1, sort_keys=True)
        fh.write("\n")


def max_distance_to_plane(cloud: PointCloud, plane: Plane) -> float:
    """Upper bound on the chordal distance from the cloud to a plane: each finite
    point is compared with its orthogonal projection (infinity lies on the plane)."""
    best = 0.0
    for p in cloud.finite():
        q = p - (plane.normal @ p - plane.offset) * plane.normal
        best = max(best, chordal_distance(p, q))
    return best

