"""Product-replacement walks, trace diagnostics, and constructive steering.

Walks apply i.i.d. uniform Nielsen (or Whitehead) moves to a representation
tuple and record generator and pair traces.  In the noncompact fields the
representation space has infinite volume and walks escape; an overflow
guard restarts the walk from the initial tuple and logs the excursion, so
the diagnostics stay honest about that caveat.

Steering realizes the coordinate-by-coordinate construction: stage k
multiplies coordinate k by a word in the other coordinates approximating
the required correction, assuming (and checking) that those coordinates
generate a dense subgroup at each stage.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .density import DensityVerdict, SearchBudget, certify_dense, opnorm
from .freegroup import (
    FreeAutomorphism,
    Word,
    compose,
    format_word,
    nielsen_generators,
    whitehead_automorphisms,
)
from .sl2 import (
    DEFAULT_TOL,
    GroupElement,
    Representation,
    Tolerances,
    act,
    evaluate,
)


@dataclass(frozen=True)
class WalkConfig:
    steps: int
    seed: int = 0
    move_set: str = "nielsen"  # "nielsen" | "whitehead"
    record_stride: int = 1
    overflow_guard: float = 1e12
    # determinant rounding amplifies multiplicatively along the moves
    # (log-dets add like a random Fibonacci sequence) and would destroy a
    # tuple within a few hundred steps; su2 walks re-project to the unitary
    # group every step, while noncompact walks restart (logged, never a
    # silent rescale) once a coordinate's det drifts beyond det_guard at
    # its entry scale.  Low-flying walks need this: they can wander under
    # the overflow guard indefinitely.
    project_su2: bool = True
    det_guard: float = 1e-10

    def __post_init__(self):
        if self.steps < 0 or self.record_stride < 1:
            raise ValueError("steps must be >= 0 and stride positive")
        if self.move_set not in ("nielsen", "whitehead"):
            raise ValueError("move_set must be 'nielsen' or 'whitehead'")


@dataclass
class WalkSample:
    step: int
    gen_traces: tuple
    pair_traces: tuple  # tr(rho(x_i x_j)) for i < j, row-major


@dataclass
class WalkRun:
    config: WalkConfig
    rank: int
    field: str
    samples: list[WalkSample]
    restarts: list[int] = field(default_factory=list)

    def trace_matrix(self) -> np.ndarray:
        """(num_samples, n + n(n-1)/2) array of recorded traces."""
        return np.array([list(s.gen_traces) + list(s.pair_traces)
                         for s in self.samples])


def _trace_sample(step: int, mats: list[np.ndarray], field_tag: str) -> WalkSample:
    def tr(m):
        t = m[0, 0] + m[1, 1]
        return float(t.real) if field_tag == "real" else complex(t)

    n = len(mats)
    gens = tuple(tr(m) for m in mats)
    pairs = tuple(tr(mats[i] @ mats[j]) for i in range(n) for j in range(i + 1, n))
    return WalkSample(step, gens, pairs)


def _move_programs(rank: int, move_set: str) -> list[list[tuple[int, tuple[int, ...]]]]:
    """Each program lists (coordinate, inverse-image letters) for coordinates
    the move actually changes; applying it implements the act() convention."""
    moves = (nielsen_generators(rank) if move_set == "nielsen"
             else whitehead_automorphisms(rank))
    programs = []
    for a in moves:
        prog = []
        for i, w in enumerate(a.inverse_images):
            if w.letters != (i + 1,):
                prog.append((i, w.letters))
        programs.append(prog)
    return programs


def _project_unitary(m: np.ndarray) -> np.ndarray:
    """Nearest-in-O(eps) SU(2) matrix: normalize the first row."""
    a, b = m[0, 0], m[0, 1]
    s = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    a, b = a / s, b / s
    return np.array([[a, b], [-b.conjugate(), a.conjugate()]])


def random_walk(rep: Representation, cfg: WalkConfig,
                tol: Tolerances = DEFAULT_TOL) -> WalkRun:
    """Deterministic-under-seed product-replacement walk.

    Records a sample at step 0 and after every record_stride further steps.
    When any matrix entry exceeds the overflow guard (noncompact fields),
    the tuple restarts from the initial representation and the step index
    is logged.
    """
    rng = np.random.default_rng(cfg.seed)
    programs = _move_programs(rep.rank, cfg.move_set)
    init = [g.m.copy() for g in rep.images]
    mats = [m.copy() for m in init]
    run = WalkRun(cfg, rep.rank, rep.field, [])
    run.samples.append(_trace_sample(0, mats, rep.field))
    guard = cfg.overflow_guard
    is_su2 = rep.field == "su2"
    for step in range(1, cfg.steps + 1):
        prog = programs[rng.integers(len(programs))]
        new = list(mats)
        for (i, letters) in prog:
            acc = None
            for v in letters:
                m = mats[abs(v) - 1]
                if v < 0:
                    a, b, c, d = m.ravel()
                    m = np.array([[d, -b], [-c, a]])
                acc = m if acc is None else acc @ m
            new[i] = _project_unitary(acc) if (is_su2 and cfg.project_su2) else acc
        mats = new
        if not is_su2:
            escaped = False
            for m in mats:
                top = float(np.abs(m).max())
                if top > guard:
                    escaped = True
                    break
                det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
                if abs(det - 1.0) > cfg.det_guard * max(1.0, top * top):
                    escaped = True
                    break
            if escaped:
                run.restarts.append(step)
                mats = [m.copy() for m in init]
        if step % cfg.record_stride == 0:
            run.samples.append(_trace_sample(step, mats, rep.field))
    return run


def walk_to_csv(run: WalkRun, path: str, manifest_line: str | None = None) -> None:
    n = run.rank
    cols = ["step"]
    is_real = run.field == "real"
    for i in range(1, n + 1):
        cols += [f"tr{i}"] if is_real else [f"tr{i}_re", f"tr{i}_im"]
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            cols += [f"tr{i}{j}"] if is_real else [f"tr{i}{j}_re", f"tr{i}{j}_im"]
    with open(path, "w") as f:
        if manifest_line is not None:
            f.write(f"# {manifest_line}\n")
        f.write(",".join(cols) + "\n")
        for s in run.samples:
            vals: list[str] = [str(s.step)]
            for t in list(s.gen_traces) + list(s.pair_traces):
                if is_real:
                    vals.append(f"{t:.17g}")
                else:
                    vals += [f"{t.real:.17g}", f"{t.imag:.17g}"]
            f.write(",".join(vals) + "\n")


def commutator_trace(rep: Representation):
    """tr rho([x1, x2]) - the rank-2 conjugation-walk invariant."""
    if rep.rank != 2:
        raise ValueError("commutator_trace needs a rank-2 representation")
    return evaluate(rep, Word((1, 2, -1, -2), 2)).trace


# -- Haar trace baseline (su2) ------------------------------------------------


def su2_trace_pdf(t):
    t = np.asarray(t, dtype=float)
    return np.sqrt(np.maximum(4.0 - t * t, 0.0)) / (2.0 * math.pi)


def su2_trace_cdf(t):
    t = np.clip(np.asarray(t, dtype=float), -2.0, 2.0)
    return (t * np.sqrt(4.0 - t * t) / 2.0 + 2.0 * np.arcsin(t / 2.0)) / (2.0 * math.pi) + 0.5


def rejection_sample_su2_traces(rng: np.random.Generator, size: int) -> np.ndarray:
    """Haar trace samples by rejection from the uniform envelope on [-2, 2]."""
    out = np.empty(size)
    have = 0
    while have < size:
        t = rng.uniform(-2.0, 2.0, size=2 * (size - have))
        u = rng.uniform(0.0, 1.0, size=t.shape[0])
        acc = t[u < np.sqrt(4.0 - t * t) / 2.0]
        take = min(acc.shape[0], size - have)
        out[have:have + take] = acc[:take]
        have += take
    return out


def ks_against_haar_traces(samples: Iterable[float]):
    """Kolmogorov-Smirnov test of trace samples against the Haar law."""
    arr = np.asarray(list(samples), dtype=float)
    return stats.kstest(arr, su2_trace_cdf)


# -- element approximation ----------------------------------------------------


@dataclass
class ApproxResult:
    word: Word
    distance: float
    success: bool
    examined: int


def _su2_quat(batch: np.ndarray) -> np.ndarray:
    """SU(2) matrices as unit quaternions (Re a, Im a, Re b, Im b); the
    operator norm between two SU(2) matrices equals the Euclidean distance
    between their quaternions (difference matrices are conformal)."""
    return np.stack([batch[:, 0, 0].real, batch[:, 0, 0].imag,
                     batch[:, 0, 1].real, batch[:, 0, 1].imag], axis=1)


def _sphere_levels(table: np.ndarray, k: int, max_level: int, cap: int,
                   resolution: float = 1e-5):
    """Breadth-first word spheres with global dedup of discretized group
    elements, up to max_level letters or cap distinct points.

    Dedup keeps the first (shortest) word per discretized quaternion.  For
    generic generator pairs levels grow geometrically and the cap binds at
    modest depth; for pairs near a finite or thin subgroup the frontier
    collapses and the search automatically runs much deeper, which is where
    naive sphere coverage fails."""
    def quat_keys(batch: np.ndarray) -> np.ndarray:
        # mixed 64-bit hash of the discretized quaternion; a rare collision
        # only drops one redundant point from the cover
        q = np.round(_su2_quat(batch) / resolution).astype(np.int64).view(np.uint64)
        h = q[:, 0] * np.uint64(0x9E3779B97F4A7C15)
        h ^= q[:, 1] * np.uint64(0xBF58476D1CE4E5B9)
        h ^= (q[:, 2] << np.uint64(1)) * np.uint64(0x94D049BB133111EB)
        h ^= (q[:, 3] << np.uint64(2)) * np.uint64(0xD6E8FEB86659FD93)
        return h

    levels: list[tuple[np.ndarray, np.ndarray]] = []
    mats_levels: list[np.ndarray] = []
    mats = np.eye(2, dtype=table.dtype)[None]
    last = np.full(1, -1, dtype=np.int16)
    inverse_nib = np.arange(2 * k, dtype=np.int16) ^ 1
    seen = np.sort(quat_keys(mats))
    total = 1
    for _ in range(max_level):
        B = mats.shape[0]
        child = np.einsum("bij,ljk->blik", mats, table).reshape(B * 2 * k, 2, 2)
        child_nib = np.tile(np.arange(2 * k, dtype=np.int16), B)
        parent = np.repeat(np.arange(B, dtype=np.int64), 2 * k)
        valid = last[parent] != inverse_nib[child_nib]
        child, child_nib, parent = child[valid], child_nib[valid], parent[valid]
        if child.shape[0] == 0:
            break
        keys = quat_keys(child)
        _, first = np.unique(keys, return_index=True)
        pos = np.minimum(np.searchsorted(seen, keys[first]), seen.size - 1)
        fresh = np.sort(first[seen[pos] != keys[first]])
        if fresh.size == 0:
            break
        child, child_nib, parent = child[fresh], child_nib[fresh], parent[fresh]
        levels.append((child_nib, parent))
        mats_levels.append(child)
        seen = np.union1d(seen, keys[fresh])
        mats, last = child, child_nib
        total += child.shape[0]
        if total >= cap:
            break
    return levels, mats_levels


def _backtrack(levels, level: int, index: int) -> tuple[int, ...]:
    letters_rev = []
    idx = index
    for lev in range(level, -1, -1):
        nibs, parents = levels[lev]
        c = int(nibs[idx])
        letters_rev.append((c // 2 + 1) * (-1 if c % 2 else 1))
        idx = int(parents[idx])
    return tuple(reversed(letters_rev))


def _approximate_su2_meet(S: Sequence[GroupElement], target: GroupElement,
                          epsilon: float, budget: SearchBudget) -> ApproxResult:
    """Meet-in-the-middle basic approximation for the compact field: any
    product u*v with u, v in a word sphere is scored as the quaternion
    distance from v to u^-1 target, found by one nearest-neighbor query per
    u.  Covers |sphere|^2 candidate words at KD-tree cost."""
    from scipy.spatial import cKDTree

    k = len(S)
    table = np.empty((2 * k, 2, 2), dtype=np.complex128)
    for i, g in enumerate(S):
        table[2 * i] = g.m
        table[2 * i + 1] = g.inverse().m
    half = max(budget.max_word_length // 2, 1)
    cap = max(2 * k + 1, min(budget.max_candidates, 200_000))
    # cell size scaled to the tolerance: coarse cells merge the clusters
    # that generators near finite-order elements produce, letting the
    # breadth-first growth run deep instead of saturating the budget
    resolution = max(epsilon / 8.0, 1e-5)
    levels, mats_levels = _sphere_levels(table, k, half, cap, resolution)
    pts = [np.eye(2, dtype=np.complex128)[None]] + mats_levels
    all_mats = np.concatenate(pts)
    where = [(-1, 0)]  # level -1 = the empty word
    for lev, m in enumerate(mats_levels):
        where.extend((lev, i) for i in range(m.shape[0]))
    quats = _su2_quat(all_mats)
    tree = cKDTree(quats)
    tm = target.m.astype(np.complex128)
    # u^-1 target for every u (u unitary: inverse is the conjugate transpose)
    ut = np.einsum("nji,jk->nik", all_mats.conj(), tm)
    dists, idxs = tree.query(_su2_quat(ut), k=1)
    best_u = int(np.argmin(dists))
    best_v = int(idxs[best_u])
    u_lev, u_idx = where[best_u]
    v_lev, v_idx = where[best_v]
    u_word = _backtrack(levels, u_lev, u_idx) if u_lev >= 0 else ()
    v_word = _backtrack(levels, v_lev, v_idx) if v_lev >= 0 else ()
    word = Word(u_word + v_word, k)
    claimed = opnorm(all_mats[best_u] @ all_mats[best_v] - tm)
    return ApproxResult(word, claimed, claimed < epsilon, quats.shape[0] ** 2)


def _opnorms(batch: np.ndarray) -> np.ndarray:
    """Operator norms of a (N, 2, 2) batch, closed form.

    Search-ranking use only: carries ~1e-9 absolute noise when the two
    singular values coincide; reported distances go through the stable
    svd-backed opnorm instead."""
    f2 = (np.abs(batch) ** 2).sum(axis=(1, 2))
    det = batch[:, 0, 0] * batch[:, 1, 1] - batch[:, 0, 1] * batch[:, 1, 0]
    inner = np.maximum(f2 * f2 - 4.0 * np.abs(det) ** 2, 0.0)
    return np.sqrt((f2 + np.sqrt(inner)) / 2.0)


def approximate_element(S: Sequence[GroupElement], target: GroupElement,
                        epsilon: float, budget: SearchBudget = SearchBudget(),
                        beam_width: int = 512) -> ApproxResult:
    """Search over word spheres for a word w over S with
    ||w(S) - target|| < epsilon in operator norm.

    Compact field: meet-in-the-middle over two word spheres; SU(2) elements
    are unit quaternions and the operator norm is their Euclidean distance,
    so one nearest-neighbor query per left factor scores every product.

    Noncompact fields: spheres are explored exhaustively while they fit in
    the candidate budget (pruning low spheres starves coverage); deeper
    levels keep a distance-sorted beam of near-distinct matrices.  Words
    are recovered by parent pointers, so whole levels stay in numpy arrays.

    On budget exhaustion returns the best candidate found, flagged
    unsuccessful.  The identity target yields the empty word; an exact
    generator match yields a length-1 word.
    """
    k = len(S)
    if k == 0:
        raise ValueError("S must be nonempty")
    tm = target.m.astype(S[0].m.dtype)
    d0 = opnorm(np.eye(2) - tm)
    if d0 < epsilon or d0 == 0.0:
        return ApproxResult(Word.identity(k), d0, True, 0)
    if S[0].field == "su2":
        return _approximate_su2_meet(S, target, epsilon, budget)
    table = np.empty((2 * k, 2, 2), dtype=S[0].m.dtype)
    for i, g in enumerate(S):
        table[2 * i] = g.m
        table[2 * i + 1] = g.inverse().m
    # nibble c encodes letter: generator c//2+1, inverse if c odd
    inverse_nib = np.arange(2 * k, dtype=np.int16) ^ 1

    exhaust_cap = max(beam_width, min(budget.max_candidates, 2_000_000))
    levels: list[tuple[np.ndarray, np.ndarray]] = []  # (last_nib, parent) per level
    mats = np.eye(2, dtype=table.dtype)[None]
    last = np.full(1, -1, dtype=np.int16)
    best_dist = d0
    best_level = -1
    best_index = 0
    examined = 0

    t0 = time.monotonic()
    for _ in range(budget.max_word_length):
        B = mats.shape[0]
        child = np.einsum("bij,ljk->blik", mats, table).reshape(B * 2 * k, 2, 2)
        child_nib = np.tile(np.arange(2 * k, dtype=np.int16), B)
        parent = np.repeat(np.arange(B, dtype=np.int64), 2 * k)
        valid = last[parent] != inverse_nib[child_nib]
        child = child[valid]
        child_nib = child_nib[valid]
        parent = parent[valid]
        if child.shape[0] == 0:
            break
        dists = _opnorms(child - tm)
        examined += child.shape[0]
        imin = int(np.argmin(dists))
        if dists[imin] < best_dist:
            # the ranking norm carries ~1e-9 noise; pin the claim stably
            best_dist = opnorm(child[imin] - tm)
            best_level = len(levels)
            best_index = imin
        if best_dist < epsilon or time.monotonic() - t0 > budget.time_cap_s:
            levels.append((child_nib, parent))
            break
        if child.shape[0] <= exhaust_cap:
            levels.append((child_nib, parent))
            mats = child
            last = child_nib
            continue
        # prune: nearest beam_width after matrix dedup at coarse resolution
        order = np.argsort(dists, kind="stable")
        rounded = np.round(child[order].reshape(-1, 4), 3)
        view = np.ascontiguousarray(rounded).view([("", rounded.dtype)] * rounded.shape[1])
        _, first = np.unique(view, return_index=True)
        keep = order[np.sort(first)[: 4 * beam_width]]
        keep = keep[np.argsort(dists[keep], kind="stable")][:beam_width]
        levels.append((child_nib[keep], parent[keep]))
        if best_level == len(levels) - 1:
            # the nearest candidate always survives pruning; track its new slot
            best_index = int(np.nonzero(keep == best_index)[0][0])
        mats = child[keep]
        last = child_nib[keep]
    if best_level < 0:
        return ApproxResult(Word.identity(k), d0, False, examined)
    # backtrack the winning word through the stored levels
    letters_rev = []
    idx = best_index
    for lev in range(best_level, -1, -1):
        nibs, parents = levels[lev]
        c = int(nibs[idx])
        letters_rev.append((c // 2 + 1) * (-1 if c % 2 else 1))
        idx = int(parents[idx])
    word = Word(tuple(reversed(letters_rev)), k, _checked=True)
    return ApproxResult(word, best_dist, best_dist < epsilon, examined)


# -- steering -----------------------------------------------------------------


class SteerStageError(RuntimeError):
    def __init__(self, stage: int, verdict: DensityVerdict):
        self.stage = stage
        self.verdict = verdict
        super().__init__(
            f"stage {stage}: density prerequisite failed "
            f"({verdict.status}{': ' + verdict.reason if verdict.reason else ''})")


@dataclass
class SteerStage:
    coordinate: int
    multiplier_word: Word  # letters index the full generator set
    multiplier_distance: float


@dataclass
class SteerResult:
    automorphism: FreeAutomorphism
    distances: tuple[float, ...]
    stages: list[SteerStage]
    success: bool

    def to_obj(self) -> dict:
        return {
            "images": [format_word(w) for w in self.automorphism.images],
            "inverse_images": [format_word(w) for w in self.automorphism.inverse_images],
            "distances": list(self.distances),
            "stages": [{"coordinate": s.coordinate,
                        "multiplier_word": format_word(s.multiplier_word),
                        "multiplier_distance": s.multiplier_distance}
                       for s in self.stages],
            "success": self.success,
        }


def steer(phi: Representation, psi: Representation, epsilon: float,
          budget: SearchBudget = SearchBudget(), seed: int = 0,
          tol: Tolerances = DEFAULT_TOL, beam_width: int = 512,
          check_density: bool = True) -> SteerResult:
    """Find an automorphism moving phi coordinatewise within epsilon of psi.

    Stage k (k = n..1) right-multiplies coordinate k by a word in the other
    current coordinates approximating rho(x_k)^-1 psi(x_k); the stage
    requires those coordinates to generate a dense subgroup, which is
    certified as the stages proceed (SteerStageError on failure).

    Best demonstrated in the compact su2 field; in the noncompact fields
    approximation quality for distant targets is budget-limited, so keep
    targets in a bounded region.
    """
    if phi.rank != psi.rank or phi.field != psi.field:
        raise ValueError("representations must share rank and field")
    n = phi.rank
    current = phi
    total = FreeAutomorphism.identity(n)
    stages: list[SteerStage] = []
    gens = [Word.generator(i, n) for i in range(1, n + 1)]
    for k in range(n, 0, -1):
        others = [i for i in range(1, n + 1) if i != k]
        S = [current.images[i - 1] for i in others]
        if check_density:
            verdict = certify_dense(S, budget, seed, tol)
            if not verdict.dense:
                raise SteerStageError(k, verdict)
        target = current.images[k - 1].inverse() @ psi.images[k - 1]
        approx = approximate_element(S, target, epsilon, budget, beam_width)
        # remap the word over S to full generator indices
        remapped = Word(tuple((1 if v > 0 else -1) * others[abs(v) - 1]
                              for v in approx.word.letters), n)
        stages.append(SteerStage(k, remapped, approx.distance))
        if not remapped.is_identity():
            images = list(gens)
            images[k - 1] = Word((k,), n) * remapped.inverse()
            inverse_images = list(gens)
            inverse_images[k - 1] = Word((k,), n) * remapped
            sigma = FreeAutomorphism(tuple(images), tuple(inverse_images))
            current = act(sigma, current)
            total = compose(sigma, total)
    distances = tuple(opnorm(current.images[i].m - psi.images[i].m) for i in range(n))
    return SteerResult(total, distances, stages, all(d <= epsilon for d in distances))


def replay_steer(result: SteerResult, phi: Representation,
                 psi: Representation) -> tuple[float, ...]:
    """Recompute the coordinatewise distances of act(automorphism, phi) to
    psi; must reproduce the recorded values."""
    moved = act(result.automorphism, phi)
    return tuple(opnorm(moved.images[i].m - psi.images[i].m)
                 for i in range(moved.rank))
