"""Budgeted, certificate-producing density decision procedures.

A subgroup of SL2(R) or SL2(C) is dense iff it is nondiscrete and its
adjoint images span the full 9-dimensional matrix algebra.  Spanning is
directly checkable (numerical rank); nondiscreteness is not decidable in
floating point, so the certifier accepts two replayable witness shapes:

  * an elliptic word whose rotation angle is far from every rational
    multiple of pi with denominator <= q_max (infinite-order heuristic), or
  * a word close to (but distinct from) +-identity together with a
    companion word it visibly fails to commute with.

For the compact su2 field the infinite-order witness alone suffices: an
infinite subgroup of SU(2) with full adjoint span has dense closure.

Every Dense verdict carries a certificate that replays through the sl2
module; everything else is an explicit obstruction or an honest Unknown.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import jsonio
from .freegroup import (
    FreeAutomorphism,
    Word,
    compose,
    format_word,
    nielsen_generators,
    parse_word,
)
from .sl2 import (
    DEFAULT_TOL,
    GroupElement,
    IsometryType,
    Representation,
    Tolerances,
    act,
    ad_span_rank,
    adjoint,
    classify,
    elements_from_obj,
    elements_to_obj,
    evaluate,
    random_element,
    rotation_angle,
)


@dataclass(frozen=True)
class SearchBudget:
    max_word_length: int = 6
    max_candidates: int = 2000
    time_cap_s: float = 60.0

    def __post_init__(self):
        if self.max_word_length < 1 or self.max_candidates < 1 or self.time_cap_s <= 0:
            raise ValueError("budget fields must be positive")


@dataclass(frozen=True)
class WitnessPolicy:
    delta_irr: float = 1e-6
    q_max: int = 64
    near_lo: float = 1e-9
    near_hi: float = 1e-3
    noncommute_floor: float = 1e-6


DEFAULT_WITNESS = WitnessPolicy()


def rational_angle_margin(theta: float, q_max: int = 64) -> float:
    """Distance from theta/pi to the nearest rational with denominator <= q_max."""
    x = theta / math.pi
    return min(abs(x - round(x * q) / q) for q in range(1, q_max + 1))


def opnorm(m: np.ndarray) -> float:
    """Operator (spectral) norm of a 2x2 matrix.

    Backed by SVD: the closed form in terms of the Frobenius norm and
    determinant loses ~1e-9 absolute accuracy precisely when the singular
    values coincide, which is the generic case for differences of nearby
    unitaries."""
    return float(np.linalg.svd(np.asarray(m), compute_uv=False)[0])


@dataclass
class DensityCertificate:
    """Replayable witness for a Dense verdict: spanning words plus a
    nondiscreteness (or infinite-order) witness."""
    field_tag: str
    generators: list[GroupElement]
    spanning_words: list[Word]
    witness: dict

    def to_obj(self) -> dict:
        return {
            "field": self.field_tag,
            "generators": elements_to_obj(self.generators, self.field_tag),
            "spanning_words": [format_word(w) for w in self.spanning_words],
            "witness": self.witness,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> DensityCertificate:
        gens = elements_from_obj(obj["generators"], obj["field"])
        k = len(gens)
        words = [parse_word(t, k) for t in obj["spanning_words"]]
        return cls(obj["field"], gens, words, dict(obj["witness"]))

    def dumps(self) -> str:
        return jsonio.dumps(self.to_obj(), indent=2)

    @classmethod
    def loads(cls, text: str) -> DensityCertificate:
        return cls.from_obj(jsonio.loads(text))


@dataclass
class DensityVerdict:
    status: str  # "dense" | "likely_not_dense" | "unknown"
    certificate: DensityCertificate | None = None
    reason: str | None = None  # discrete-schottky-like | elementary | reducible-span
    report: dict = field(default_factory=dict)

    @property
    def dense(self) -> bool:
        return self.status == "dense"


def _word_stream(k: int, budget: SearchBudget, seed: int):
    """Reduced words over k symbols in breadth-first order, deterministically
    subsampled per length once counts exceed the candidate budget.  The
    stream depends only on (k, budget, seed), never on matrix values."""
    rng = np.random.default_rng(seed)
    per_length = max(budget.max_candidates // budget.max_word_length, 2 * k)
    level = [(v,) for i in range(1, k + 1) for v in (i, -i)]
    total = 0
    while level:
        if len(level) > per_length:
            idx = rng.choice(len(level), size=per_length, replace=False)
            emit = [level[i] for i in sorted(idx)]
        else:
            emit = level
        for w in emit:
            total += 1
            yield w
            if total >= budget.max_candidates:
                return
        if len(emit[0]) >= budget.max_word_length:
            return
        level = [w + (v,) for w in emit for i in range(1, k + 1) for v in (i, -i)
                 if v != -w[-1]]


def _common_eigenvector(mats: list[np.ndarray], tol: float = 1e-8) -> bool:
    """Do all matrices share a fixed point on CP^1 (common eigenvector)?"""
    base = next((m for m in mats if np.abs(m - np.eye(2)).max() > tol
                 and np.abs(m + np.eye(2)).max() > tol), None)
    if base is None:
        return True  # everything central
    _, vecs = np.linalg.eig(base.astype(np.complex128))
    for j in range(2):
        v = vecs[:, j]
        ok = True
        for m in mats:
            mv = m.astype(np.complex128) @ v
            wedge = abs(mv[0] * v[1] - mv[1] * v[0])
            if wedge > tol * max(1.0, float(np.abs(m).max())):
                ok = False
                break
        if ok:
            return True
    return False


def _irrational_elliptic_witness(g: np.ndarray, field_tag: str, tol: Tolerances,
                                 policy: WitnessPolicy) -> dict | None:
    ge = GroupElement(g, field_tag, tol)
    c = classify(ge, tol)
    if c.kind is not IsometryType.ELLIPTIC:
        return None
    theta = rotation_angle(ge, tol)
    margin = rational_angle_margin(theta, policy.q_max)
    if margin > policy.delta_irr:
        return {"kind": "elliptic-irrational", "angle": theta, "margin": margin,
                "q_max": policy.q_max}
    return None


def certify_dense(S: Sequence[GroupElement], budget: SearchBudget = SearchBudget(),
                  seed: int = 0, tol: Tolerances = DEFAULT_TOL,
                  policy: WitnessPolicy = DEFAULT_WITNESS) -> DensityVerdict:
    """Budgeted search for a density certificate for <S>.

    Dense requires (a) adjoint span of rank 9 over short words and (b) a
    nondiscreteness witness (infinite-order witness alone for su2).  When
    the search completes without truncation, structural obstructions are
    reported as LikelyNotDense; otherwise the verdict is Unknown.
    """
    S = list(S)
    if not S:
        raise ValueError("S must be nonempty")
    field_tag = S[0].field
    if any(g.field != field_tag for g in S):
        raise ValueError("mixed field tags")
    k = len(S)
    rep = Representation(S)
    t0 = time.monotonic()

    eye = np.eye(2)
    nontrivial = [g.m for g in S
                  if np.abs(g.m - eye).max() > policy.near_lo
                  and np.abs(g.m + eye).max() > policy.near_lo]
    if not nontrivial:
        return DensityVerdict("likely_not_dense", reason="elementary",
                              report={"detail": "all generators are central",
                                      "words_examined": 0})

    target_rank = 9
    basis: list[np.ndarray] = []      # orthonormal rows of the current Ad span
    spanning: list[Word] = []
    witness: dict | None = None
    near_identity: list[tuple[Word, np.ndarray, float]] = []
    words_examined = 0
    truncated = False
    saw_elliptic = False
    min_distance = math.inf

    def rank_add(vec: np.ndarray, w: Word) -> None:
        nonlocal basis, spanning
        v = vec.astype(np.complex128)
        norm0 = np.linalg.norm(v)
        for b in basis:
            v = v - (b.conj() @ v) * b
        if np.linalg.norm(v) > tol.sv_rel_cutoff * max(norm0, 1.0):
            basis.append(v / np.linalg.norm(v))
            spanning.append(w)

    use_real_span = field_tag in ("real", "su2")
    stream = _word_stream(k, budget, seed)
    for letters in stream:
        if time.monotonic() - t0 > budget.time_cap_s:
            truncated = True
            break
        words_examined += 1
        w = Word(letters, k, _checked=True)
        m = evaluate(rep, w).m
        if len(basis) < target_rank:
            A = adjoint(GroupElement(m, field_tag, tol))
            vec = A.reshape(9)
            if use_real_span and np.iscomplexobj(vec):
                vec = vec.real
            rank_add(vec, w)
        d_id = min(opnorm(m - eye), opnorm(m + eye))
        if d_id > policy.near_lo:
            min_distance = min(min_distance, d_id)
        if witness is None:
            ell = _irrational_elliptic_witness(m, field_tag, tol, policy)
            if ell is not None:
                saw_elliptic = True
                ell["word"] = format_word(w)
                witness = ell
            else:
                c = classify(GroupElement(m, field_tag, tol), tol)
                if c.kind is IsometryType.ELLIPTIC:
                    saw_elliptic = True
                if (field_tag != "su2" and policy.near_lo < d_id < policy.near_hi):
                    near_identity.append((w, m, d_id))
        if len(basis) >= target_rank and witness is not None:
            break

    # small-element + noncommuting-companion witness (noncompact fields)
    if witness is None and near_identity:
        for (w, m, d_id) in near_identity:
            for gi, h in enumerate(S):
                comm = float(np.abs(m @ h.m - h.m @ m).max())
                if comm > policy.noncommute_floor:
                    witness = {"kind": "near-identity", "word": format_word(w),
                               "distance": d_id, "noncommute": comm,
                               "companion_index": gi}
                    break
            if witness is not None:
                break

    rank = len(basis)
    report = {
        "words_examined": words_examined,
        "truncated": truncated,
        "ad_rank": rank,
        "saw_elliptic": saw_elliptic,
        "min_nontrivial_distance": None if math.isinf(min_distance) else min_distance,
        "elapsed_s": time.monotonic() - t0,
    }

    if rank == target_rank and witness is not None:
        cert = DensityCertificate(field_tag, S, spanning, witness)
        return DensityVerdict("dense", certificate=cert, report=report)

    if _common_eigenvector([g.m for g in S]):
        return DensityVerdict("likely_not_dense", reason="elementary", report=report)
    if not truncated and rank < target_rank:
        return DensityVerdict("likely_not_dense", reason="reducible-span", report=report)
    if (not truncated and rank == target_rank and witness is None
            and (field_tag == "su2" or (not saw_elliptic and min_distance >= 0.1))):
        return DensityVerdict("likely_not_dense", reason="discrete-schottky-like",
                              report=report)
    return DensityVerdict("unknown", report=report)


def replay_certificate(cert: DensityCertificate, tol: Tolerances = DEFAULT_TOL,
                       policy: WitnessPolicy = DEFAULT_WITNESS) -> bool:
    """Re-verify a certificate from its own data: spanning words must give
    adjoint rank 9 and the witness numerics must reproduce."""
    rep = Representation(cert.generators)
    try:
        mats = [evaluate(rep, w) for w in cert.spanning_words]
    except ValueError:
        return False
    if ad_span_rank(mats, tol) != 9:
        return False
    w = cert.witness
    try:
        m = evaluate(rep, parse_word(w["word"], rep.rank))
    except (KeyError, ValueError):
        return False
    if w["kind"] == "elliptic-irrational":
        c = classify(m, tol)
        if c.kind is not IsometryType.ELLIPTIC:
            return False
        theta = rotation_angle(m, tol)
        if abs(theta - w["angle"]) > 1e-9:
            return False
        return rational_angle_margin(theta, int(w["q_max"])) > policy.delta_irr
    if w["kind"] == "near-identity":
        eye = np.eye(2)
        d = min(opnorm(m.m - eye), opnorm(m.m + eye))
        if not (policy.near_lo < d < policy.near_hi):
            return False
        g = cert.generators[int(w["companion_index"])]
        comm = float(np.abs(m.m @ g.m - g.m @ m.m).max())
        return comm > policy.noncommute_floor
    return False


def omega_member(S: Sequence[GroupElement], g: GroupElement,
                 budget: SearchBudget = SearchBudget(), seed: int = 0,
                 tol: Tolerances = DEFAULT_TOL) -> DensityVerdict:
    """Is g in Omega(S): does S together with g generate a dense subgroup?"""
    return certify_dense(list(S) + [g], budget, seed, tol)


@dataclass
class OmegaTildeResult:
    witness: GroupElement | None
    verdicts: list[DensityVerdict]  # per dropped index, for the successful candidate
    attempts: int
    report: dict


def omega_tilde_search(S: Representation | Sequence[GroupElement],
                       budget: SearchBudget = SearchBudget(), seed: int = 0,
                       tol: Tolerances = DEFAULT_TOL,
                       perturbation: float = 0.05,
                       max_attempts: int = 40) -> OmegaTildeResult:
    """Search for g in the intersection of Omega(S minus one coordinate) over
    all coordinates: g must complete every drop-one subtuple to a dense set.

    Candidates are products of the coordinates perturbed by small random
    elements near the identity.  The perturbation radius is a heuristic with
    no effective bound; it is echoed in the report.
    """
    elems = list(S.images) if isinstance(S, Representation) else list(S)
    n = len(elems)
    if n < 3:
        raise ValueError("need an n-tuple with n >= 3")
    field_tag = elems[0].field
    rng = np.random.default_rng(seed)
    attempts = 0
    blocked: dict[int, int] = {}
    products = [elems[i].m @ elems[(i + 1) % n].m for i in range(n)] + \
               [g.m for g in elems]
    while attempts < max_attempts:
        base = products[attempts % len(products)]
        pert = random_element(rng, field_tag, scale=perturbation)
        cand = GroupElement(base, field_tag, tol) @ pert
        attempts += 1
        verdicts = []
        ok = True
        for i in range(n):
            sub = [elems[j] for j in range(n) if j != i] + [cand]
            v = certify_dense(sub, budget, seed, tol)
            verdicts.append(v)
            if not v.dense:
                blocked[i] = blocked.get(i, 0) + 1
                ok = False
                break
        if ok:
            return OmegaTildeResult(cand, verdicts, attempts,
                                    {"perturbation": perturbation,
                                     "note": "perturbation radius is an untuned heuristic"})
    return OmegaTildeResult(None, [], attempts,
                            {"perturbation": perturbation,
                             "blocking_counts": blocked,
                             "note": "perturbation radius is an untuned heuristic"})


@dataclass
class StrongRedundancyReport:
    strongly_redundant: bool
    unknown: bool
    subtuple_verdicts: list[DensityVerdict]


def strongly_redundant(rep: Representation, budget: SearchBudget = SearchBudget(),
                       seed: int = 0, tol: Tolerances = DEFAULT_TOL
                       ) -> StrongRedundancyReport:
    """True iff every (n-1)-subtuple certifies dense; Unknown subtuples make
    the overall answer a flagged False."""
    if rep.rank < 3:
        raise ValueError("strong redundancy needs rank >= 3")
    verdicts = []
    for i in range(rep.rank):
        sub = [rep.images[j] for j in range(rep.rank) if j != i]
        verdicts.append(certify_dense(sub, budget, seed, tol))
    ok = all(v.dense for v in verdicts)
    unknown = any(v.status == "unknown" for v in verdicts)
    return StrongRedundancyReport(ok, unknown and not ok, verdicts)


@dataclass
class RedundancyResult:
    status: str  # "redundant" | "not_found"
    automorphism: FreeAutomorphism | None = None
    dropped_index: int | None = None
    certificate: DensityCertificate | None = None
    chains_tried: int = 0


def redundant_heuristic(rep: Representation, budget: SearchBudget = SearchBudget(),
                        seed: int = 0, tol: Tolerances = DEFAULT_TOL,
                        max_chain_length: int = 2) -> RedundancyResult:
    """Look for a free-factor witness of redundancy: an automorphism sigma and
    an index i such that dropping coordinate i of sigma . rep leaves a dense
    subtuple.  Direct subtuple checks first, then bounded Nielsen chains.
    Redundancy is existentially quantified over all bases, so failure is
    reported as NotFound (inconclusive), never as a refutation.
    """
    if rep.rank < 2:
        raise ValueError("redundancy needs rank >= 2")

    def direct(r: Representation, aut: FreeAutomorphism, tried: int) -> RedundancyResult | None:
        for i in range(r.rank):
            sub = [r.images[j] for j in range(r.rank) if j != i]
            v = certify_dense(sub, budget, seed, tol)
            if v.dense:
                return RedundancyResult("redundant", aut, i, v.certificate, tried)
        return None

    ident = FreeAutomorphism.identity(rep.rank)
    hit = direct(rep, ident, 0)
    if hit is not None:
        return hit
    moves = nielsen_generators(rep.rank)
    frontier = [(ident, rep)]
    tried = 0
    for _ in range(max_chain_length):
        new = []
        for (aut, r) in frontier:
            for mv in moves:
                tried += 1
                if tried > budget.max_candidates:
                    return RedundancyResult("not_found", chains_tried=tried)
                aut2 = compose(mv, aut)
                r2 = act(mv, r)
                hit = direct(r2, aut2, tried)
                if hit is not None:
                    return hit
                new.append((aut2, r2))
        frontier = new
    return RedundancyResult("not_found", chains_tried=tried)


@dataclass
class LinksResult:
    links: bool
    per_k: list[DensityVerdict]


def links(phi: Representation, psi: Representation,
          budget: SearchBudget = SearchBudget(), seed: int = 0,
          tol: Tolerances = DEFAULT_TOL) -> LinksResult:
    """psi links phi when for every k < n the mixed tuple
    (phi(x_1)..phi(x_{k-1}), psi(x_{k+1})..psi(x_n)) generates a dense
    subgroup."""
    if phi.rank != psi.rank:
        raise ValueError("rank mismatch")
    if phi.field != psi.field:
        raise ValueError("field mismatch")
    n = phi.rank
    out = []
    for k in range(1, n):
        mixed = [phi.images[i] for i in range(k - 1)] + \
                [psi.images[i] for i in range(k, n)]
        out.append(certify_dense(mixed, budget, seed, tol))
    return LinksResult(all(v.dense for v in out), out)
