"""The punctured-sphere twisting construction and PS^2 probes.

A 4-punctured sphere group is realized as an explicit rank-3 integer
representation whose three generators and their product are parabolic
(trace exactly 2).  Twisting automorphisms multiply every generator by a
high power of a commutator word whose Whitehead graph is connected and
cutpoint-free on its own letters; precomposing with their inverses yields
a pair of representations whose parabolic conjugacy classes have Whitehead
graphs containing that word's graph.  The probe then measures, for every
primitive conjugacy class up to a length cap, translation-length ratios
and quasi-geodesic behavior of the orbit map under each representation.

All length computations run in scaled float arithmetic (mantissa times
power of two) so long products never overflow; near-parabolic traces are
re-verified in exact integer arithmetic when the inputs are integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .freegroup import (
    ConjClass,
    FreeAutomorphism,
    Word,
    apply,
    compose,
    cyclic_reduce,
    format_word,
)
from .sl2 import DEFAULT_TOL, GroupElement, Representation, Tolerances
from .whitehead import WhiteheadGraph, build_graph, cutpoints, is_connected, union

IntMatrix = tuple[tuple[int, int], tuple[int, int]]


def _int_mul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    return ((a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
            (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]))


def _int_inv(a: IntMatrix) -> IntMatrix:
    # adjugate; exact inverse for determinant 1
    return ((a[1][1], -a[0][1]), (-a[1][0], a[0][0]))


def int_evaluate(mats: list[IntMatrix], letters) -> IntMatrix:
    out: IntMatrix = ((1, 0), (0, 1))
    for v in letters:
        m = mats[abs(v) - 1]
        out = _int_mul(out, m if v > 0 else _int_inv(m))
    return out


def _int_rep(mats: list[IntMatrix]) -> Representation:
    return Representation([GroupElement(np.array(m, dtype=float)) for m in mats])


@dataclass
class PuncturedSphereRep:
    """Rank n = k-1 representation of a k-punctured sphere group: the n
    generators and their product are the puncture classes, all parabolic
    with trace exactly 2 (integer matrices)."""
    rep: Representation
    punctures: list[ConjClass]
    int_images: list[IntMatrix]

    @property
    def rank(self) -> int:
        return self.rep.rank


def build_fuchsian_4punctured() -> PuncturedSphereRep:
    """The explicit discrete faithful 4-punctured-sphere representation.

    Generators X1 = [[1,2],[0,1]], X2 = [[1,0],[-4,1]], X3 = [[-3,2],[-8,5]]
    form a basis (A, B^-2, B A B^-1) of an index-2 subgroup of the Sanov
    group <[[1,2],[0,1]], [[1,0],[2,1]]>, which is free and discrete; the
    three generators and their product X1 X2 X3 = [[5,-4],[4,-3]] are all
    parabolic (trace 2).  Discreteness and faithfulness are classical facts
    about this integer group, documented rather than re-proved at runtime.
    """
    mats: list[IntMatrix] = [((1, 2), (0, 1)), ((1, 0), (-4, 1)), ((-3, 2), (-8, 5))]
    for m in mats:
        assert m[0][0] * m[1][1] - m[0][1] * m[1][0] == 1
        assert m[0][0] + m[1][1] == 2
    prod = int_evaluate(mats, (1, 2, 3))
    assert prod == ((5, -4), (4, -3)) and prod[0][0] + prod[1][1] == 2
    punctures = [ConjClass(Word((i,), 3)) for i in (1, 2, 3)]
    punctures.append(ConjClass(Word((1, 2, 3), 3)))
    return PuncturedSphereRep(_int_rep(mats), punctures, mats)


class TwistingPreconditionError(ValueError):
    """The twisting word fails its Whitehead-graph precondition."""


def _check_twisting_word(g: Word, distinguished: int) -> None:
    core, _ = cyclic_reduce(g)
    if core.letters != g.letters:
        raise TwistingPreconditionError("twisting word must be cyclically reduced")
    if not g.letters:
        raise TwistingPreconditionError("twisting word must be nontrivial")
    if any(abs(v) == distinguished for v in g.letters):
        raise TwistingPreconditionError(
            f"twisting word must avoid generator x{distinguished}")
    others = [i for i in range(1, g.rank + 1) if i != distinguished]
    verts = [v for i in others for v in (i, -i)]
    graph = build_graph([g], g.rank)
    if not is_connected(graph, verts) or cutpoints(graph, verts):
        raise TwistingPreconditionError(
            "twisting word's Whitehead graph must be connected and cutpoint-free "
            "on the non-distinguished vertices")


def build_phi(m: int, variant: int, g: Word) -> FreeAutomorphism:
    """The twisting automorphism: with d the distinguished generator (x1 for
    variant 1, x2 for variant 2), d -> d g^m and x_i -> x_i d g^m for the
    others.  Assembled as a composition of Nielsen moves, so invertibility
    is verified along the way.
    """
    if m < 1:
        raise ValueError("twisting exponent m must be >= 1")
    if variant not in (1, 2):
        raise ValueError("variant must be 1 or 2")
    d = 1 if variant == 1 else 2
    _check_twisting_word(g, d)
    n = g.rank
    gens = tuple(Word.generator(i, n) for i in range(1, n + 1))

    def right_mult(i: int, v: int) -> FreeAutomorphism:
        # x_i -> x_i x_v ; single Nielsen move
        fwd = list(gens)
        fwd[i - 1] = Word((i, v), n)
        bwd = list(gens)
        bwd[i - 1] = Word((i, -v), n)
        return FreeAutomorphism(tuple(fwd), tuple(bwd), _checked=True)

    tau = FreeAutomorphism.identity(n)
    for v in (g ** m).letters:
        tau = compose(tau, right_mult(d, v))
    inner = FreeAutomorphism.identity(n)
    for i in range(1, n + 1):
        if i != d:
            inner = compose(inner, right_mult(i, d))
    return compose(tau, inner)


@dataclass
class ContainmentDetail:
    puncture: ConjClass
    image: Word
    missing_edges: list[tuple[int, int]]

    @property
    def contained(self) -> bool:
        return not self.missing_edges


def puncture_whitehead_containment(phi: FreeAutomorphism, punctures: list[ConjClass],
                                   W: WhiteheadGraph) -> tuple[bool, list[ContainmentDetail]]:
    """Does the Whitehead graph of every twisted puncture contain W edgewise
    (simple-graph view)?  Details list the missing edges per puncture."""
    target = W.simple_edges()
    details = []
    for c in punctures:
        img = apply(phi, c.canonical)
        graph = build_graph([img], phi.rank)
        missing = sorted(target - graph.simple_edges())
        details.append(ContainmentDetail(c, img, missing))
    return all(d.contained for d in details), details


def pair_graph_check(g1: Word, g2: Word) -> bool:
    """Combinatorial core of the two-handlebody construction: intended for
    g1 in the free factor <x_2..x_n> and g2 in <x_1, x_3..x_n>.

    Precondition (reported per input): each word's graph is connected and
    cutpoint-free on the vertices of its own letters.  Returns whether the
    union graph over all 2n vertices is connected without cutpoints; words
    that jointly miss a generator leave isolated vertices and yield False."""
    if g1.rank != g2.rank:
        raise ValueError("rank mismatch")
    n = g1.rank
    problems = []
    for label, g in (("g1", g1), ("g2", g2)):
        support = sorted({abs(v) for v in g.letters})
        verts = [v for i in support for v in (i, -i)]
        graph = build_graph([g], n)
        if not is_connected(graph, verts) or cutpoints(graph, verts):
            problems.append(label)
    if problems:
        raise TwistingPreconditionError(
            f"precondition failed for {', '.join(problems)}: graph must be "
            "connected and cutpoint-free on its own letters' vertices")
    u = union(build_graph([g1], n), build_graph([g2], n))
    return is_connected(u) and not cutpoints(u)


def find_twisting_exponent(punctures: list[ConjClass], g1: Word, g2: Word,
                           m_max: int = 10) -> int:
    """Smallest m for which both variants' twisted punctures have Whitehead
    graphs containing the respective twisting word's graph.  The value is a
    measured artifact output, not assumed."""
    n = g1.rank
    W1 = build_graph([g1], n)
    W2 = build_graph([g2], n)
    for m in range(1, m_max + 1):
        ok1, _ = puncture_whitehead_containment(build_phi(m, 1, g1), punctures, W1)
        ok2, _ = puncture_whitehead_containment(build_phi(m, 2, g2), punctures, W2)
        if ok1 and ok2:
            return m
    raise ValueError(f"no twisting exponent <= {m_max} passes containment")


@dataclass
class TwistedPair:
    rho1: Representation
    rho2: Representation
    phi1: FreeAutomorphism
    phi2: FreeAutomorphism
    m: int
    int_images_1: list[IntMatrix]
    int_images_2: list[IntMatrix]
    parabolic_classes_1: list[ConjClass]
    parabolic_classes_2: list[ConjClass]


def twisted_pair(rho0: PuncturedSphereRep, m: int,
                 g1: Word | None = None, g2: Word | None = None) -> TwistedPair:
    """rho_i = rho0 after the inverse twist: coordinate j is rho0 evaluated
    on phi_i^-1(x_j).  Parabolic conjugacy classes of rho_i are exactly the
    phi_i images of the punctures; their traces stay +-2 in exact integer
    arithmetic, which is checked."""
    n = rho0.rank
    if g1 is None:
        g1 = Word((2, 3, -2, -3), n)
    if g2 is None:
        g2 = Word((1, 3, -1, -3), n)
    W1 = build_graph([g1], n)
    W2 = build_graph([g2], n)
    phi1 = build_phi(m, 1, g1)
    phi2 = build_phi(m, 2, g2)
    ok1, det1 = puncture_whitehead_containment(phi1, rho0.punctures, W1)
    ok2, det2 = puncture_whitehead_containment(phi2, rho0.punctures, W2)
    if not (ok1 and ok2):
        bad = [d.puncture for d in det1 + det2 if not d.contained]
        raise TwistingPreconditionError(
            f"puncture containment fails at m={m} for {bad}; increase m")
    out = []
    for phi in (phi1, phi2):
        ints = [int_evaluate(rho0.int_images, w.letters) for w in phi.inverse_images]
        classes = [ConjClass(apply(phi, c.canonical)) for c in rho0.punctures]
        for c0, c in zip(rho0.punctures, classes):
            tr_direct = int_evaluate(rho0.int_images, c0.canonical.letters)
            tr_twist = int_evaluate(ints, c.canonical.letters)
            t1 = tr_direct[0][0] + tr_direct[1][1]
            t2 = tr_twist[0][0] + tr_twist[1][1]
            if abs(t2) != 2 or abs(t1) != 2:
                raise AssertionError("parabolicity lost through twisting")
        out.append((ints, classes))
    (ints1, cls1), (ints2, cls2) = out
    return TwistedPair(_int_rep(ints1), _int_rep(ints2), phi1, phi2, m,
                       ints1, ints2, cls1, cls2)


# -- the PS^2 probe -----------------------------------------------------------


@dataclass
class PS2Report:
    rank: int
    field: str
    length_cap: int
    K: float
    window: int
    total_classes: int
    counts_by_length: dict[int, int]
    min_max_ratio: float
    argmin_class: str
    zero_ratio_count_1: int
    zero_ratio_count_2: int
    zero_ratio_examples_1: list[str]
    zero_ratio_examples_2: list[str]
    axis_pass_count_1: int
    axis_pass_count_2: int
    axis_pass_either: int
    # per-class columns (numpy arrays, aligned): internal but public for tests
    col_length: np.ndarray = field(repr=False, default=None)
    col_keys: np.ndarray = field(repr=False, default=None)
    col_l1: np.ndarray = field(repr=False, default=None)
    col_l2: np.ndarray = field(repr=False, default=None)
    col_axis1: np.ndarray = field(repr=False, default=None)
    col_axis2: np.ndarray = field(repr=False, default=None)
    col_kfit1: np.ndarray = field(repr=False, default=None)
    col_kfit2: np.ndarray = field(repr=False, default=None)

    def ratios(self) -> tuple[np.ndarray, np.ndarray]:
        L = self.col_length.astype(float)
        return self.col_l1 / L, self.col_l2 / L

    def min_max_ratio_at(self, cap: int) -> float:
        """Minimum over classes of length <= cap of max(r1, r2); lets one
        probe run answer stability questions for every smaller cap."""
        mask = self.col_length <= cap
        r1, r2 = self.ratios()
        return float(np.maximum(r1[mask], r2[mask]).min())

    def to_obj(self) -> dict:
        return {
            "rank": self.rank,
            "field": self.field,
            "length_cap": self.length_cap,
            "K": self.K,
            "window": self.window,
            "total_classes": self.total_classes,
            "counts_by_length": {str(k): v for k, v in self.counts_by_length.items()},
            "min_max_ratio": self.min_max_ratio,
            "argmin_class": self.argmin_class,
            "zero_ratio_count_1": self.zero_ratio_count_1,
            "zero_ratio_count_2": self.zero_ratio_count_2,
            "zero_ratio_examples_1": self.zero_ratio_examples_1,
            "zero_ratio_examples_2": self.zero_ratio_examples_2,
            "axis_pass_count_1": self.axis_pass_count_1,
            "axis_pass_count_2": self.axis_pass_count_2,
            "axis_pass_either": self.axis_pass_either,
        }

    def write_csv(self, path: str, n: int, manifest_line: str | None = None) -> None:
        b = _engine.bits_per_letter(n)
        with open(path, "w") as f:
            if manifest_line is not None:
                f.write(f"# {manifest_line}\n")
            f.write("class,length,l1,l2,r1,r2,max_ratio,axis_pass_1,axis_pass_2,"
                    "K_fit_1,K_fit_2\n")
            r1, r2 = self.ratios()
            mx = np.maximum(r1, r2)
            for i in range(self.total_classes):
                l = int(self.col_length[i])
                letters = _engine.unpack_keys(self.col_keys[i:i + 1], l, b)[0]
                text = format_word(Word(tuple(_engine.letter_of_nib(int(x))
                                               for x in letters), n, _checked=True))
                f.write(f"{text},{l},{self.col_l1[i]:.17g},{self.col_l2[i]:.17g},"
                        f"{r1[i]:.17g},{r2[i]:.17g},{mx[i]:.17g},"
                        f"{int(self.col_axis1[i])},{int(self.col_axis2[i])},"
                        f"{self.col_kfit1[i]:.6g},{self.col_kfit2[i]:.6g}\n")

    def check_ratio_axis_consistency(self) -> int:
        """Count records where an axis check passed but the translation
        ratio undercuts the lower quasi-geodesic bound at period spacing:
        ratio >= 1/K - K/||c|| must hold whenever the axis check passes."""
        L = self.col_length.astype(float)
        bound = 1.0 / self.K - self.K / L
        r1, r2 = self.ratios()
        bad1 = int((self.col_axis1 & (r1 < bound - 1e-9)).sum())
        bad2 = int((self.col_axis2 & (r2 < bound - 1e-9)).sum())
        return bad1 + bad2


def _scaled_word_products(W: np.ndarray, table: np.ndarray):
    """Scaled products of table matrices along rows of W: returns (mant, exp)
    with true matrix = mant * 2^exp and mantissa entries kept near unit
    scale, so arbitrarily long products never overflow."""
    N, l = W.shape
    P = np.broadcast_to(np.eye(2, dtype=table.dtype), (N, 2, 2)).copy()
    E = np.zeros(N, dtype=np.int64)
    for j in range(l):
        G = table[W[:, j]]
        P = np.einsum("nij,njk->nik", P, G)
        amax = np.abs(P).max(axis=(1, 2))
        _, ex = np.frexp(amax)
        P = P * np.exp2(-ex.astype(float))[:, None, None]
        E += ex
    return P, E


_LN2 = math.log(2.0)


def _lengths_from_scaled_traces(tr_mant: np.ndarray, exp: np.ndarray,
                                tol: Tolerances) -> np.ndarray:
    """Translation lengths 2 ln |lambda_max| from scaled traces t*2^e."""
    a = np.abs(tr_mant)
    log_t = np.where(a > 0, np.log(np.maximum(a, 1e-300)), -np.inf) + exp * _LN2
    out = np.empty(a.shape, dtype=float)
    big = log_t > 60.0  # |t| so large that lambda ~ |t| to double precision
    out[big] = 2.0 * log_t[big]
    small = ~big
    t = np.exp(log_t[small])
    hyp = t > 2.0 + tol.tol_par
    half = t / 2.0
    lam = np.where(hyp, half + np.sqrt(np.maximum(half * half - 1.0, 0.0)), 1.0)
    out[small] = 2.0 * np.log(lam)
    return out


def _axis_checks(W: np.ndarray, table: np.ndarray, window: int, K: float
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Two-sided K-quasi-geodesic test over all axis-point pairs (s, t),
    s < t <= window*||c||.

    Each segment product is accumulated from its own letters (never as a
    quotient of long prefixes, which would cancel catastrophically) in
    scaled arithmetic; d(tau(s), tau(t)) = arccosh(||seg||_F^2 / 2) with the
    height-1 basepoint, in log scale for long segments.  Returns
    (pass mask, best-fitting K) per row.
    """
    N, l = W.shape
    T = window * l
    ok = np.ones(N, dtype=bool)
    kfit = np.zeros(N, dtype=float)
    for s in range(T):
        P = np.broadcast_to(np.eye(2, dtype=table.dtype), (N, 2, 2)).copy()
        E = np.zeros(N, dtype=np.int64)
        for t in range(s + 1, T + 1):
            G = table[W[:, (t - 1) % l]]
            P = np.einsum("nij,njk->nik", P, G)
            amax = np.abs(P).max(axis=(1, 2))
            _, ex = np.frexp(amax)
            P = P * np.exp2(-ex.astype(float))[:, None, None]
            E += ex
            f2 = (np.abs(P) ** 2).sum(axis=(1, 2))
            logX = np.log(np.maximum(f2 / 2.0, 1e-300)) + E * (2.0 * _LN2)
            d = np.where(logX < 30.0,
                         np.arccosh(np.maximum(np.exp(np.minimum(logX, 30.0)), 1.0)),
                         logX + _LN2)
            delta = float(t - s)
            ok &= (d <= K * delta + K) & (d >= delta / K - K)
            k_up = d / (delta + 1.0)
            k_low = (-d + np.sqrt(d * d + 4.0 * delta)) / 2.0
            np.maximum(kfit, np.maximum(k_up, k_low), out=kfit)
    return ok, kfit


def _near_parabolic_recheck(lengths: np.ndarray, tr_mant: np.ndarray,
                            exp: np.ndarray, W: np.ndarray,
                            int_mats: list[IntMatrix] | None,
                            tol: Tolerances) -> None:
    """Classes whose float trace sits near |2| get re-evaluated: exactly in
    integer arithmetic when available (trace +-2 -> length exactly 0),
    otherwise by the tolerance bands.  Mutates lengths in place."""
    a = np.abs(tr_mant) * np.exp2(np.clip(exp, None, 64).astype(float))
    suspects = np.nonzero((exp <= 8) & (np.abs(a - 2.0) < 1e-3))[0]
    for i in suspects:
        letters = [_engine.letter_of_nib(int(x)) for x in W[i]]
        if int_mats is not None:
            m = int_evaluate(int_mats, letters)
            t = m[0][0] + m[1][1]
            if abs(t) <= 2:
                lengths[i] = 0.0
            else:
                half = abs(t) / 2.0
                lengths[i] = 2.0 * math.log(half + math.sqrt(half * half - 1.0))
        else:
            t = float(a[i])
            if t <= 2.0 + tol.tol_par:
                lengths[i] = 0.0


def ps2_probe(rho1: Representation, rho2: Representation, length_cap: int,
              K: float = 50.0, window: int = 2, axis_check: bool = True,
              int_images: tuple[list[IntMatrix], list[IntMatrix]] | None = None,
              tol: Tolerances = DEFAULT_TOL, chunk: int = 40_000) -> PS2Report:
    """For every primitive conjugacy class c with ||c|| <= length_cap,
    measure translation lengths in both representations, their ratios to
    ||c||, and (optionally) the two-sided K-quasi-geodesic inequalities for
    the orbit of the Cayley-graph axis over window*||c|| steps from the
    height-1 basepoint.  Reports the minimum over classes of the larger
    ratio and the classes where an individual ratio vanishes.
    """
    if rho1.rank != rho2.rank or rho1.field != rho2.field:
        raise ValueError("representations must share rank and field")
    n = rho1.rank
    eng = _engine.PackedEngine(n)
    keys = eng.primitive_class_keys(length_cap)
    dt = np.complex128 if rho1.field != "real" else np.float64

    def mat_table(rep: Representation) -> np.ndarray:
        t = np.empty((2 * n, 2, 2), dtype=dt)
        for i, g in enumerate(rep.images):
            t[2 * i] = g.m
            t[2 * i + 1] = g.inverse().m
        return t

    tables = (mat_table(rho1), mat_table(rho2))
    ints = int_images if int_images is not None else (None, None)

    cols: dict[str, list[np.ndarray]] = {k: [] for k in
                                         ("length", "keys", "l1", "l2",
                                          "axis1", "axis2", "kfit1", "kfit2")}
    for l in sorted(keys):
        arr = keys[l]
        for lo in range(0, arr.shape[0], chunk):
            ks = arr[lo:lo + chunk]
            W = _engine.unpack_keys(ks, l, eng.b)
            N = W.shape[0]
            per_rep = []
            for ri in range(2):
                P, E = _scaled_word_products(W, tables[ri])
                trm = P[:, 0, 0] + P[:, 1, 1]
                lengths = _lengths_from_scaled_traces(np.abs(trm), E, tol)
                _near_parabolic_recheck(lengths, trm, E, W, ints[ri], tol)
                if axis_check:
                    ok, kf = _axis_checks(W, tables[ri], window, K)
                else:
                    ok = np.zeros(N, dtype=bool)
                    kf = np.zeros(N, dtype=float)
                per_rep.append((lengths, ok, kf))
            cols["length"].append(np.full(N, l, dtype=np.int32))
            cols["keys"].append(ks)
            cols["l1"].append(per_rep[0][0])
            cols["l2"].append(per_rep[1][0])
            cols["axis1"].append(per_rep[0][1])
            cols["axis2"].append(per_rep[1][1])
            cols["kfit1"].append(per_rep[0][2])
            cols["kfit2"].append(per_rep[1][2])

    col = {k: np.concatenate(v) for k, v in cols.items()}
    total = int(col["length"].shape[0])
    L = col["length"].astype(float)
    r1 = col["l1"] / L
    r2 = col["l2"] / L
    mx = np.maximum(r1, r2)
    imin = int(np.argmin(mx))

    def word_text(i: int) -> str:
        l = int(col["length"][i])
        letters = _engine.unpack_keys(col["keys"][i:i + 1], l, eng.b)[0]
        return format_word(Word(tuple(_engine.letter_of_nib(int(x)) for x in letters),
                                n, _checked=True))

    zeros1 = np.nonzero(col["l1"] == 0.0)[0]
    zeros2 = np.nonzero(col["l2"] == 0.0)[0]
    report = PS2Report(
        rank=n, field=rho1.field, length_cap=length_cap, K=K, window=window,
        total_classes=total,
        counts_by_length={l: int(k.size) for l, k in sorted(keys.items())},
        min_max_ratio=float(mx[imin]),
        argmin_class=word_text(imin),
        zero_ratio_count_1=int(zeros1.size),
        zero_ratio_count_2=int(zeros2.size),
        zero_ratio_examples_1=[word_text(i) for i in zeros1[:5]],
        zero_ratio_examples_2=[word_text(i) for i in zeros2[:5]],
        axis_pass_count_1=int(col["axis1"].sum()),
        axis_pass_count_2=int(col["axis2"].sum()),
        axis_pass_either=int((col["axis1"] | col["axis2"]).sum()),
        col_length=col["length"], col_keys=col["keys"],
        col_l1=col["l1"], col_l2=col["l2"],
        col_axis1=col["axis1"], col_axis2=col["axis2"],
        col_kfit1=col["kfit1"], col_kfit2=col["kfit2"],
    )
    return report


def demo_pipeline(length_cap: int = 12, K: float = 50.0, window: int = 2,
                  axis_check: bool = True, m: int | None = None,
                  m_max: int = 10) -> tuple[PS2Report, TwistedPair, int]:
    """The full real-case pipeline: explicit 4-punctured-sphere group,
    default twisting words [x2,x3] and [x1,x3], smallest containment-passing
    twist exponent (unless given), twisted pair, and the PS^2 probe."""
    rho0 = build_fuchsian_4punctured()
    g1 = Word((2, 3, -2, -3), 3)
    g2 = Word((1, 3, -1, -3), 3)
    if m is None:
        m = find_twisting_exponent(rho0.punctures, g1, g2, m_max)
    pair = twisted_pair(rho0, m, g1, g2)
    report = ps2_probe(pair.rho1, pair.rho2, length_cap, K=K, window=window,
                       axis_check=axis_check,
                       int_images=(pair.int_images_1, pair.int_images_2))
    return report, pair, m
