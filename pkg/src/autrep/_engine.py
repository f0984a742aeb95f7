"""Packed-word engine for bulk Whitehead-orbit enumeration.

Words are packed little-int arrays: each letter occupies a fixed number of
bits (nibble), the first letter in the most significant position, so that
lexicographic order on words of equal length coincides with numeric order
on the packed uint64 keys.  Nibble encoding of a signed letter v is
``2*(|v|-1) + (1 if v < 0 else 0)``, matching the canonical letter order
x1 < x1^-1 < x2 < x2^-1 < ... used by ConjClass.

The breadth-first search runs on one representative per signed-permutation
orbit: conjugating a second-kind Whitehead move by a permutation/inversion
map is again a second-kind move, so move images of a representative cover
every orbit reachable from the orbit itself.  Discovered orbits are
expanded eagerly and all member keys recorded, which keeps the scan
frontier a few hundred times smaller than the class count.
"""

from __future__ import annotations

import itertools

import numpy as np

from .freegroup import whitehead_moves_second_kind

U64 = np.uint64


def bits_per_letter(n: int) -> int:
    return max(2, (2 * n - 1).bit_length())


def max_pack_length(n: int) -> int:
    return 64 // bits_per_letter(n)


def nib_of_letter(v: int) -> int:
    return 2 * (abs(v) - 1) + (1 if v < 0 else 0)


def letter_of_nib(nib: int) -> int:
    return (nib // 2 + 1) * (-1 if nib % 2 else 1)


def pack_rows(rows: np.ndarray, b: int) -> np.ndarray:
    """(N, l) uint8 nibble rows -> (N,) uint64 keys."""
    out = np.zeros(rows.shape[0], dtype=U64)
    sb = U64(b)
    for i in range(rows.shape[1]):
        out = (out << sb) | rows[:, i].astype(U64)
    return out


def unpack_keys(keys: np.ndarray, l: int, b: int) -> np.ndarray:
    """(N,) uint64 keys -> (N, l) uint8 nibble rows."""
    out = np.empty((keys.shape[0], l), dtype=np.uint8)
    m = U64((1 << b) - 1)
    for i in range(l):
        out[:, l - 1 - i] = (keys >> U64(b * i)) & m
    return out


def invert_keys(keys: np.ndarray, l: int, b: int) -> np.ndarray:
    """Key of the inverse word: reversed letters, each sign-flipped."""
    m = U64((1 << b) - 1)
    one = U64(1)
    sb = U64(b)
    out = np.zeros_like(keys)
    k = keys.copy()
    for _ in range(l):
        out = (out << sb) | ((k & m) ^ one)
        k >>= sb
    return out


def canonical_keys(keys: np.ndarray, l: int, b: int) -> np.ndarray:
    """Least key over all rotations of the word and of its inverse."""
    if l <= 1:
        inv = invert_keys(keys, l, b) if l == 1 else keys
        return np.minimum(keys, inv)
    mask = U64((1 << (b * l)) - 1)
    inv = invert_keys(keys, l, b)
    best = np.minimum(keys, inv)
    for r in range(1, l):
        sl, sr = U64(b * r), U64(b * (l - r))
        np.minimum(best, ((keys << sl) & mask) | (keys >> sr), out=best)
        np.minimum(best, ((inv << sl) & mask) | (inv >> sr), out=best)
    return best


def translate_keys(keys: np.ndarray, l: int, b: int, table: np.ndarray) -> np.ndarray:
    """Relabel letters through a nibble map (uint8 array of size 2n)."""
    m = U64((1 << b) - 1)
    sb = U64(b)
    t64 = table.astype(U64)
    out = np.zeros_like(keys)
    k = keys.copy()
    for i in range(l):
        out |= t64[(k & m).astype(np.int64)] << U64(b * i)
        k >>= sb
    return out


def signed_perm_tables(n: int) -> np.ndarray:
    """All 2^n n! signed-permutation nibble maps, shape (K, 2n) uint8."""
    tabs = []
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((0, 1), repeat=n):
            t = np.empty(2 * n, dtype=np.uint8)
            for i in range(n):
                img = 2 * perm[i] + signs[i]
                t[2 * i] = img
                t[2 * i + 1] = img ^ 1
            tabs.append(t)
    return np.array(tabs, dtype=np.uint8)


def _isin_sorted(values: np.ndarray, sorted_arr: np.ndarray) -> np.ndarray:
    if sorted_arr.size == 0:
        return np.zeros(values.shape, dtype=bool)
    idx = np.searchsorted(sorted_arr, values)
    idx[idx == sorted_arr.size] = sorted_arr.size - 1
    return sorted_arr[idx] == values


class PackedEngine:
    """Whitehead second-kind move machinery over packed words of rank n."""

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("rank must be >= 2")
        if 2 * n > 14:
            raise ValueError("packed engine supports rank <= 7")
        self.n = n
        self.b = bits_per_letter(n)
        self.moves = whitehead_moves_second_kind(n)
        M = len(self.moves)
        self.Ytab = np.zeros((M, 2 * n), dtype=bool)
        self.a_nib = np.zeros(M, dtype=np.uint8)
        for m, (Y, a) in enumerate(self.moves):
            for v in Y:
                self.Ytab[m, nib_of_letter(v)] = True
            self.a_nib[m] = nib_of_letter(a)
        self.perms = signed_perm_tables(n)

    # -- moves ---------------------------------------------------------

    def length_deltas(self, W: np.ndarray) -> np.ndarray:
        """Cyclic-length change of every move on every row: (M, N) int64.

        Equals crossing-edge count E(Y, Y^c) of the Whitehead graph minus
        the degree of the multiplier vertex.
        """
        N, l = W.shape
        u = W
        v = np.concatenate([W[:, 1:], W[:, :1]], axis=1) ^ 1
        E = (self.Ytab[:, u] ^ self.Ytab[:, v]).sum(axis=2, dtype=np.int64)
        cnt = np.zeros((N, 2 * self.n), dtype=np.int64)
        rows = np.arange(N)
        for j in range(l):
            np.add.at(cnt, (rows, u[:, j]), 1)
            np.add.at(cnt, (rows, v[:, j]), 1)
        deg = cnt[:, self.a_nib].T
        return E - deg

    def apply_move(self, W: np.ndarray, m: int) -> list[tuple[int, np.ndarray]]:
        """Apply move m to rows of W; returns canonical keys grouped by new
        cyclic length as [(length, keys)].  Rows are cyclically reduced words;
        images are cyclically reduced by construction (cancellations in a
        Whitehead-move image are disjoint adjacent multiplier pairs).
        """
        Yt = self.Ytab[m]
        a = int(self.a_nib[m])
        ainv = a ^ 1
        N, l = W.shape
        is_a = (W == a) | (W == ainv)
        head = Yt[W ^ 1] & ~is_a
        tail = Yt[W] & ~is_a
        c_next = np.concatenate([W[:, 1:], W[:, :1]], axis=1)
        head_n = np.concatenate([head[:, 1:], head[:, :1]], axis=1)
        cancel = (tail & head_n) \
            | (tail & ~head_n & (c_next == ainv)) \
            | (~tail & head_n & (W == a))
        cancel_prev = np.concatenate([cancel[:, -1:], cancel[:, :-1]], axis=1)
        head_keep = head & ~cancel_prev
        mid_keep = ~((cancel_prev & ~head & (W == ainv)) | (cancel & ~tail & (W == a)))
        tail_keep = tail & ~cancel
        emit = np.empty((N, 3 * l), dtype=np.uint8)
        emit[:, 0::3] = ainv
        emit[:, 1::3] = W
        emit[:, 2::3] = a
        valid = np.empty((N, 3 * l), dtype=bool)
        valid[:, 0::3] = head_keep
        valid[:, 1::3] = mid_keep
        valid[:, 2::3] = tail_keep
        new_len = valid.sum(axis=1)
        out = []
        for lp in np.unique(new_len):
            lp = int(lp)
            if lp == 0:
                continue
            rows = np.nonzero(new_len == lp)[0]
            v = valid[rows]
            e = emit[rows]
            compact = np.empty((rows.shape[0], lp), dtype=np.uint8)
            pos = np.cumsum(v, axis=1) - 1
            rr, cc = np.nonzero(v)
            compact[rr, pos[rr, cc]] = e[rr, cc]
            out.append((lp, canonical_keys(pack_rows(compact, self.b), lp, self.b)))
        return out

    # -- orbits --------------------------------------------------------

    def orbit_keys(self, keys: np.ndarray, l: int, chunk: int = 65536
                   ) -> tuple[np.ndarray, np.ndarray]:
        """All signed-permutation orbit members of the given canonical keys.

        Returns (all_member_keys sorted unique, orbit representative per
        input key) where the representative is the orbit minimum.
        """
        members = []
        reps = np.empty_like(keys)
        for lo in range(0, keys.shape[0], chunk):
            ks = keys[lo:lo + chunk]
            A = np.empty((self.perms.shape[0], ks.shape[0]), dtype=U64)
            for i, t in enumerate(self.perms):
                A[i] = canonical_keys(translate_keys(ks, l, self.b, t), l, self.b)
            reps[lo:lo + chunk] = A.min(axis=0)
            members.append(np.unique(A.ravel()))
        return np.unique(np.concatenate(members)), reps

    # -- enumeration ---------------------------------------------------

    def primitive_class_keys(self, length_cap: int, scan_chunk: int = 8192
                             ) -> dict[int, np.ndarray]:
        """All conjugacy classes of primitive elements (up to inversion) with
        cyclic length <= length_cap, as sorted canonical key arrays per length.

        Breadth-first closure of the generator classes under second-kind
        Whitehead moves with the length cap; Whitehead's peak-reduction
        theorem guarantees every primitive class of length <= cap is reached
        through intermediates of length <= cap.
        """
        if length_cap < 1:
            raise ValueError("length cap must be >= 1")
        if length_cap > max_pack_length(self.n):
            raise ValueError(
                f"length cap {length_cap} exceeds packed limit "
                f"{max_pack_length(self.n)} for rank {self.n}")
        seen: dict[int, np.ndarray] = {l: np.empty(0, dtype=U64)
                                       for l in range(1, length_cap + 1)}
        pending: dict[int, list[np.ndarray]] = {l: [] for l in range(1, length_cap + 1)}
        gen_keys = np.array([0], dtype=U64)  # the class of x1
        members, reps = self.orbit_keys(gen_keys, 1)
        seen[1] = members
        pending[1].append(np.unique(reps))
        while True:
            todo = [l for l in pending if pending[l]]
            if not todo:
                break
            l = min(todo)
            reps = np.unique(np.concatenate(pending[l]))
            pending[l] = []
            for lo in range(0, reps.shape[0], scan_chunk):
                W = unpack_keys(reps[lo:lo + scan_chunk], l, self.b)
                deltas = self.length_deltas(W)
                fresh_by_len: dict[int, list[np.ndarray]] = {}
                for m in range(deltas.shape[0]):
                    rows = np.nonzero(l + deltas[m] <= length_cap)[0]
                    if rows.size == 0:
                        continue
                    for lp, keys in self.apply_move(W[rows], m):
                        fresh_by_len.setdefault(lp, []).append(keys)
                for lp, parts in sorted(fresh_by_len.items()):
                    cand = np.unique(np.concatenate(parts))
                    cand = cand[~_isin_sorted(cand, seen[lp])]
                    if cand.size == 0:
                        continue
                    members, reps2 = self.orbit_keys(cand, lp)
                    seen[lp] = np.union1d(seen[lp], members)
                    pending[lp].append(np.unique(reps2))
        return {l: keys for l, keys in seen.items() if keys.size}

    # -- whole-graph predicates -----------------------------------------

    def connected_cutpoint_free_mask(self, W: np.ndarray) -> np.ndarray:
        """For each cyclically reduced row: is its Whitehead graph connected
        on all 2n vertices AND free of cutpoints?  (Basic-Lemma violations
        for primitive inputs.)  Requires 2n <= 8.
        """
        n2 = 2 * self.n
        if n2 > 8:
            raise ValueError("bitmask predicate supports rank <= 4")
        N, l = W.shape
        u = W
        v = np.concatenate([W[:, 1:], W[:, :1]], axis=1) ^ 1
        adj = np.zeros((N, n2), dtype=np.uint8)
        rows = np.arange(N)
        for j in range(l):
            np.bitwise_or.at(adj, (rows, u[:, j]), np.uint8(1) << v[:, j])
            np.bitwise_or.at(adj, (rows, v[:, j]), np.uint8(1) << u[:, j])
        full = np.uint8((1 << n2) - 1)

        def closure(adjm: np.ndarray, start: np.ndarray) -> np.ndarray:
            reach = start.copy()
            for _ in range(n2):
                prev = reach.copy()
                for vtx in range(n2):
                    sel = ((reach >> vtx) & 1).astype(bool)
                    if sel.any():
                        reach[sel] |= adjm[sel, vtx]
                if np.array_equal(prev, reach):
                    break
            return reach

        start = np.full(N, 1, dtype=np.uint8)
        connected = closure(adj, start) == full
        result = np.zeros(N, dtype=bool)
        idx = np.nonzero(connected)[0]
        if idx.size == 0:
            return result
        sub = adj[idx]
        no_cut = np.ones(idx.shape[0], dtype=bool)
        for r in range(n2):
            keep = np.uint8(((1 << n2) - 1) & ~(1 << r))
            adjr = (sub & keep).copy()
            adjr[:, r] = 0
            s = 1 if r == 0 else 0
            reach = closure(adjr, np.full(idx.shape[0], np.uint8(1 << s)))
            no_cut &= (reach == keep)
        result[idx] = no_cut
        return result
