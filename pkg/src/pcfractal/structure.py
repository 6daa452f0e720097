"""Combinatorial self-similar structures and their finite-level complexes.

A structure is given by the number of contraction maps N, the size n0 of the
boundary vertex set, and a list of gluing relations identifying boundary
points of distinct level-1 cells.  From this data the vertex/cell complex of
any level m is materialized by a union-find closure over address slots.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

Word = tuple[int, ...]


class StructureError(ValueError):
    """Invalid structure definition (bad indices, disconnected level-1 graph...)."""


@dataclass(frozen=True)
class SelfSimilarStructure:
    """Combinatorial description of a finitely ramified self-similar set.

    Gluing ((i, p), (j, q)) means: the p-th boundary point of cell i and the
    q-th boundary point of cell j are the same point of the fractal.
    ``boundary_maps[p-1] = b`` records that boundary point p is the fixed
    point of map b; this is how boundary points acquire addresses at deeper
    levels.  Presets use the convention b = p.
    """

    name: str
    N: int
    n0: int
    gluings: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    boundary_maps: tuple[int, ...] = ()

    def __post_init__(self):
        if self.N < 2:
            raise StructureError(f"need at least 2 maps, got N={self.N}")
        if self.n0 < 1:
            raise StructureError(f"need at least 1 boundary point, got n0={self.n0}")
        bmaps = self.boundary_maps
        if not bmaps:
            if self.n0 > self.N:
                raise StructureError(
                    "boundary_maps must be given explicitly when n0 > N"
                )
            bmaps = tuple(range(1, self.n0 + 1))
            object.__setattr__(self, "boundary_maps", bmaps)
        if len(bmaps) != self.n0:
            raise StructureError("boundary_maps must have length n0")
        for b in bmaps:
            if not 1 <= b <= self.N:
                raise StructureError(f"boundary map index {b} out of range 1..{self.N}")
        seen = set()
        closed = []
        for (i, p), (j, q) in self.gluings:
            for c, lab in ((i, p), (j, q)):
                if not 1 <= c <= self.N:
                    raise StructureError(f"cell index {c} out of range 1..{self.N}")
                if not 1 <= lab <= self.n0:
                    raise StructureError(
                        f"boundary label {lab} out of range 1..{self.n0}"
                    )
            if i == j:
                raise StructureError(
                    f"gluing must join distinct cells, got cell {i} twice"
                )
            key = tuple(sorted(((i, p), (j, q))))
            if key not in seen:
                seen.add(key)
                closed.append((key[0], key[1]))
        object.__setattr__(self, "gluings", tuple(sorted(closed)))
        self._check_connected()

    def _check_connected(self):
        # cells sharing an identified vertex must form one component
        parent = list(range(self.N + 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (i, _), (j, _) in self.gluings:
            parent[find(i)] = find(j)
        roots = {find(i) for i in range(1, self.N + 1)}
        if len(roots) != 1:
            raise StructureError(
                f"level-1 cell graph is disconnected ({len(roots)} components)"
            )

    def words(self, m: int) -> list[Word]:
        """All words of length m over {1..N}, lexicographic."""
        return list(itertools.product(range(1, self.N + 1), repeat=m))


@dataclass(frozen=True)
class LevelComplex:
    """Vertex/cell complex of a structure at a fixed level.

    ``cells[w]`` is the tuple of vertex indices realizing the boundary points
    of cell w, position k holding the image of boundary point k+1.  Vertex
    indices are canonical: sorted by the lexicographically least address
    (word, label) of each identification class.
    """

    structure: SelfSimilarStructure
    level: int
    n_vertices: int
    cells: dict[Word, tuple[int, ...]]
    boundary_vertices: tuple[int, ...]
    representatives: tuple[tuple[Word, int], ...]
    # class lookup: address slot -> vertex index, kept for refinement queries
    _slot_vertex: np.ndarray = field(repr=False, default=None)

    def vertex_of_address(self, w: Word, p: int) -> int:
        S = self.structure
        if len(w) != self.level:
            raise ValueError(f"address word has length {len(w)}, level is {self.level}")
        idx = 0
        for letter in w:
            idx = idx * S.N + (letter - 1)
        return int(self._slot_vertex[idx * S.n0 + (p - 1)])


def build_level(S: SelfSimilarStructure, m: int) -> LevelComplex:
    """Materialize the level-m complex by union-find over N^m * n0 address slots.

    A gluing ((i,p),(j,q)) identifies, under every prefix word w of length
    k-1 <= m-1, the addresses (w i b_p^{m-k}, p) and (w j b_q^{m-k}, q),
    where b_p is the map fixing boundary point p.
    """
    if m < 0:
        raise ValueError("level must be nonnegative")
    N, n0 = S.N, S.n0
    n_words = N**m
    n_slots = n_words * n0
    parent = np.arange(n_slots, dtype=np.int64)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            # keep the smaller slot as root so roots are lex-least addresses
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb

    def word_index(w: Word) -> int:
        idx = 0
        for letter in w:
            idx = idx * N + (letter - 1)
        return idx

    for k in range(1, m + 1):
        pad = m - k
        for w in itertools.product(range(1, N + 1), repeat=k - 1):
            base = word_index(w)
            for (i, p), (j, q) in S.gluings:
                wa = base * N + (i - 1)
                wb = base * N + (j - 1)
                for _ in range(pad):
                    wa = wa * N + (S.boundary_maps[p - 1] - 1)
                    wb = wb * N + (S.boundary_maps[q - 1] - 1)
                union(wa * n0 + (p - 1), wb * n0 + (q - 1))

    roots = np.array([find(s) for s in range(n_slots)], dtype=np.int64)
    unique_roots = np.unique(roots)  # sorted -> canonical vertex order
    root_to_vid = {int(r): v for v, r in enumerate(unique_roots)}
    slot_vertex = np.array([root_to_vid[int(r)] for r in roots], dtype=np.int64)

    words = S.words(m)
    cells = {
        w: tuple(int(slot_vertex[wi * n0 + p]) for p in range(n0))
        for wi, w in enumerate(words)
    }
    reps = []
    for r in unique_roots:
        wi, p = divmod(int(r), n0)
        letters = []
        for _ in range(m):
            wi, rem = divmod(wi, N)
            letters.append(rem + 1)
        reps.append((tuple(reversed(letters)), p + 1))

    boundary = []
    for p in range(1, n0 + 1):
        w = (S.boundary_maps[p - 1],) * m
        boundary.append(int(slot_vertex[word_index(w) * n0 + (p - 1)]))

    return LevelComplex(
        structure=S,
        level=m,
        n_vertices=len(unique_roots),
        cells=cells,
        boundary_vertices=tuple(boundary),
        representatives=tuple(reps),
        _slot_vertex=slot_vertex,
    )


def refinement_indices(cm: LevelComplex, cm1: LevelComplex) -> np.ndarray:
    """Map level-m vertex indices to their images in the level-(m+1) complex.

    Vertex with representative address (w, p) refines to (w b_p, p).
    """
    if cm1.level != cm.level + 1:
        raise ValueError("complexes must be at consecutive levels")
    S = cm.structure
    out = np.empty(cm.n_vertices, dtype=np.int64)
    for v, (w, p) in enumerate(cm.representatives):
        out[v] = cm1.vertex_of_address(w + (S.boundary_maps[p - 1],), p)
    return out


def cell_restriction_indices(cm: LevelComplex, cm1: LevelComplex, i: int) -> np.ndarray:
    """Indices such that (u on level m+1) restricted to cell i reads u[idx].

    The level-m vertex with address (w, p) corresponds to (i w, p) at level
    m+1; composing with this map realizes u -> u o F_i on vertex data.
    """
    if cm1.level != cm.level + 1:
        raise ValueError("complexes must be at consecutive levels")
    out = np.empty(cm.n_vertices, dtype=np.int64)
    for v, (w, p) in enumerate(cm.representatives):
        out[v] = cm1.vertex_of_address((i,) + w, p)
    return out
