"""Microscopic stabilizer oracle.

Builds toric codes on an L x L torus and bilayer genon codes on a planar
patch with two interior branch cuts, applies lattice isometries and layer
permutations as qubit permutations, and extracts the induced logical
symplectic action for comparison with the anyon-level matrices.

Conventions: qubits live on lattice edges; a star is the X product over the
edges at a vertex, a plaquette the Z product over the edges of a face.  In
the bilayer code every patch edge exists once per layer; crossing one of
the two open branch-cut segments toggles the layer, objects sitting exactly
on a cut line are nudged west, and the four cut endpoints carry a single
merged weight-8 star because a walk around them closes only after two
turns.  The planar outer boundary is declared charge-free by promoting the
dual loop just inside each layer's boundary to a stabilizer.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np


class StabilizerError(ValueError):
    """Raised for invalid codes, moves, or non-automorphism permutations."""


# -- GF(2) linear algebra -------------------------------------------------


def gf2_row_reduce(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Row echelon form over GF(2); returns (reduced matrix, pivot columns)."""
    m = (np.asarray(mat, dtype=np.uint8) % 2).copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hits = np.nonzero(m[r:, c])[0]
        if hits.size == 0:
            continue
        pivot = r + hits[0]
        if pivot != r:
            m[[r, pivot]] = m[[pivot, r]]
        mask = m[:, c].copy()
        mask[r] = 0
        m[mask == 1] ^= m[r]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def gf2_rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    return gf2_row_reduce(mat)[0].shape[0]


def gf2_in_span(mat: np.ndarray, vec: np.ndarray) -> bool:
    """True iff vec lies in the GF(2) row span of mat."""
    base = gf2_rank(mat)
    stacked = np.vstack([np.asarray(mat, dtype=np.uint8),
                         np.asarray(vec, dtype=np.uint8)[None, :]])
    return gf2_rank(stacked) == base


# -- Pauli operators ------------------------------------------------------


@dataclass(frozen=True)
class PauliOp:
    """n-qubit Pauli i^phase * X^x Z^z in binary-symplectic form."""

    x: np.ndarray
    z: np.ndarray
    phase: int = 0

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.uint8) % 2
        z = np.asarray(self.z, dtype=np.uint8) % 2
        if x.shape != z.shape or x.ndim != 1:
            raise StabilizerError("x and z bit vectors must be equal-length 1D")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @staticmethod
    def identity(n: int) -> "PauliOp":
        return PauliOp(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @staticmethod
    def from_string(text: str) -> "PauliOp":
        x = np.array([c in "XY" for c in text], dtype=np.uint8)
        z = np.array([c in "ZY" for c in text], dtype=np.uint8)
        if any(c not in "IXYZ" for c in text):
            raise StabilizerError(f"invalid Pauli string {text!r}")
        return PauliOp(x, z, phase=int(np.sum(x & z)))

    def to_string(self) -> str:
        letters = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
        return "".join(letters[(int(a), int(b))] for a, b in zip(self.x, self.z))

    def weight(self) -> int:
        return int(np.sum(self.x | self.z))

    def commutes_with(self, other: "PauliOp") -> bool:
        sym = int(np.sum(self.x & other.z) + np.sum(self.z & other.x)) % 2
        return sym == 0

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        if self.n != other.n:
            raise StabilizerError("qubit count mismatch")
        cross = 2 * int(np.sum(self.z & other.x))
        return PauliOp(self.x ^ other.x, self.z ^ other.z,
                       self.phase + other.phase + cross)

    def symplectic_bits(self) -> np.ndarray:
        return np.concatenate([self.x, self.z])

    def permuted(self, perm: "QubitPermutation") -> "PauliOp":
        """Conjugate by the qubit permutation (and its single-qubit tags)."""
        x = np.zeros_like(self.x)
        z = np.zeros_like(self.z)
        x[perm.image] = self.x
        z[perm.image] = self.z
        op = PauliOp(x, z, self.phase)
        for q, tag in perm.tags.items():
            if tag != "H":
                raise StabilizerError(f"unsupported Clifford tag {tag!r}")
            nx = op.x.copy()
            nz = op.z.copy()
            nx[q], nz[q] = op.z[q], op.x[q]
            op = PauliOp(nx, nz, op.phase + 2 * int(op.x[q] & op.z[q]))
        return op


@dataclass(frozen=True)
class QubitPermutation:
    """Bijection on qubit indices, optionally with per-qubit Hadamard tags."""

    image: np.ndarray
    tags: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        image = np.asarray(self.image, dtype=np.int64)
        if sorted(image.tolist()) != list(range(image.shape[0])):
            raise StabilizerError("image is not a permutation")
        object.__setattr__(self, "image", image)

    @property
    def n(self) -> int:
        return self.image.shape[0]

    def compose(self, first: "QubitPermutation") -> "QubitPermutation":
        """Permutation acting as self after first."""
        if self.tags or first.tags:
            raise StabilizerError("cannot compose tagged permutations")
        return QubitPermutation(self.image[first.image],
                                name=f"{self.name}*{first.name}")

    def inverse(self) -> "QubitPermutation":
        if self.tags:
            raise StabilizerError("cannot invert tagged permutations")
        inv = np.empty_like(self.image)
        inv[self.image] = np.arange(self.n)
        return QubitPermutation(inv, name=f"{self.name}^-1")

    def is_identity(self) -> bool:
        return not self.tags and bool(np.all(self.image == np.arange(self.n)))


# -- stabilizer codes -----------------------------------------------------


@dataclass(frozen=True)
class StabilizerCode:
    n: int
    generators: tuple[PauliOp, ...]
    logical_pairs: tuple[tuple[PauliOp, PauliOp], ...]
    qubit_coords: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for g in self.generators:
            if g.n != self.n:
                raise StabilizerError("generator size mismatch")
        for i, gi in enumerate(self.generators):
            for gj in self.generators[i + 1:]:
                if not gi.commutes_with(gj):
                    raise StabilizerError(
                        f"generators do not commute: {i}")
        flat = [op for pair in self.logical_pairs for op in pair]
        for op in flat:
            for g in self.generators:
                if not op.commutes_with(g):
                    raise StabilizerError("logical fails to commute with group")
        for i, (xi, zi) in enumerate(self.logical_pairs):
            if xi.commutes_with(zi):
                raise StabilizerError(f"logical pair {i} commutes")
            for j, (xj, zj) in enumerate(self.logical_pairs):
                if i != j and not (xi.commutes_with(xj) and xi.commutes_with(zj)
                                   and zi.commutes_with(xj)
                                   and zi.commutes_with(zj)):
                    raise StabilizerError("cross-pair logicals do not commute")
        if self.k != len(self.logical_pairs):
            raise StabilizerError(
                f"rank gives k={self.k}, but {len(self.logical_pairs)} "
                "logical pairs supplied")

    @property
    def generator_matrix(self) -> np.ndarray:
        if not self.generators:
            return np.zeros((0, 2 * self.n), dtype=np.uint8)
        return np.stack([g.symplectic_bits() for g in self.generators])

    @property
    def k(self) -> int:
        return self.n - gf2_rank(self.generator_matrix)

    def contains(self, op: PauliOp) -> bool:
        """Membership in the stabilizer group, ignoring phases."""
        return gf2_in_span(self.generator_matrix, op.symplectic_bits())

    def logical_ops(self) -> list[PauliOp]:
        return [op for pair in self.logical_pairs for op in pair]

    def export_text(self) -> str:
        lines = [g.to_string() for g in self.generators]
        return "\n".join(lines) + "\n"


# -- toric code on the torus ----------------------------------------------


def _torus_edge(L: int, x: int, y: int, o: int) -> int:
    return (o * L + (y % L)) * L + (x % L)


def build_toric_torus(L: int) -> StabilizerCode:
    """Toric code on an L x L torus: n = 2L^2 edge qubits, k = 2."""
    if L < 2:
        raise StabilizerError("torus needs L >= 2")
    n = 2 * L * L
    gens = []
    for x in range(L):
        for y in range(L):
            xs = np.zeros(n, dtype=np.uint8)
            for e in (_torus_edge(L, x, y, 0), _torus_edge(L, x - 1, y, 0),
                      _torus_edge(L, x, y, 1), _torus_edge(L, x, y - 1, 1)):
                xs[e] ^= 1
            gens.append(PauliOp(xs, np.zeros(n, dtype=np.uint8)))
    for x in range(L):
        for y in range(L):
            zs = np.zeros(n, dtype=np.uint8)
            for e in (_torus_edge(L, x, y, 0), _torus_edge(L, x, y + 1, 0),
                      _torus_edge(L, x, y, 1), _torus_edge(L, x + 1, y, 1)):
                zs[e] ^= 1
            gens.append(PauliOp(np.zeros(n, dtype=np.uint8), zs))

    def string(edges, kind):
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        arr = x if kind == "X" else z
        for e in edges:
            arr[e] ^= 1
        return PauliOp(x, z)

    # Loop dictionary: X1 = e-loop along alpha, Z1 = m-loop along beta,
    # X2 = m-loop along alpha, Z2 = e-loop along beta.
    x1 = string([_torus_edge(L, x, 0, 0) for x in range(L)], "Z")
    z1 = string([_torus_edge(L, 0, y, 0) for y in range(L)], "X")
    x2 = string([_torus_edge(L, x, 0, 1) for x in range(L)], "X")
    z2 = string([_torus_edge(L, 0, y, 1) for y in range(L)], "Z")

    coords = {}
    for o in range(2):
        for y in range(L):
            for x in range(L):
                coords[_torus_edge(L, x, y, o)] = (0, (x, y, "HV"[o]))
    return StabilizerCode(
        n=n,
        generators=tuple(gens),
        logical_pairs=((x1, z1), (x2, z2)),
        qubit_coords=coords,
        metadata={"kind": "toric_torus", "L": L},
    )


# -- bilayer genon code ---------------------------------------------------
#
# Planar patch [0, L] x [0, L], two layers, all edges duplicated per layer.
# Cuts are vertical open segments {cx} x (ylo, yhi); points with x exactly
# on a cut line and y within the closed cut range are nudged west by an
# infinitesimal, represented exactly as a lexicographic (2*coord, nudge)
# pair.  Crossings only ever occur on horizontal probe segments.


def _genon_edges(L: int):
    edges = []
    for y in range(L + 1):
        for x in range(L):
            edges.append((x, y, 0))
    for y in range(L):
        for x in range(L + 1):
            edges.append((x, y, 1))
    return edges


def _eff_x(x2: int, y2: int, cuts) -> tuple[int, int]:
    """Effective doubled x-coordinate with west nudge on cut lines."""
    for cx, ylo, yhi in cuts:
        if x2 == 2 * cx and 2 * ylo <= y2 <= 2 * yhi:
            return (x2, -1)
    return (x2, 0)


def _h_cross(y2: int, xa: tuple[int, int], xb: tuple[int, int], cuts) -> int:
    """Cut crossings of a horizontal segment at doubled height y2."""
    lo, hi = min(xa, xb), max(xa, xb)
    count = 0
    for cx, ylo, yhi in cuts:
        if 2 * ylo < y2 < 2 * yhi and lo < (2 * cx, 0) < hi:
            count += 1
    return count


def _seg_cross(p: tuple[int, int, int], q: tuple[int, int, int], cuts) -> int:
    """Crossing parity between effective points (x2, nudge, y2)."""
    (xa, na, ya), (xb, nb, yb) = p, q
    if ya == yb:
        return _h_cross(ya, (xa, na), (xb, nb), cuts) % 2
    if (xa, na) == (xb, nb):
        return 0
    # Mixed segments in this module never straddle a cut line: one endpoint
    # sits nudged on the line and the other on the same lattice column.
    if xa == xb:
        return 0
    raise StabilizerError("unsupported probe segment geometry")


def _edge_eff_mid(e, cuts) -> tuple[int, int, int]:
    x, y, o = e
    if o == 0:
        return (2 * x + 1, 0, 2 * y)
    x2, nud = _eff_x(2 * x, 2 * y + 1, cuts)
    return (x2, nud, 2 * y + 1)


def _vertex_eff(v, cuts) -> tuple[int, int, int]:
    x, y = v
    x2, nud = _eff_x(2 * x, 2 * y, cuts)
    return (x2, nud, 2 * y)


def _face_center(f) -> tuple[int, int, int]:
    x, y = f
    return (2 * x + 1, 0, 2 * y + 1)


def _validate_cuts(L: int, cuts) -> tuple:
    if len(cuts) != 2:
        raise StabilizerError("exactly two branch cuts required")
    norm = []
    for cx, ylo, yhi in cuts:
        if not (2 <= cx <= L - 2):
            raise StabilizerError("cut line touches or exits the patch bulk")
        if not (1 <= ylo < yhi <= L - 1):
            raise StabilizerError("cut endpoints must be interior")
        norm.append((int(cx), int(ylo), int(yhi)))
    (c1, alo, ahi), (c2, blo, bhi) = sorted(norm)
    if c1 == c2:
        raise StabilizerError("cuts overlap")
    if (alo, ahi) != (blo, bhi):
        raise StabilizerError("cuts must be parallel and equal length")
    if ahi - alo < 2:
        raise StabilizerError("cut must span at least two rows")
    return (c1, alo, ahi), (c2, blo, bhi)


def build_bilayer_genon_code(L: int, cuts=None) -> StabilizerCode:
    """Two-layer planar toric-code patch with two vertical branch cuts."""
    if L < 4:
        raise StabilizerError("genon patch needs L >= 4")
    if cuts is None:
        d = max(1, L // 6)
        cuts = ((L // 2 - d, L // 2 - d, L // 2 + d),
                (L // 2 + d, L // 2 - d, L // 2 + d))
    cut_a, cut_b = _validate_cuts(L, cuts)
    cuts = (cut_a, cut_b)
    edges = _genon_edges(L)
    eidx = {e: i for i, e in enumerate(edges)}
    ne = len(edges)
    n = 2 * ne

    def qubit(e, sheet):
        return sheet * ne + eidx[e]

    def xop(qubits):
        x = np.zeros(n, dtype=np.uint8)
        for q in qubits:
            x[q] ^= 1
        return PauliOp(x, np.zeros(n, dtype=np.uint8))

    def zop(qubits):
        z = np.zeros(n, dtype=np.uint8)
        for q in qubits:
            z[q] ^= 1
        return PauliOp(np.zeros(n, dtype=np.uint8), z)

    genons = {(cx, yy) for cx, ylo, yhi in cuts for yy in (ylo, yhi)}

    def star_qubits(v, sheet):
        x, y = v
        out = []
        veff = _vertex_eff(v, cuts)
        incident = []
        if x < L:
            incident.append((x, y, 0))
        if x > 0:
            incident.append((x - 1, y, 0))
        if y < L:
            incident.append((x, y, 1))
        if y > 0:
            incident.append((x, y - 1, 1))
        for e in incident:
            tog = _seg_cross(veff, _edge_eff_mid(e, cuts), cuts)
            out.append(qubit(e, sheet ^ tog))
        return out

    gens = []
    for x in range(L + 1):
        for y in range(L + 1):
            if (x, y) in genons:
                continue
            for sheet in range(2):
                gens.append(xop(star_qubits((x, y), sheet)))
    for g in sorted(genons):
        gens.append(xop(star_qubits(g, 0) + star_qubits(g, 1)))

    def plaquette_qubits(f, sheet):
        x, y = f
        out = []
        center = _face_center(f)
        for e in ((x, y, 0), (x, y + 1, 0), (x, y, 1), (x + 1, y, 1)):
            tog = _seg_cross(center, _edge_eff_mid(e, cuts), cuts)
            out.append(qubit(e, sheet ^ tog))
        return out

    for x in range(L):
        for y in range(L):
            for sheet in range(2):
                gens.append(zop(plaquette_qubits((x, y), sheet)))

    def dual_walk(faces, sheet, closed=True):
        """X qubits crossed when hopping through the given face sequence."""
        out = []
        seq = list(faces) + ([faces[0]] if closed else [])
        cur = sheet
        for f1, f2 in zip(seq, seq[1:]):
            (x1, y1), (x2, y2) = f1, f2
            if abs(x1 - x2) + abs(y1 - y2) != 1:
                raise StabilizerError("dual walk steps must be face-adjacent")
            if y1 == y2:
                e = (max(x1, x2), y1, 1)
            else:
                e = (x1, max(y1, y2), 0)
            c1 = _seg_cross(_face_center(f1), _edge_eff_mid(e, cuts), cuts)
            c2 = _seg_cross(_edge_eff_mid(e, cuts), _face_center(f2), cuts)
            out.append(qubit(e, cur ^ c1))
            cur = cur ^ c1 ^ c2
        if closed and cur != sheet:
            raise StabilizerError("dual walk does not close on one sheet")
        return out

    def direct_walk(verts, sheet, closed=True):
        """Z qubits collected when walking through the given vertex sequence."""
        out = []
        seq = list(verts) + ([verts[0]] if closed else [])
        cur = sheet
        for v1, v2 in zip(seq, seq[1:]):
            (x1, y1), (x2, y2) = v1, v2
            if abs(x1 - x2) + abs(y1 - y2) != 1:
                raise StabilizerError("direct walk steps must be adjacent")
            if y1 == y2:
                e = (min(x1, x2), y1, 0)
            else:
                e = (x1, min(y1, y2), 1)
            c1 = _seg_cross(_vertex_eff(v1, cuts), _edge_eff_mid(e, cuts), cuts)
            c2 = _seg_cross(_edge_eff_mid(e, cuts), _vertex_eff(v2, cuts), cuts)
            out.append(qubit(e, cur ^ c1))
            cur = cur ^ c1 ^ c2
        if closed and cur != sheet:
            raise StabilizerError("direct walk does not close on one sheet")
        return out

    def rect_faces(x0, y0, x1, y1):
        faces = [(x, y0) for x in range(x0, x1)]
        faces += [(x1, y) for y in range(y0, y1)]
        faces += [(x, y1) for x in range(x1, x0, -1)]
        faces += [(x0, y) for y in range(y1, y0, -1)]
        return faces

    # Charge-free outer boundary: the loop measuring a layer's total charge
    # (Z on every boundary edge) is promoted to a stabilizer.
    boundary_edges = [e for e in edges
                      if (e[2] == 0 and e[1] in (0, L))
                      or (e[2] == 1 and e[0] in (0, L))]
    for sheet in range(2):
        gens.append(zop([qubit(e, sheet) for e in boundary_edges]))

    (c1x, ylo, yhi), (c2x, _, _) = cut_a, cut_b
    ym = (ylo + yhi) // 2
    if not (ylo < ym < yhi):
        ym = ylo + 1

    # X1 = e-loop threading both cuts at mid-height and returning above.
    verts = [(x, ym) for x in range(c1x - 1, c2x + 2)]
    verts += [(c2x + 1, y) for y in range(ym + 1, yhi + 2)]
    verts += [(x, yhi + 1) for x in range(c2x, c1x - 2, -1)]
    verts += [(c1x - 1, y) for y in range(yhi, ym, -1)]
    x1 = zop(direct_walk(verts, 0))

    # Z1 = m-loop encircling the first cut (clear of the on-cut star arms).
    z1 = xop(dual_walk(rect_faces(c1x - 2, ylo - 1, c1x, yhi), 0))

    # X2 = m-loop threading both cuts at mid-height and returning above.
    faces = [(x, ym) for x in range(c1x - 2, c2x + 2)]
    faces += [(c2x + 1, y) for y in range(ym + 1, yhi + 1)]
    faces += [(x, yhi) for x in range(c2x, c1x - 3, -1)]
    faces += [(c1x - 2, y) for y in range(yhi - 1, ym, -1)]
    x2 = xop(dual_walk(faces, 0))

    # Z2 = e-loop encircling the first cut.
    xr = c1x + 1 if c1x + 1 < c2x else c2x
    z2 = zop(direct_walk(
        [(x, ylo - 1) for x in range(c1x - 1, xr)]
        + [(xr, y) for y in range(ylo - 1, yhi + 1)]
        + [(x, yhi + 1) for x in range(xr, c1x - 1, -1)]
        + [(c1x - 1, y) for y in range(yhi + 1, ylo - 1, -1)], 0))

    coords = {}
    for sheet in range(2):
        for e in edges:
            x, y, o = e
            coords[qubit(e, sheet)] = (sheet, (x, y, "HV"[o]))
    return StabilizerCode(
        n=n,
        generators=tuple(gens),
        logical_pairs=((x1, z1), (x2, z2)),
        qubit_coords=coords,
        metadata={
            "kind": "bilayer_genon",
            "L": L,
            "cuts": cuts,
            "boundary": "smooth per layer + charge-free dual boundary loop",
            "genon_stars": "merged weight-8 at cut endpoints",
        },
    )


def genon_double_loop(code: StabilizerCode, cut_index: int = 0,
                      endpoint: int = 0) -> PauliOp:
    """Dual loop encircling one genon twice (once per layer).

    Closes only after two laps because a single lap crosses the branch cut
    once; the result lies in the stabilizer group.
    """
    if code.metadata.get("kind") != "bilayer_genon":
        raise StabilizerError("double genon loop needs a bilayer genon code")
    L = code.metadata["L"]
    cuts = code.metadata["cuts"]
    cx, ylo, yhi = cuts[cut_index]
    gy = ylo if endpoint == 0 else yhi
    edges = _genon_edges(L)
    eidx = {e: i for i, e in enumerate(edges)}
    ne = len(edges)
    faces = [(cx - 1, gy - 1), (cx, gy - 1), (cx, gy), (cx - 1, gy)]
    seq = faces * 2
    loop = seq + [seq[0]]
    x = np.zeros(code.n, dtype=np.uint8)
    cur = 0
    for f1, f2 in zip(loop, loop[1:]):
        (x1, y1), (x2, y2) = f1, f2
        e = (max(x1, x2), y1, 1) if y1 == y2 else (x1, max(y1, y2), 0)
        c1 = _seg_cross(_face_center(f1), _edge_eff_mid(e, cuts), cuts)
        c2 = _seg_cross(_edge_eff_mid(e, cuts), _face_center(f2), cuts)
        x[(cur ^ c1) * ne + eidx[e]] ^= 1
        cur ^= c1 ^ c2
    if cur != 0:
        raise StabilizerError("double loop failed to close")
    return PauliOp(x, np.zeros(code.n, dtype=np.uint8))


# -- geometric moves ------------------------------------------------------


def _edge_map_to_perm(code: StabilizerCode, mapper, name: str,
                      tags: dict | None = None) -> QubitPermutation:
    image = np.empty(code.n, dtype=np.int64)
    index = {coord: q for q, coord in code.qubit_coords.items()}
    for q, coord in code.qubit_coords.items():
        target = mapper(coord)
        if target not in index:
            raise StabilizerError(
                f"move {name!r} sends qubit {coord} outside the lattice")
        image[q] = index[target]
    perm = QubitPermutation(image, tags=tags or {}, name=name)
    _assert_automorphism(code, perm, name)
    return perm


def _assert_automorphism(code: StabilizerCode, perm: QubitPermutation,
                         name: str) -> None:
    mat = code.generator_matrix
    for g in code.generators:
        if not gf2_in_span(mat, g.permuted(perm).symplectic_bits()):
            raise StabilizerError(
                f"move {name!r} does not normalize the stabilizer group")


def _torus_moves(L: int):
    def h(x, y):
        return (x % L, y % L, "H")

    def v(x, y):
        return (x % L, y % L, "V")

    return {
        "reflect_diagonal": lambda c: (
            v(c[1][1], c[1][0]) if c[1][2] == "H" else h(c[1][1], c[1][0])),
        "reflect_vertical": lambda c: (
            h(-c[1][0] - 1, c[1][1]) if c[1][2] == "H" else v(-c[1][0], c[1][1])),
        "rotate_quarter_about_vertex": lambda c: (
            v(-c[1][1], c[1][0]) if c[1][2] == "H"
            else h(-c[1][1] - 1, c[1][0])),
        "rotate_quarter_about_plaquette": lambda c: (
            v(1 - c[1][1], c[1][0]) if c[1][2] == "H"
            else h(-c[1][1], c[1][0])),
    }


def _genon_point_moves(L: int):
    return {
        "reflect_antidiagonal": lambda p: (L - p[1], L - p[0]),
        "reflect_vertical": lambda p: (L - p[0], p[1]),
    }


def _genon_edge_mapper(L: int, point_map):
    def mapper(coord):
        sheet, (x, y, o) = coord
        if o == "H":
            a, b = point_map((x, y)), point_map((x + 1, y))
        else:
            a, b = point_map((x, y)), point_map((x, y + 1))
        (xa, ya), (xb, yb) = sorted([a, b])
        if ya == yb:
            return (sheet, (xa, ya, "H"))
        return (sheet, (xa, ya, "V"))

    return mapper


def _central_square_mask(code: StabilizerCode):
    """Qubits of the inter-cut square; half-open so that the swapped patch
    boundary matches the west-nudge convention of the cuts (east on-cut
    column and south row in, west column and north row out)."""
    (c1x, ylo, yhi), (c2x, _, _) = code.metadata["cuts"]
    members = set()
    for q, (sheet, (x, y, o)) in code.qubit_coords.items():
        if o == "H":
            if c1x <= x <= c2x - 1 and ylo <= y <= yhi - 1:
                members.add(q)
        else:
            if c1x < x <= c2x and ylo <= y <= yhi - 1:
                members.add(q)
    return members


def geometric_permutation(code: StabilizerCode, move: str,
                          region: str | None = None) -> QubitPermutation:
    """Qubit permutation realizing a lattice isometry or layer swap."""
    kind = code.metadata.get("kind")
    if kind == "toric_torus":
        L = code.metadata["L"]
        moves = {name: (lambda fn: (lambda c: (0, fn(c))))(fn)
                 for name, fn in _torus_moves(L).items()}
        if move == "half_translation":
            # Lattice duality: shifts by half a lattice vector, exchanging
            # stars and plaquettes; only valid combined with transversal H.
            def dual(c):
                _, (x, y, o) = c
                if o == "H":
                    return (0, ((x + 1) % L, y % L, "V"))
                return (0, (x % L, (y + 1) % L, "H"))

            tags = {q: "H" for q in range(code.n)}
            return _edge_map_to_perm(code, lambda c: dual(c), move, tags=tags)
        if move not in moves:
            raise StabilizerError(f"unknown torus move {move!r}")
        return _edge_map_to_perm(code, moves[move], move)
    if kind == "bilayer_genon":
        L = code.metadata["L"]
        if move == "layer_swap":
            image = np.empty(code.n, dtype=np.int64)
            index = {coord: q for q, coord in code.qubit_coords.items()}
            for q, (sheet, site) in code.qubit_coords.items():
                image[q] = index[(1 - sheet, site)]
            perm = QubitPermutation(image, name=move)
            _assert_automorphism(code, perm, move)
            return perm
        if move == "patch_layer_swap":
            if region not in (None, "central_square"):
                raise StabilizerError(f"unknown region {region!r}")
            members = _central_square_mask(code)
            image = np.arange(code.n, dtype=np.int64)
            index = {coord: q for q, coord in code.qubit_coords.items()}
            for q in members:
                sheet, site = code.qubit_coords[q]
                image[q] = index[(1 - sheet, site)]
            return QubitPermutation(image, name=f"{move}[central_square]")
        if move in ("reflect_antidiagonal", "reflect_vertical"):
            point_map = _genon_point_moves(L)[move]
            mapper = _genon_edge_mapper(L, point_map)
            image = np.empty(code.n, dtype=np.int64)
            index = {coord: q for q, coord in code.qubit_coords.items()}
            for q, coord in code.qubit_coords.items():
                image[q] = index[mapper(coord)]
            if move == "reflect_vertical":
                # The mirror swaps the two cuts but flips the west-nudge
                # side; compensate with a sheet swap on the on-cut columns.
                (c1x, ylo, yhi), (c2x, _, _) = code.metadata["cuts"]
                seam = np.arange(code.n, dtype=np.int64)
                for q, (sheet, (x, y, o)) in code.qubit_coords.items():
                    if o == "V" and x in (c1x, c2x) and ylo <= y <= yhi - 1:
                        seam[q] = index[(1 - sheet, (x, y, o))]
                image = seam[image]
            perm = QubitPermutation(image, name=move)
            if move == "reflect_vertical":
                _assert_automorphism(code, perm, move)
            return perm
        raise StabilizerError(f"unknown genon move {move!r}")
    raise StabilizerError(f"no moves defined for code kind {kind!r}")


# -- logical action -------------------------------------------------------


def _symplectic_pairing(a: PauliOp, b: PauliOp) -> int:
    return int(np.sum(a.x & b.z) + np.sum(a.z & b.x)) % 2


def logical_action(code: StabilizerCode, perm: QubitPermutation) -> dict:
    """2k x 2k GF(2) symplectic matrix of a normalizing permutation."""
    _assert_automorphism(code, perm, perm.name or "perm")
    logicals = code.logical_ops()
    twok = len(logicals)
    action = np.zeros((twok, twok), dtype=np.uint8)
    mat = code.generator_matrix
    for col, gen in enumerate(logicals):
        img = gen.permuted(perm)
        resid = img
        for row in range(twok):
            partner = logicals[row ^ 1]
            coeff = _symplectic_pairing(img, partner)
            action[row, col] = coeff
            if coeff:
                resid = resid * logicals[row]
        if not gf2_in_span(mat, resid.symplectic_bits()):
            raise StabilizerError(
                "conjugated logical is not expressible over the tableau")
    lam = _symplectic_form(twok)
    if np.any((action.T @ lam @ action) % 2 != lam):
        raise StabilizerError("extracted action is not symplectic")
    return {"symplectic": action, "k": twok // 2, "move": perm.name}


def _symplectic_form(twok: int) -> np.ndarray:
    lam = np.zeros((twok, twok), dtype=np.uint8)
    for i in range(0, twok, 2):
        lam[i, i + 1] = lam[i + 1, i] = 1
    return lam


def protocol_action(code: StabilizerCode, steps) -> dict:
    """Logical action of a protocol given as move names or permutations.

    Individual steps need not normalize the stabilizer group (a mirror may
    move the branch cuts); only the composite must.
    """
    composite = QubitPermutation(np.arange(code.n), name="identity")
    for step in steps:
        if isinstance(step, QubitPermutation):
            perm = step
        elif isinstance(step, tuple):
            perm = geometric_permutation(code, step[0], region=step[1])
        else:
            perm = _resolve_step(code, step)
        composite = perm.compose(composite)
    composite = QubitPermutation(
        composite.image, name="+".join(_step_name(s) for s in steps) or "identity")
    return logical_action(code, composite)


def _step_name(step) -> str:
    if isinstance(step, QubitPermutation):
        return step.name
    if isinstance(step, tuple):
        return step[0]
    return str(step)


def _resolve_step(code: StabilizerCode, name: str) -> QubitPermutation:
    kind = code.metadata.get("kind")
    if kind == "bilayer_genon" and name == "reflect_antidiagonal":
        L = code.metadata["L"]
        mapper = _genon_edge_mapper(L, _genon_point_moves(L)[name])
        image = np.empty(code.n, dtype=np.int64)
        index = {coord: q for q, coord in code.qubit_coords.items()}
        for q, coord in code.qubit_coords.items():
            image[q] = index[mapper(coord)]
        return QubitPermutation(image, name=name)
    if kind == "bilayer_genon" and name == "patch_layer_swap":
        return geometric_permutation(code, name, region="central_square")
    return geometric_permutation(code, name)


NAMED_PROTOCOLS = {
    # Step i: long-range mirror about the anti-diagonal; step ii: layer swap
    # on the inter-cut square; step iii: vertical mirror.
    "genon_mirror_swap": ["reflect_antidiagonal", "patch_layer_swap"],
    "genon_mirror_swap_mirror": [
        "reflect_antidiagonal", "patch_layer_swap", "reflect_vertical"],
    "layer_swap_only": ["layer_swap"],
}


# -- folded views ---------------------------------------------------------


def diagonal_fold_map(code: StabilizerCode) -> dict:
    """Stack-site assignment for folding the torus along the main diagonal."""
    if code.metadata.get("kind") != "toric_torus":
        raise StabilizerError("diagonal fold map applies to the torus code")
    L = code.metadata["L"]
    fold = {}
    for q, (_, (x, y, o)) in code.qubit_coords.items():
        partner = (y, x, "V" if o == "H" else "H")
        site = tuple(sorted([(x, y, o), partner]))
        layer = 1 if (x, y, o) <= partner else 2
        fold[q] = (site, layer)
    return fold


def folded_view(code: StabilizerCode, fold_map: dict,
                perm: QubitPermutation) -> dict:
    """Certify that a permutation is transversal for the given fold.

    Returns per-site layer permutations; raises with a witness qubit pair
    if the permutation couples distinct stack-sites.
    """
    per_site: dict = {}
    for q in range(code.n):
        site, layer = fold_map[q]
        tsite, tlayer = fold_map[int(perm.image[q])]
        if tsite != site:
            raise StabilizerError(
                f"not transversal: qubit {q} (site {site}) maps to "
                f"site {tsite}")
        per_site.setdefault(site, {})[layer] = tlayer
    return {"transversal": True, "per_site": per_site}


# -- comparison with the anyon-level matrices ------------------------------


_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
}


def symplectic_from_unitary(u: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """GF(2) symplectic action of a two-qubit Clifford unitary.

    Basis order (X1, Z1, X2, Z2); raises if u is not Clifford.
    """
    if u.shape != (4, 4):
        raise StabilizerError("expected a 4x4 unitary")
    gens = ["XI", "ZI", "IX", "IZ"]
    labels = [a + b for a in "IXZY" for b in "IXZY"]
    mats = {lab: np.kron(_PAULI_1Q[lab[0]], _PAULI_1Q[lab[1]])
            for lab in labels}
    out = np.zeros((4, 4), dtype=np.uint8)
    for col, g in enumerate(gens):
        conj = u @ mats[g] @ u.conj().T
        found = None
        for lab, m in mats.items():
            for ph in (1, -1, 1j, -1j):
                if np.max(np.abs(conj - ph * m)) < tol:
                    found = lab
                    break
            if found:
                break
        if found is None:
            raise StabilizerError(f"unitary is not Clifford on {g}")
        bits = np.zeros(4, dtype=np.uint8)
        for qi, ch in enumerate(found):
            if ch in "XY":
                bits[2 * qi] = 1
            if ch in "ZY":
                bits[2 * qi + 1] = 1
        out[:, col] = bits
    return out


# -- distance utilities ---------------------------------------------------


def _pack_bits(vec: np.ndarray) -> int:
    out = 0
    for i, b in enumerate(vec):
        if b:
            out |= 1 << i
    return out


def exact_z_distance(code: StabilizerCode, limit_dim: int = 22) -> int:
    """Exact minimum weight of a Z-type logical, by kernel enumeration.

    Only feasible when the Z-kernel dimension is at most limit_dim.
    """
    xs_rows = [g.x for g in code.generators if g.x.any()]
    hx = np.stack(xs_rows)
    basis = _gf2_nullspace(hx)
    if basis.shape[0] > limit_dim:
        raise StabilizerError(
            f"kernel dimension {basis.shape[0]} exceeds limit {limit_dim}")
    xlogs = [pair[0] for pair in code.logical_pairs] + \
            [pair[1] for pair in code.logical_pairs]
    xlog_bits = [log.x for log in xlogs if log.x.any()]
    words = np.zeros(1, dtype=object)
    pairings = np.zeros(1, dtype=np.int64)
    words[0] = 0
    for row in basis:
        packed = _pack_bits(row)
        pbits = 0
        for j, xb in enumerate(xlog_bits):
            if int(np.sum(row & xb)) % 2:
                pbits |= 1 << j
        words = np.concatenate([words, np.array([w ^ packed for w in words],
                                                dtype=object)])
        pairings = np.concatenate([pairings, pairings ^ pbits])
    best = None
    for w, p in zip(words, pairings):
        if p == 0:
            continue
        wt = bin(w).count("1")
        if best is None or wt < best:
            best = wt
    if best is None:
        raise StabilizerError("no Z-type logical found in the kernel")
    return best


def _gf2_nullspace(mat: np.ndarray) -> np.ndarray:
    m, pivots = gf2_row_reduce(mat)
    cols = mat.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        vec = np.zeros(cols, dtype=np.uint8)
        vec[f] = 1
        for r, p in enumerate(pivots):
            if m[r, f]:
                vec[p] = 1
        basis.append(vec)
    return np.array(basis, dtype=np.uint8) if basis else \
        np.zeros((0, cols), dtype=np.uint8)


def min_logical_weight_upper_bound(code: StabilizerCode, seed: int = 0,
                                   sweeps: int = 200) -> int:
    """Best found weight of a logical operator, by randomized coset descent."""
    rng = np.random.default_rng(seed)
    gen_bits = code.generator_matrix
    best = min(op.weight() for op in code.logical_ops())
    for op in code.logical_ops():
        current = op.symplectic_bits().copy()
        for _ in range(sweeps):
            row = gen_bits[rng.integers(gen_bits.shape[0])]
            trial = current ^ row
            n = code.n
            if int(np.sum(trial[:n] | trial[n:])) <= \
                    int(np.sum(current[:n] | current[n:])):
                current = trial
        n = code.n
        best = min(best, int(np.sum(current[:n] | current[n:])))
    return best


def export_symplectic_json(result: dict) -> str:
    return json.dumps(
        {"k": result["k"], "move": result["move"],
         "symplectic": result["symplectic"].tolist()},
        sort_keys=True)
