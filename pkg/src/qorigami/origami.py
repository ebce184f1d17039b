"""Folded multi-layer geometries and Wilson-loop tracing.

A geometry is a folded footprint polygon together with one exact affine
chart per layer mapping the footprint into a base torus (square, hexagon
in lattice coordinates, or a genon double cover presented as a torus
quotient).  Layer-permutation protocols are verified by pushing reference
loops through every step, rewriting the image paths to normal form, and
reading off the induced action on the homology basis as an exact integer
matrix.

Two rewrite rules drive normalization: a closed sub-loop whose lift has
zero winding is deleted (this covers the double loop around a single
genon), and a segment is rewritten into the partner layer across a crease
whenever the traced path crosses one (chart transitions).  Both count
against a configurable rewrite budget.
"""
from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import mcg


class OrigamiError(ValueError):
    """Raised for invalid geometries, protocols, or stuck rewrites."""


class RewriteBudgetError(OrigamiError):
    """Raised when path normalization exceeds the rewrite budget."""


# -- exact affine maps ----------------------------------------------------


@dataclass(frozen=True)
class AffineMap:
    """Exact planar map (x, y) -> (a x + b y + e, c x + d y + f)."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    e: Fraction = Fraction(0)
    f: Fraction = Fraction(0)

    @classmethod
    def make(cls, a, b, c, d, e=0, f=0) -> "AffineMap":
        return cls(Fraction(a), Fraction(b), Fraction(c), Fraction(d),
                   Fraction(e), Fraction(f))

    def apply(self, p):
        return (self.a * p[0] + self.b * p[1] + self.e,
                self.c * p[0] + self.d * p[1] + self.f)

    def after(self, other: "AffineMap") -> "AffineMap":
        return AffineMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            self.a * other.e + self.b * other.f + self.e,
            self.c * other.e + self.d * other.f + self.f)

    def inverse(self) -> "AffineMap":
        det = self.a * self.d - self.b * self.c
        if det == 0:
            raise OrigamiError("singular affine map")
        ia, ib = self.d / det, -self.b / det
        ic, id_ = -self.c / det, self.a / det
        return AffineMap(ia, ib, ic, id_,
                         -(ia * self.e + ib * self.f),
                         -(ic * self.e + id_ * self.f))

    def linear_det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def linear(self):
        return ((self.a, self.b), (self.c, self.d))


IDENTITY = AffineMap.make(1, 0, 0, 1)

_OFFSETS = (0, 1, -1, 2, -2)
_INVERSE_CACHE: dict = {}
_PROBE_CACHE: dict = {}


def reflection(px, py, dx, dy) -> AffineMap:
    """Reflection across the line through (px, py) with direction (dx, dy)."""
    px, py, dx, dy = Fraction(px), Fraction(py), Fraction(dx), Fraction(dy)
    n = dx * dx + dy * dy
    a = (dx * dx - dy * dy) / n
    b = 2 * dx * dy / n
    lin = AffineMap(a, b, b, -a)
    off = lin.apply((px, py))
    return AffineMap(a, b, b, -a, px - off[0], py - off[1])


# -- cycle notation -------------------------------------------------------


def parse_cycles(text: str, n_layers: int) -> dict:
    """Parse "(1,4)(3,2)" or "(14)(32)" into a permutation of 1..n."""
    perm = {l: l for l in range(1, n_layers + 1)}
    chunks = re.findall(r"\(([^()]*)\)", text.replace(" ", ""))
    if not chunks and text.strip():
        raise OrigamiError(f"cannot parse cycles from {text!r}")
    for chunk in chunks:
        if "," in chunk:
            members = [int(tok) for tok in chunk.split(",") if tok]
        else:
            members = [int(ch) for ch in chunk]
        if len(members) < 2:
            raise OrigamiError(f"cycle {chunk!r} too short")
        if any(not (1 <= m <= n_layers) for m in members):
            raise OrigamiError(f"cycle {chunk!r} outside 1..{n_layers}")
        if len(set(members)) != len(members):
            raise OrigamiError(f"cycle {chunk!r} repeats a layer")
        for i, m in enumerate(members):
            if perm[m] != m:
                raise OrigamiError(f"layer {m} appears in two cycles")
            perm[m] = members[(i + 1) % len(members)]
    return perm


def format_cycles(perm: dict) -> str:
    cycles = cycles_of(perm)
    if not cycles:
        return "()"
    return "".join("(" + ",".join(str(m) for m in cyc) + ")"
                   for cyc in cycles)


def cycles_of(perm: dict) -> list:
    """Disjoint cycles, each starting at its smallest member, sorted."""
    seen = set()
    cycles = []
    for start in sorted(perm):
        if start in seen or perm[start] == start:
            seen.add(start)
            continue
        cyc = [start]
        seen.add(start)
        cur = perm[start]
        while cur != start:
            cyc.append(cur)
            seen.add(cur)
            cur = perm[cur]
        cycles.append(tuple(cyc))
    return sorted(cycles)


# -- geometry -------------------------------------------------------------


def _point_in_convex(p, poly) -> bool:
    sign = 0
    n = len(poly)
    for i in range(n):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % n]
        cross = (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1)
        if cross == 0:
            continue
        s = 1 if cross > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True


def _clip_convex(poly, px, py, nx, ny):
    """Keep the part of the convex polygon with n·(p - p0) <= 0."""
    out = []
    n = len(poly)
    for i in range(n):
        p1, p2 = poly[i], poly[(i + 1) % n]
        v1 = nx * (p1[0] - px) + ny * (p1[1] - py)
        v2 = nx * (p2[0] - px) + ny * (p2[1] - py)
        if v1 <= 0:
            out.append(p1)
        if (v1 < 0 < v2) or (v2 < 0 < v1):
            t = v1 / (v1 - v2)
            out.append((p1[0] + t * (p2[0] - p1[0]),
                        p1[1] + t * (p2[1] - p1[1])))
    dedup = []
    for p in out:
        if not dedup or p != dedup[-1]:
            dedup.append(p)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return tuple(dedup)


@dataclass(frozen=True)
class FoldGeometry:
    """Folded layers over a common footprint, with exact charts."""

    base: str
    layers: int
    charts: tuple
    footprint: tuple
    regions: dict = field(default_factory=dict)
    boundary_pairings: tuple = ()
    branch_cuts: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.layers != len(self.charts):
            raise OrigamiError("one chart per layer required")
        for _, pairing in tuple(self.boundary_pairings) + tuple(
                self.branch_cuts):
            perm = parse_cycles(pairing, self.layers)
            if any(perm[perm[l]] != l for l in perm):
                raise OrigamiError(f"pairing {pairing} is not an involution")

    @property
    def orientation(self) -> tuple:
        return tuple(1 if m.linear_det() > 0 else -1 for m in self.charts)

    def chart(self, layer: int) -> AffineMap:
        return self.charts[layer - 1]

    def contains(self, p) -> bool:
        return _point_in_convex(p, self.footprint)

    def region_polygon(self, name: str):
        if name == "ALL":
            return self.footprint
        if name not in self.regions:
            raise OrigamiError(f"unknown region {name!r}")
        return self.regions[name]

    def locate(self, p):
        """First folded (layer, lattice shift) covering a base point."""
        for layer in range(1, self.layers + 1):
            inv = self._chart_inverses()[layer - 1]
            for tx in _OFFSETS:
                for ty in _OFFSETS:
                    v = inv.apply((p[0] + tx, p[1] + ty))
                    if self.contains(v):
                        return (layer, (tx, ty))
        return None

    def _chart_inverses(self):
        cached = _INVERSE_CACHE.get(id(self))
        if cached is None:
            cached = tuple(m.inverse() for m in self.charts)
            _INVERSE_CACHE[id(self)] = cached
        return cached

    def to_json(self) -> str:
        def frac(x):
            return str(Fraction(x))

        doc = {
            "base": self.base,
            "layers": self.layers,
            "charts": [[frac(m.a), frac(m.b), frac(m.c), frac(m.d),
                        frac(m.e), frac(m.f)] for m in self.charts],
            "footprint": [[frac(x), frac(y)] for x, y in self.footprint],
            "regions": {name: [[frac(x), frac(y)] for x, y in poly]
                        for name, poly in self.regions.items()},
            "boundary_pairings": list(map(list, self.boundary_pairings)),
            "branch_cuts": list(map(list, self.branch_cuts)),
            "metadata": self.metadata,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FoldGeometry":
        doc = json.loads(text)
        charts = tuple(AffineMap.make(*[Fraction(v) for v in row])
                       for row in doc["charts"])
        footprint = tuple((Fraction(x), Fraction(y))
                          for x, y in doc["footprint"])
        regions = {name: tuple((Fraction(x), Fraction(y)) for x, y in poly)
                   for name, poly in doc.get("regions", {}).items()}
        return cls(base=doc["base"], layers=doc["layers"], charts=charts,
                   footprint=footprint, regions=regions,
                   boundary_pairings=tuple(map(tuple,
                                               doc["boundary_pairings"])),
                   branch_cuts=tuple(map(tuple, doc["branch_cuts"])),
                   metadata=doc.get("metadata", {}))


@dataclass(frozen=True)
class ProtocolStep:
    """One layer permutation, restricted to a region of the footprint."""

    perm: dict
    region: str = "ALL"
    kind: str = "layer_perm"

    def cycles(self) -> str:
        return format_cycles(self.perm)


@dataclass(frozen=True)
class LoopPath:
    """Directed folded path: ((start, end, layer), ...) segment tuples."""

    segments: tuple

    def reversed_path(self) -> "LoopPath":
        return LoopPath(tuple((e, s, l)
                              for (s, e, l) in reversed(self.segments)))


# -- geometry builders ----------------------------------------------------


def _edge_pairings(geometry_charts, footprint, names):
    """Layer pairings on each named footprint edge: layers whose charts
    agree pointwise (mod lattice) on the edge are crease partners."""
    pairs = []
    n = len(geometry_charts)
    for (name, (p1, p2)) in names:
        matched = []
        mid = ((p1[0] + p2[0]) / 2, (p1[1] + p2[1]) / 2)
        probe = ((p1[0] + mid[0]) / 2, (p1[1] + mid[1]) / 2)
        for i in range(n):
            for j in range(i + 1, n):
                qi = [geometry_charts[i].apply(p) for p in (mid, probe)]
                qj = [geometry_charts[j].apply(p) for p in (mid, probe)]
                deltas = {(a[0] - b[0], a[1] - b[1])
                          for a, b in zip(qi, qj)}
                if len(deltas) == 1:
                    dx, dy = deltas.pop()
                    if dx.denominator == 1 and dy.denominator == 1:
                        matched.append((i + 1, j + 1))
        if matched:
            pairing = "".join(f"({a},{b})" for a, b in sorted(matched))
            pairs.append((name, pairing))
    return tuple(pairs)


def square_torus() -> FoldGeometry:
    square = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
              (Fraction(1), Fraction(1)), (Fraction(0), Fraction(1)))
    return FoldGeometry(base="square_torus", layers=1, charts=(IDENTITY,),
                        footprint=square)


NAMED_AXES = {
    "antidiagonal": ((1, 0), (-1, 1)),
    "diagonal": ((0, 0), (1, 1)),
    "vertical_half": ((Fraction(1, 2), 0), (0, 1)),
    "horizontal_half": ((0, Fraction(1, 2)), (1, 0)),
}


def _polygon_area(poly) -> Fraction:
    total = Fraction(0)
    n = len(poly)
    for i in range(n):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return abs(total) / 2


def fold(g: FoldGeometry, axis, keep=None) -> FoldGeometry:
    """Fold across a mirror axis: layers double, reflected copies get new
    labels counted from the top of the stack (layer l pairs with 2L+1-l).

    `keep` optionally picks the surviving half by a point inside it.
    """
    if isinstance(axis, str):
        if axis not in NAMED_AXES:
            raise OrigamiError(f"unknown axis {axis!r}")
        (px, py), (dx, dy) = NAMED_AXES[axis]
    else:
        (px, py), (dx, dy) = axis
    mirror = reflection(px, py, dx, dy)
    image = tuple(mirror.apply(p) for p in g.footprint)
    if sorted(image) != sorted(g.footprint):
        raise OrigamiError("axis is not a symmetry of the footprint")
    nx, ny = Fraction(dy), Fraction(-dx)
    if keep is not None:
        side = nx * (Fraction(keep[0]) - px) + ny * (Fraction(keep[1]) - py)
        if side > 0:
            nx, ny = -nx, -ny
    kept = _clip_convex(g.footprint, Fraction(px), Fraction(py), nx, ny)
    if len(kept) < 3 or 2 * _polygon_area(kept) != _polygon_area(
            g.footprint):
        raise OrigamiError("axis does not bisect the footprint")
    old = g.layers
    charts = list(g.charts) + [None] * old
    for l in range(1, old + 1):
        charts[2 * old - l] = g.chart(l).after(mirror)
    geometry = FoldGeometry(
        base=g.base, layers=2 * old, charts=tuple(charts), footprint=kept,
        branch_cuts=g.branch_cuts,
        metadata=dict(g.metadata, folds=g.metadata.get("folds", 0) + 1))
    edges = _footprint_edges(kept)
    pairings = _edge_pairings(geometry.charts, kept, edges)
    return FoldGeometry(
        base=geometry.base, layers=geometry.layers, charts=geometry.charts,
        footprint=kept, boundary_pairings=pairings,
        branch_cuts=g.branch_cuts, metadata=geometry.metadata)


def _footprint_edges(poly):
    names = []
    n = len(poly)
    for i in range(n):
        names.append((f"edge_{i}", (poly[i], poly[(i + 1) % n])))
    return names


def bilayer_genon_geometry() -> FoldGeometry:
    """Planar bilayer with two branch cuts, presented as the torus double
    cover of its quotient: layer 2 is the sheet-exchanging involution."""
    kite = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
            (Fraction(1, 2), Fraction(1, 2)), (Fraction(0), Fraction(1)))
    iota = AffineMap.make(-1, 0, 0, -1)
    return FoldGeometry(
        base="planar_bilayer_genons", layers=2, charts=(IDENTITY, iota),
        footprint=kite,
        branch_cuts=(("cut_1", "(1,2)"), ("cut_2", "(1,2)")),
        metadata={"cut_arrangement": "diagonal pair exchanged by the "
                                     "main-diagonal mirror"})


def genon4_geometry() -> FoldGeometry:
    """Bilayer genon system folded along the cut line into four layers.

    Layer labels follow sheet-major order: 1 and 3 are the
    two sheets, 2 and 4 their reflected copies, so the sheet exchange is
    (1,3)(2,4) and the transversal mirror protocols are (1,4)(2,3) and
    (1,2)(3,4).
    """
    tri = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
           (Fraction(1, 2), Fraction(1, 2)))
    charts = (IDENTITY,
              AffineMap.make(0, 1, 1, 0),
              AffineMap.make(-1, 0, 0, -1),
              AffineMap.make(0, -1, -1, 0))
    half = Fraction(1, 2)
    regions = {
        "delta": ((Fraction(0), Fraction(0)), (half, Fraction(0)),
                  (half, half)),
        "nabla": ((half, Fraction(0)), (Fraction(1), Fraction(0)),
                  (half, half)),
    }
    geometry = FoldGeometry(
        base="planar_bilayer_genons", layers=4, charts=charts,
        footprint=tri, regions=regions,
        branch_cuts=(("cut_1", "(1,2)(3,4)"), ("cut_2", "(1,4)(2,3)")),
        boundary_pairings=_edge_pairings(charts, tri, _footprint_edges(tri)),
        metadata={"layer_order": "sheet-major, not the accordion order "
                                 "that fold() would assign"})
    return geometry


_HEX_R = AffineMap.make(0, -1, 1, -1)
_HEX_M = AffineMap.make(0, 1, 1, 0)


def _hex_group(kind: str):
    r2 = _HEX_R.after(_HEX_R)
    base = [IDENTITY, _HEX_R, r2]
    mirrors = [_HEX_M, _HEX_M.after(_HEX_R), _HEX_M.after(r2)]
    if kind == "plain":
        return base + mirrors
    neg = AffineMap.make(-1, 0, 0, -1)
    if kind == "negated":
        return base + [neg.after(m) for m in mirrors]
    if kind == "full":
        half = base + mirrors
        return half + [neg.after(g) for g in half]
    raise OrigamiError(f"unknown hexagon chart family {kind!r}")


def hexagon6_geometry(family: str) -> FoldGeometry:
    """Hexagonal torus folded to six layers (lattice coordinates).

    The two mirror families give the two possible foldings: "plain"
    supports the Rb-type mirror protocols, "negated" the Ra-type.
    """
    if family == "plain":
        tri = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
               (Fraction(2, 3), Fraction(1, 3)))
    elif family == "negated":
        tri = ((Fraction(0), Fraction(0)), (Fraction(1, 3), Fraction(2, 3)),
               (Fraction(2, 3), Fraction(1, 3)))
    else:
        raise OrigamiError(f"unknown hexagon chart family {family!r}")
    charts = tuple(_hex_group(family))
    return FoldGeometry(
        base="hexagon_torus", layers=6, charts=charts, footprint=tri,
        metadata={"family": family, "footprint": "triangular"})


def hexagon12_geometry() -> FoldGeometry:
    """Hexagonal torus folded to twelve layers, ordered so the Tt-type
    mirror acts as (1,2)(3,4)...(11,12)."""
    tri = ((Fraction(0), Fraction(0)), (Fraction(1, 2), Fraction(1, 2)),
           (Fraction(2, 3), Fraction(1, 3)))
    trb = AffineMap.make(1, 0, 1, -1)
    odd = _hex_group("plain")
    charts = []
    for g in odd:
        charts.append(g)
        charts.append(trb.after(g))
    return FoldGeometry(
        base="hexagon_torus", layers=12, charts=tuple(charts),
        footprint=tri, metadata={"footprint": "triangular"})


def left_multiplication_perm(g: FoldGeometry, w: AffineMap) -> dict:
    """Permutation induced by composing every chart with w on the left."""
    perm = {}
    for l in range(1, g.layers + 1):
        target = w.after(g.chart(l))
        matches = [m for m in range(1, g.layers + 1)
                   if g.chart(m).linear() == target.linear()
                   and (g.chart(m).e - target.e).denominator == 1
                   and (g.chart(m).f - target.f).denominator == 1]
        if len(matches) != 1:
            raise OrigamiError("map does not permute the charts")
        perm[l] = matches[0]
    return perm


# -- loop tracing ---------------------------------------------------------


def fold_base_path(g: FoldGeometry, points, subdivisions: int = 60,
                   budget: int = 64) -> LoopPath:
    """Clip a base polyline into folded segments with layer labels.

    Each chart transition is a partner-layer rewrite and counts against
    the budget.
    """
    segments = []
    rewrites = 0
    prev_layer = None
    for p0, p1 in zip(points, points[1:]):
        for k in range(subdivisions):
            t_mid = Fraction(2 * k + 1, 2 * subdivisions)
            t_s = Fraction(k, subdivisions)
            t_e = Fraction(k + 1, subdivisions)
            mid = (p0[0] + (p1[0] - p0[0]) * t_mid,
                   p0[1] + (p1[1] - p0[1]) * t_mid)
            wrapped = (mid[0] % 1, mid[1] % 1)
            hit = g.locate(wrapped)
            if hit is None:
                raise OrigamiError(f"point {mid} not covered by any chart")
            layer, (tx, ty) = hit
            inv = g._chart_inverses()[layer - 1]
            offset = ((wrapped[0] + tx) - mid[0], (wrapped[1] + ty) - mid[1])
            start = (p0[0] + (p1[0] - p0[0]) * t_s + offset[0],
                     p0[1] + (p1[1] - p0[1]) * t_s + offset[1])
            end = (p0[0] + (p1[0] - p0[0]) * t_e + offset[0],
                   p0[1] + (p1[1] - p0[1]) * t_e + offset[1])
            segments.append((inv.apply(start), inv.apply(end), layer))
            if prev_layer is not None and layer != prev_layer:
                rewrites += 1
                if rewrites > budget:
                    raise RewriteBudgetError(
                        f"folding used more than {budget} partner-layer "
                        "rewrites")
            prev_layer = layer
    return LoopPath(tuple(segments))


def reference_loops(g: FoldGeometry, budget: int = 64):
    """Folded images of the homology basis loops alpha and beta."""
    probes = _probe_paths(g, budget)
    return probes[0], probes[1]


def apply_protocol(g: FoldGeometry, steps, path: LoopPath) -> LoopPath:
    """Relabel path layers step by step, honoring region restrictions."""
    segments = list(path.segments)
    for step in steps:
        if step.kind != "layer_perm":
            raise OrigamiError(
                "only layer permutations can act on traced paths")
        poly = g.region_polygon(step.region)
        out = []
        for (s, e, layer) in segments:
            mid = ((s[0] + e[0]) / 2, (s[1] + e[1]) / 2)
            inside = step.region == "ALL" or _point_in_convex(mid, poly)
            out.append((s, e, step.perm[layer] if inside else layer))
        segments = out
    return LoopPath(tuple(segments))


def unfold_class(g: FoldGeometry, path: LoopPath, budget: int = 64,
                 rng: random.Random | None = None):
    """Glue the unfolded path in the universal cover and return (p, q).

    Normalization first deletes closed zero-winding sub-loops (the double
    loop around a single genon is the generating case), then reads the
    total lattice displacement.  Returns None if the image is not a
    closed loop (protocol not closed).
    """
    pieces = []
    for (s, e, layer) in path.segments:
        chart = g.chart(layer)
        pieces.append((chart.apply(s), chart.apply(e)))
    start = cur = None
    glued = []
    for (ps, pe) in pieces:
        if cur is None:
            start, cur = ps, pe
            glued.append((ps, pe))
            continue
        tx, ty = cur[0] - ps[0], cur[1] - ps[1]
        if tx.denominator != 1 or ty.denominator != 1:
            return None
        cur = (pe[0] + tx, pe[1] + ty)
        glued.append(((ps[0] + tx, ps[1] + ty), cur))
    dx, dy = cur[0] - start[0], cur[1] - start[1]
    if dx.denominator != 1 or dy.denominator != 1:
        return None
    _delete_null_subloops(glued, budget, rng)
    return (int(dx), int(dy))


def _delete_null_subloops(glued, budget, rng) -> int:
    """Remove contiguous sub-loops that close with zero displacement."""
    deletions = 0
    changed = True
    while changed:
        changed = False
        n = len(glued)
        if n < 2:
            break
        order = list(range(n))
        if rng is not None:
            rng.shuffle(order)
        for i in order:
            n = len(glued)
            if i >= n:
                continue
            for span in range(2, min(n, 24)):
                j = i + span
                if j > n:
                    break
                if glued[i][0] == glued[j - 1][1]:
                    del glued[i:j]
                    deletions += 1
                    if deletions > budget:
                        raise RewriteBudgetError(
                            "null-loop deletion exceeded the rewrite "
                            f"budget; stuck with {len(glued)} segments")
                    changed = True
                    break
            if changed:
                break
    return deletions


def check_transversal(steps, g: FoldGeometry) -> bool:
    """True iff every step permutes layers within vertical stacks only."""
    for step in steps:
        if step.kind != "layer_perm":
            return False
        if sorted(step.perm) != list(range(1, g.layers + 1)):
            raise OrigamiError("permutation does not match the layer count")
        if sorted(step.perm.values()) != list(range(1, g.layers + 1)):
            raise OrigamiError("step does not define a permutation")
        g.region_polygon(step.region)
    return True


def _probe_paths(g: FoldGeometry, budget: int):
    cached = _PROBE_CACHE.get(id(g))
    if cached is not None:
        return cached
    offsets = [Fraction(1, 7), Fraction(2, 7), Fraction(5, 11)]
    probes = []
    for off in offsets:
        probes.append(fold_base_path(
            g, [(Fraction(0), off), (Fraction(1), off)], budget=budget))
        probes.append(fold_base_path(
            g, [(off, Fraction(0)), (off, Fraction(1))], budget=budget))
    _PROBE_CACHE[id(g)] = probes
    return probes


def check_closure(steps, g: FoldGeometry, budget: int = 64) -> bool:
    """True iff the protocol maps the glued configuration to itself."""
    if not steps:
        return True
    if any(step.kind != "layer_perm" for step in steps):
        return False
    for probe in _probe_paths(g, budget):
        image = apply_protocol(g, steps, probe)
        if unfold_class(g, image, budget=budget) is None:
            return False
    return True


def trace_loops(steps, g: FoldGeometry, budget: int = 64,
                rng: random.Random | None = None):
    """Induced 2x2 integer homology action of a closed protocol."""
    if not check_closure(steps, g, budget=budget):
        raise OrigamiError("protocol is not closed; cannot trace loops")
    alpha, beta = reference_loops(g, budget=budget)
    cls_a = unfold_class(g, apply_protocol(g, steps, alpha),
                         budget=budget, rng=rng)
    cls_b = unfold_class(g, apply_protocol(g, steps, beta),
                         budget=budget, rng=rng)
    if cls_a is None or cls_b is None:
        raise OrigamiError("traced loop image failed to close")
    return mcg.MCGMatrix(cls_a[0], cls_b[0], cls_a[1], cls_b[1])


def cycle_decomposition(steps) -> list:
    """Disjoint cycles of the net layer permutation of a global protocol.

    Earlier steps act as the outer factor: steps [s1, s2] compose to
    s1 after s2.
    """
    perms = []
    for step in steps:
        if step.kind != "layer_perm" or step.region != "ALL":
            raise OrigamiError(
                "cycle decomposition needs global layer permutations")
        perms.append(step.perm)
    if not perms:
        return []
    layers = sorted(perms[0])
    net = {}
    for l in layers:
        cur = l
        for perm in reversed(perms):
            cur = perm[cur]
        net[l] = cur
    return cycles_of(net)


# -- protocols and the catalog --------------------------------------------


@dataclass(frozen=True)
class Protocol:
    name: str
    geometry: FoldGeometry
    steps: tuple
    expected: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def is_stub(self) -> bool:
        return bool(self.metadata.get("stub"))

    def expected_matrix(self):
        return mcg.word_to_matrix(list(self.expected))

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "geometry": json.loads(self.geometry.to_json()),
            "steps": [{"region": s.region, "perm": s.cycles(),
                       "kind": s.kind} for s in self.steps],
            "expected": list(self.expected),
            "metadata": self.metadata,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Protocol":
        doc = json.loads(text)
        geometry = FoldGeometry.from_json(json.dumps(doc["geometry"]))
        steps = tuple(
            ProtocolStep(perm=parse_cycles(s["perm"], geometry.layers),
                         region=s["region"], kind=s.get("kind", "layer_perm"))
            for s in doc["steps"])
        return cls(name=doc["name"], geometry=geometry, steps=steps,
                   expected=tuple(doc["expected"]),
                   metadata=doc.get("metadata", {}))


def compose_protocols(p1: Protocol, p2: Protocol) -> Protocol:
    """Composite protocol: p2 runs first, expected words concatenate."""
    if p1.geometry != p2.geometry:
        raise OrigamiError("protocols live on different geometries")
    return Protocol(
        name=f"{p1.name}*{p2.name}", geometry=p1.geometry,
        steps=tuple(p2.steps) + tuple(p1.steps),
        expected=tuple(p1.expected) + tuple(p2.expected),
        metadata={"composed_from": [p1.name, p2.name]})


def _step(g: FoldGeometry, cycles: str, region: str = "ALL") -> ProtocolStep:
    return ProtocolStep(perm=parse_cycles(cycles, g.layers), region=region)


def twofold_square() -> FoldGeometry:
    """Square torus folded once across the anti-diagonal."""
    return fold(square_torus(), "antidiagonal")


def eightfold_square() -> FoldGeometry:
    """Square torus folded three times into an eight-layer triangle."""
    g = fold(square_torus(), "antidiagonal")
    g = fold(g, "diagonal", keep=(Fraction(1, 2), Fraction(1, 8)))
    return fold(g, "vertical_half")


_CATALOG_CACHE: dict = {}


def _catalog() -> dict:
    if _CATALOG_CACHE:
        return _CATALOG_CACHE
    entries = {}
    fold2 = twofold_square()
    entries["fig2_fold2_RaS"] = Protocol(
        "fig2_fold2_RaS", fold2, (_step(fold2, "(1,2)"),), ("Ra", "S"),
        {"note": "single fold across the torus diagonal"})

    fold8 = eightfold_square()
    swap_a = "(1,2)(3,4)(5,6)(7,8)"
    swap_b = "(1,8)(2,5)(3,6)(4,7)"
    entries["appB_8layer_RaS"] = Protocol(
        "appB_8layer_RaS", fold8, (_step(fold8, swap_a),), ("Ra", "S"))
    entries["appB_8layer_S"] = Protocol(
        "appB_8layer_S", fold8,
        (_step(fold8, swap_a), _step(fold8, swap_b)), ("S",),
        {"note": "second swap composes the first into the S move"})

    gen4 = genon4_geometry()
    eq1_note = ("often written as a two-factor per-region product; both "
                "factors describe the same transversal stack operation "
                "seen from the two halves of the unfolded base")
    entries["fig3_genon4_RaS"] = Protocol(
        "fig3_genon4_RaS", gen4, (_step(gen4, "(1,4)(2,3)"),), ("Ra", "S"),
        {"note": eq1_note})
    entries["appE_4layer_RaS"] = Protocol(
        "appE_4layer_RaS", gen4, (_step(gen4, "(1,4)(2,3)"),), ("Ra", "S"),
        {"note": eq1_note})
    entries["appE_4layer_RbS"] = Protocol(
        "appE_4layer_RbS", gen4, (_step(gen4, "(1,2)(3,4)"),), ("Rb", "S"))
    entries["appD_4layer_C"] = Protocol(
        "appD_4layer_C", gen4, (_step(gen4, "(1,3)(2,4)"),), ("C",))

    bilayer = bilayer_genon_geometry()
    entries["appD_bilayer_C"] = Protocol(
        "appD_bilayer_C", bilayer, (_step(bilayer, "(1,2)"),), ("C",))

    hex_words = {
        "TRb": ("negated", AffineMap.make(1, 0, 1, -1), ("T", "Rb")),
        "RbS": ("plain", AffineMap.make(0, 1, 1, 0), ("Rb", "S")),
        "RaS": ("negated", AffineMap.make(0, -1, -1, 0), ("Ra", "S")),
    }
    for label, (family, w, word) in hex_words.items():
        geometry = hexagon6_geometry(family)
        perm = left_multiplication_perm(geometry, w)
        entries[f"appC_hexagon_{label}"] = Protocol(
            f"appC_hexagon_{label}", geometry,
            (ProtocolStep(perm=perm),), word,
            {"family": family})

    hex12 = hexagon12_geometry()
    twelve_words = {
        "TRb": (AffineMap.make(1, 0, 1, -1), ("T", "Rb")),
        "RbS": (AffineMap.make(0, 1, 1, 0), ("Rb", "S")),
        "RaS": (AffineMap.make(0, -1, -1, 0), ("Ra", "S")),
        "C": (AffineMap.make(-1, 0, 0, -1), ("C",)),
    }
    for label, (w, word) in twelve_words.items():
        perm = left_multiplication_perm(hex12, w)
        entries[f"appE_12layer_{label}"] = Protocol(
            f"appE_12layer_{label}", hex12, (ProtocolStep(perm=perm),), word)

    entries["fig3b_16layer_S"] = Protocol(
        "fig3b_16layer_S", eightfold_square(), (), ("S",),
        {"stub": True,
         "reason": "sixteen-layer transversal S construction is stated "
                   "without an explicit protocol"})
    _CATALOG_CACHE.update(entries)
    return _CATALOG_CACHE


def catalog_names() -> list:
    return sorted(_catalog())


def builtin_protocol(name: str):
    """Return (geometry, steps, expected word) for a catalog entry."""
    entries = _catalog()
    if name not in entries:
        raise OrigamiError(
            f"unknown protocol {name!r}; known: {', '.join(sorted(entries))}")
    entry = entries[name]
    return entry


def verify_protocol(entry: Protocol, budget: int = 64,
                    rng: random.Random | None = None) -> dict:
    """Transversality, closure, and exact trace check for one entry."""
    if entry.is_stub:
        return {"name": entry.name, "skipped": True,
                "reason": entry.metadata.get("reason", "stub")}
    transversal = check_transversal(entry.steps, entry.geometry)
    closed = check_closure(entry.steps, entry.geometry, budget=budget)
    traced = trace_loops(entry.steps, entry.geometry, budget=budget, rng=rng)
    expected = entry.expected_matrix()
    return {
        "name": entry.name,
        "skipped": False,
        "transversal": transversal,
        "closed": closed,
        "trace": traced.entries(),
        "expected": expected.entries(),
        "match": traced.entries() == expected.entries(),
    }
