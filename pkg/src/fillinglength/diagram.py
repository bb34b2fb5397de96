"""Van Kampen diagrams as labelled combinatorial maps, with shelling moves.

Representation.  Darts (half-edges) live in parallel arrays indexed by dart
id.  Each dart has a twin (fixed-point-free involution), a label (signed
generator letter read when traversing it), an origin vertex, a face id, and
next/prev pointers giving the cyclic order of its face boundary.  Face
cycles are edge paths: origin(next(d)) == origin(twin(d)).  The vertex
rotation is derived, sigma(d) = next(twin(d)), so face records ARE the map;
planarity is enforced through the per-component Euler characteristic
V - E + F_inner == 1 rather than coordinates.

Every dart-bearing component has exactly one Outer face; isolated vertices
carry an implicit empty outer face.  Inner face boundary words must be
cyclic rotations of relators or their inverses.

Shelling moves (1-cell collapse/expansion, 2-cell collapse, fragmentation)
are local splices on this structure; builder operations used by the diagram
families (attach_cell, fold, glue, lens insertion) live in surgery.py.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .words import Presentation, Word

INNER = 1
OUTER = 2

NONE = -1


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class OneCellCollapse:
    """Remove a spike edge together with its free endpoint origin(dart)."""

    dart: int


@dataclass(frozen=True)
class OneCellExpansion:
    """Cut along the edge of `dart` from its far endpoint head(dart).

    `corner` is a dart y at head(dart); the cut opens at the outer corner
    between y and sigma(y).  head(dart) is doubled; when it is the basepoint,
    star_to_new says which copy keeps it.
    """

    dart: int
    corner: int
    star_to_new: bool = False


@dataclass(frozen=True)
class TwoCellCollapse:
    """Remove the inner face of `dart` along its edge; twin must be outer."""

    dart: int


@dataclass(frozen=True)
class FragmentationMove:
    """Split the diagram at a cut vertex.

    corner1/corner2 are darts at the vertex whose corners lie on the outer
    face; the rotation arc strictly after corner1 up to corner2 moves to a
    new vertex, disconnecting the two parts.
    """

    vertex: int
    corner1: int
    corner2: int


ShellingMove = OneCellCollapse | OneCellExpansion | TwoCellCollapse | FragmentationMove

MODE_BASED = "based"
MODE_FREE = "free"
MODE_FRAGMENTING = "fragmenting"


@dataclass
class Shelling:
    mode: str
    moves: list[ShellingMove] = field(default_factory=list)


@dataclass
class ShellingReplay:
    ok: bool
    max_length: int
    profile: list[int]
    final: "Diagram"
    error_index: int | None = None
    error: str | None = None


@dataclass
class MeasureReport:
    area: int
    boundary_length: int
    idiam_based: int | None
    idiam_pairwise: int


@dataclass
class ValidationReport:
    ok: bool
    errors: list[str]


class Diagram:
    """Mutable combinatorial-map diagram over a presentation."""

    def __init__(self, presentation: Presentation):
        self.p = presentation
        self.twin: list[int] = []
        self.nxt: list[int] = []
        self.prv: list[int] = []
        self.label: list[int] = []
        self.origin: list[int] = []
        self.face: list[int] = []
        self.dart_alive: list[bool] = []
        self.face_kind: list[int] = []  # 0 dead
        self.face_dart: list[int] = []
        self.face_size: list[int] = []
        self.vert_alive: list[bool] = []
        self.basepoint: int | None = None

    # -- allocation ---------------------------------------------------------

    def new_vertex(self) -> int:
        self.vert_alive.append(True)
        return len(self.vert_alive) - 1

    def new_face(self, kind: int) -> int:
        self.face_kind.append(kind)
        self.face_dart.append(NONE)
        self.face_size.append(0)
        return len(self.face_kind) - 1

    def new_dart(self, label: int, origin: int) -> int:
        self.twin.append(NONE)
        self.nxt.append(NONE)
        self.prv.append(NONE)
        self.label.append(label)
        self.origin.append(origin)
        self.face.append(NONE)
        self.dart_alive.append(True)
        return len(self.twin) - 1

    def kill_dart(self, d: int) -> None:
        self.dart_alive[d] = False

    def kill_face(self, f: int) -> None:
        self.face_kind[f] = 0

    def kill_vertex(self, v: int) -> None:
        self.vert_alive[v] = False

    # -- elementary queries --------------------------------------------------

    def head(self, d: int) -> int:
        return self.origin[self.twin[d]]

    def sigma(self, d: int) -> int:
        """Next dart in the rotation at origin(d)."""
        return self.nxt[self.twin[d]]

    def darts(self):
        return (d for d in range(len(self.twin)) if self.dart_alive[d])

    def vertices(self):
        return (v for v in range(len(self.vert_alive)) if self.vert_alive[v])

    def faces(self):
        return (f for f in range(len(self.face_kind)) if self.face_kind[f])

    def face_cycle(self, f: int) -> list[int]:
        start = self.face_dart[f]
        out = [start]
        d = self.nxt[start]
        while d != start:
            out.append(d)
            d = self.nxt[d]
        return out

    def face_word(self, f: int) -> Word:
        return Word(tuple(self.label[d] for d in self.face_cycle(f)))

    def boundary_length(self) -> int:
        return sum(self.face_size[f] for f in self.faces() if self.face_kind[f] == OUTER)

    def vertex_darts(self, v: int) -> list[int]:
        """Rotation at v, in sigma order (empty for isolated vertices)."""
        start = NONE
        for d in self.darts():
            if self.origin[d] == v:
                start = d
                break
        if start == NONE:
            return []
        out = [start]
        d = self.sigma(start)
        while d != start:
            out.append(d)
            d = self.sigma(d)
        return out

    def degree(self, v: int) -> int:
        return sum(1 for d in self.darts() if self.origin[d] == v)

    def copy(self) -> "Diagram":
        d = Diagram(self.p)
        d.twin = self.twin[:]
        d.nxt = self.nxt[:]
        d.prv = self.prv[:]
        d.label = self.label[:]
        d.origin = self.origin[:]
        d.face = self.face[:]
        d.dart_alive = self.dart_alive[:]
        d.face_kind = self.face_kind[:]
        d.face_dart = self.face_dart[:]
        d.face_size = self.face_size[:]
        d.vert_alive = self.vert_alive[:]
        d.basepoint = self.basepoint
        return d

    # -- linking helpers ------------------------------------------------------

    def link(self, a: int, b: int) -> None:
        self.nxt[a] = b
        self.prv[b] = a

    def set_face_run(self, ds, f: int) -> None:
        for d in ds:
            self.face[d] = f

    # -- components ------------------------------------------------------------

    def components(self) -> list[tuple[list[int], list[int]]]:
        """List of (vertices, darts) per component; isolated vertices alone."""
        seen_d: set[int] = set()
        seen_v: set[int] = set()
        comps = []
        for d0 in self.darts():
            if d0 in seen_d:
                continue
            stack = [d0]
            cd: list[int] = []
            cv: set[int] = set()
            seen_d.add(d0)
            while stack:
                d = stack.pop()
                cd.append(d)
                cv.add(self.origin[d])
                for e in (self.twin[d], self.nxt[d]):
                    if e not in seen_d:
                        seen_d.add(e)
                        stack.append(e)
            seen_v |= cv
            comps.append((sorted(cv), sorted(cd)))
        for v in self.vertices():
            if v not in seen_v:
                comps.append(([v], []))
        comps.sort(key=lambda c: (c[0][0] if c[0] else -1))
        return comps

    # -- validation -------------------------------------------------------------

    def validate(self, p: Presentation | None = None) -> ValidationReport:
        p = p or self.p
        errs: list[str] = []
        dead_cap = 40
        for d in self.darts():
            t = self.twin[d]
            if t == d or not self.dart_alive[t] or self.twin[t] != d:
                errs.append(f"dart {d}: twin involution broken")
            elif self.label[t] != -self.label[d]:
                errs.append(f"dart {d}: twin label mismatch")
            if not self.dart_alive[self.nxt[d]] or self.prv[self.nxt[d]] != d:
                errs.append(f"dart {d}: next/prev broken")
            if self.origin[self.nxt[d]] != self.origin[self.twin[d]]:
                errs.append(f"dart {d}: face cycle is not an edge path")
            if not self.vert_alive[self.origin[d]]:
                errs.append(f"dart {d}: dead origin vertex")
            f = self.face[d]
            if f == NONE or not self.face_kind[f]:
                errs.append(f"dart {d}: dead face")
            if len(errs) > dead_cap:
                return ValidationReport(False, errs)
        # face partition: walking each face cycle covers exactly its darts
        assigned: dict[int, int] = {}
        for f in self.faces():
            start = self.face_dart[f]
            if start == NONE or not self.dart_alive[start] or self.face[start] != f:
                errs.append(f"face {f}: bad representative dart")
                continue
            cyc = self.face_cycle(f)
            if len(cyc) != self.face_size[f]:
                errs.append(f"face {f}: size {self.face_size[f]} != cycle length {len(cyc)}")
            for d in cyc:
                if self.face[d] != f or d in assigned:
                    errs.append(f"face {f}: dart {d} not exclusively on this face")
                assigned[d] = f
        for d in self.darts():
            if d not in assigned:
                errs.append(f"dart {d}: not on any face cycle")
        if errs:
            return ValidationReport(False, errs)
        # inner faces spell relator rotations
        for f in self.faces():
            if self.face_kind[f] == INNER and self.face_word(f) not in p.rotation_set:
                errs.append(f"face {f}: boundary word {p.render(self.face_word(f))!r} is not a relator rotation")
        # outer-face count and Euler characteristic per component
        for verts, darts in self.components():
            if not darts:
                continue
            outer = {self.face[d] for d in darts if self.face_kind[self.face[d]] == OUTER}
            inner = {self.face[d] for d in darts if self.face_kind[self.face[d]] == INNER}
            if len(outer) != 1:
                errs.append(f"component at vertex {verts[0]}: {len(outer)} outer faces")
            chi = len(verts) - len(darts) // 2 + len(inner)
            if chi != 1:
                errs.append(f"component at vertex {verts[0]}: V-E+F_inner = {chi} != 1 (not a disc)")
        if self.basepoint is not None:
            if not self.vert_alive[self.basepoint]:
                errs.append("basepoint is a dead vertex")
            else:
                on_outer = any(
                    self.origin[d] == self.basepoint and self.face_kind[self.face[d]] == OUTER for d in self.darts()
                )
                if not on_outer and self.degree(self.basepoint) > 0:
                    errs.append("basepoint not on an outer face")
        return ValidationReport(not errs, errs)

    # -- boundary word, measurements ----------------------------------------------

    def outer_dart_at(self, v: int) -> int:
        """Smallest outer-face dart with origin v (NONE if none)."""
        best = NONE
        for d in self.darts():
            if self.origin[d] == v and self.face_kind[self.face[d]] == OUTER:
                if best == NONE or d < best:
                    best = d
        return best

    def boundary_word(self, start_vertex: int | None = None, start_dart: int | None = None) -> Word:
        """Word along the outer face cycle from a vertex (or explicit dart)."""
        if start_dart is None:
            if start_vertex is None:
                if self.basepoint is None:
                    raise DiagramError("no start vertex given and no basepoint")
                start_vertex = self.basepoint
            start_dart = self.outer_dart_at(start_vertex)
            if start_dart == NONE:
                if self.degree(start_vertex) == 0:
                    return Word()
                raise DiagramError(f"vertex {start_vertex} is not on an outer face")
        out = [self.label[start_dart]]
        d = self.nxt[start_dart]
        while d != start_dart:
            out.append(self.label[d])
            d = self.nxt[d]
        return Word(out)

    def measure(self) -> MeasureReport:
        area = sum(1 for f in self.faces() if self.face_kind[f] == INNER)
        adj: dict[int, list[int]] = {v: [] for v in self.vertices()}
        for d in self.darts():
            adj[self.origin[d]].append(self.head(d))
        based = None
        if self.basepoint is not None:
            based = max(_bfs_dist(adj, self.basepoint).values(), default=0)
        pairwise = 0
        for v in self.vertices():
            ecc = max(_bfs_dist(adj, v).values(), default=0)
            pairwise = max(pairwise, ecc)
        return MeasureReport(area, self.boundary_length(), based, pairwise)

    def eccentricity(self, v: int) -> int:
        adj: dict[int, list[int]] = {u: [] for u in self.vertices()}
        for d in self.darts():
            adj[self.origin[d]].append(self.head(d))
        return max(_bfs_dist(adj, v).values(), default=0)

    # -- shelling moves ---------------------------------------------------------

    def spike_candidates(self):
        """Darts d with origin a degree-1 vertex on an outer face."""
        for d in self.darts():
            if self.nxt[self.twin[d]] == d and self.face_kind[self.face[d]] == OUTER:
                yield d

    def is_spike(self, d: int) -> bool:
        return (
            self.dart_alive[d]
            and self.nxt[self.twin[d]] == d
            and self.face_kind[self.face[d]] == OUTER
        )

    def apply(self, m: ShellingMove) -> None:
        """Apply a shelling move in place.  Raises DiagramError when illegal."""
        if isinstance(m, OneCellCollapse):
            self._one_cell_collapse(m.dart)
        elif isinstance(m, TwoCellCollapse):
            self._two_cell_collapse(m.dart)
        elif isinstance(m, OneCellExpansion):
            self._one_cell_expansion(m.dart, m.corner, m.star_to_new)
        elif isinstance(m, FragmentationMove):
            self._fragment(m.vertex, m.corner1, m.corner2)
        else:  # pragma: no cover
            raise DiagramError(f"unknown move {m!r}")

    def _one_cell_collapse(self, d0: int) -> None:
        if not (0 <= d0 < len(self.twin)) or not self.dart_alive[d0]:
            raise DiagramError(f"1-cell collapse: dead dart {d0}")
        din = self.twin[d0]
        if self.nxt[din] != d0:
            raise DiagramError(f"1-cell collapse: dart {d0} is not a spike (origin degree != 1)")
        f = self.face[d0]
        if self.face_kind[f] != OUTER:
            raise DiagramError("1-cell collapse: spike not on an outer face")
        e0 = self.origin[d0]
        p, n = self.prv[din], self.nxt[d0]
        if p == d0:  # lone edge component
            self.kill_face(f)
        else:
            self.link(p, n)
            self.face_size[f] -= 2
            if self.face_dart[f] in (d0, din):
                self.face_dart[f] = p
        self.kill_dart(d0)
        self.kill_dart(din)
        self.kill_vertex(e0)

    def _two_cell_collapse(self, din: int) -> None:
        if not (0 <= din < len(self.twin)) or not self.dart_alive[din]:
            raise DiagramError(f"2-cell collapse: dead dart {din}")
        f = self.face[din]
        dout = self.twin[din]
        o = self.face[dout]
        if self.face_kind[f] != INNER:
            raise DiagramError("2-cell collapse: dart's face is not inner")
        if self.face_kind[o] != OUTER:
            raise DiagramError("2-cell collapse: edge is not on the boundary")
        k = self.face_size[f] - 1
        p, n = self.prv[dout], self.nxt[dout]
        if k == 0:
            if p == dout:
                self.kill_face(o)
            else:
                self.link(p, n)
                self.face_size[o] -= 1
                if self.face_dart[o] == dout:
                    self.face_dart[o] = p
        else:
            c1, ck = self.nxt[din], self.prv[din]
            if p == dout:  # outer face was just this edge
                self.link(ck, c1)
            else:
                self.link(p, c1)
                self.link(ck, n)
            d = c1
            while True:
                self.face[d] = o
                if d == ck:
                    break
                d = self.nxt[d]
            self.face_size[o] += k - 1
            self.face_dart[o] = c1
        self.kill_face(f)
        self.kill_dart(din)
        self.kill_dart(dout)

    def _one_cell_expansion(self, d: int, y: int, star_to_new: bool) -> None:
        if not self.dart_alive[d] or not self.dart_alive[y]:
            raise DiagramError("1-cell expansion: dead dart")
        e0 = self.head(d)
        if self.origin[y] != e0:
            raise DiagramError("1-cell expansion: corner dart not at the far endpoint")
        o = self.face[self.twin[y]]
        if self.face_kind[o] != OUTER:
            raise DiagramError("1-cell expansion: corner is not on an outer face")
        dp = self.twin[d]
        u = self.origin[d]
        # collect the rotation arc sigma(dp)..y (the beta side, moved to the new vertex)
        arc = []
        if y != dp:
            z = self.sigma(dp)
            while True:
                arc.append(z)
                if z == y:
                    break
                z = self.sigma(z)
                if len(arc) > len(self.twin):  # pragma: no cover
                    raise DiagramError("1-cell expansion: corner not in rotation at far endpoint")
        b = self.new_vertex()
        d_alpha = self.new_dart(self.label[d], u)
        d_beta = self.new_dart(-self.label[d], b)
        ty = self.twin[y]
        w = self.nxt[ty]  # sigma(y), already on the outer face o
        for z in arc:
            self.origin[z] = b
        # retwin: edge alpha = (d_alpha, dp stays at e0); edge beta = (d, d_beta)
        self.twin[d] = d_beta
        self.twin[d_beta] = d
        self.twin[dp] = d_alpha
        self.twin[d_alpha] = dp
        self.face[d_alpha] = o
        self.face[d_beta] = o
        self.link(ty, d_beta)
        self.link(d_beta, d_alpha)
        self.link(d_alpha, w)
        self.face_size[o] += 2
        if self.basepoint == e0 and star_to_new:
            self.basepoint = b

    def _fragment(self, v: int, y1: int, y2: int) -> None:
        if not self.vert_alive[v]:
            raise DiagramError("fragmentation: dead vertex")
        if y1 == y2:
            raise DiagramError("fragmentation: corners must differ")
        for y in (y1, y2):
            if not self.dart_alive[y] or self.origin[y] != v:
                raise DiagramError("fragmentation: corner dart not at the vertex")
            if self.face_kind[self.face[self.twin[y]]] != OUTER:
                raise DiagramError("fragmentation: corner not on the outer face")
        o = self.face[self.twin[y1]]
        if self.face[self.twin[y2]] != o:
            raise DiagramError("fragmentation: corners on different outer faces")
        arc = []
        z = self.sigma(y1)
        while True:
            arc.append(z)
            if z == y2:
                break
            z = self.sigma(z)
            if len(arc) > len(self.twin):  # pragma: no cover
                raise DiagramError("fragmentation: corners not at the same rotation")
        v2 = self.new_vertex()
        for z in arc:
            self.origin[z] = v2
        t1, t2 = self.twin[y1], self.twin[y2]
        s1, s2 = self.nxt[t1], self.nxt[t2]  # sigma(y1), sigma(y2)
        self.link(t2, s1)
        self.link(t1, s2)
        # darts now reachable from s1 form the split-off outer cycle
        f2 = self.new_face(OUTER)
        d = s1
        size = 0
        while True:
            self.face[d] = f2
            size += 1
            d = self.nxt[d]
            if d == s1:
                break
        self.face_dart[f2] = s1
        self.face_size[f2] = size
        self.face_size[o] -= size
        if self.face[self.face_dart[o]] != o:
            self.face_dart[o] = t1

    # -- effect summaries used by replay ---------------------------------------

    def move_is_relator(self, m: ShellingMove) -> bool:
        return isinstance(m, TwoCellCollapse)


def _bfs_dist(adj: dict[int, list[int]], src: int) -> dict[int, int]:
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def validate(d: Diagram, p: Presentation | None = None) -> ValidationReport:
    return d.validate(p)


def boundary_word(d: Diagram, start_vertex: int) -> Word:
    return d.boundary_word(start_vertex)


def measure(d: Diagram) -> MeasureReport:
    return d.measure()


def apply_shelling_move(d: Diagram, m: ShellingMove) -> Diagram:
    """Pure version: returns a modified copy (the original is untouched)."""
    out = d.copy()
    out.apply(m)
    return out


def replay_shelling(d: Diagram, s: Shelling) -> ShellingReplay:
    """Apply the moves on a copy, checking legality and mode constraints."""
    cur = d.copy()
    blen = cur.boundary_length()
    profile = [blen]
    star = cur.basepoint
    for i, m in enumerate(s.moves):
        try:
            if s.mode == MODE_BASED:
                if isinstance(m, FragmentationMove):
                    raise DiagramError("based shelling cannot fragment")
                if isinstance(m, OneCellCollapse) and cur.origin[m.dart] == star:
                    raise DiagramError("based shelling cannot collapse the basepoint")
            if s.mode in (MODE_BASED, MODE_FREE) and isinstance(m, FragmentationMove):
                raise DiagramError("fragmentation not allowed in this mode")
            if isinstance(m, OneCellCollapse):
                delta = -2
            elif isinstance(m, OneCellExpansion):
                delta = 2
            elif isinstance(m, TwoCellCollapse):
                delta = cur.face_size[cur.face[m.dart]] - 2 if cur.dart_alive[m.dart] else 0
            else:
                delta = 0
            cur.apply(m)
        except DiagramError as e:
            return ShellingReplay(False, max(profile), profile, cur, i, str(e))
        blen += delta
        profile.append(blen)
    ndarts = sum(1 for _ in cur.darts())
    nverts = sum(1 for _ in cur.vertices())
    if ndarts:
        return ShellingReplay(False, max(profile), profile, cur, None, "darts remain after shelling")
    if s.mode in (MODE_BASED, MODE_FREE) and nverts != 1:
        return ShellingReplay(False, max(profile), profile, cur, None, "final state is not a single vertex")
    if s.mode == MODE_BASED and star is not None and not cur.vert_alive[star]:
        return ShellingReplay(False, max(profile), profile, cur, None, "basepoint did not survive")
    return ShellingReplay(True, max(profile), profile, cur)


# -- serialization ---------------------------------------------------------------


def serialize(d: Diagram) -> bytes:
    """Text interchange: PRES hash, V count, E/F records, optional BASE."""
    verts = sorted(d.vertices())
    vmap = {v: i for i, v in enumerate(verts)}
    pos_darts = sorted(dd for dd in d.darts() if d.label[dd] > 0)
    emap: dict[int, tuple[int, bool]] = {}
    lines = [f"PRES {d.p.digest()}", f"V {len(verts)}"]
    for i, dd in enumerate(pos_darts):
        emap[dd] = (i, True)
        emap[d.twin[dd]] = (i, False)
        gen = d.p.generator_of(d.label[dd]).name
        lines.append(f"E {i} {vmap[d.origin[dd]]} {vmap[d.head(dd)]} {gen}")
    fids = sorted(d.faces(), key=lambda f: min(d.face_cycle(f)))
    for i, f in enumerate(fids):
        cyc = d.face_cycle(f)
        k = cyc.index(min(cyc))
        cyc = cyc[k:] + cyc[:k]
        refs = ",".join(f"{emap[dd][0]}{'+' if emap[dd][1] else '-'}" for dd in cyc)
        kind = "inner" if d.face_kind[f] == INNER else "outer"
        lines.append(f"F {i} {kind} {refs}")
    if d.basepoint is not None:
        lines.append(f"BASE {vmap[d.basepoint]}")
    return ("\n".join(lines) + "\n").encode()


def deserialize(data: bytes, p: Presentation) -> Diagram:
    d = Diagram(p)
    edges: dict[int, tuple[int, int]] = {}  # edge id -> (pos dart, neg dart)
    nverts = 0
    face_specs: list[tuple[int, list[tuple[int, bool]]]] = []
    base: int | None = None
    for lineno, raw in enumerate(data.decode().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "PRES":
                if parts[1] != p.digest():
                    raise DiagramError(f"line {lineno}: presentation hash mismatch")
            elif parts[0] == "V":
                nverts = int(parts[1])
                for _ in range(nverts):
                    d.new_vertex()
            elif parts[0] == "E":
                eid, src, dst, gen = int(parts[1]), int(parts[2]), int(parts[3]), parts[4]
                if src >= nverts or dst >= nverts:
                    raise DiagramError(f"line {lineno}: vertex out of range")
                letter = p.letter(gen)
                dp = d.new_dart(letter, src)
                dn = d.new_dart(-letter, dst)
                d.twin[dp] = dn
                d.twin[dn] = dp
                edges[eid] = (dp, dn)
            elif parts[0] == "F":
                kind = INNER if parts[2] == "inner" else OUTER
                refs = []
                for tok in parts[3].split(","):
                    sign = tok[-1]
                    refs.append((int(tok[:-1]), sign == "+"))
                face_specs.append((kind, refs))
            elif parts[0] == "BASE":
                base = int(parts[1])
            else:
                raise DiagramError(f"line {lineno}: unknown record {parts[0]!r}")
        except (IndexError, ValueError) as e:
            raise DiagramError(f"line {lineno}: {e}") from None
    for kind, refs in face_specs:
        f = d.new_face(kind)
        ds = []
        for eid, positive in refs:
            if eid not in edges:
                raise DiagramError(f"face references unknown edge {eid}")
            dp, dn = edges[eid]
            ds.append(dp if positive else dn)
        for a, b in zip(ds, ds[1:] + ds[:1]):
            d.link(a, b)
        for dd in ds:
            d.face[dd] = f
        d.face_dart[f] = ds[0]
        d.face_size[f] = len(ds)
    if base is not None:
        d.basepoint = base
    rep = d.validate()
    if not rep.ok:
        raise DiagramError("deserialized diagram invalid: " + "; ".join(rep.errors[:3]))
    return d
