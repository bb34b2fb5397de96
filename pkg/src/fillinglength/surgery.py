"""Construction surgery on diagrams.

These are the inverse-shelling builders: attaching a 2-cell along a boundary
arc (inverse of 2-cell collapse), attaching a spike (inverse of 1-cell
collapse), folding two adjacent boundary edges together (inverse of 1-cell
expansion), plus component-level operations: absorbing another diagram,
gluing two components along boundary arcs, mirroring, and splicing a lens
into an interior path.  Every operation preserves diagram validity; the test
suite re-validates after each call on the small fixtures.
"""

from __future__ import annotations

from .diagram import INNER, NONE, OUTER, Diagram, DiagramError
from .words import Presentation, Word, invert


def singleton_diagram(p: Presentation) -> Diagram:
    d = Diagram(p)
    v = d.new_vertex()
    d.basepoint = v
    return d


def path_diagram(p: Presentation, w: Word) -> Diagram:
    """A simple path spelling w; basepoint at its start; boundary w * w^-1."""
    d = Diagram(p)
    verts = [d.new_vertex() for _ in range(len(w) + 1)]
    d.basepoint = verts[0]
    if not w:
        return d
    f = d.new_face(OUTER)
    fwd = []
    bwd = []
    for i, x in enumerate(w):
        a = d.new_dart(x, verts[i])
        b = d.new_dart(-x, verts[i + 1])
        d.twin[a] = b
        d.twin[b] = a
        d.face[a] = f
        d.face[b] = f
        fwd.append(a)
        bwd.append(b)
    cycle = fwd + bwd[::-1]
    for x, y in zip(cycle, cycle[1:] + cycle[:1]):
        d.link(x, y)
    d.face_dart[f] = fwd[0]
    d.face_size[f] = len(cycle)
    return d


def attach_cell(d: Diagram, gdarts: list[int], rho: Word) -> tuple[int, list[int]]:
    """Glue a new 2-cell with boundary word rho along consecutive outer darts.

    gdarts g_1..g_m must be consecutive on one outer face and spell
    rho[:m].  Replaces them on the boundary by invert(rho[m:]).  Returns
    (face id, outer darts of the new arc in circuit order).
    """
    m = len(gdarts)
    if rho not in d.p.rotation_set:
        raise DiagramError(f"attach_cell: {d.p.render(rho)!r} is not a relator rotation")
    if m == 0:
        raise DiagramError("attach_cell: need at least one boundary dart (use attach_cell_at)")
    o = d.face[gdarts[0]]
    if d.face_kind[o] != OUTER:
        raise DiagramError("attach_cell: darts not on an outer face")
    for i, g in enumerate(gdarts):
        if d.label[g] != rho[i]:
            raise DiagramError("attach_cell: boundary labels do not match the relator prefix")
        if i and d.nxt[gdarts[i - 1]] != g:
            raise DiagramError("attach_cell: darts not consecutive")
    k = len(rho) - m
    if k == 0 and d.face_size[o] <= m:
        raise DiagramError("attach_cell: would close the boundary into a sphere")
    p0, n0 = d.prv[gdarts[0]], d.nxt[gdarts[-1]]
    f = d.new_face(INNER)
    hs: list[int] = []
    hhats: list[int] = []
    if k:
        w_prev = d.head(gdarts[-1])
        v_first = d.origin[gdarts[0]]
        for i in range(k):
            w_next = d.new_vertex() if i < k - 1 else v_first
            h = d.new_dart(rho[m + i], w_prev)
            hh = d.new_dart(-rho[m + i], w_next)
            d.twin[h] = hh
            d.twin[hh] = h
            hs.append(h)
            hhats.append(hh)
            w_prev = w_next
    # inner face cycle
    cell = gdarts + hs
    for x, y in zip(cell, cell[1:] + cell[:1]):
        d.link(x, y)
    d.set_face_run(cell, f)
    d.face_dart[f] = cell[0]
    d.face_size[f] = len(cell)
    # outer splice: replace the g-run by reversed twins of the new darts
    new_run = hhats[::-1]
    if p0 in gdarts:  # outer face was exactly the g-run
        if not new_run:
            raise DiagramError("attach_cell: would close the boundary into a sphere")
        for x, y in zip(new_run, new_run[1:] + new_run[:1]):
            d.link(x, y)
    else:
        seq = [p0] + new_run + [n0]
        for x, y in zip(seq, seq[1:]):
            d.link(x, y)
    d.set_face_run(new_run, o)
    d.face_size[o] += k - m
    d.face_dart[o] = new_run[0] if new_run else n0
    return f, new_run


def attach_cell_at(d: Diagram, after: int, rho: Word) -> tuple[int, list[int]]:
    """Glue a 2-cell at a single boundary vertex (head of `after`).

    The cell hangs like a balloon: the boundary gains invert(rho) right
    after `after`.  Returns (face id, new outer darts in circuit order).
    """
    if rho not in d.p.rotation_set:
        raise DiagramError(f"attach_cell_at: {d.p.render(rho)!r} is not a relator rotation")
    o = d.face[after]
    if d.face_kind[o] != OUTER:
        raise DiagramError("attach_cell_at: dart not on an outer face")
    v = d.head(after)
    n0 = d.nxt[after]
    k = len(rho)
    f = d.new_face(INNER)
    hs: list[int] = []
    hhats: list[int] = []
    w_prev = v
    for i in range(k):
        w_next = d.new_vertex() if i < k - 1 else v
        h = d.new_dart(rho[i], w_prev)
        hh = d.new_dart(-rho[i], w_next)
        d.twin[h] = hh
        d.twin[hh] = h
        hs.append(h)
        hhats.append(hh)
        w_prev = w_next
    for x, y in zip(hs, hs[1:] + hs[:1]):
        d.link(x, y)
    d.set_face_run(hs, f)
    d.face_dart[f] = hs[0]
    d.face_size[f] = k
    new_run = hhats[::-1]
    seq = [after] + new_run + [n0]
    for x, y in zip(seq, seq[1:]):
        d.link(x, y)
    d.set_face_run(new_run, o)
    d.face_size[o] += k
    return f, new_run


def attach_spike(d: Diagram, after: int, letter: int) -> int:
    """Hang a new edge at head(after); boundary gains (letter, -letter)."""
    o = d.face[after]
    if d.face_kind[o] != OUTER:
        raise DiagramError("attach_spike: dart not on an outer face")
    v = d.head(after)
    u = d.new_vertex()
    h = d.new_dart(letter, v)
    hh = d.new_dart(-letter, u)
    d.twin[h] = hh
    d.twin[hh] = h
    n0 = d.nxt[after]
    for x, y in zip([after, h, hh, n0], [h, hh, n0, None][:-1]):
        d.link(x, y)
    d.face[h] = o
    d.face[hh] = o
    d.face_size[o] += 2
    return h


def fold(d: Diagram, z: int) -> None:
    """Fold boundary darts (z, next(z)) together; they must spell x x^-1.

    The two edges are identified and leave the boundary (a free reduction of
    the boundary word); the far endpoints merge.  Inverse of 1-cell
    expansion.
    """
    o = d.face[z]
    if d.face_kind[o] != OUTER:
        raise DiagramError("fold: dart not on an outer face")
    w = d.nxt[z]
    if d.label[w] != -d.label[z]:
        raise DiagramError("fold: labels are not an inverse pair")
    if d.twin[z] == w:
        raise DiagramError("fold: cannot fold a spike onto itself")
    x = d.origin[z]
    y = d.head(w)
    if x == y:
        raise DiagramError("fold: endpoints coincide (would pinch off a sphere)")
    zt, wt = d.twin[z], d.twin[w]
    p, q = d.prv[z], d.nxt[w]
    if p == w:
        raise DiagramError("fold: outer face has only these two darts")
    y_darts = [dd for dd in d.darts() if d.origin[dd] == y]
    for dd in y_darts:
        d.origin[dd] = x
    d.twin[zt] = wt
    d.twin[wt] = zt
    d.link(p, q)
    d.face_size[o] -= 2
    if d.face_dart[o] in (z, w):
        d.face_dart[o] = p
    d.kill_dart(z)
    d.kill_dart(w)
    if d.basepoint == y:
        d.basepoint = x
    d.kill_vertex(y)


def absorb(d: Diagram, other: Diagram) -> tuple[dict[int, int], dict[int, int], dict[int, int]]:
    """Copy another diagram (same presentation) in as new components.

    Returns (dart map, vertex map, face map) from other's ids to d's.
    """
    if other.p != d.p:
        raise DiagramError("absorb: presentations differ")
    dv = len(d.vert_alive)
    dd = len(d.twin)
    df = len(d.face_kind)
    vmap = {v: v + dv for v in range(len(other.vert_alive))}
    dmap = {x: x + dd for x in range(len(other.twin))}
    fmap = {f: f + df for f in range(len(other.face_kind))}
    d.vert_alive.extend(other.vert_alive)
    d.twin.extend(x + dd if x != NONE else NONE for x in other.twin)
    d.nxt.extend(x + dd if x != NONE else NONE for x in other.nxt)
    d.prv.extend(x + dd if x != NONE else NONE for x in other.prv)
    d.label.extend(other.label)
    d.origin.extend(v + dv if v != NONE else NONE for v in other.origin)
    d.face.extend(f + df if f != NONE else NONE for f in other.face)
    d.dart_alive.extend(other.dart_alive)
    d.face_kind.extend(other.face_kind)
    d.face_dart.extend(x + dd if x != NONE else NONE for x in other.face_dart)
    d.face_size.extend(other.face_size)
    return dmap, vmap, fmap


def glue_arcs(d: Diagram, arc_a: list[int], arc_b: list[int]) -> None:
    """Glue two boundary arcs of different components edge-for-edge.

    arc_a = g_1..g_L consecutive along its outer face; arc_b = h_1..h_L with
    h_i the dart matching g_i, consecutive in the reverse direction
    (next(h_{i+1}) == h_i) and label(h_i) == -label(g_i).  Both outer faces
    must be strictly longer than the arcs.
    """
    L = len(arc_a)
    if L == 0 or len(arc_b) != L:
        raise DiagramError("glue_arcs: arcs must be nonempty and equal length")
    oa, ob = d.face[arc_a[0]], d.face[arc_b[0]]
    if d.face_kind[oa] != OUTER or d.face_kind[ob] != OUTER or oa == ob:
        raise DiagramError("glue_arcs: arcs must lie on two distinct outer faces")
    if d.face_size[oa] <= L or d.face_size[ob] <= L:
        raise DiagramError("glue_arcs: arc covers a whole boundary")
    for i in range(L):
        if d.label[arc_b[i]] != -d.label[arc_a[i]]:
            raise DiagramError(f"glue_arcs: label mismatch at {i}")
        if i:
            if d.nxt[arc_a[i - 1]] != arc_a[i]:
                raise DiagramError("glue_arcs: arc A not consecutive")
            if d.nxt[arc_b[i]] != arc_b[i - 1]:
                raise DiagramError("glue_arcs: arc B not reverse-consecutive")
    # vertex pairing: b_i merges into a_i
    a_path = [d.origin[arc_a[0]]] + [d.head(g) for g in arc_a]
    b_path = [d.head(arc_b[0])] + [d.origin[h] for h in arc_b]
    merges: dict[int, int] = {}
    for ai, bi in zip(a_path, b_path):
        merges[bi] = ai
    moved = [dd for dd in d.darts() if d.origin[dd] in merges]
    P, Q = d.prv[arc_a[0]], d.nxt[arc_a[-1]]
    S, R = d.nxt[arc_b[0]], d.prv[arc_b[-1]]
    for dd in moved:
        d.origin[dd] = merges[d.origin[dd]]
    for g, h in zip(arc_a, arc_b):
        gt, ht = d.twin[g], d.twin[h]
        d.twin[gt] = ht
        d.twin[ht] = gt
        d.kill_dart(g)
        d.kill_dart(h)
    d.link(P, S)
    d.link(R, Q)
    # merge outer faces as oa
    size = 0
    dd = P
    while True:
        d.face[dd] = oa
        size += 1
        dd = d.nxt[dd]
        if dd == P:
            break
    d.face_dart[oa] = P
    d.face_size[oa] = size
    d.kill_face(ob)
    if d.basepoint in merges:
        d.basepoint = merges[d.basepoint]
    for v in merges:
        d.kill_vertex(v)


def mirror(d: Diagram) -> Diagram:
    """The reflected diagram: same darts, reversed traversal.

    Face boundary words become their inverses, which are again relator
    rotations, so validity is preserved.
    """
    m = d.copy()
    for dd in d.darts():
        m.nxt[dd] = d.twin[d.prv[d.twin[dd]]]
    for dd in d.darts():
        m.prv[m.nxt[dd]] = dd
    # recompute faces: the new face of dart dd is the old face of twin(dd)
    for f in range(len(m.face_kind)):
        m.face_kind[f] = 0
    seen: set[int] = set()
    for dd in sorted(m.darts()):
        if dd in seen:
            continue
        kind = d.face_kind[d.face[d.twin[dd]]]
        f = m.new_face(kind)
        cyc = [dd]
        seen.add(dd)
        e = m.nxt[dd]
        while e != dd:
            cyc.append(e)
            seen.add(e)
            e = m.nxt[e]
        for e in cyc:
            m.face[e] = f
        m.face_dart[f] = dd
        m.face_size[f] = len(cyc)
    return m


def insert_lens(d: Diagram, path: list[int], lens_first: int) -> None:
    """Cut the interior edge path open and sew in a lens component.

    path = p_1..p_k, consecutive darts of an interior edge path.  The lens
    (already absorbed as a separate component) has outer cycle
    q_1..q_k r_1..r_k where label(q_i) == label(p_i) (side 1, aligned with
    the path) and r_j traverses side 2 backwards; lens_first = q_1.  The
    path doubles; side 1 sews to the left copy, side 2 to the right.
    """
    k = len(path)
    if k == 0:
        raise DiagramError("insert_lens: empty path")
    for i in range(k - 1):
        if d.head(path[i]) != d.origin[path[i + 1]]:
            raise DiagramError("insert_lens: darts do not form a path")
    lo = d.face[lens_first]
    if d.face_kind[lo] != OUTER or d.face_size[lo] != 2 * k:
        raise DiagramError("insert_lens: lens boundary must have exactly 2k darts")
    cyc = [lens_first]
    e = d.nxt[lens_first]
    while e != lens_first:
        cyc.append(e)
        e = d.nxt[e]
    q = cyc[:k]
    r = cyc[k:]
    for i in range(k):
        if d.label[q[i]] != d.label[path[i]]:
            raise DiagramError("insert_lens: side-1 labels do not match the path")
        if d.label[r[i]] != -d.label[path[k - 1 - i]]:
            raise DiagramError("insert_lens: side-2 labels do not match the path")
    v = [d.origin[path[0]]] + [d.head(pd) for pd in path]
    phats = [d.twin[pd] for pd in path]
    # pre-collect rotation arcs at interior path vertices (B side: after p_{i+1} up to phat_i)
    b_arcs: list[list[int]] = []
    for i in range(1, k):
        arc = []
        z = d.sigma(path[i])
        while z != path[i]:
            arc.append(z)
            if z == phats[i - 1]:
                break
            z = d.sigma(z)
        else:  # pragma: no cover
            raise DiagramError("insert_lens: path darts not at a common vertex")
        if arc[-1] != phats[i - 1]:
            raise DiagramError("insert_lens: rotation at path vertex malformed")
        b_arcs.append(arc)
    # lens vertices to merge
    side1_verts = [d.origin[q[0]]] + [d.head(qq) for qq in q]  # T0, L_1..L_{k-1}, Tk
    side2_heads = [d.head(rr) for rr in r]  # N_k .. N_1 order: head(r_j); N_i = head(r_{k+1-i})
    # do the splits
    new_b = [d.new_vertex() for _ in range(k - 1)]
    for i in range(1, k):
        for z in b_arcs[i - 1]:
            d.origin[z] = new_b[i - 1]
    # merges: side 1 interior -> v_i ; tips -> v_0, v_k ; side 2 -> B copies / tips
    merge: dict[int, int] = {}
    merge[side1_verts[0]] = v[0]
    merge[side1_verts[k]] = v[k]
    for i in range(1, k):
        merge[side1_verts[i]] = v[i]
    for i in range(1, k + 1):
        n_i = side2_heads[k - i]  # head(r_{k+1-i})
        target = v[0] if i == 1 else new_b[i - 2]
        merge[n_i] = target
    for dd in d.darts():
        if d.origin[dd] in merge:
            d.origin[dd] = merge[d.origin[dd]]
    # retwin: edge A_i = (p_i, twin(q_i)); edge B_i = (phat_i, twin(r_{k+1-i}))
    for i in range(k):
        qt = d.twin[q[i]]
        rt = d.twin[r[k - 1 - i]]
        d.twin[path[i]] = qt
        d.twin[qt] = path[i]
        d.twin[phats[i]] = rt
        d.twin[rt] = phats[i]
    for dd in q + r:
        d.kill_dart(dd)
    d.kill_face(lo)
    for w in merge:
        if w not in (v[0], v[k]):
            d.kill_vertex(w)
