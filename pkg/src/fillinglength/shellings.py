"""Shelling generation, optimal shelling search, and the bridge to null-sequences.

Scripts for the diagram families are generated by two executors:

* reverse_build_shelling replays a recorded construction log backwards —
  every attach becomes a 2-cell collapse plus spike collapses, every fold a
  1-cell expansion.  Spike collapses blocked by the basepoint are deferred
  and retried, which leaves a short basepoint stalk that clears at the end.

* scheduled_shelling consumes per-region queues of 2-cell collapse intents,
  draining spikes greedily; a queue's head fires as soon as its edge is
  exposed.  Windowed queue groups keep layered diagrams shelling layer by
  layer.

search_min_shelling is a memoised branch-and-bound over canonically hashed
diagram states; expansions are capped per branch (default: the area), so
reported minima are exact over expansion-bounded shellings.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product

from .diagram import (
    INNER,
    MODE_BASED,
    MODE_FRAGMENTING,
    MODE_FREE,
    NONE,
    OUTER,
    Diagram,
    DiagramError,
    FragmentationMove,
    OneCellCollapse,
    OneCellExpansion,
    Shelling,
    ShellingMove,
    TwoCellCollapse,
)
from .rewrite import (
    CyclicConjugation,
    Fragmentation,
    FreeExpansion,
    FreeReduction,
    NullSequence,
    RelatorApplication,
    Status,
)
from .surgery import attach_cell, attach_cell_at, attach_spike, fold, path_diagram, singleton_diagram
from .words import Presentation, Word, free_reduce, invert


# ---------------------------------------------------------------------------
# build logs and the reverse-build executor
# ---------------------------------------------------------------------------


@dataclass
class BuildLog:
    """Construction history of a diagram, enough to run the build backwards."""

    ops: list[tuple] = field(default_factory=list)

    def attach(self, gdarts: list[int], new_run: list[int], h_last: int):
        self.ops.append(("attach", tuple(gdarts), tuple(new_run), h_last))

    def spike(self, h: int):
        self.ops.append(("spike", h))

    def fold(self, kept_dart: int, corner: int, star_was_far: bool = False):
        self.ops.append(("fold", kept_dart, corner, star_was_far))

    def seed(self):
        self.ops.append(("seed",))


class _Drainer:
    """Worklist spike collapser; defers spikes whose free end is the basepoint."""

    def __init__(self, d: Diagram, star: int | None, moves: list[ShellingMove]):
        self.d = d
        self.star = star
        self.moves = moves
        self.deferred: set[int] = set()

    def offer(self, darts) -> None:
        d = self.d
        work = deque(darts)
        while work:
            x = work.popleft()
            if not (0 <= x < len(d.twin)) or not d.dart_alive[x]:
                continue
            cand = None
            for y in (x, d.twin[x]):
                if d.is_spike(y):
                    if self.star is not None and d.origin[y] == self.star:
                        self.deferred.add(y)
                    else:
                        cand = y
                        break
            if cand is None:
                continue
            din = d.twin[cand]
            p, n = d.prv[din], d.nxt[cand]
            self.moves.append(OneCellCollapse(cand))
            d.apply(self.moves[-1])
            for y in (p, n):
                work.append(y)

    def retry_deferred(self) -> None:
        while self.deferred:
            pending = [x for x in self.deferred if self.d.dart_alive[x]]
            self.deferred.clear()
            before = len(self.moves)
            self.offer(pending)
            if len(self.moves) == before:
                return


def reverse_build_shelling(d: Diagram, log: BuildLog, mode: str = MODE_BASED) -> Shelling:
    """Run the build log backwards on a copy, emitting the move list."""
    cur = d.copy()
    star = cur.basepoint if mode == MODE_BASED else None
    moves: list[ShellingMove] = []
    drain = _Drainer(cur, star, moves)
    for op in reversed(log.ops):
        kind = op[0]
        if kind == "attach":
            _, gdarts, new_run, h_last = op
            m = TwoCellCollapse(h_last)
            moves.append(m)
            cur.apply(m)
            drain.offer(list(gdarts) + list(new_run))
            drain.retry_deferred()
        elif kind == "spike":
            h = op[1]
            if cur.dart_alive[h]:
                m = OneCellCollapse(cur.twin[h])
                moves.append(m)
                cur.apply(m)
        elif kind == "fold":
            _, kept, corner, star_was_far = op
            m = OneCellExpansion(kept, corner, star_was_far)
            moves.append(m)
            cur.apply(m)
        elif kind == "seed":
            drain.offer(list(cur.darts()))
            drain.retry_deferred()
        else:  # pragma: no cover
            raise DiagramError(f"unknown build op {kind}")
    drain.offer(list(cur.darts()))
    drain.retry_deferred()
    return Shelling(mode, moves)


def scheduled_shelling(
    d: Diagram,
    queues: list[deque],
    mode: str = MODE_FREE,
    windows: list[list[deque]] | None = None,
) -> Shelling:
    """Greedy executor over 2-cell collapse intents (darts, inner side).

    Queues in `windows` are grouped; a group becomes active once all earlier
    groups are exhausted, and within the active group plus the always-active
    `queues`, the first queue whose head edge is exposed fires.  Spikes are
    drained after every collapse.
    """
    cur = d.copy()
    star = cur.basepoint if mode == MODE_BASED else None
    moves: list[ShellingMove] = []
    drain = _Drainer(cur, star, moves)
    drain.offer(list(cur.darts()))
    windows = windows or []
    widx = 0
    while True:
        drain.retry_deferred()
        while widx < len(windows) and all(not q for q in windows[widx]):
            widx += 1
        active: list[deque] = (windows[widx] if widx < len(windows) else []) + list(queues)
        progressed = False
        for q in active:
            while q and (not cur.dart_alive[q[0]] or cur.face_kind[cur.face[q[0]]] != INNER):
                q.popleft()
            if not q:
                continue
            din = q[0]
            if cur.face_kind[cur.face[cur.twin[din]]] != OUTER:
                continue  # not exposed yet
            q.popleft()
            cyc = cur.face_cycle(cur.face[din])
            dout = cur.twin[din]
            nbrs = [cur.prv[dout], cur.nxt[dout]]
            m = TwoCellCollapse(din)
            moves.append(m)
            cur.apply(m)
            drain.offer([x for x in cyc if x != din] + nbrs)
            progressed = True
            break
        if not progressed:
            remaining = sum(len(q) for q in queues) + sum(len(q) for w in windows for q in w)
            if remaining:
                raise DiagramError(f"scheduled shelling deadlocked with {remaining} intents left")
            break
    drain.offer(list(cur.darts()))
    drain.retry_deferred()
    return Shelling(mode, moves)


# ---------------------------------------------------------------------------
# canonical hashing
# ---------------------------------------------------------------------------


def _component_signature(d: Diagram, start: int, based: bool) -> tuple:
    num: dict[int, int] = {start: 0}
    vnum: dict[int, int] = {}
    order = [start]
    q = deque([start])
    while q:
        x = q.popleft()
        for y in (d.twin[x], d.nxt[x]):
            if y not in num:
                num[y] = len(num)
                order.append(y)
                q.append(y)
    sig = []
    for x in order:
        v = d.origin[x]
        if v not in vnum:
            vnum[v] = len(vnum)
        sig.append(
            (
                num[d.twin[x]],
                num[d.nxt[x]],
                d.label[x],
                vnum[v],
                d.face_kind[d.face[x]],
                1 if based and v == d.basepoint else 0,
            )
        )
    return tuple(sig)


def canonical_key(d: Diagram, based: bool = False) -> tuple:
    """Isomorphism-invariant state key (minimal boundary-first traversal)."""
    sigs = []
    iso = 0
    iso_star = 0
    for verts, darts in d.components():
        if not darts:
            iso += 1
            if based and d.basepoint in verts:
                iso_star = 1
            continue
        best = None
        for s in darts:
            if d.face_kind[d.face[s]] != OUTER:
                continue
            sig = _component_signature(d, s, based)
            if best is None or sig < best:
                best = sig
        sigs.append(best)
    return (tuple(sorted(sigs)), iso, iso_star)


# ---------------------------------------------------------------------------
# optimal shelling search
# ---------------------------------------------------------------------------


@dataclass
class ShellingSearchOutcome:
    value: int | None
    witness: Shelling | None
    status: Status
    nodes_expanded: int


_INF = 1 << 60


def _legal_moves(d: Diagram, mode: str, can_expand: bool) -> list[ShellingMove]:
    star = d.basepoint if mode == MODE_BASED else None
    out: list[ShellingMove] = []
    for x in sorted(d.darts()):
        if d.is_spike(x) and (star is None or d.origin[x] != star):
            out.append(OneCellCollapse(x))
    for x in sorted(d.darts()):
        if d.face_kind[d.face[x]] == INNER and d.face_kind[d.face[d.twin[x]]] == OUTER:
            out.append(TwoCellCollapse(x))
    if mode == MODE_FRAGMENTING:
        for v in sorted(d.vertices()):
            corners = [y for y in sorted(d.darts()) if d.origin[y] == v and d.face_kind[d.face[d.twin[y]]] == OUTER]
            for i in range(len(corners)):
                for j in range(i + 1, len(corners)):
                    out.append(FragmentationMove(v, corners[i], corners[j]))
    if can_expand:
        for x in sorted(d.darts()):
            e0 = d.head(x)
            for y in sorted(d.darts()):
                if d.origin[y] == e0 and d.face_kind[d.face[d.twin[y]]] == OUTER:
                    out.append(OneCellExpansion(x, y, False))
                    if star is not None and e0 == star:
                        out.append(OneCellExpansion(x, y, True))
    return out


def _is_terminal(d: Diagram, mode: str) -> bool:
    if any(True for _ in d.darts()):
        return False
    if mode == MODE_FRAGMENTING:
        return True
    return sum(1 for _ in d.vertices()) == 1


def search_min_shelling(
    d: Diagram,
    mode: str,
    budget: int = 200_000,
    expansion_cap: int | None = None,
) -> ShellingSearchOutcome:
    """Minimal max-boundary-length over full shellings of the given mode.

    Exact over shellings using at most expansion_cap 1-cell expansions per
    branch (default: the diagram's area).  Practical for <= ~12 cells.
    """
    if expansion_cap is None:
        expansion_cap = sum(1 for f in d.faces() if d.face_kind[f] == INNER)
    based = mode == MODE_BASED
    memo: dict[tuple, int] = {}
    nodes = 0

    class BudgetOut(Exception):
        pass

    def value(state: Diagram, remaining: int) -> int:
        nonlocal nodes
        cur_len = state.boundary_length()
        if _is_terminal(state, mode):
            return cur_len
        key = (canonical_key(state, based), remaining)
        hit = memo.get(key)
        if hit is not None:
            return max(cur_len, hit) if hit < _INF else _INF
        nodes += 1
        if nodes > budget:
            raise BudgetOut
        best = _INF
        for m in _legal_moves(state, mode, remaining > 0):
            child = state.copy()
            child.apply(m)
            rem2 = remaining - 1 if isinstance(m, OneCellExpansion) else remaining
            v = value(child, rem2)
            if v < best:
                best = v
        memo[key] = best
        return max(cur_len, best) if best < _INF else _INF

    try:
        val = value(d, expansion_cap)
    except BudgetOut:
        return ShellingSearchOutcome(None, None, Status.EXHAUSTED_BUDGET, nodes)
    if val >= _INF:
        return ShellingSearchOutcome(None, None, Status.EXHAUSTED_CAP, nodes)
    moves: list[ShellingMove] = []
    state = d.copy()
    remaining = expansion_cap
    while not _is_terminal(state, mode):
        chosen = None
        for m in _legal_moves(state, mode, remaining > 0):
            child = state.copy()
            child.apply(m)
            rem2 = remaining - 1 if isinstance(m, OneCellExpansion) else remaining
            v = value(child, rem2)
            if v <= val:
                chosen = (m, child, rem2)
                break
        if chosen is None:  # pragma: no cover
            raise DiagramError("witness reconstruction lost the optimum")
        m, state, remaining = chosen
        moves.append(m)
        if len(moves) > 100_000:  # pragma: no cover
            raise DiagramError("witness reconstruction did not terminate")
    return ShellingSearchOutcome(val, Shelling(mode, moves), Status.EXACT, nodes)


# ---------------------------------------------------------------------------
# shelling -> null-sequence
# ---------------------------------------------------------------------------


def shelling_to_null_sequence(d: Diagram, s: Shelling) -> NullSequence:
    """Boundary words along the shelling, as an explicit null-sequence.

    Stage lengths match the shelling profile exactly; cyclic conjugations
    are inserted only where the boundary frame genuinely rotates (never in
    based shellings over relators of length >= 2) and fragmentations mirror
    diagram fragmentations.
    """
    cur = d.copy()
    star = cur.basepoint
    dart_comps = [darts for _, darts in cur.components() if darts]
    if len(dart_comps) > 1:
        raise DiagramError("shelling_to_null_sequence: start diagram must be connected")
    if not dart_comps:
        return NullSequence(Word(), [])
    if star is not None and cur.outer_dart_at(star) != NONE:
        anchor0 = cur.outer_dart_at(star)
    else:
        anchor0 = min(x for x in dart_comps[0] if cur.face_kind[cur.face[x]] == OUTER)
    start = cur.boundary_word(start_dart=anchor0)
    anchors: list[int] = [anchor0]
    ns_moves = []

    def word_index(dart: int) -> int:
        f = cur.face[dart]
        for i, a in enumerate(anchors):
            if cur.face[a] == f:
                return i
        raise DiagramError("dart not on any tracked boundary word")

    def pos_of(widx: int, dart: int) -> int:
        pos = 0
        x = anchors[widx]
        while x != dart:
            pos += 1
            x = cur.nxt[x]
        return pos

    for m in s.moves:
        if isinstance(m, TwoCellCollapse):
            din = m.dart
            dout = cur.twin[din]
            widx = word_index(dout)
            pos = pos_of(widx, dout)
            cell = cur.face_cycle(cur.face[din])
            k = cell.index(din)
            rest = cell[k + 1 :] + cell[:k]
            rho_sel = Word((cur.label[dout],)) * invert(Word(tuple(cur.label[x] for x in rest)))
            hit = None
            for rho, ridx, rk, inv in cur.p.rotation_table:
                if rho == rho_sel:
                    hit = (ridx, rk, inv)
                    break
            if hit is None:
                raise DiagramError("2-cell boundary word is not a relator rotation")
            ns_moves.append(RelatorApplication(widx, pos, hit[0], hit[1], hit[2], 1))
            new_anchor = anchors[widx]
            if new_anchor == dout:
                new_anchor = rest[0] if rest else cur.nxt[dout]
            vanishes = not rest and cur.prv[dout] == dout
            cur.apply(m)
            if vanishes:
                del anchors[widx]
            else:
                anchors[widx] = new_anchor
        elif isinstance(m, OneCellCollapse):
            d0 = m.dart
            din = cur.twin[d0]
            widx = word_index(d0)
            a = anchors[widx]
            length = cur.face_size[cur.face[d0]]
            if d0 == a:
                ns_moves.append(CyclicConjugation(widx, length - 1))
                ns_moves.append(FreeReduction(widx, 0))
                new_anchor = cur.nxt[d0]
            else:
                pos = pos_of(widx, din)
                ns_moves.append(FreeReduction(widx, pos))
                new_anchor = cur.nxt[d0] if din == a else a
            lone = cur.prv[din] == d0
            cur.apply(m)
            if lone:
                del anchors[widx]
            else:
                anchors[widx] = new_anchor
        elif isinstance(m, OneCellExpansion):
            ty = cur.twin[m.corner]
            widx = word_index(ty)
            pos = pos_of(widx, ty) + 1
            letter = -cur.label[m.dart]
            ns_moves.append(FreeExpansion(widx, pos, letter))
            cur.apply(m)
        elif isinstance(m, FragmentationMove):
            t1, t2 = cur.twin[m.corner1], cur.twin[m.corner2]
            widx = word_index(t1)
            length = cur.face_size[cur.face[t1]]
            i = (pos_of(widx, t1) + 1) % length
            j = (pos_of(widx, t2) + 1) % length
            if i:
                ns_moves.append(CyclicConjugation(widx, i))
            ns_moves.append(Fragmentation(widx, (j - i) % length))
            s1, s2 = cur.nxt[t1], cur.nxt[t2]
            cur.apply(m)
            anchors[widx : widx + 1] = [s1, s2]
        else:  # pragma: no cover
            raise DiagramError(f"unknown move {m!r}")
    return NullSequence(start, ns_moves)


def sequence_variant(ns: NullSequence) -> str:
    if any(isinstance(m, Fragmentation) for m in ns.moves):
        return "fffl"
    if any(isinstance(m, CyclicConjugation) for m in ns.moves):
        return "ffl"
    return "fl"


# ---------------------------------------------------------------------------
# small-diagram enumeration (conjugated products of cells, then folding)
# ---------------------------------------------------------------------------


def tree_diagram(p: Presentation, w: Word) -> Diagram:
    """The folded tree whose boundary circuit reads w (w must be freely trivial)."""
    if free_reduce(w):
        raise DiagramError("tree_diagram needs a freely trivial word")
    if not w:
        return singleton_diagram(p)
    d = path_diagram(p, Word(w[:1]))
    cur = 0
    stack = [cur]
    for x in w[1:]:
        if stack and cur == stack[-1] and d.label[d.twin[cur]] == x:
            cur = d.twin[cur]
            stack.pop()
        else:
            cur = attach_spike(d, cur, x)
            stack.append(cur)
    return d


def _build_seed(p: Presentation, factors: list[tuple[Word, Word]]) -> Diagram:
    """Wedge of lollipops at the basepoint: stalk g then a rho-cell, each factor."""
    d: Diagram | None = None
    cur = NONE  # dart entering the current position
    for g, rho in factors:
        if d is None:
            if g:
                d = path_diagram(p, g)
                cur = 2 * (len(g) - 1)  # last forward dart of the path
            else:
                d = path_diagram(p, Word(rho[:1]))
                _, run = attach_cell(d, [0], rho)
                cur = 1  # the return dart of the seed edge, entering the basepoint
                continue
        else:
            for x in g:
                cur = attach_spike(d, cur, x)
        _, run = attach_cell_at(d, cur, rho)
        cur = run[-1]
        for _ in range(len(g)):
            cur = d.nxt[cur]
    return d


def _fold_candidates(d: Diagram):
    for z in d.darts():
        if d.face_kind[d.face[z]] != OUTER:
            continue
        w = d.nxt[z]
        if d.label[w] == -d.label[z] and d.twin[z] != w and d.origin[z] != d.head(w):
            if d.face_size[d.face[z]] > 2:
                yield z


def enumerate_small_diagrams(
    w: Word, p: Presentation, max_cells: int, max_conj: int = 1, limit: int = 500
) -> list[Diagram]:
    """Valid diagrams with based boundary word exactly w and <= max_cells cells.

    Seeds are wedges of conjugated relator cells (conjugators up to max_conj
    letters; length 0 only for seeds of three or more cells) and every
    sequence of boundary folds is explored; states whose based boundary
    reads w are collected up to isomorphism.  Sound but not exhaustive.
    """
    results: list[Diagram] = []
    seen: set = set()
    visited: set = set()

    def collect(d: Diagram):
        if len(results) >= limit:
            return
        if d.basepoint is None or (d.outer_dart_at(d.basepoint) == NONE and w):
            return
        if d.boundary_word(d.basepoint) == w:
            key = canonical_key(d, based=True)
            if key not in seen:
                seen.add(key)
                results.append(d.copy())

    def fold_dfs(d: Diagram):
        key = canonical_key(d, based=True)
        if key in visited or len(results) >= limit:
            return
        visited.add(key)
        collect(d)
        for z in list(_fold_candidates(d)):
            child = d.copy()
            try:
                fold(child, z)
            except DiagramError:
                continue
            fold_dfs(child)

    if not free_reduce(w):
        collect(tree_diagram(p, w))

    letters = [g for i in range(len(p.alphabet)) for g in (i + 1, -(i + 1))]
    conjugators = [Word()]
    frontier = [Word()]
    for _ in range(max_conj):
        frontier = [g * Word((x,)) for g in frontier for x in letters if not (g and g[-1] == -x)]
        conjugators.extend(frontier)
    rotations = [row[0] for row in p.rotation_table]
    target_red = free_reduce(w)

    for ncells in range(1, max_cells + 1):
        conjs = conjugators if ncells <= 2 else [Word()]
        for combo in product(product(range(len(conjs)), range(len(rotations))), repeat=ncells):
            factors = [(conjs[ci], rotations[ri]) for ci, ri in combo]
            seedlen = sum(2 * len(g) + len(rho) for g, rho in factors)
            if seedlen < len(w) or (seedlen - len(w)) % 2:
                continue
            seed_word = Word()
            for g, rho in factors:
                seed_word = seed_word * g * invert(rho) * invert(g)
            if free_reduce(seed_word) != target_red:
                continue
            fold_dfs(_build_seed(p, factors))
            if len(results) >= limit:
                return results
    return results
