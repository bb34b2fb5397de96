"""Exact FL / FFL / FFFL and space-capped area via search over null-sequences.

A configuration is a multiset of nonempty words.  The three variants differ
by move set:

  FL    free reduction, free expansion, relator application
  FFL   FL moves plus cyclic conjugation
  FFFL  FFL moves plus fragmentation (split a word in two)

Cyclic conjugation never changes total length, so FFL/FFFL states are
canonicalised: each word is replaced by its least rotation, and a
configuration is the sorted tuple of those.  Witness reconstruction puts the
elided conjugation moves back in.

The state space is exponential in the cap; these searches are only meant for
tiny words.  Budgets count node expansions and results are deterministic.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .words import Presentation, Word, free_reduce, invert, min_rotation, rotate


class Variant(Enum):
    FL = "fl"
    FFL = "ffl"
    FFFL = "fffl"


class Status(Enum):
    EXACT = "exact"
    EXHAUSTED_CAP = "exhausted-cap"
    EXHAUSTED_BUDGET = "exhausted-budget"


# -- move records -----------------------------------------------------------


@dataclass(frozen=True)
class FreeReduction:
    word: int
    pos: int


@dataclass(frozen=True)
class FreeExpansion:
    word: int
    pos: int
    letter: int  # inserts (letter, -letter) at pos


@dataclass(frozen=True)
class RelatorApplication:
    word: int
    pos: int
    relator: int
    rotation: int
    inverted: bool
    ulen: int


@dataclass(frozen=True)
class CyclicConjugation:
    word: int
    offset: int


@dataclass(frozen=True)
class Fragmentation:
    word: int
    pos: int


Move = FreeReduction | FreeExpansion | RelatorApplication | CyclicConjugation | Fragmentation


@dataclass
class NullSequence:
    start: Word
    moves: list[Move] = field(default_factory=list)

    def __len__(self):
        return len(self.moves)


@dataclass
class ReplayResult:
    ok: bool
    max_length: int
    relator_count: int
    error_index: int | None = None
    error: str | None = None


@dataclass
class SearchOutcome:
    value: int | None
    witness: NullSequence | None
    status: Status
    nodes_expanded: int


class IllegalMove(ValueError):
    pass


# -- replay (ground truth for witnesses) --------------------------------------


def _apply_move(words: list[Word], m: Move, p: Presentation) -> None:
    """Apply m to the configuration in place.  Raises IllegalMove."""
    if not (0 <= m.word < len(words)):
        raise IllegalMove(f"word index {m.word} out of range")
    w = words[m.word]
    if isinstance(m, FreeReduction):
        if not (0 <= m.pos < len(w) - 1 and w[m.pos] == -w[m.pos + 1]):
            raise IllegalMove(f"no inverse pair at {m.pos}")
        new = w[: m.pos] * w[m.pos + 2 :]
        _replace(words, m.word, [new])
    elif isinstance(m, FreeExpansion):
        if not 0 <= m.pos <= len(w):
            raise IllegalMove("position out of range")
        new = w[: m.pos] * Word((m.letter, -m.letter)) * w[m.pos :]
        _replace(words, m.word, [new])
    elif isinstance(m, RelatorApplication):
        if not 0 <= m.relator < len(p.relators):
            raise IllegalMove("relator index out of range")
        rho = p.rotation(m.relator, m.rotation, m.inverted)
        if not 0 <= m.ulen <= len(rho):
            raise IllegalMove("ulen out of range")
        u, v = rho[: m.ulen], invert(rho[m.ulen :])
        if not (0 <= m.pos <= len(w) - m.ulen):
            raise IllegalMove("position out of range")
        if w[m.pos : m.pos + m.ulen] != u:
            raise IllegalMove(f"subword at {m.pos} does not match relator prefix")
        new = w[: m.pos] * v * w[m.pos + m.ulen :]
        _replace(words, m.word, [new])
    elif isinstance(m, CyclicConjugation):
        words[m.word] = rotate(w, m.offset)
    elif isinstance(m, Fragmentation):
        if not 0 <= m.pos <= len(w):
            raise IllegalMove("split position out of range")
        _replace(words, m.word, [w[: m.pos], w[m.pos :]])
    else:  # pragma: no cover
        raise IllegalMove(f"unknown move {m!r}")


def _replace(words: list[Word], i: int, parts: list[Word]) -> None:
    words[i : i + 1] = [x for x in parts if x]


def replay(s: NullSequence, p: Presentation) -> ReplayResult:
    """Apply the moves in order; ok iff all legal and the final configuration is empty."""
    words = [s.start] if s.start else []
    max_len = sum(len(w) for w in words)
    relators = 0
    for i, m in enumerate(s.moves):
        try:
            _apply_move(words, m, p)
        except IllegalMove as e:
            return ReplayResult(False, max_len, relators, i, str(e))
        if isinstance(m, RelatorApplication):
            relators += 1
        max_len = max(max_len, sum(len(w) for w in words))
    if words:
        return ReplayResult(False, max_len, relators, None, "final configuration not empty")
    return ReplayResult(True, max_len, relators)


# -- successor generation ------------------------------------------------------

Config = tuple[Word, ...]


def _canon(words: list[Word], v: Variant) -> Config:
    if v is Variant.FL:
        return tuple(w for w in words if w)
    if v is Variant.FFL:
        return tuple(min_rotation(w) for w in words if w)
    return tuple(sorted(min_rotation(w) for w in words if w))


def _word_moves(w: Word, v: Variant, p: Presentation, cap: int, slack: int):
    """All (rotation offset, move-template, results) on one word.

    The move-template's word index is filled in by the caller; rotation
    offset is the conjugation applied before the move (0 under FL).
    slack = cap - (total length of the other words).
    """
    offsets = range(len(w)) if v is not Variant.FL and w else (0,)
    for k in offsets:
        wr = rotate(w, k)
        n = len(wr)
        for pos in range(n - 1):
            if wr[pos] == -wr[pos + 1]:
                yield k, FreeReduction(0, pos), [wr[:pos] * wr[pos + 2 :]]
        if n + 2 <= slack:
            for pos in range(n + 1):
                for g in range(1, len(p.alphabet) + 1):
                    for x in (g, -g):
                        yield k, FreeExpansion(0, pos, x), [wr[:pos] * Word((x, -x)) * wr[pos:]]
        for rho, ridx, rk, inv in p.rotation_table:
            lr = len(rho)
            for ulen in range(lr + 1):
                if n - ulen + (lr - ulen) > slack:
                    continue
                u = rho[:ulen]
                vv = invert(rho[ulen:])
                maxpos = n - ulen
                for pos in range(maxpos + 1):
                    if wr[pos : pos + ulen] == u:
                        yield k, RelatorApplication(0, pos, ridx, rk, inv, ulen), [wr[:pos] * vv * wr[pos + ulen :]]
        if v is Variant.FFFL:
            for pos in range(1, n):
                yield k, Fragmentation(0, pos), [wr[:pos], wr[pos:]]


def successors(c: Config, v: Variant, p: Presentation, cap: int):
    """All (move, rotation offset, successor configuration) with total length <= cap.

    Deterministic order; duplicate successor configurations are kept (the
    searches deduplicate via their visited sets).
    """
    total = sum(len(w) for w in c)
    out = []
    for i, w in enumerate(c):
        others = total - len(w)
        rest = list(c[:i]) + list(c[i + 1 :])
        for k, template, results in _word_moves(w, v, p, cap, cap - others):
            move = _retarget(template, i)
            new_words = rest + [x for x in results if x]
            if sum(len(x) for x in new_words) <= cap:
                out.append((move, k, _canon(new_words, v)))
    return out


def _retarget(m: Move, i: int) -> Move:
    if isinstance(m, FreeReduction):
        return FreeReduction(i, m.pos)
    if isinstance(m, FreeExpansion):
        return FreeExpansion(i, m.pos, m.letter)
    if isinstance(m, RelatorApplication):
        return RelatorApplication(i, m.pos, m.relator, m.rotation, m.inverted, m.ulen)
    if isinstance(m, Fragmentation):
        return Fragmentation(i, m.pos)
    return m


# -- searches -----------------------------------------------------------------


class _Budget:
    def __init__(self, budget: int):
        self.left = budget

    def spend(self) -> bool:
        self.left -= 1
        return self.left >= 0


def filling_value(w: Word, v: Variant, p: Presentation, cap: int, budget: int = 1_000_000) -> SearchOutcome:
    """Minimal L with a null-sequence for w through total length <= L, else capped.

    Runs reachability at L = len(w), len(w)+1, ..., cap; Exact iff the empty
    configuration is reached (at minimal L) within the node budget.
    """
    start = _canon([w], v)
    b = _Budget(budget)
    nodes = 0
    for L in range(len(w), cap + 1):
        found, parents, expanded = _reach_empty(start, v, p, L, b)
        nodes += expanded
        if found:
            witness = _reconstruct(w, v, p, parents)
            return SearchOutcome(L, witness, Status.EXACT, nodes)
        if b.left < 0:
            return SearchOutcome(None, None, Status.EXHAUSTED_BUDGET, nodes)
    return SearchOutcome(None, None, Status.EXHAUSTED_CAP, nodes)


def _reach_empty(start: Config, v: Variant, p: Presentation, cap: int, b: _Budget):
    """BFS over canonical configurations of total length <= cap."""
    if sum(len(w) for w in start) > cap:
        return False, {}, 0
    parents: dict[Config, tuple[Config, int, int, Move] | None] = {start: None}
    if start == ():
        return True, parents, 0
    queue = deque([start])
    expanded = 0
    while queue:
        if not b.spend():
            return False, parents, expanded
        state = queue.popleft()
        expanded += 1
        for move, k, nxt in successors(state, v, p, cap):
            if nxt in parents:
                continue
            parents[nxt] = (state, move.word, k, move)
            if nxt == ():
                return True, parents, expanded
            queue.append(nxt)
    return False, parents, expanded


def _reconstruct(w: Word, v: Variant, p: Presentation, parents) -> NullSequence:
    """Rebuild an explicit move list from the BFS parent map.

    Canonicalisation elides conjugations and word ordering; this walks the
    chain keeping a live configuration aligned with each canonical state and
    inserts explicit CyclicConjugation moves (which never change lengths).
    """
    chain = []
    state: Config = ()
    while parents[state] is not None:
        prev, widx, k, move = parents[state]
        chain.append((prev, widx, k, move))
        state = prev
    chain.reverse()
    ns = NullSequence(start=w)
    live: list[Word] = [w] if w else []
    for prev, widx, k, move in chain:
        target = prev[widx]  # canonical word the move was enumerated on, pre-rotation
        li = _match_index(live, target, v)
        cur = live[li]
        # rotate the live word to the rotation the move expects
        want = rotate(min_rotation(cur), k) if v is not Variant.FL else rotate(cur, k)
        if cur != want:
            off = _rotation_offset(cur, want)
            ns.moves.append(CyclicConjugation(li, off))
            _apply_move(live, CyclicConjugation(li, off), p)
        real = _retarget(move, li)
        ns.moves.append(real)
        _apply_move(live, real, p)
    return ns


def _match_index(live: list[Word], canonical: Word, v: Variant) -> int:
    for i, u in enumerate(live):
        cu = u if v is Variant.FL else min_rotation(u)
        if cu == canonical:
            return i
    raise AssertionError("witness reconstruction lost track of a word")


def _rotation_offset(cur: Word, want: Word) -> int:
    for off in range(len(cur)):
        if rotate(cur, off) == want:
            return off
    raise AssertionError("words are not rotations of each other")


def is_null_homotopic(w: Word, p: Presentation, cap: int, budget: int = 1_000_000) -> str:
    """'yes' iff the empty configuration is reachable with FFFL moves under cap.

    Never answers 'no': exhausting a space cap cannot certify nontriviality.
    """
    start = _canon([w], Variant.FFFL)
    if sum(len(x) for x in start) > cap:
        return "inconclusive"
    found, _, _ = _reach_empty(start, Variant.FFFL, p, cap, _Budget(budget))
    return "yes" if found else "inconclusive"


def area_within(w: Word, p: Presentation, cap: int, budget: int = 1_000_000) -> SearchOutcome:
    """Minimal relator-application count over FL null-sequences with lengths <= cap.

    Uniform-cost search, cost = relator applications.  The value is an upper
    bound for the true area and equals it once the cap is generous enough;
    Exact means optimal for this cap.
    """
    start = _canon([w], Variant.FL)
    if sum(len(x) for x in start) > cap:
        return SearchOutcome(None, None, Status.EXHAUSTED_CAP, 0)
    dist: dict[Config, int] = {start: 0}
    parents: dict[Config, tuple[Config, int, int, Move] | None] = {start: None}
    heap: list[tuple[int, Config]] = [(0, start)]
    nodes = 0
    b = _Budget(budget)
    while heap:
        d, state = heapq.heappop(heap)
        if d > dist.get(state, 1 << 60):
            continue
        if state == ():
            witness = _reconstruct(w, Variant.FL, p, parents)
            return SearchOutcome(d, witness, Status.EXACT, nodes)
        if not b.spend():
            return SearchOutcome(None, None, Status.EXHAUSTED_BUDGET, nodes)
        nodes += 1
        for move, k, nxt in successors(state, Variant.FL, p, cap):
            nd = d + (1 if isinstance(move, RelatorApplication) else 0)
            if nd < dist.get(nxt, 1 << 60):
                dist[nxt] = nd
                parents[nxt] = (state, move.word, k, move)
                heapq.heappush(heap, (nd, nxt))
    return SearchOutcome(None, None, Status.EXHAUSTED_CAP, nodes)


@dataclass
class TimeSpaceReport:
    fffl: SearchOutcome
    area: SearchOutcome
    bound: int | None
    holds: bool | None  # None when inconclusive

    def conclusive(self) -> bool:
        return self.holds is not None


def verify_time_space(w: Word, p: Presentation, cap: int, budget: int = 1_000_000, margin: int = 2) -> TimeSpaceReport:
    """Check area(w) <= (2|A|+1)^FFFL(w) with area searched at cap FFFL+margin."""
    f = filling_value(w, Variant.FFFL, p, cap, budget)
    if f.status is not Status.EXACT:
        return TimeSpaceReport(f, SearchOutcome(None, None, f.status, 0), None, None)
    a = area_within(w, p, f.value + margin, budget)
    c = 2 * len(p.alphabet) + 1
    bound = c**f.value
    if a.status is not Status.EXACT:
        return TimeSpaceReport(f, a, bound, None)
    return TimeSpaceReport(f, a, bound, a.value <= bound)


# -- serialization -------------------------------------------------------------


def moves_to_text(moves: list[Move], p: Presentation) -> str:
    """One move per line: FR i p / FE i p x / RA i p r k inv ulen / CC i k / FRAG i p."""
    lines = []
    for m in moves:
        if isinstance(m, FreeReduction):
            lines.append(f"FR {m.word} {m.pos}")
        elif isinstance(m, FreeExpansion):
            g = p.generator_of(m.letter)
            tok = g.name if m.letter > 0 else g.name + "-1"
            lines.append(f"FE {m.word} {m.pos} {tok}")
        elif isinstance(m, RelatorApplication):
            lines.append(f"RA {m.word} {m.pos} {m.relator} {m.rotation} {int(m.inverted)} {m.ulen}")
        elif isinstance(m, CyclicConjugation):
            lines.append(f"CC {m.word} {m.offset}")
        elif isinstance(m, Fragmentation):
            lines.append(f"FRAG {m.word} {m.pos}")
        else:  # pragma: no cover
            raise ValueError(f"unknown move {m!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def moves_from_text(text: str, p: Presentation) -> list[Move]:
    moves: list[Move] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            kind = parts[0]
            if kind == "FR":
                moves.append(FreeReduction(int(parts[1]), int(parts[2])))
            elif kind == "FE":
                tok = parts[3]
                if tok.endswith("-1"):
                    letter = -p.letter(tok[:-2])
                else:
                    letter = p.letter(tok)
                moves.append(FreeExpansion(int(parts[1]), int(parts[2]), letter))
            elif kind == "RA":
                moves.append(
                    RelatorApplication(int(parts[1]), int(parts[2]), int(parts[3]), int(parts[4]), bool(int(parts[5])), int(parts[6]))
                )
            elif kind == "CC":
                moves.append(CyclicConjugation(int(parts[1]), int(parts[2])))
            elif kind == "FRAG":
                moves.append(Fragmentation(int(parts[1]), int(parts[2])))
            else:
                raise ValueError(f"unknown move kind {kind!r}")
        except (IndexError, ValueError) as e:
            raise ValueError(f"line {lineno}: {e}") from None
    return moves
