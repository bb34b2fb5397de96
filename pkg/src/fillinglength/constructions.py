"""Explicit diagram families with scripted shellings.

Families:
  xi         the doubling stack over <a,b | a^b = a^2>: boundary
             a^(2^m) (b^-m a b^m)^-1, area 2^m - 1, shelled by peeling the
             lowest rightmost cell (spikes first).
  omega      the shortcut diagram for a^k: run xi's shelling until a^k is a
             boundary prefix and freeze; boundary a^k u_k^-1 with
             len(u_k) <= 12 + 4 log2 k, and the frozen shelling keeps the
             non-prefix part nu within the same bound.
  tower      omega_{k+1} and a mirrored omega_k joined to the two sides of a
             t-corridor; the based shelling interleaves all three.
  delta_hat  the exponential diagram for word_w(n): central [r,s] cell, four
             corridor arms, four staircase triangles (whose vertical a^k
             strings are recorded), four doubling wings.  Based shelling =
             the build run backwards.
  delta      delta_hat with every interior vertical cut open and a lens of
             back-to-back omega copies sewn in; the free shelling walks the
             shortcut loops layer by layer.
  wprime     two delta_hat copies (one mirrored) bridged by an [r,s] cell;
             boundary word_w_prime(n).

Every builder's output validates and its scripted shellings replay; the
test suite treats those two checks as ground truth.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .diagram import (
    INNER,
    OUTER,
    MODE_BASED,
    MODE_FREE,
    Diagram,
    DiagramError,
    OneCellCollapse,
    Shelling,
    TwoCellCollapse,
    replay_shelling,
)
from .shellings import BuildLog, reverse_build_shelling, scheduled_shelling
from .surgery import absorb, attach_cell, fold, glue_arcs, insert_lens, mirror, path_diagram
from .words import Presentation, Word, invert, presentation_bs, presentation_rst, word_w, word_w_prime


@dataclass
class ConstructionOutput:
    diagram: Diagram
    shellings: dict[str, Shelling] = field(default_factory=dict)
    certificates: dict[str, object] = field(default_factory=dict)
    meta: dict[str, object] = field(default_factory=dict)

    def certificate_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in sorted(self.certificates.items()))


def _rho(p: Presentation, text: str) -> Word:
    w = p.parse(text)
    if w not in p.rotation_set:
        raise DiagramError(f"{text!r} is not a relator rotation of {p.text()}")
    return w


def _attach(d: Diagram, log: BuildLog | None, g: list[int], rho: Word) -> list[int]:
    f, run = attach_cell(d, g, rho)
    if log is not None:
        log.attach(g, run, d.twin[run[0]])
    return run


def _fold(d: Diagram, log: BuildLog | None, z: int) -> None:
    kept = d.twin[z]
    corner = d.twin[d.prv[z]]
    star_far = d.basepoint is not None and d.head(d.nxt[z]) == d.basepoint
    fold(d, z)
    if log is not None:
        log.fold(kept, corner, star_far)


# ---------------------------------------------------------------------------
# xi
# ---------------------------------------------------------------------------


def build_xi(m: int, p: Presentation | None = None) -> ConstructionOutput:
    """The stacked doubling diagram: boundary a^(2^m) (b^-m a b^m)^-1."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    p = p or presentation_bs()
    a = p.letter("a")
    n_bottom = 1 << m
    d = path_diagram(p, Word((a,) * n_bottom))
    mu = [2 * i for i in range(n_bottom)]
    cells: list[tuple[int, int, int]] = []  # (right extent descending, row, din)
    if m:
        rho_first = _rho(p, "a^-1 a^-1 b^-1 a b")
        rho_next = _rho(p, "b a^-1 a^-1 b^-1 a")
        # rows consume a^-1 darts right-to-left; row 1 eats the path underside
        row = [2 * i + 1 for i in range(n_bottom)][::-1]
        for i in range(1, m + 1):
            next_row: list[int] = []
            run_tail = None
            for jj in range(len(row) // 2):
                j = 2 * jj
                if j == 0:
                    g = [row[0], row[1]]
                    run = _attach(d, None, g, rho_first)
                    din = g[0]
                    a_out = run[1]  # run reads (b^-1, a^-1, b)
                else:
                    g = [run_tail, row[j], row[j + 1]]
                    run = _attach(d, None, g, rho_next)
                    din = g[1]
                    a_out = run[0]  # run reads (a^-1, b)
                cells.append((jj << i, i, din))
                next_row.append(a_out)
                run_tail = run[-1]
            row = next_row
    # collapse order: rightmost cells first, lowest row breaking ties
    # (right extent of cell jj in row i is 2^m - jj*2^i)
    cells.sort(key=lambda c: (c[0], c[1]))
    intents = [din for _, _, din in cells]
    out = ConstructionOutput(d)
    out.meta["mu"] = mu
    out.meta["intents"] = intents
    shelling = scheduled_shelling(d, [deque(intents)], MODE_BASED)
    rep = replay_shelling(d, shelling)
    if not rep.ok:
        raise DiagramError(f"xi shelling replay failed: {rep.error}")
    out.shellings["based"] = shelling
    out.certificates["area"] = sum(1 for f in d.faces() if d.face_kind[f] == INNER)
    out.certificates["boundary"] = p.render(d.boundary_word(d.basepoint))
    out.certificates["shelling_max"] = rep.max_length
    out.meta["profile"] = rep.profile
    return out


# ---------------------------------------------------------------------------
# omega
# ---------------------------------------------------------------------------


def build_omega(k: int, p: Presentation | None = None, lens_ready: bool = False) -> ConstructionOutput:
    """Shortcut diagram for a^k: boundary a^k u_k^-1 with the frozen shelling.

    With lens_ready the freeze additionally requires the k-th boundary
    a-edge to bound a 2-cell (no pendant), so two copies can be glued
    back-to-back along their u-arcs; the u may be a few letters longer.
    """
    if k < 1:
        raise ValueError("k must be positive")
    p = p or presentation_bs()
    a = p.letter("a")
    m = (k - 1).bit_length()
    xi = build_xi(m, p)
    moves = xi.shellings["based"].moves

    def a_prefix(dg: Diagram) -> int:
        if dg.basepoint is None or dg.outer_dart_at(dg.basepoint) == -1:
            return 0
        n = 0
        x = dg.outer_dart_at(dg.basepoint)
        while dg.label[x] == a:
            n += 1
            if lens_ready and n == k and dg.face_kind[dg.face[dg.twin[x]]] != INNER:
                return n - 1
            x = dg.nxt[x]
        return n

    cur = xi.diagram.copy()
    c = 0 if a_prefix(cur) >= k else None
    for i, mv in enumerate(moves):
        cur.apply(mv)
        if a_prefix(cur) >= k:
            c = i + 1
    if c is None:
        raise DiagramError("xi shelling never exposes the a^k prefix")
    d = xi.diagram.copy()
    for mv in moves[:c]:
        d.apply(mv)
    start = d.outer_dart_at(d.basepoint)
    mu = []
    x = start
    for _ in range(k):
        mu.append(x)
        x = d.nxt[x]
    # collapse dangling edges outside the a^k arc so the u-arc is tree-free
    # (reorders spike moves of the tail; the a^k prefix is untouched)
    mu_edges = set(mu) | {d.twin[x] for x in mu}
    changed = True
    while changed:
        changed = False
        for x in list(d.spike_candidates()):
            if x in mu_edges or not d.dart_alive[x] or not d.is_spike(x):
                continue
            d.apply(OneCellCollapse(x))
            changed = True
    word = d.boundary_word(d.basepoint)
    u_k = invert(word[k:])
    cell_intents = [mv.dart for mv in moves[c:] if isinstance(mv, TwoCellCollapse)]
    if lens_ready:
        # a cell straddling the end of the a^k arc must collapse via its
        # mu-side edge; u-arc edges are glued away inside a lens
        mu_set = set(mu)
        fixed = []
        for din in cell_intents:
            t = d.twin[din]
            if d.face_kind[d.face[t]] == OUTER and t not in mu_set:
                alt = [x for x in d.face_cycle(d.face[din]) if d.twin[x] in mu_set]
                din = alt[0] if alt else din
            fixed.append(din)
        cell_intents = fixed
    tail = scheduled_shelling(d, [deque(cell_intents)], MODE_BASED)
    bound = 12 + 4 * math.log2(k) if k > 1 else 12.0
    cur = d.copy()
    max_nu = _nu_of(cur, mu)
    for mv in tail.moves:
        cur.apply(mv)
        max_nu = max(max_nu, _nu_of(cur, mu))
    rep = replay_shelling(d, tail)
    if not rep.ok:
        raise DiagramError(f"omega shelling replay failed: {rep.error}")
    out = ConstructionOutput(d)
    out.shellings["based"] = tail
    out.meta["mu"] = mu
    out.meta["u_k"] = u_k
    out.meta["intents"] = cell_intents
    out.meta["profile"] = rep.profile
    out.certificates["u_len"] = len(u_k)
    out.certificates["u_bound"] = bound
    out.certificates["max_nu"] = max_nu
    out.certificates["boundary"] = p.render(word)
    out.certificates["shelling_max"] = rep.max_length
    return out


def _nu_of(dg: Diagram, mu: list[int]) -> int:
    """Boundary length minus the surviving prefix run along the mu darts."""
    total = dg.boundary_length()
    if dg.basepoint is None or not mu or not dg.dart_alive[mu[0]]:
        return total
    x = dg.outer_dart_at(dg.basepoint)
    if x != mu[0]:
        return total
    j = 0
    for target in mu:
        if x == target and dg.dart_alive[x]:
            j += 1
            x = dg.nxt[x]
        else:
            break
    return total - j


# ---------------------------------------------------------------------------
# t-corridor and tower
# ---------------------------------------------------------------------------


def _corridor(p: Presentation, length: int):
    """A t-corridor of [t,a]-cells over a^length.

    Boundary: t^-1 a^length t a^-length.  Returns (diagram, bottom darts
    a^-1 ordered rung 1..length, top outer darts +a left to right, collapse
    intents rightmost rung first).
    """
    a = p.letter("a")
    d = path_diagram(p, Word((a,) * length))
    rho1 = _rho(p, "a t^-1 a^-1 t")
    rho2 = _rho(p, "t a t^-1 a^-1")
    top: list[int] = []
    right_t: list[int] = []
    run_tail = None
    for j in range(length):
        if j == 0:
            run = _attach(d, None, [0], rho1)  # run reads (t^-1, a, t)
            top.append(run[1])
            right_t.append(d.twin[run[2]])
            run_tail = run[2]
        else:
            run = _attach(d, None, [run_tail, 2 * j], rho2)  # run reads (a, t)
            top.append(run[0])
            right_t.append(d.twin[run[1]])
            run_tail = run[1]
    bottom = [2 * i + 1 for i in range(length)]
    return d, bottom, top, right_t[::-1]


def build_tower(k: int, p: Presentation | None = None) -> ConstructionOutput:
    """omega_{k+1} | t-corridor | mirrored omega_k, with interleaved shelling."""
    if k < 1:
        raise ValueError("k must be positive")
    p = p or presentation_rst()
    om_hi = build_omega(k + 1, p)
    om_lo = build_omega(k, p)
    d, bottom, top, right_t = _corridor(p, k + 1)
    dmap_hi, _, _ = absorb(d, om_hi.diagram)
    mir = mirror(om_lo.diagram)
    dmap_lo, _, _ = absorb(d, mir)
    glue_arcs(d, [dmap_hi[g] for g in om_hi.meta["mu"]], list(bottom))
    glue_arcs(d, top[:k], [dmap_lo[mir.twin[g]] for g in om_lo.meta["mu"]])
    d.basepoint = d.origin[top[0]]
    q_hi = deque(dmap_hi[x] for x in om_hi.meta["intents"])
    q_lo = deque(dmap_lo[mir.twin[x]] for x in om_lo.meta["intents"])
    shelling = scheduled_shelling(d, [q_hi, q_lo, deque(right_t)], MODE_BASED)
    rep = replay_shelling(d, shelling)
    if not rep.ok:
        raise DiagramError(f"tower shelling replay failed: {rep.error}")
    out = ConstructionOutput(d)
    out.shellings["based"] = shelling
    a, t = p.letter("a"), p.letter("t")
    expected = om_lo.meta["u_k"] * Word((a, t)) * invert(om_hi.meta["u_k"]) * Word((-t,))
    out.certificates["boundary"] = p.render(d.boundary_word(d.basepoint))
    out.certificates["boundary_expected"] = p.render(expected)
    out.certificates["shelling_max"] = rep.max_length
    out.meta["profile"] = rep.profile
    out.meta["u_hi"] = om_hi.meta["u_k"]
    out.meta["u_lo"] = om_lo.meta["u_k"]
    return out


# ---------------------------------------------------------------------------
# delta_hat
# ---------------------------------------------------------------------------


def _run_after(d: Diagram, dart: int, count: int) -> list[int]:
    out = []
    x = d.nxt[dart]
    for _ in range(count):
        out.append(x)
        x = d.nxt[x]
    return out


def _run_before(d: Diagram, dart: int, count: int) -> list[int]:
    out = []
    x = d.prv[dart]
    for _ in range(count):
        out.append(x)
        x = d.prv[x]
    return out[::-1]


def _triangle_a(d: Diagram, p: Presentation, log: BuildLog, tau: list[int], delta_run: list[int]) -> dict:
    """Fill t^K (t^-1 a^-1)^K down to a^-K; the tau t's bubble rightward.

    tau: the t^K darts in circuit order.  delta_run: the following
    (t^-1 a^-1)^K darts.  Verticals are the a^-j blocks, innermost first;
    their cells consume each block starting at its tau-side end, so during
    a layered shelling the columns expose vertical edges from that end.
    """
    K = len(tau)
    rho_swap = _rho(p, "t a^-1 t^-1 a")  # (t, a^-1) -> (a^-1, t)
    dts = delta_run[0::2]
    das = delta_run[1::2]
    verticals: list[list[int]] = []
    columns: list[list[tuple[int, int]]] = []
    block: list[int] = []
    for j in range(K):
        traveler = tau[K - 1 - j]
        col: list[tuple[int, int]] = []
        new_block: list[int] = []
        for i in range(j):
            g = [traveler, block[i]]
            run = _attach(d, log, g, rho_swap)  # run reads (a^-1, t)
            col.append((d.face[g[1]], traveler))
            new_block.append(run[0])
            traveler = run[1]
        if j:
            verticals.append(list(block))
            columns.append(col)
        _fold(d, log, traveler)
        block = new_block + [das[j]]
    verticals.append(list(block))
    return {"verticals": verticals, "columns": columns, "final": list(block)}


def _triangle_b(d: Diagram, p: Presentation, log: BuildLog, gamma: list[int], theta: list[int]) -> dict:
    """Fill (at)^K t^-K down to a^K; the theta t's bubble leftward (mirror of _triangle_a)."""
    K = len(theta)
    rho_swap = _rho(p, "a t^-1 a^-1 t")  # (a, t^-1) -> (t^-1, a)
    gas = gamma[0::2]
    gts = gamma[1::2]
    verticals: list[list[int]] = []
    columns: list[list[tuple[int, int]]] = []
    block: list[int] = []
    for j in range(K):
        traveler = theta[j]
        col: list[tuple[int, int]] = []
        new_block: list[int] = []
        for i in range(j):
            g = [block[j - 1 - i], traveler]
            run = _attach(d, log, g, rho_swap)  # run reads (t^-1, a)
            col.append((d.face[g[0]], traveler))
            new_block.insert(0, run[1])
            traveler = run[0]
        if j:
            verticals.append(list(block))
            columns.append(col)
        _fold(d, log, gts[K - 1 - j])
        block = [gas[K - 1 - j]] + new_block
    verticals.append(list(block))
    return {"verticals": verticals, "columns": columns, "final": list(block)}


def _wing(d: Diagram, p: Presentation, n: int, run: list[int], sign: int, log: BuildLog) -> dict:
    """Convert the a^(sign * 2^n) boundary run into b^-n a^sign b^n, row by row."""
    if sign > 0:
        rho_first = _rho(p, "a a b^-1 a^-1 b")
        rho_next = _rho(p, "b a a b^-1 a^-1")
    else:
        rho_first = _rho(p, "a^-1 a^-1 b^-1 a b")
        rho_next = _rho(p, "b a^-1 a^-1 b^-1 a")
    rows: list[list[tuple[int, int]]] = []
    for _ in range(n):
        next_run: list[int] = []
        cells: list[tuple[int, int]] = []
        run_tail = None
        for j in range(0, len(run), 2):
            if j == 0:
                g = [run[0], run[1]]
                out = _attach(d, log, g, rho_first)
                cells.append((d.face[g[0]], g[0], g[1]))
                next_run.append(out[1])  # (b^-1, a^e, b)
            else:
                g = [run_tail, run[j], run[j + 1]]
                out = _attach(d, log, g, rho_next)
                cells.append((d.face[g[1]], g[1], g[2]))
                next_run.append(out[0])  # (a^e, b)
            run_tail = out[-1]
        rows.append(cells)
        run = next_run
    return {"rows": rows, "final": run}


def build_delta_hat(n: int, p: Presentation | None = None) -> ConstructionOutput:
    """The exponential diagram for word_w(n), built outward from the center."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    p = p or presentation_rst()
    K = 1 << n
    r = p.letter("r")
    log = BuildLog()
    log.seed()
    d = path_diagram(p, Word((r,)))
    run = _attach(d, log, [0], _rho(p, "r s r^-1 s^-1"))
    arms: dict[str, list[int]] = {"s": [run[0]], "r": [run[1]], "sinv": [run[2]], "rinv": [1]}
    specs = {
        "s": (_rho(p, "s t^-1 s^-1 t"), 1),
        "sinv": (_rho(p, "s^-1 t^-1 s t"), 1),
        "r": (_rho(p, "r t^-1 a^-1 r^-1 a t"), 2),
        "rinv": (_rho(p, "r^-1 t^-1 a^-1 r a t"), 2),
    }
    for name, (rho, mid) in specs.items():
        for _ in range(K):
            g = [arms[name][-1]]
            run = _attach(d, log, g, rho)
            arms[name].append(run[mid])
    s_d, r_d, si_d, ri_d = (arms[x][-1] for x in ("s", "r", "sinv", "rinv"))
    # junction runs (collected before any triangle surgery)
    tau_a = _run_after(d, s_d, K)
    delta_a = _run_after(d, tau_a[-1], 2 * K)
    gamma_b = _run_after(d, r_d, 2 * K)
    theta_b = _run_after(d, gamma_b[-1], K)
    tau_c = _run_after(d, si_d, K)
    delta_c = _run_after(d, tau_c[-1], 2 * K)
    gamma_d = _run_after(d, ri_d, 2 * K)
    theta_d = _run_after(d, gamma_d[-1], K)
    quads = {
        "A": _triangle_a(d, p, log, tau_a, delta_a),
        "B": _triangle_b(d, p, log, gamma_b, theta_b),
        "C": _triangle_a(d, p, log, tau_c, delta_c),
        "D": _triangle_b(d, p, log, gamma_d, theta_d),
    }
    wings = {}
    for q, sign in (("A", -1), ("B", 1), ("C", -1), ("D", 1)):
        wings[q] = _wing(d, p, n, quads[q]["final"], sign, log)
    d.basepoint = d.origin[si_d]
    want = word_w(n, p)
    got = d.boundary_word(d.basepoint)
    if got != want:
        raise DiagramError(f"delta_hat boundary mismatch at n={n}: got {p.render(got)[:120]}")
    shelling = reverse_build_shelling(d, log, MODE_BASED)
    rep = replay_shelling(d, shelling)
    if not rep.ok:
        raise DiagramError(f"delta_hat shelling replay failed at {rep.error_index}: {rep.error}")
    out = ConstructionOutput(d)
    out.shellings["based"] = shelling
    out.meta.update(
        {"log": log, "arms": arms, "quads": quads, "wings": wings, "n": n, "profile": rep.profile}
    )
    out.certificates["boundary_ok"] = True
    out.certificates["area"] = sum(1 for ff in d.faces() if d.face_kind[ff] == INNER)
    out.certificates["shelling_max"] = rep.max_length
    # concentric loop certificates: depth-k loops read a^k s a^-k r a^k s^-1 a^-k r^-1
    loops = {}
    for k in range(K + 1):
        loops[k] = _rho_loop(d, arms, quads, k)
    out.meta["loops"] = loops
    out.certificates["loops_ok"] = all(_loop_ok(d, p, loops[k], k) for k in range(K + 1))
    return out


def _rho_loop(d: Diagram, arms: dict, quads: dict, k: int) -> list[int]:
    """Darts of the depth-k concentric loop: D-vertical, s, A-vertical, r, ..."""
    if k == 0:
        return [d.twin_safe(x) if False else x for x in (arms["s"][0], arms["r"][0], arms["sinv"][0], arms["rinv"][0])]
    vd = quads["D"]["verticals"][k - 1]
    va = quads["A"]["verticals"][k - 1]
    vb = quads["B"]["verticals"][k - 1]
    vc = quads["C"]["verticals"][k - 1]
    return vd + [arms["s"][k]] + va + [arms["r"][k]] + vb + [arms["sinv"][k]] + vc + [arms["rinv"][k]]


def _loop_ok(d: Diagram, p: Presentation, loop: list[int], k: int) -> bool:
    a, r, s = p.letter("a"), p.letter("r"), p.letter("s")
    want = (
        tuple([a] * k)
        + (s,)
        + tuple([-a] * k)
        + (r,)
        + tuple([a] * k)
        + (-s,)
        + tuple([-a] * k)
        + (-r,)
    )
    if tuple(d.label[x] for x in loop) != want:
        return False
    for i, x in enumerate(loop):
        nxt = loop[(i + 1) % len(loop)]
        if d.head(x) != d.origin[nxt]:
            return False
    return True


# ---------------------------------------------------------------------------
# delta
# ---------------------------------------------------------------------------


def _make_lens(om: ConstructionOutput):
    """Back-to-back copies of an omega diagram glued along their u-arcs.

    Returns (lens diagram, first +a boundary dart, first a^-1 boundary dart,
    collapse intents of the plain copy, intents of the mirrored copy).
    """
    base = om.diagram
    lens = base.copy()
    mir = mirror(base)
    mmap, _, _ = absorb(lens, mir)
    mu = om.meta["mu"]
    us = []
    x = lens.nxt[mu[-1]]
    while x != mu[0]:
        us.append(x)
        x = lens.nxt[x]
    uset = set(us)
    if any(base.twin[x] in uset for x in us) or any(base.twin[x] in uset for x in mu):
        raise DiagramError("omega is not lens-ready: boundary arcs share an edge")
    glue_arcs(lens, us, [mmap[base.twin[x]] for x in us])
    plain_first = mu[0]
    mirror_first = lens.nxt[mu[-1]]
    plain_intents = list(om.meta["intents"])
    mirror_intents = [mmap[base.twin[x]] for x in om.meta["intents"]]
    return lens, plain_first, mirror_first, plain_intents, mirror_intents


def build_delta(n: int, p: Presentation | None = None) -> ConstructionOutput:
    """delta_hat with lenses sewn into the interior verticals of height >= 2.

    The free shelling walks the shortcut loops: each layer consumes the
    inner half of the outer lens, one corridor column, the outer half of
    the next lens in, and one cell of each corridor arm.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    p = p or presentation_rst()
    K = 1 << n
    dh = build_delta_hat(n, p)
    d = dh.diagram
    arms = dh.meta["arms"]
    quads = dh.meta["quads"]
    wings = dh.meta["wings"]
    qsigns = (("A", -1), ("B", 1), ("C", -1), ("D", 1))
    om_cache: dict[int, ConstructionOutput] = {}
    inner_q: dict[tuple[str, int], deque] = {}
    outer_q: dict[tuple[str, int], deque] = {}
    for q, sign in qsigns:
        verts = quads[q]["verticals"]
        for k in range(2, K):
            if k not in om_cache:
                om_cache[k] = build_omega(k, p, lens_ready=True)
            lens, pf, mf, pi, mi = _make_lens(om_cache[k])
            lmap, _, _ = absorb(d, lens)
            insert_lens(d, verts[k - 1], lmap[mf if sign < 0 else pf])
            if sign < 0:
                outer, inner = ([lmap[x] for x in mi], [lmap[x] for x in pi])
            else:
                outer, inner = ([lmap[x] for x in pi], [lmap[x] for x in mi])
            inner_q[(q, k)] = deque(inner)
            outer_q[(q, k)] = deque(outer)
    wing_q: dict[str, deque] = {}
    for q, sign in qsigns:
        entries = []
        for i0, cells in enumerate(wings[q]["rows"]):
            big = len(cells)
            for jj, (_f, din1, din2) in enumerate(cells):
                pos = jj if sign < 0 else big - 1 - jj
                entries.append((pos << (i0 + 1), i0, din1 if sign < 0 else din2))
        entries.sort()
        wing_q[q] = deque(x[2] for x in entries)
    col_q: dict[tuple[str, int], deque] = {}
    for q, _sign in qsigns:
        for j, col in enumerate(quads[q]["columns"], start=1):
            col_q[(q, j)] = deque(din for _f, din in col)
    arm_names = ("s", "r", "sinv", "rinv")
    arm_q = {
        (name, depth): deque([d.twin[arms[name][depth]]])
        for name in arm_names
        for depth in range(1, K + 1)
    }
    central = deque([d.twin[arms["s"][0]]])
    # one sub-window per quadrant per layer: fronts run one at a time, each
    # preceded by the arm cells that unlock it
    quad_arms = {"A": ("s", "r"), "B": ("sinv",), "C": ("rinv",), "D": ()}
    windows: list[list[deque]] = []
    for k in range(K, 0, -1):
        for q, _sign in qsigns:
            w: list[deque] = [arm_q[(name, k)] for name in quad_arms[q]]
            if k == K:
                w.append(wing_q[q])
            elif (q, k) in inner_q:
                w.append(inner_q[(q, k)])
            if (q, k - 1) in outer_q:
                w.append(outer_q[(q, k - 1)])
            if k >= 2:
                w.append(col_q[(q, k - 1)])
            windows.append(w)
    windows.append([central])
    rep0 = d.validate()
    if not rep0.ok:
        raise DiagramError("delta diagram invalid: " + "; ".join(rep0.errors[:3]))
    shelling = scheduled_shelling(d, [], MODE_FREE, windows=windows)
    rep = replay_shelling(d, shelling)
    if not rep.ok:
        raise DiagramError(f"delta shelling replay failed at {rep.error_index}: {rep.error}")
    out = ConstructionOutput(d)
    out.shellings["free"] = shelling
    out.meta["profile"] = rep.profile
    out.meta["n"] = n
    out.certificates["boundary_ok"] = d.boundary_word(d.basepoint) == word_w(n, p)
    out.certificates["area"] = sum(1 for ff in d.faces() if d.face_kind[ff] == INNER)
    out.certificates["shelling_max"] = rep.max_length
    return out


# ---------------------------------------------------------------------------
# wprime
# ---------------------------------------------------------------------------


def build_wprime_diagram(n: int, p: Presentation | None = None) -> ConstructionOutput:
    """Two delta_hat copies (one mirrored) bridged by an [r,s] cell.

    The bridge gluing is chosen (deterministically, from a fixed small set
    of orientations) so that the boundary reads word_w_prime(n) exactly.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    p = p or presentation_rst()
    dh = build_delta_hat(n, p)
    want = word_w_prime(n, p)
    r = p.letter("r")
    s = p.letter("s")
    arms = dh.meta["arms"]
    mir = mirror(dh.diagram)
    for rot_text in ("r s r^-1 s^-1", "r s^-1 r^-1 s"):
        for a_kind in ("s", "sinv"):
            for m_kind in ("s", "sinv"):
                d = dh.diagram.copy()
                bridge = path_diagram(p, Word((r,)))
                run = _attach(bridge, None, [0], _rho(p, rot_text))
                cmap, _, _ = absorb(d, bridge)
                cell_outer = [cmap[run[0]], cmap[run[1]], cmap[run[2]], cmap[1]]
                mmap, _, _ = absorb(d, mir)
                a_dart = arms[a_kind][-1]
                m_dart = mmap[dh.diagram.twin[arms[m_kind][-1]]]
                got = _try_bridge(d, s, a_dart, m_dart, cell_outer, want)
                if got is not None:
                    out = ConstructionOutput(got)
                    out.certificates["boundary_ok"] = True
                    out.certificates["area"] = sum(1 for ff in got.faces() if got.face_kind[ff] == INNER)
                    out.meta["n"] = n
                    return out
    raise DiagramError(f"no bridge orientation yields word_w_prime({n})")


def _try_bridge(d: Diagram, s: int, a_dart: int, m_dart: int, cell_outer: list[int], want: Word):
    """Glue the bridge cell between the two corridor end edges; None on failure."""
    cand_a = [x for x in cell_outer if d.label[x] == -d.label[a_dart]]
    cand_m = [x for x in cell_outer if d.label[x] == -d.label[m_dart]]
    for ca in cand_a:
        for cm in cand_m:
            if ca == cm:
                continue
            trial = d.copy()
            try:
                glue_arcs(trial, [a_dart], [ca])
                glue_arcs(trial, [m_dart], [cm])
            except DiagramError:
                continue
            start = _find_reading(trial, want)
            if start != -1:
                trial.basepoint = trial.origin[start]
                if trial.outer_dart_at(trial.basepoint) == start:
                    return trial
    return None


def _find_reading(d: Diagram, want: Word) -> int:
    """An outer dart from which the boundary reads `want`, smallest at its vertex."""
    if not want:
        return -1
    for dd in d.darts():
        if d.label[dd] != want[0] or d.face_kind[d.face[dd]] != 2:
            continue
        if d.outer_dart_at(d.origin[dd]) != dd:
            continue
        if d.boundary_word(start_dart=dd) == want:
            return dd
    return -1
