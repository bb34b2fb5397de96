"""Step the layered delta shelling by hand and report where it stalls."""

import sys
from collections import deque

sys.path.insert(0, "src")

from fillinglength.constructions import _make_lens, build_delta_hat, build_omega
from fillinglength.diagram import INNER, OUTER, TwoCellCollapse
from fillinglength.shellings import _Drainer
from fillinglength.surgery import absorb, insert_lens
from fillinglength.words import presentation_rst

n = int(sys.argv[1]) if len(sys.argv) > 1 else 2
p = presentation_rst()
K = 1 << n
dh = build_delta_hat(n, p)
d = dh.diagram
arms, quads, wings = dh.meta["arms"], dh.meta["quads"], dh.meta["wings"]
qsigns = (("A", -1), ("B", 1), ("C", -1), ("D", 1))
om_cache = {}
inner_q, outer_q = {}, {}
for q, sign in qsigns:
    for k in range(2, K):
        if k not in om_cache:
            om_cache[k] = build_omega(k, p, lens_ready=True)
        lens, pf, mf, pi, mi = _make_lens(om_cache[k])
        lmap, _, _ = absorb(d, lens)
        insert_lens(d, quads[q]["verticals"][k - 1], lmap[mf if sign < 0 else pf])
        if sign < 0:
            outer, inner = [lmap[x] for x in mi], [lmap[x] for x in pi]
        else:
            outer, inner = [lmap[x] for x in pi], [lmap[x] for x in mi]
        inner_q[(q, k)] = deque(inner)
        outer_q[(q, k)] = deque(outer)

wing_q = {}
for q, sign in qsigns:
    entries = []
    for i0, cells in enumerate(wings[q]["rows"]):
        big = len(cells)
        for jj, (_f, din1, din2) in enumerate(cells):
            pos = jj if sign < 0 else big - 1 - jj
            entries.append((pos << (i0 + 1), i0, din1 if sign < 0 else din2))
    entries.sort()
    wing_q[q] = deque(x[2] for x in entries)
col_q = {}
for q, _sign in qsigns:
    for j, col in enumerate(quads[q]["columns"], start=1):
        col_q[(q, j)] = deque(din for _f, din in col)
arm_names = ("s", "r", "sinv", "rinv")
arm_q = {(nm, dep): deque([d.twin[arms[nm][dep]]]) for nm in arm_names for dep in range(1, K + 1)}
central = deque([d.twin[arms["s"][0]]])
windows, names = [], []
for k in range(K, 0, -1):
    w, nm = [], []
    if k == K:
        for q, _ in qsigns:
            w.append(wing_q[q])
            nm.append(f"wing{q}")
    else:
        for q, _ in qsigns:
            if (q, k) in inner_q:
                w.append(inner_q[(q, k)])
                nm.append(f"inner{q}{k}")
    for q, _ in qsigns:
        if (q, k - 1) in outer_q:
            w.append(outer_q[(q, k - 1)])
            nm.append(f"outer{q}{k-1}")
    for name in arm_names:
        w.append(arm_q[(name, k)])
        nm.append(f"arm_{name}_{k}")
    if k >= 2:
        for q, _ in qsigns:
            w.append(col_q[(q, k - 1)])
            nm.append(f"col{q}{k-1}")
    windows.append(w)
    names.append(nm)
windows.append([central])
names.append(["central"])

cur = d.copy()
moves = []
drain = _Drainer(cur, None, moves)
drain.offer(list(cur.darts()))
widx = 0
fired = []
while True:
    while widx < len(windows) and all(not q for q in windows[widx]):
        widx += 1
    if widx >= len(windows):
        print("DONE; fired", len(fired))
        break
    progressed = False
    for qi, q in enumerate(windows[widx]):
        while q and (not cur.dart_alive[q[0]] or cur.face_kind[cur.face[q[0]]] != INNER):
            fired.append((names[widx][qi], q.popleft(), "POPPED"))
        if not q:
            continue
        din = q[0]
        if cur.face_kind[cur.face[cur.twin[din]]] != OUTER:
            continue
        q.popleft()
        cyc = cur.face_cycle(cur.face[din])
        m = TwoCellCollapse(din)
        moves.append(m)
        cur.apply(m)
        fired.append((names[widx][qi], din, "FIRED"))
        drain.offer([x for x in cyc if x != din])
        progressed = True
        break
    if not progressed:
        print("STUCK window", widx, "after", len([f for f in fired if f[2] == "FIRED"]), "firings")
        for qi, q in enumerate(windows[widx]):
            if q:
                din = q[0]
                tf = cur.face[cur.twin[din]]
                print(
                    "  ",
                    names[widx][qi],
                    "head",
                    din,
                    "label",
                    cur.label[din],
                    "twin",
                    cur.twin[din],
                    "twinface",
                    tf,
                    "kind",
                    cur.face_kind[tf],
                    "word",
                    p.render(cur.face_word(tf))[:50] if cur.face_kind[tf] else "",
                )
        break
for entry in fired[-30:]:
    print(entry)
