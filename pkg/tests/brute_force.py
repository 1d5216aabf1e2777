"""Reference enumeration for the hom-set tests.

Paths are grown breadth-first from the source; classes come from a naive
congruence closure that rewrites every path with every 2-cell until no
label changes. Nothing here is imported from dicontext.fundcat.
"""
from __future__ import annotations

from collections import deque

from dicontext.complex import DiComplex


def all_paths(c: DiComplex, x: str, y: str) -> list[tuple[str, ...]]:
    succ: dict[str, list[tuple[str, str]]] = {}
    for e in c.edges:
        if e.directed:
            succ.setdefault(e.src, []).append((e.id, e.dst))
    found = []
    queue = deque([(x, ())])
    while queue:
        v, path = queue.popleft()
        if v == y:
            found.append(path)
        for eid, w in succ.get(v, []):
            queue.append((w, path + (eid,)))
    return sorted(found)


def path_classes(c: DiComplex, x: str, y: str) -> list[list[tuple[str, ...]]]:
    paths = all_paths(c, x, y)
    label = {p: i for i, p in enumerate(paths)}
    rules = [(cell.path_a, cell.path_b) for cell in c.cells]
    rules += [(b, a) for a, b in rules]
    changed = True
    while changed:
        changed = False
        for p in paths:
            for old, new in rules:
                for i in range(len(p) - len(old) + 1):
                    if p[i:i + len(old)] != tuple(old):
                        continue
                    q = p[:i] + tuple(new) + p[i + len(old):]
                    if q in label and label[q] != label[p]:
                        keep, drop = sorted((label[p], label[q]))
                        for k, v in label.items():
                            if v == drop:
                                label[k] = keep
                        changed = True
    groups: dict[int, list[tuple[str, ...]]] = {}
    for p, v in label.items():
        groups.setdefault(v, []).append(p)
    return sorted(sorted(g) for g in groups.values())
