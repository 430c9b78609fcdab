"""Line-oriented text formats for graphs and decompositions."""

from __future__ import annotations

from .graph import INF, MultiGraph, TreeDecomposition


def _cost_text(c) -> str:
    return "inf" if c == INF else str(c)


def _cost_value(tok: str):
    return INF if tok == "inf" else int(tok)


def dump_graph(g: MultiGraph) -> str:
    lines = [f"{g.n} {g.m} {1 if g.directed else 0}"]
    if g.vertices != set(range(g.n)):
        lines.append("vertices " + " ".join(str(v) for v in sorted(g.vertices)))
    for eid in sorted(g.gamma):
        u, v = g.gamma[eid]
        lines.append(f"{eid} {u} {v} {_cost_text(g.cost[eid])}")
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> MultiGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ValueError("empty graph description")
    n, m, directed = (int(t) for t in rows[0])
    body = rows[1:]
    if body and body[0][0] == "vertices":
        vertices = {int(t) for t in body[0][1:]}
        body = body[1:]
    else:
        vertices = set(range(n))
    if len(vertices) != n:
        raise ValueError("vertex count does not match the header")
    if len(body) != m:
        raise ValueError(f"expected {m} edge lines, found {len(body)}")
    g = MultiGraph(vertices, directed=bool(directed))
    for row in body:
        if len(row) != 4:
            raise ValueError(f"malformed edge line: {' '.join(row)}")
        g.add_edge(int(row[1]), int(row[2]), _cost_value(row[3]), int(row[0]))
    return g


def dump_decomposition(td: TreeDecomposition) -> str:
    lines = []
    for x in sorted(td.bags, key=lambda y: (len(y), y)):
        key = ".".join(str(c) for c in x)
        lines.append(f"{key} : " + " ".join(str(v) for v in sorted(td.bags[x])))
    return "\n".join(lines) + "\n"


def load_decomposition(text: str) -> TreeDecomposition:
    bags = {}
    for ln in text.splitlines():
        if not ln.strip():
            continue
        key, _, rest = ln.partition(":")
        key = key.strip()
        x = tuple(int(c) for c in key.split(".")) if key else ()
        if x in bags:
            raise ValueError(f"duplicate bag id {key!r}")
        bags[x] = {int(t) for t in rest.split()}
    return TreeDecomposition(bags)
