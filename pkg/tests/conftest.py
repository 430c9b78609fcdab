import os

from hypothesis import HealthCheck, settings

from tw_congest import sim
from tw_congest.graph import MultiGraph

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


class Flood(sim.NodeProgram):
    """Source(s) inform everyone; each vertex forwards once, never back to a sender."""

    def init(self, view):
        return {"informed": bool(view.inp), "nbrs": view.neighbors, "heard": set(), "sent": False}

    def on_round(self, s, inbox):
        if inbox:
            s["informed"] = True
            s["heard"] |= set(inbox)
        out = {}
        if s["informed"] and not s["sent"]:
            s["sent"] = True
            out = {w: (1,) for w in s["nbrs"] - s["heard"]}
        return s, out, True

    def output(self, s):
        return s["informed"]


def graph(edges, n=None, directed=False, costs=None, vertices=None):
    """MultiGraph from (u, v) pairs with edge ids 0.. in order."""
    vs = set(vertices) if vertices is not None else set(range(n)) if n is not None else {x for e in edges for x in e}
    g = MultiGraph(vs, directed=directed)
    for i, (u, v) in enumerate(edges):
        g.add_edge(u, v, costs[i] if costs else 1, i)
    return g


def path(n, **kw):
    return graph([(i, i + 1) for i in range(n - 1)], n=n, **kw)


def cycle(n, **kw):
    return graph([(i, (i + 1) % n) for i in range(n)], n=n, **kw)
