"""Directed acyclic graphs, regime-augmented DAGs and d-separation."""

from __future__ import annotations

import heapq
from typing import Iterable, Mapping

import networkx as nx

from .exceptions import CycleDetected, ModelError

SOLID = "solid"
DASHED = "dashed"


class Dag:
    """A directed graph over named nodes with optional edge style tags.

    Construction only checks for self-loops, duplicate edges and unknown
    nodes; acyclicity is checked by :func:`validate`. Dashed edges are
    metadata marking edges that disappear under an intervention.
    """

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable = ()):
        self.nodes: tuple[str, ...] = ()
        self.styles: dict[tuple[str, str], str] = {}
        self._parents: dict[str, list[str]] = {}
        self._children: dict[str, list[str]] = {}
        node_list = []
        for n in nodes:
            if n in self._parents:
                raise ModelError(f"duplicate node {n!r}")
            node_list.append(n)
            self._parents[n] = []
            self._children[n] = []
        self.nodes = tuple(sorted(node_list))
        for edge in edges:
            self._add_edge(*edge)

    def _add_edge(self, parent, child, style=SOLID):
        if parent not in self._parents or child not in self._parents:
            raise ModelError(f"edge {parent!r} -> {child!r} references an unknown node")
        if parent == child:
            raise ModelError(f"self-loop on {parent!r}")
        if (parent, child) in self.styles:
            raise ModelError(f"duplicate edge {parent!r} -> {child!r}")
        if style not in (SOLID, DASHED):
            raise ModelError(f"unknown edge style {style!r}")
        self.styles[(parent, child)] = style
        self._parents[child].append(parent)
        self._children[parent].append(child)

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(self.styles))

    def parents(self, node: str) -> tuple[str, ...]:
        return tuple(sorted(self._parents[node]))

    def children(self, node: str) -> tuple[str, ...]:
        return tuple(sorted(self._children[node]))

    def ancestors(self, nodes: Iterable[str]) -> set[str]:
        """Ancestors of ``nodes``, including the nodes themselves."""
        seen = set()
        stack = list(nodes)
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(self._parents[n])
        return seen

    def descendants(self, nodes: Iterable[str]) -> set[str]:
        """Descendants of ``nodes``, including the nodes themselves."""
        seen = set()
        stack = list(nodes)
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(self._children[n])
        return seen

    def subgraph(self, nodes: Iterable[str]) -> Dag:
        keep = set(nodes)
        return Dag(keep, [(p, c, s) for (p, c), s in self.styles.items() if p in keep and c in keep])

    def __contains__(self, node) -> bool:
        return node in self._parents

    def __repr__(self):
        return f"{type(self).__name__}(nodes={list(self.nodes)}, edges={list(self.edges)})"


class AugmentedDag(Dag):
    """A DAG carrying non-stochastic regime nodes.

    Parameters
    ----------
    nodes, edges
        The stochastic part of the graph.
    regimes : mapping
        ``{regime_node: target}``; each regime node is added as a parentless
        node with the single child ``target``. Edges from stochastic parents
        into a regime target are tagged dashed unless tagged otherwise.
    """

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable = (), regimes: Mapping[str, str] | None = None):
        regimes = dict(regimes or {})
        nodes = list(nodes)
        edges = [tuple(e) for e in edges]
        for r, target in regimes.items():
            if r in nodes:
                raise ModelError(f"regime node {r!r} clashes with a stochastic node")
            if target not in nodes:
                raise ModelError(f"regime node {r!r} targets unknown node {target!r}")
        targets = list(regimes.values())
        if len(set(targets)) != len(targets):
            raise ModelError("each stochastic node may have at most one regime node")
        styled = []
        for e in edges:
            if len(e) == 2 and e[1] in targets:
                e = (e[0], e[1], DASHED)
            styled.append(e)
        super().__init__(nodes + list(regimes), styled + [(r, t) for r, t in regimes.items()])
        self.regimes: dict[str, str] = dict(sorted(regimes.items()))
        self.regime_of: dict[str, str] = {t: r for r, t in self.regimes.items()}

    @property
    def stochastic_nodes(self) -> tuple[str, ...]:
        return tuple(n for n in self.nodes if n not in self.regimes)

    @property
    def stochastic_edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(e for e in self.edges if e[0] not in self.regimes)

    def stochastic_parents(self, node: str) -> tuple[str, ...]:
        return tuple(p for p in self.parents(node) if p not in self.regimes)

    def subgraph(self, nodes: Iterable[str]) -> AugmentedDag:
        keep = set(nodes)
        regimes = {r: t for r, t in self.regimes.items() if r in keep and t in keep}
        edges = [
            (p, c, s) for (p, c), s in self.styles.items()
            if p in keep and c in keep and p not in self.regimes
        ]
        return AugmentedDag([n for n in keep if n not in self.regimes], edges, regimes)


def validate(g: Dag) -> list[str]:
    """Topologically sort ``g`` or raise :class:`CycleDetected`.

    Ties are broken lexicographically, so the order is deterministic.
    """
    indegree = {n: len(g._parents[n]) for n in g.nodes}
    heap = [n for n, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for c in g._children[n]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(heap, c)
    if len(order) < len(g.nodes):
        raise CycleDetected(_find_cycle(g, {n for n, d in indegree.items() if d > 0}))
    return order


def _find_cycle(g: Dag, remaining: set[str]) -> list[str]:
    # every node left after Kahn's algorithm has a parent that is also left,
    # so walking parents must revisit a node
    start = min(remaining)
    path, seen = [start], {start: 0}
    node = start
    while True:
        node = min(p for p in g._parents[node] if p in remaining)
        if node in seen:
            cycle = path[seen[node]:][::-1]
            return cycle + [cycle[0]]
        seen[node] = len(path)
        path.append(node)


def moralize(g: Dag) -> nx.Graph:
    """Marry co-parents and drop edge directions."""
    m = nx.Graph()
    m.add_nodes_from(g.nodes)
    m.add_edges_from(g.styles)
    for n in g.nodes:
        ps = g.parents(n)
        for i, a in enumerate(ps):
            for b in ps[i + 1:]:
                m.add_edge(a, b)
    return m


def _as_set(nodes) -> set[str]:
    if isinstance(nodes, str):
        return {nodes}
    return set(nodes)


def d_separated(g: Dag, a, b, c=()) -> bool:
    """Whether ``c`` d-separates ``a`` from ``b`` in ``g``.

    Uses the moral graph of the ancestral subgraph of ``a | b | c``: the
    sets are d-separated iff ``c`` separates ``a`` from ``b`` there.
    """
    a, b, c = _as_set(a), _as_set(b), _as_set(c)
    for name, s in (("a", a), ("b", b), ("c", c)):
        unknown = s - set(g.nodes)
        if unknown:
            raise ModelError(f"unknown nodes in {name}: {sorted(unknown)}")
    if a & b or a & c or b & c:
        raise ModelError("node sets passed to d_separated must be disjoint")
    if not a or not b:
        return True
    # regime nodes act as ordinary nodes here, so take the plain subgraph
    moral = moralize(Dag.subgraph(g, g.ancestors(a | b | c)))
    moral.remove_nodes_from(c)
    reach = set()
    for n in a:
        if n not in reach:
            reach |= nx.node_connected_component(moral, n)
    return not (reach & b)
