"""Directed acyclic graphs: d-separation queries and backdoor adjustment sets.

Nodes can carry two marks. ``latent`` nodes are unobserved: they may sit on
paths but can never appear in a conditioning or adjustment set. ``selected``
nodes are conditioned by design (the analysis is restricted to their level),
so every query implicitly adds them to the conditioning set.

Graphs are small by nature here (a handful of exposures, mediators, and
confounders), so the algorithms favor clarity over asymptotics and refuse
graphs with more than 24 nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .errors import ConfigError, DataError

MAX_QUERY_NODES = 24


@dataclass(frozen=True)
class CausalDag:
    """Directed acyclic graph over named nodes.

    Parameters
    ----------
    nodes : iterable of node names.
    edges : iterable of (parent, child) pairs.
    latent : nodes marked unobserved.
    selected : nodes conditioned by design.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    latent: frozenset[str] = frozenset()
    selected: frozenset[str] = frozenset()

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise ConfigError("duplicate node names")
        node_set = set(nodes)
        edges = tuple((str(a), str(b)) for a, b in self.edges)
        if len(set(edges)) != len(edges):
            raise ConfigError("duplicate edges")
        for a, b in edges:
            if a == b:
                raise ConfigError(f"self-loop on {a!r}")
            if a not in node_set or b not in node_set:
                raise ConfigError(f"edge ({a!r}, {b!r}) uses undeclared nodes")
        for mark, name in ((self.latent, "latent"), (self.selected, "selected")):
            bad = set(mark) - node_set
            if bad:
                raise ConfigError(f"{name} marks on undeclared nodes: {sorted(bad)}")
        overlap = set(self.latent) & set(self.selected)
        if overlap:
            raise ConfigError(f"nodes cannot be both latent and selected: {sorted(overlap)}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "latent", frozenset(self.latent))
        object.__setattr__(self, "selected", frozenset(self.selected))
        if self._has_cycle():
            raise ConfigError("graph contains a cycle")

    def _has_cycle(self) -> bool:
        parents = self.parent_map()
        state: dict[str, int] = {}

        def visit(n: str) -> bool:
            state[n] = 1
            for p in parents[n]:
                s = state.get(p, 0)
                if s == 1 or (s == 0 and visit(p)):
                    return True
            state[n] = 2
            return False

        return any(state.get(n, 0) == 0 and visit(n) for n in self.nodes)

    def parent_map(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for a, b in self.edges:
            out[b].add(a)
        return out

    def child_map(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for a, b in self.edges:
            out[a].add(b)
        return out

    def descendants(self, node: str) -> set[str]:
        """All nodes reachable by directed paths from ``node`` (exclusive)."""
        self._check_nodes([node])
        children = self.child_map()
        seen: set[str] = set()
        stack = [node]
        while stack:
            for c in children[stack.pop()]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    def ancestors_of(self, targets: Iterable[str]) -> set[str]:
        """Targets plus every node with a directed path into them."""
        parents = self.parent_map()
        seen = set(targets)
        stack = list(seen)
        while stack:
            for p in parents[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def without_edges_from(self, node: str) -> "CausalDag":
        """Copy with every edge leaving ``node`` removed."""
        return CausalDag(
            nodes=self.nodes,
            edges=tuple(e for e in self.edges if e[0] != node),
            latent=self.latent,
            selected=self.selected,
        )

    def _check_nodes(self, names: Iterable[str]) -> None:
        missing = [n for n in names if n not in set(self.nodes)]
        if missing:
            raise DataError("unknown nodes: " + ", ".join(sorted(missing)))

    def _check_size(self) -> None:
        if len(self.nodes) > MAX_QUERY_NODES:
            raise ConfigError(
                f"graph has {len(self.nodes)} nodes; queries support at most "
                f"{MAX_QUERY_NODES}"
            )


def d_separated(g: CausalDag, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """True when ``x`` and ``y`` are d-separated by ``z`` in ``g``.

    Selection-marked nodes are always part of the conditioning set.
    Uses the ancestral moral graph construction: restrict to ancestors of
    {x, y} and the conditioning set, marry co-parents, drop directions,
    delete conditioned nodes, and test undirected reachability.
    """
    g._check_size()
    z = set(z)
    g._check_nodes([x, y, *z])
    if x == y:
        raise DataError("x and y must be distinct")
    if x in z or y in z:
        raise DataError("query nodes cannot be in the conditioning set")
    cond = z | set(g.selected)
    cond.discard(x)
    cond.discard(y)
    keep = g.ancestors_of({x, y} | cond)
    parents = g.parent_map()

    adj: dict[str, set[str]] = {n: set() for n in keep}
    for a, b in g.edges:
        if a in keep and b in keep:
            adj[a].add(b)
            adj[b].add(a)
    for n in keep:
        ps = [p for p in parents[n] if p in keep]
        for a, b in combinations(ps, 2):
            adj[a].add(b)
            adj[b].add(a)

    seen = {x}
    stack = [x]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt == y:
                return False
            if nxt not in seen and nxt not in cond:
                seen.add(nxt)
                stack.append(nxt)
    return True


def backdoor_adjustment_sets(g: CausalDag, exposure: str, outcome: str) -> list[tuple[str, ...]]:
    """All minimal observed adjustment sets closing the backdoor paths.

    A candidate set may contain only observed (non-latent, non-selected)
    nodes that are not descendants of the exposure, and is valid when it
    d-separates exposure and outcome in the graph with the exposure's
    outgoing edges removed (only backdoor paths survive that surgery).
    Selection-marked nodes are conditioned implicitly and never listed.

    Returns the minimal valid sets sorted lexicographically by member
    names. ``[()]`` means no adjustment is needed; ``[]`` means no valid
    observed set exists.
    """
    g._check_size()
    g._check_nodes([exposure, outcome])
    if exposure == outcome:
        raise DataError("exposure and outcome must be distinct")
    forbidden = g.descendants(exposure) | {exposure, outcome} | set(g.latent) | set(g.selected)
    candidates = sorted(n for n in g.nodes if n not in forbidden)
    stripped = g.without_edges_from(exposure)

    minimal: list[tuple[str, ...]] = []
    for size in range(len(candidates) + 1):
        for subset in combinations(candidates, size):
            chosen = set(subset)
            if any(set(m) <= chosen for m in minimal):
                continue
            if d_separated(stripped, exposure, outcome, chosen):
                minimal.append(subset)
    return sorted(minimal)


def parse_dag(text: str) -> CausalDag:
    """Parse the plain-text graph format.

    One statement per line. ``a -> b`` declares an edge (and its nodes),
    ``node x`` declares an isolated node, ``latent u`` and ``selected s``
    add marks. ``#`` starts a comment; blank lines are ignored.
    """
    nodes: list[str] = []
    seen: set[str] = set()
    edges: list[tuple[str, str]] = []
    latent: set[str] = set()
    selected: set[str] = set()

    def add_node(name: str) -> None:
        if name not in seen:
            seen.add(name)
            nodes.append(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            parts = [p.strip() for p in line.split("->")]
            if len(parts) < 2 or not all(parts):
                raise ConfigError(f"line {lineno}: malformed edge {raw.strip()!r}")
            for a, b in zip(parts, parts[1:]):
                add_node(a)
                add_node(b)
                edges.append((a, b))
            continue
        tokens = line.split()
        if len(tokens) == 2 and tokens[0] in ("latent", "selected", "node"):
            add_node(tokens[1])
            if tokens[0] == "latent":
                latent.add(tokens[1])
            elif tokens[0] == "selected":
                selected.add(tokens[1])
            continue
        raise ConfigError(f"line {lineno}: cannot parse {raw.strip()!r}")

    if not nodes:
        raise ConfigError("graph text declares no nodes")
    return CausalDag(
        nodes=tuple(nodes),
        edges=tuple(dict.fromkeys(edges)),
        latent=frozenset(latent),
        selected=frozenset(selected),
    )
