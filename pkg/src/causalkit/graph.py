"""Causal DAGs: construction, d-separation, and backdoor identification.

Node sets are stored as integer bitmasks (bit i = node i in declaration
order), which keeps the d-separation routines allocation-free and fast
enough for exhaustive small-graph verification.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import (
    CycleError,
    DuplicateEdgeError,
    GraphSyntaxError,
    NoCausalPathError,
    NoValidAdjustmentSetError,
    OverlapError,
    UnknownNodeError,
)

_FORBIDDEN_IN_NAME = ("->", "#", ",")

PATH_ENUMERATION_MAX_NODES = 64


def _check_name(name: str) -> str:
    if not name:
        raise GraphSyntaxError("empty node name")
    if any(ch.isspace() for ch in name):
        raise GraphSyntaxError(f"node name contains whitespace: {name!r}")
    for bad in _FORBIDDEN_IN_NAME:
        if bad in name:
            raise GraphSyntaxError(f"node name contains {bad!r}: {name!r}")
    return name


def _bits(mask: int):
    """Yield the set bit positions of a mask, lowest first."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class CausalGraph:
    """An immutable directed acyclic graph over named variables.

    An edge (a, b) reads "a causes b". Construction validates node names,
    rejects self-loops and duplicate edges, and fails if the edges admit
    no topological order.
    """

    __slots__ = ("nodes", "edges", "_index", "_parents", "_children", "_order")

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple[str, str]]):
        self.nodes: tuple[str, ...] = tuple(_check_name(n) for n in nodes)
        self._index: dict[str, int] = {}
        for i, name in enumerate(self.nodes):
            if name in self._index:
                raise GraphSyntaxError(f"duplicate node name: {name!r}")
            self._index[name] = i

        n = len(self.nodes)
        parents = [0] * n
        children = [0] * n
        seen: set[tuple[str, str]] = set()
        ordered_edges: list[tuple[str, str]] = []
        for a, b in edges:
            if a not in self._index:
                raise UnknownNodeError(f"edge endpoint not declared: {a!r}")
            if b not in self._index:
                raise UnknownNodeError(f"edge endpoint not declared: {b!r}")
            if a == b:
                raise CycleError(f"self-loop on {a!r}")
            if (a, b) in seen:
                raise DuplicateEdgeError(f"duplicate edge {a} -> {b}")
            seen.add((a, b))
            ordered_edges.append((a, b))
            ia, ib = self._index[a], self._index[b]
            parents[ib] |= 1 << ia
            children[ia] |= 1 << ib

        self.edges: tuple[tuple[str, str], ...] = tuple(ordered_edges)
        self._parents = parents
        self._children = children
        self._order = self._topological_order()

    # -- basic structure ---------------------------------------------------

    def _node_id(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownNodeError(f"unknown node: {name!r}") from None

    def _topological_order(self) -> tuple[int, ...]:
        """Kahn's algorithm; among ready nodes the earliest-declared wins."""
        n = len(self.nodes)
        indegree = [self._parents[i].bit_count() for i in range(n)]
        ready = [i for i in range(n) if indegree[i] == 0]
        order: list[int] = []
        while ready:
            v = min(ready)
            ready.remove(v)
            order.append(v)
            for c in _bits(self._children[v]):
                indegree[c] -= 1
                if indegree[c] == 0:
                    ready.append(c)
        if len(order) != n:
            stuck = [self.nodes[i] for i in range(n) if indegree[i] > 0]
            raise CycleError(f"graph contains a cycle through {stuck}")
        return tuple(order)

    def topological_order(self) -> list[str]:
        """Nodes ordered so every edge points forward; ties keep declaration order."""
        return [self.nodes[i] for i in self._order]

    def parents(self, name: str) -> set[str]:
        return {self.nodes[i] for i in _bits(self._parents[self._node_id(name)])}

    def children(self, name: str) -> set[str]:
        return {self.nodes[i] for i in _bits(self._children[self._node_id(name)])}

    def _closure(self, start: int, step: list[int]) -> int:
        """Transitive closure mask of `step` links from node `start` (exclusive)."""
        frontier = step[start]
        reached = 0
        while frontier:
            reached |= frontier
            nxt = 0
            for v in _bits(frontier):
                nxt |= step[v]
            frontier = nxt & ~reached
        return reached

    def ancestors(self, name: str) -> set[str]:
        """All strict ancestors of a node (the node itself excluded)."""
        mask = self._closure(self._node_id(name), self._parents)
        return {self.nodes[i] for i in _bits(mask)}

    def descendants(self, name: str) -> set[str]:
        """All strict descendants of a node (the node itself excluded)."""
        mask = self._closure(self._node_id(name), self._children)
        return {self.nodes[i] for i in _bits(mask)}

    # -- d-separation ------------------------------------------------------

    def _query_masks(self, x: str, y: str, z: Iterable[str]) -> tuple[int, int, int]:
        ix, iy = self._node_id(x), self._node_id(y)
        zmask = 0
        for name in z:
            zmask |= 1 << self._node_id(name)
        if (zmask >> ix) & 1 or (zmask >> iy) & 1:
            raise OverlapError(f"{x!r} or {y!r} appears in the conditioning set")
        return ix, iy, zmask

    def d_separated(self, x: str, y: str, z: Iterable[str] = ()) -> bool:
        """True iff every path between x and y is blocked given z.

        Uses reachability over active paths (Bayes-ball): a chain or fork
        is blocked when its middle node is conditioned on; a collider is
        blocked unless it or one of its descendants is conditioned on.
        """
        ix, iy, zmask = self._query_masks(x, y, z)
        return self._dsep_reachability(ix, iy, zmask)

    def d_separated_moralized(self, x: str, y: str, z: Iterable[str] = ()) -> bool:
        """d-separation decided by the moralized ancestral subgraph.

        Independent of d_separated(): restrict to ancestors of {x, y} | z,
        marry co-parents, drop edge directions, delete z, and test whether
        x and y are disconnected.
        """
        ix, iy, zmask = self._query_masks(x, y, z)
        return self._dsep_moral(ix, iy, zmask)

    def _dsep_reachability(self, ix: int, iy: int, zmask: int) -> bool:
        # Bit loops are inlined (no _bits generator): this routine sits inside
        # exhaustive verification loops and the call overhead dominates.
        if ix == iy:
            return False
        parents, children = self._parents, self._children

        # nodes that are in z or have a descendant in z (collider openers)
        anc_z = zmask
        frontier = zmask
        while frontier:
            nxt = 0
            m = frontier
            while m:
                low = m & -m
                nxt |= parents[low.bit_length() - 1]
                m ^= low
            frontier = nxt & ~anc_z
            anc_z |= frontier

        # visited masks per travel direction of arrival at a node:
        # "up" = arrived from a child (moving against edges),
        # "down" = arrived from a parent (moving along edges).
        up = 1 << ix
        down = 1 << ix
        stack = [(ix, True), (ix, False)]
        ybit = 1 << iy
        while stack:
            v, arriving_up = stack.pop()
            vbit = 1 << v
            new_par = 0
            new_chi = 0
            if arriving_up:
                if zmask & vbit:
                    continue
                # pass through as chain/fork: parents (up) and children (down)
                new_par = parents[v] & ~up
                new_chi = children[v] & ~down
            else:
                if not zmask & vbit:
                    new_chi = children[v] & ~down
                if anc_z & vbit:
                    # open collider: bounce back to parents
                    new_par = parents[v] & ~up
            if (new_par | new_chi) & ybit:
                return False
            up |= new_par
            while new_par:
                low = new_par & -new_par
                stack.append((low.bit_length() - 1, True))
                new_par ^= low
            down |= new_chi
            while new_chi:
                low = new_chi & -new_chi
                stack.append((low.bit_length() - 1, False))
                new_chi ^= low
        return True

    def _dsep_moral(self, ix: int, iy: int, zmask: int) -> bool:
        if ix == iy:
            return False
        parents = self._parents

        anc = (1 << ix) | (1 << iy) | zmask
        frontier = anc
        while frontier:
            nxt = 0
            m = frontier
            while m:
                low = m & -m
                nxt |= parents[low.bit_length() - 1]
                m ^= low
            frontier = nxt & ~anc
            anc |= frontier

        # undirected adjacency of the moral graph on the ancestral set
        adj = [0] * len(self.nodes)
        m = anc
        while m:
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            ps = parents[v] & anc
            adj[v] |= ps
            pm = ps
            while pm:
                plow = pm & -pm
                p = plow.bit_length() - 1
                pm ^= plow
                adj[p] |= low | (ps & ~plow)

        # connectivity from x to y avoiding z
        blocked = zmask
        reached = 1 << ix
        frontier = reached
        ybit = 1 << iy
        while frontier:
            nxt = 0
            m = frontier
            while m:
                low = m & -m
                nxt |= adj[low.bit_length() - 1]
                m ^= low
            frontier = nxt & ~reached & ~blocked
            reached |= frontier
            if reached & ybit:
                return False
        return True

    # -- backdoor machinery -------------------------------------------------

    def backdoor_paths(self, t: str, y: str) -> list[list[str]]:
        """All simple undirected t..y paths whose first edge points into t.

        Returned in lexicographic order of the node-name sequence. Path
        enumeration is exponential, so it is refused on graphs larger than
        PATH_ENUMERATION_MAX_NODES.
        """
        if t == y:
            raise OverlapError("treatment and outcome must differ")
        if len(self.nodes) > PATH_ENUMERATION_MAX_NODES:
            raise ValueError(
                f"path enumeration limited to {PATH_ENUMERATION_MAX_NODES} nodes"
            )
        it, iy = self._node_id(t), self._node_id(y)
        neighbors = [self._parents[i] | self._children[i] for i in range(len(self.nodes))]

        paths: list[list[str]] = []
        path = [it]

        def extend(v: int, visited: int) -> None:
            if v == iy:
                paths.append([self.nodes[i] for i in path])
                return
            for w in _bits(neighbors[v] & ~visited):
                path.append(w)
                extend(w, visited | (1 << w))
                path.pop()

        # first hop must enter t against an edge, i.e. go to a parent of t
        for p in _bits(self._parents[it]):
            path.append(p)
            extend(p, (1 << it) | (1 << p))
            path.pop()
        paths.sort()
        return paths

    def _without_outgoing(self, t: str) -> "CausalGraph":
        """Copy of the graph with every edge out of t removed."""
        kept = [(a, b) for a, b in self.edges if a != t]
        return CausalGraph(self.nodes, kept)

    def identify_backdoor(self, t: str, y: str, max_set_size: int = 8) -> "Estimand":
        """Find a minimum backdoor adjustment set for the effect of t on y.

        Candidates are all nodes except t, y, and descendants of t. Subsets
        are searched by increasing cardinality (capped at max_set_size) and,
        within a cardinality, in lexicographic name order; the first subset
        that d-separates t from y in the graph with t's outgoing edges
        removed is returned.

        Raises NoCausalPathError when y is not a descendant of t and
        NoValidAdjustmentSetError when no candidate subset works.
        """
        if t == y:
            raise OverlapError("treatment and outcome must differ")
        desc_t = self.descendants(t)
        if y not in desc_t:
            raise NoCausalPathError(f"{y!r} is not a descendant of {t!r}")

        candidates = sorted(set(self.nodes) - {t, y} - desc_t)
        stripped = self._without_outgoing(t)
        limit = min(len(candidates), max_set_size)
        for size in range(limit + 1):
            for combo in combinations(candidates, size):
                if stripped.d_separated(t, y, combo):
                    return Estimand(
                        treatment=t,
                        outcome=y,
                        adjustment_set=list(combo),
                        assumption_text=render_unconfoundedness(t, y, combo),
                    )
        raise NoValidAdjustmentSetError(
            f"no subset of {candidates} (size <= {max_set_size}) blocks every "
            f"backdoor path from {t!r} to {y!r}"
        )

    # -- misc ----------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return self.nodes == other.nodes and set(self.edges) == set(other.edges)

    def __hash__(self) -> int:
        return hash((self.nodes, frozenset(self.edges)))

    def __repr__(self) -> str:
        return f"CausalGraph({len(self.nodes)} nodes, {len(self.edges)} edges)"


@dataclass(frozen=True)
class Estimand:
    """A backdoor estimand: what to adjust for and the assumption it rests on.

    The unobserved-confounder symbol U appears only inside assumption_text;
    it is never a graph node.
    """

    treatment: str
    outcome: str
    adjustment_set: list[str]
    assumption_text: str = ""

    def __post_init__(self) -> None:
        if self.treatment == self.outcome:
            raise OverlapError("treatment and outcome must differ")
        if self.treatment in self.adjustment_set or self.outcome in self.adjustment_set:
            raise OverlapError("treatment/outcome cannot appear in the adjustment set")


def render_unconfoundedness(t: str, y: str, adjustment: Sequence[str]) -> str:
    """The unconfoundedness sentence shown in reports."""
    given = ",".join([t, *adjustment])
    return (
        f"If U→{{{t}}} and U→{y} then "
        f"P({y}|{given},U) = P({y}|{given})"
    )


def parse_graph(text: str) -> CausalGraph:
    """Parse edge-list graph source.

    One item per line: ``A -> B`` declares an edge, a bare name declares an
    isolated node, ``#`` starts a comment, blank lines are ignored and
    surrounding whitespace is trimmed. Nodes are ordered by first mention.
    """
    nodes: list[str] = []
    index: set[str] = set()
    edges: list[tuple[str, str]] = []

    def declare(name: str) -> None:
        if name not in index:
            _check_name(name)
            index.add(name)
            nodes.append(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            parts = line.split("->")
            if len(parts) != 2:
                raise GraphSyntaxError(f"line {lineno}: malformed edge: {raw.strip()!r}")
            a, b = parts[0].strip(), parts[1].strip()
            if not a or not b:
                raise GraphSyntaxError(f"line {lineno}: malformed edge: {raw.strip()!r}")
            declare(a)
            declare(b)
            edges.append((a, b))
        else:
            declare(line)
    return CausalGraph(nodes, edges)


def render_graph(g: CausalGraph) -> str:
    """Graph source text that parse_graph() maps back to an equal graph."""
    lines = list(g.nodes)
    lines.extend(f"{a} -> {b}" for a, b in g.edges)
    return "\n".join(lines) + "\n"
