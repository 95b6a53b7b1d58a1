"""Maps: node graphs with per-node attribute stores.

A map is either explicit (a finite node set) or backed by a generator
(``torus`` or ``grid``) that answers membership and neighbourhood lazily.
Reconfiguration edits are kept as overlays on top of the generator so that a
torus never has to be materialised.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

from .errors import ModelError

Node = Any


@dataclass(frozen=True)
class AttrDecl:
    name: str
    type: str
    default: Any


@dataclass(frozen=True)
class Map:
    kind: str = "explicit"  # explicit | torus | grid
    size: int | None = None
    nodes: frozenset = frozenset()  # explicit nodes, or nodes added on top of a generator
    removed: frozenset = frozenset()  # generator nodes that were removed
    edges: frozenset = frozenset()  # explicit edges, or edges added on top of a generator
    removed_edges: frozenset = frozenset()
    attr_decls: tuple[AttrDecl, ...] = ()
    attrs: Mapping[Node, Mapping[str, Any]] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("explicit", "torus", "grid"):
            raise ModelError(f"unknown map kind {self.kind!r}")
        if self.kind == "torus" and (self.size is None or self.size < 1):
            raise ModelError("a torus needs a size >= 1")
        if self.kind == "grid" and self.size is not None and self.size < 1:
            raise ModelError("a bounded grid needs a size >= 1")
        for a, b in self.edges:
            if a not in self or b not in self:
                raise ModelError(f"edge ({a!r}, {b!r}) references a missing node")

    # -- membership ---------------------------------------------------------

    def _generated(self, node: Node) -> bool:
        if self.kind == "explicit":
            return False
        if not (isinstance(node, tuple) and len(node) == 2 and all(isinstance(v, int) for v in node)):
            return False
        if self.size is None:
            return True
        return all(0 <= v < self.size for v in node)

    def __contains__(self, node: Node) -> bool:
        if node in self.nodes:
            return True
        return self._generated(node) and node not in self.removed

    def is_finite(self) -> bool:
        return self.kind == "explicit" or self.size is not None

    def all_nodes(self) -> list[Node]:
        if not self.is_finite():
            raise ModelError("cannot enumerate the nodes of an unbounded grid")
        out = set(self.nodes)
        if self.kind != "explicit":
            out.update(n for n in itertools.product(range(self.size), repeat=2) if n not in self.removed)
        return sorted(out, key=repr)

    # -- edges ----------------------------------------------------------------

    def _generated_edge(self, a: Node, b: Node) -> bool:
        if not (self._generated(a) and self._generated(b)):
            return False
        if a in self.removed or b in self.removed:
            return False
        dx, dy = b[0] - a[0], b[1] - a[1]
        if self.kind == "torus":
            dx, dy = _wrapdiff(dx, self.size), _wrapdiff(dy, self.size)
        return abs(dx) + abs(dy) == 1

    def has_edge(self, a: Node, b: Node) -> bool:
        if (a, b) in self.removed_edges:
            return False
        return (a, b) in self.edges or self._generated_edge(a, b)

    def neighbors(self, node: Node) -> list[Node]:
        out = {b for (a, b) in self.edges if a == node}
        if self._generated(node) and node not in self.removed:
            x, y = node
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                cand = self.normalize((x + dx, y + dy), strict=False)
                if cand is not None and self._generated_edge(node, cand):
                    out.add(cand)
        return sorted((b for b in out if (node, b) not in self.removed_edges), key=repr)

    # -- geometry ----------------------------------------------------------------

    def normalize(self, node: Node, strict: bool = True) -> Node | None:
        """Wrap coordinates on a torus; check membership otherwise."""
        if self.kind == "torus" and isinstance(node, tuple) and len(node) == 2:
            node = (node[0] % self.size, node[1] % self.size)
        if node in self:
            return node
        if strict:
            raise ModelError(f"node {node!r} is not in the map")
        return None

    def distance(self, a: Node, b: Node) -> float:
        """Euclidean distance; on a torus the minimal wrapped displacement is used."""
        if not (isinstance(a, tuple) and isinstance(b, tuple)) or len(a) != len(b):
            raise ModelError(f"distance needs coordinate nodes of equal dimension, got {a!r}, {b!r}")
        if self.kind == "torus":
            return math.sqrt(sum(_wrapdiff(y - x, self.size) ** 2 for x, y in zip(a, b)))
        return math.sqrt(sum((y - x) ** 2 for x, y in zip(a, b)))

    # -- attribute stores ---------------------------------------------------------

    def attr(self, node: Node, name: str) -> Any:
        if node not in self:
            raise ModelError(f"node {node!r} is not in the map")
        store = self.attrs.get(node)
        if store is not None and name in store:
            return store[name]
        for d in self.attr_decls:
            if d.name == name:
                return d.default
        raise ModelError(f"map nodes have no attribute {name!r}")

    def attr_type(self, name: str) -> str:
        for d in self.attr_decls:
            if d.name == name:
                return d.type
        raise ModelError(f"map nodes have no attribute {name!r}")

    def with_attr(self, node: Node, name: str, value: Any) -> "Map":
        self.attr(node, name)
        attrs = dict(self.attrs)
        store = dict(attrs.get(node, {}))
        store[name] = value
        attrs[node] = store
        return replace(self, attrs=attrs)

    # -- reconfiguration ---------------------------------------------------------

    def add_node(self, node: Node) -> "Map":
        if node in self:
            return self
        if self._generated(node):
            return replace(self, removed=self.removed - {node})
        return replace(self, nodes=self.nodes | {node})

    def remove_node(self, node: Node) -> "Map":
        if node not in self:
            raise ModelError(f"cannot remove missing node {node!r}")
        attrs = {k: v for k, v in self.attrs.items() if k != node}
        edges = frozenset(e for e in self.edges if node not in e)
        removed_edges = frozenset(e for e in self.removed_edges if node not in e)
        if node in self.nodes:
            return replace(self, nodes=self.nodes - {node}, edges=edges, removed_edges=removed_edges, attrs=attrs)
        return replace(self, removed=self.removed | {node}, edges=edges, removed_edges=removed_edges, attrs=attrs)

    def add_edge(self, a: Node, b: Node) -> "Map":
        if a not in self or b not in self:
            raise ModelError(f"cannot add edge ({a!r}, {b!r}): missing node")
        return replace(self, edges=self.edges | {(a, b)}, removed_edges=self.removed_edges - {(a, b)})

    def remove_edge(self, a: Node, b: Node) -> "Map":
        if not self.has_edge(a, b):
            return self
        if (a, b) in self.edges:
            return replace(self, edges=self.edges - {(a, b)})
        return replace(self, removed_edges=self.removed_edges | {(a, b)})

    def digest(self) -> tuple:
        attrs = tuple(sorted(((repr(n), tuple(sorted(s.items(), key=repr))) for n, s in self.attrs.items()), key=repr))
        return (
            self.kind,
            self.size,
            tuple(sorted(map(repr, self.nodes))),
            tuple(sorted(map(repr, self.removed))),
            tuple(sorted(map(repr, self.edges))),
            tuple(sorted(map(repr, self.removed_edges))),
            attrs,
        )


def _wrapdiff(d: int, size: int) -> int:
    d %= size
    return d - size if d > size // 2 else d


def torus_map(size: int, attrs: Iterable[AttrDecl] = ()) -> Map:
    if size < 1:
        raise ModelError("torus size must be >= 1")
    return Map(kind="torus", size=size, attr_decls=tuple(attrs))


def grid_map(size: int | None = None, attrs: Iterable[AttrDecl] = ()) -> Map:
    return Map(kind="grid", size=size, attr_decls=tuple(attrs))


def explicit_map(nodes: Iterable[Node], edges: Iterable[tuple[Node, Node]] = (), attrs: Iterable[AttrDecl] = ()) -> Map:
    return Map(kind="explicit", nodes=frozenset(nodes), edges=frozenset(edges), attr_decls=tuple(attrs))


def lattice_positions(size: int, per_side: int = 3) -> list[tuple[int, int]]:
    """Uniformly spaced ``per_side`` x ``per_side`` placement on an s x s grid, row-major."""
    step = size // per_side
    if step < 1:
        raise ModelError(f"grid of size {size} is too small for a {per_side}x{per_side} lattice")
    offset = step // 2
    coords = [offset + i * step for i in range(per_side)]
    return [(x, y) for y in coords for x in coords]
