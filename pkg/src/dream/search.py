"""Exhaustive interaction search over enabled ports, vectorised with numpy.

Each interaction is a bitmask over the canonically sorted enabled ports.
Guards are partially evaluated against the configuration first, so only
port and idle literals are left for the array evaluation.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import Port, sort_ports
from .errors import EvaluationError, UniverseTooLarge
from .pil import And, Const, Formula, Idle, Not, Or, PortLit, Pred

CHUNK = 1 << 16


class MaskSpace:
    """All interactions over ``ports`` with at most one port per instance."""

    def __init__(self, ports: Iterable[Port], limit: int = 24):
        self.ports: list[Port] = sort_ports(set(ports))
        if len(self.ports) > limit:
            raise UniverseTooLarge(f"{len(self.ports)} enabled ports exceed the search bound {limit}")
        self.index = {p: i for i, p in enumerate(self.ports)}
        groups: dict[int, list[int]] = {}
        for p, i in self.index.items():
            groups.setdefault(p.instance, []).append(i)
        self.groups = groups
        self.instance_mask = {c: sum(1 << i for i in bits) for c, bits in groups.items()}

    def size(self) -> int:
        n = 1
        for bits in self.groups.values():
            n *= len(bits) + 1
        return n

    def chunks(self, chunk: int = CHUNK) -> Iterator[np.ndarray]:
        """Every mask, emitted as int64 arrays of bounded length."""
        options = [np.array([0] + [1 << i for i in bits], dtype=np.int64) for _, bits in sorted(self.groups.items())]
        inner = np.zeros(1, dtype=np.int64)
        split = len(options)
        while split > 0 and inner.size * options[split - 1].size <= chunk:
            split -= 1
            inner = (options[split][:, None] | inner[None, :]).ravel()
        for combo in itertools.product(*(o.tolist() for o in options[:split])):
            yield inner | np.int64(sum(combo))

    def interaction(self, mask: int) -> frozenset:
        return frozenset(p for p, i in self.index.items() if mask >> i & 1)

    def mask(self, a: Iterable[Port]) -> int:
        m = 0
        for p in a:
            if p not in self.index:
                raise EvaluationError(f"port {p} is not enabled")
            m |= 1 << self.index[p]
        return m


def evaluate_masks(f: Formula, space: MaskSpace, masks: np.ndarray) -> np.ndarray:
    """Truth value of a port-only formula on every mask."""
    cache: dict[int, np.ndarray] = {}
    return _eval(f, space, masks, cache)


def _eval(f: Formula, space: MaskSpace, masks: np.ndarray, cache: dict) -> np.ndarray:
    if isinstance(f, Const):
        return np.full(masks.shape, f.value, dtype=bool)
    if isinstance(f, PortLit):
        i = space.index.get(f.port)
        if i is None:
            return np.zeros(masks.shape, dtype=bool)
        if i not in cache:
            cache[i] = (masks >> i) & 1 == 1
        return cache[i]
    if isinstance(f, Not):
        return ~_eval(f.operand, space, masks, cache)
    if isinstance(f, And):
        out = _eval(f.items[0], space, masks, cache).copy()
        for x in f.items[1:]:
            out &= _eval(x, space, masks, cache)
        return out
    if isinstance(f, Or):
        out = _eval(f.items[0], space, masks, cache).copy()
        for x in f.items[1:]:
            out |= _eval(x, space, masks, cache)
        return out
    if isinstance(f, Idle):
        bits = space.instance_mask.get(f.instance, 0)
        return (masks & bits) == 0
    if isinstance(f, Pred):
        raise EvaluationError("state predicates must be evaluated before the mask search")
    raise TypeError(f"not a formula: {f!r}")


def satisfying_masks(formulas: Sequence[Formula], space: MaskSpace) -> list[int]:
    """Masks satisfying every formula, the empty mask included."""
    out: list[int] = []
    for masks in space.chunks():
        ok = np.ones(masks.shape, dtype=bool)
        for f in formulas:
            ok &= evaluate_masks(f, space, masks)
            if not ok.any():
                break
        out.extend(masks[ok].tolist())
    return out


def maximal(masks: Iterable[int]) -> list[int]:
    """Masks with no strict superset in the collection."""
    ordered = sorted(set(masks), key=lambda m: -bin(m).count("1"))
    kept: list[int] = []
    for m in ordered:
        if not any(k & m == m and k != m for k in kept):
            kept.append(m)
    return kept
