"""Partly overloaded OVSF code tree and class-aware code allocation.

Node ``(layer, index)`` carries row ``index`` of ``ovsf_matrix(layer)``; its
children are ``2*index`` -> ``(c, c)`` and ``2*index + 1`` -> ``(c, -c)``.
With that numbering the upper half of every layer is the subtree under
``(1, 0)``, i.e. exactly the rows whose neighbouring chips are equal, and
those stay orthogonal to every extra sequence.

Extras live only at the leaf layer. Catalog entry ``j`` hangs off lower
leaf ``half + j % half`` as variant ``j // half + 1``.
"""

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .codes import generate_overloaded_set, log2_exact, ovsf_matrix
from .errors import (
    InvalidNode,
    NoOrthogonalCapacity,
    NotAllocated,
    OverloadCapacityExhausted,
)


class TrafficClass(str, enum.Enum):
    MACHINE_TYPE = "machine_type"
    BEST_EFFORT = "best_effort"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"mt": "machine_type", "be": "best_effort"}
        return cls(aliases.get(key, key))


class NodeAddress(NamedTuple):
    layer: int
    index: int
    variant: int = 0

    def __str__(self):
        return f"({self.layer},{self.index},{self.variant})"


@dataclass(frozen=True)
class Allocation:
    user_id: int
    traffic_class: TrafficClass


def is_mother(a, b):
    """True iff one node is a strict ancestor of the other (variant-0 nodes only)."""
    a, b = NodeAddress(*a), NodeAddress(*b)
    for node in (a, b):
        if node.layer < 0 or not 0 <= node.index < 2 ** node.layer:
            raise InvalidNode(f"{node} is not a tree position")
        if node.variant != 0:
            raise InvalidNode(f"{node}: extras have no ancestry")
    if a.layer == b.layer:
        return False
    hi, lo = (a, b) if a.layer < b.layer else (b, a)
    return lo.index >> (lo.layer - hi.layer) == hi.index


def blockwise_orthogonal(x, y):
    """Orthogonality of two codes of possibly different lengths.

    The shorter code spreads one symbol per block of its own length, with an
    independent symbol in every block, so it must be orthogonal to each
    aligned block of the longer code.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    short, long_ = (x, y) if x.size <= y.size else (y, x)
    if long_.size % short.size:
        raise ValueError("code lengths must divide each other")
    blocks = long_.reshape(-1, short.size)
    return bool(np.all(blocks @ short == 0))


class CodeTree:
    """Allocation state over the tree with leaf spreading factor ``2**max_layer``.

    Not thread-safe for writes; callers serialise ``allocate``/``release``.
    """

    def __init__(self, max_layer, n_extras="all"):
        if max_layer < 1:
            raise ValueError("the tree needs at least one layer below the root")
        self.max_layer = int(max_layer)
        sf = 2 ** self.max_layer
        if self.max_layer >= 2:
            self.catalog = generate_overloaded_set(sf, n_extras)
            self.extras = self.catalog.extras
        else:
            self.catalog = None
            self.extras = np.empty((0, sf), dtype=np.int8)
        self.allocations = {}
        self._next_user = 0
        self._matrices = {}

    @classmethod
    def for_sf(cls, sf, n_extras="all"):
        return cls(log2_exact(sf), n_extras)

    @property
    def sf(self):
        return 2 ** self.max_layer

    @property
    def half(self):
        return 2 ** (self.max_layer - 1)

    @property
    def extras_per_node(self):
        return -(-self.extras.shape[0] // self.half)

    def extra_node(self, j):
        """Node carrying catalog entry ``j``."""
        return NodeAddress(self.max_layer, self.half + j % self.half, j // self.half + 1)

    def extra_index(self, node):
        return (node.variant - 1) * self.half + (node.index - self.half)

    def validate(self, node):
        node = NodeAddress(*node)
        layer, index, variant = node
        if not 0 <= layer <= self.max_layer:
            raise InvalidNode(f"{node}: layer outside 0..{self.max_layer}")
        if not 0 <= index < 2 ** layer:
            raise InvalidNode(f"{node}: index outside 0..{2 ** layer - 1}")
        if variant < 0:
            raise InvalidNode(f"{node}: negative variant")
        if variant:
            if layer != self.max_layer or index < self.half:
                raise InvalidNode(f"{node}: extras exist only on lower-half leaves")
            if self.extra_index(node) >= self.extras.shape[0]:
                raise InvalidNode(f"{node}: no such extra in the catalog")
        return node

    def _matrix(self, layer):
        if layer not in self._matrices:
            self._matrices[layer] = ovsf_matrix(layer)
        return self._matrices[layer]

    def code_of(self, node):
        node = self.validate(node)
        if node.variant:
            return self.extras[self.extra_index(node)].copy()
        return self._matrix(node.layer)[node.index].copy()

    def are_orthogonal(self, a, b):
        return blockwise_orthogonal(self.code_of(a), self.code_of(b))

    def is_upper(self, node):
        return node.layer >= 1 and node.index < 2 ** (node.layer - 1)

    def _blocked(self, node):
        if node in self.allocations:
            return True
        for other in self.allocations:
            if other.variant == 0 and is_mother(node, other):
                return True
        return False

    def allocate(self, traffic_class, sf=None, user_id=None):
        """Assign the lowest-index free code for ``traffic_class``.

        Machine-type users get upper-half codes only. Best-effort users get
        lower-half base codes first and, at the leaf layer, extras in catalog
        order once those are gone.
        """
        traffic_class = TrafficClass.parse(traffic_class)
        layer = self.max_layer if sf is None else log2_exact(sf)
        if not 1 <= layer <= self.max_layer:
            raise InvalidNode(f"sf={sf} is not a layer of this tree")
        half = 2 ** (layer - 1)
        if traffic_class is TrafficClass.MACHINE_TYPE:
            candidates = range(half)
        else:
            candidates = range(half, 2 * half)
        node = next(
            (n for n in (NodeAddress(layer, i, 0) for i in candidates) if not self._blocked(n)),
            None,
        )
        if node is None and traffic_class is TrafficClass.BEST_EFFORT and layer == self.max_layer:
            node = next(
                (n for n in map(self.extra_node, range(self.extras.shape[0]))
                 if n not in self.allocations),
                None,
            )
        if node is None:
            if traffic_class is TrafficClass.MACHINE_TYPE:
                raise NoOrthogonalCapacity(f"no free upper-half code at layer {layer}")
            raise OverloadCapacityExhausted(f"no free lower-half code or extra at layer {layer}")
        self.assign(node, traffic_class, user_id)
        return node

    def assign(self, node, traffic_class, user_id=None):
        """Record an allocation at an explicit node."""
        node = self.validate(node)
        if node.variant == 0 and self._blocked(node) or node in self.allocations:
            raise InvalidNode(f"{node} conflicts with an existing allocation")
        if user_id is None:
            user_id = self._next_user
        self._next_user = max(self._next_user, int(user_id) + 1)
        self.allocations[node] = Allocation(int(user_id), TrafficClass.parse(traffic_class))
        return node

    def release(self, node):
        node = NodeAddress(*node)
        if node not in self.allocations:
            raise NotAllocated(f"{node} is not allocated")
        del self.allocations[node]

    def __eq__(self, other):
        if not isinstance(other, CodeTree):
            return NotImplemented
        return (
            self.max_layer == other.max_layer
            and self.allocations == other.allocations
            and np.array_equal(self.extras, other.extras)
        )

    def dump(self):
        """One ``layer,index,variant,user_id,class`` line per allocation."""
        lines = [
            f"{n.layer},{n.index},{n.variant},{a.user_id},{a.traffic_class.value}"
            for n, a in sorted(self.allocations.items())
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    def load(self, text):
        for raw in text.splitlines():
            if not raw.strip():
                continue
            layer, index, variant, user_id, cls = (f.strip() for f in raw.split(","))
            self.assign(NodeAddress(int(layer), int(index), int(variant)), cls, int(user_id))
        return self


def code_of(tree, node):
    return tree.code_of(node)


def are_orthogonal(tree, a, b):
    return tree.are_orthogonal(a, b)


def allocate(tree, traffic_class, sf=None):
    return tree.allocate(traffic_class, sf)


def release(tree, node):
    tree.release(node)
