"""Gate and circuit-primitive model with an exact CNOT accounting.

The cost of a primitive is charged in CNOT equivalents from a fixed table:
plain X/H/phase gates are free, a singly-controlled X is 1, a multi-controlled
X with p >= 2 controls is 2*p^2, a phase with c controls is 2*c, and a swap
is 3.  Arithmetic constructors override the naive sum with their closed-form
charges (see qarith); everything else sums over its parts, so concatenating
primitives adds their costs exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .errors import ConstructionError

Control = tuple[int, int]

_KINDS = frozenset({"x", "h", "phase", "swap"})


@dataclass(frozen=True)
class Gate:
    """One elementary gate on named qubit lines.

    kind "x":     bit flip on targets[0]; any number of controls.
    kind "h":     Hadamard on targets[0]; no controls.
    kind "phase": diag(1, e^{i*theta}) on targets[0]; any number of controls.
    kind "swap":  exchange targets[0] and targets[1]; no controls.

    Controls are (qubit, required value) pairs, so rules that fire on a 0
    bit carry the polarity directly instead of wrapping the control in X.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[Control, ...] = ()
    theta: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConstructionError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind == "swap" else 1
        if len(self.targets) != want or len(set(self.targets)) != want:
            raise ConstructionError(f"{self.kind} gate needs {want} distinct target(s)")
        if self.kind in ("h", "swap") and self.controls:
            raise ConstructionError(f"controlled {self.kind} is not part of the gate set")
        seen = set(self.targets)
        for qubit, value in self.controls:
            if qubit in seen:
                raise ConstructionError("control lines must be distinct from targets and each other")
            if value not in (0, 1):
                raise ConstructionError("control values must be 0 or 1")
            seen.add(qubit)

    def qubits(self) -> frozenset[int]:
        return frozenset(self.targets) | frozenset(q for q, _ in self.controls)

    def inverse(self) -> Gate:
        if self.kind == "phase":
            return Gate("phase", self.targets, self.controls, -self.theta)
        return self

    def cnot_cost(self) -> int:
        p = len(self.controls)
        if self.kind == "x":
            if p == 0:
                return 0
            return 1 if p == 1 else 2 * p * p
        if self.kind == "phase":
            return 2 * p
        if self.kind == "swap":
            return 3
        return 0


def x(target: int, controls: tuple[Control, ...] = ()) -> Gate:
    return Gate("x", (target,), tuple(controls))


def h(target: int) -> Gate:
    return Gate("h", (target,))


def phase(target: int, theta: float, controls: tuple[Control, ...] = ()) -> Gate:
    return Gate("phase", (target,), tuple(controls), theta)


def swap(a: int, b: int) -> Gate:
    return Gate("swap", (a, b))


def cnot(control: int, target: int) -> Gate:
    return x(target, ((control, 1),))


@dataclass(frozen=True)
class Primitive:
    """A labeled circuit fragment: either a leaf gate list or child fragments.

    `cnot_cost` defaults to the sum over parts; pass an explicit value (with
    closed_form=True) to charge a published formula instead.  `perm_ops`
    optionally declares the fragment's action as a basis-state permutation
    for the sparse backend; the dense backend always walks `gates`.
    """

    label: str
    gates: tuple[Gate, ...] = ()
    children: tuple[Primitive, ...] = ()
    perm_ops: tuple[object, ...] | None = None
    cnot_cost: int = -1
    closed_form: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if self.gates and self.children:
            raise ConstructionError(f"primitive {self.label!r} mixes gates and children")
        if self.cnot_cost < 0:
            natural = sum(g.cnot_cost() for g in self.gates) + sum(
                c.cnot_cost for c in self.children
            )
            object.__setattr__(self, "cnot_cost", natural)
        elif not self.closed_form:
            object.__setattr__(self, "closed_form", True)

    def iter_gates(self) -> Iterator[Gate]:
        if self.gates:
            yield from self.gates
        for child in self.children:
            yield from child.iter_gates()

    def qubits(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for gate in self.iter_gates():
            out |= gate.qubits()
        return out

    def gate_count(self) -> int:
        return sum(1 for _ in self.iter_gates())

    def inverse(self) -> Primitive:
        if self.gates:
            inv_gates = tuple(g.inverse() for g in reversed(self.gates))
            return Primitive(
                f"{self.label}-inv", gates=inv_gates,
                cnot_cost=self.cnot_cost, closed_form=self.closed_form,
            )
        inv_children = tuple(c.inverse() for c in reversed(self.children))
        return Primitive(
            f"{self.label}-inv", children=inv_children,
            cnot_cost=self.cnot_cost, closed_form=self.closed_form,
        )


def cost_breakdown(primitive: Primitive, prefix: str = "") -> dict[str, int]:
    """Map slash-joined label paths to CNOT charges.

    Recursion stops at closed-form nodes and gate leaves, so every charge is
    attributed exactly once and the values sum to primitive.cnot_cost.
    """
    path = f"{prefix}/{primitive.label}" if prefix else primitive.label
    if primitive.closed_form or not primitive.children:
        return {path: primitive.cnot_cost}
    out: dict[str, int] = {}
    for child in primitive.children:
        for key, value in cost_breakdown(child, path).items():
            out[key] = out.get(key, 0) + value
    return out
