"""Specular reflection at axis-aligned box obstacles.

Runs after streaming, per substep: set a per-dimension obstacle flag on every
state that just crossed a box wall (head-on or as a component of a diagonal
entry), flip the flagged direction bits, move flagged coordinates one cell
back out, then clear the flags again from position information alone.

Clearing is the subtle part.  An ejected state sits one cell outside the wall
it crossed, pointing away from it, with its stepping flag still set; but a
free state can share that signature when it merely passes by the rim of a
face.  The reset therefore distinguishes three location classes per face:
points whose tangential coordinates all lie strictly inside the face get a
single comparator-guarded rule (no free state can match it); points on the
rim of a face, and points diagonal to edges and corners, get position-exact
rules; and every rim rule is followed by corrective "re-reset" rules that
flip the flag straight back for the pass-by signatures, which are disjoint
from every ejected signature by construction.

Mixed-magnitude caveat: with more than one magnitude per dimension the
substeps interleave hops of different speeds, so a diagonal approach can be
resolved as two axis hops in different substeps and reflect as two head-on
bounces.  The discrete dynamics (and the classical reference) are exact
about this; it is a resolution property of the velocity discretization, not
of the circuit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import ConstructionError
from .gates import Control, Gate, Primitive, cnot, x
from .layout import DIM_NAMES, GridSpec, RegisterLayout
from .qarith import compare_geq, compare_leq, fourier_move


@dataclass(frozen=True)
class Box:
    """Axis-aligned obstacle, inclusive cell ranges per dimension."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self) -> None:
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise ConstructionError("box lo/hi dimensionality mismatch")
        if any(a > b for a, b in zip(lo, hi)):
            raise ConstructionError("box lo must not exceed hi")

    @property
    def ndim(self) -> int:
        return len(self.lo)

    def cells(self) -> Iterator[tuple[int, ...]]:
        yield from itertools.product(*(range(a, b + 1) for a, b in zip(self.lo, self.hi)))

    def contains(self, point: Sequence[int]) -> bool:
        return all(a <= p <= b for p, a, b in zip(point, self.lo, self.hi))


def interior_cells(boxes: Sequence[Box]) -> frozenset[tuple[int, ...]]:
    out: set[tuple[int, ...]] = set()
    for box in boxes:
        out.update(box.cells())
    return frozenset(out)


def _shell(box: Box) -> frozenset[tuple[int, ...]]:
    """Exterior points at Chebyshev distance exactly 1 from the box."""
    outer = set(itertools.product(
        *(range(a - 1, b + 2) for a, b in zip(box.lo, box.hi))
    ))
    return frozenset(outer - set(box.cells()))


def validate_obstacles(boxes: Sequence[Box], grid: GridSpec) -> None:
    """Boxes must sit strictly inside the grid, span at least 2 cells per
    dimension, and keep their one-cell reflection shells disjoint from each
    other and from every other box."""
    shells = []
    cell_sets = []
    for box in boxes:
        if box.ndim != grid.ndim:
            raise ConstructionError("box dimensionality does not match the grid")
        for dim in range(grid.ndim):
            if box.lo[dim] < 1 or box.hi[dim] > grid.shape[dim] - 2:
                raise ConstructionError(
                    f"box {box.lo}-{box.hi} touches the domain edge in "
                    f"{DIM_NAMES[dim]}; its reflection shell would wrap"
                )
            if box.hi[dim] - box.lo[dim] < 1:
                raise ConstructionError(
                    f"box {box.lo}-{box.hi} is thinner than 2 cells in {DIM_NAMES[dim]}"
                )
        shells.append(_shell(box))
        cell_sets.append(frozenset(box.cells()))
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if (shells[i] & shells[j]) or (shells[i] & cell_sets[j]) \
                    or (cell_sets[i] & shells[j]) or (cell_sets[i] & cell_sets[j]):
                raise ConstructionError(
                    f"boxes {i} and {j} are closer than two free cells apart; "
                    "their reflection rules would interfere"
                )


@dataclass(frozen=True)
class WallSpec:
    """One face of a box, as seen by the wall-marking circuit."""

    box: int
    normal_dim: int
    side: int                              # -1 low face, +1 high face
    face_coord: int                        # boundary cell layer inside the box
    spans: tuple[tuple[int, int, int], ...]  # (dim, lo, hi) full tangential spans
    into_bit: int                          # direction bit of an entering state


@dataclass(frozen=True)
class ResetRule:
    """One flag-clearing rule at a fixed exterior location class.

    exact:  (dim, coordinate) matched bit-exactly.
    spans:  (dim, lo, hi) matched through a comparator pair.
    dirs:   (dim, required direction bit).
    steps:  (dim, required stepping-flag bit).
    targets: dims whose obstacle flag is flipped.
    corrective: True for re-reset terms that undo the preceding base rule
        for pass-by states sharing its location.
    """

    kind: str
    box: int
    exact: tuple[tuple[int, int], ...]
    spans: tuple[tuple[int, int, int], ...]
    dirs: tuple[tuple[int, int], ...]
    steps: tuple[tuple[int, int], ...]
    targets: tuple[int, ...]
    corrective: bool = False


def derive_walls(boxes: Sequence[Box]) -> tuple[WallSpec, ...]:
    walls = []
    for bi, box in enumerate(boxes):
        for n in range(box.ndim):
            spans = tuple(
                (t, box.lo[t], box.hi[t]) for t in range(box.ndim) if t != n
            )
            walls.append(WallSpec(bi, n, -1, box.lo[n], spans, into_bit=1))
            walls.append(WallSpec(bi, n, +1, box.hi[n], spans, into_bit=0))
    return tuple(walls)


def _pass_by_patterns(boundary: Sequence[tuple[int, int]]) -> Iterator[
        tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]]:
    """Disjoint control patterns covering "some boundary dim slides into the
    face span": OR over (dir_t = into_t AND step_t = 1), expanded so no two
    patterns overlap.  Yields (dirs, steps) pairs."""
    for i, (t_i, into_i) in enumerate(boundary):
        head_choices: list[list[tuple[tuple[int, int] | None, tuple[int, int]]]] = []
        for t_j, into_j in boundary[:i]:
            head_choices.append([
                (None, (t_j, 0)),                 # that dim did not step
                ((t_j, 1 - into_j), (t_j, 1)),    # stepped but slides outward
            ])
        for combo in itertools.product(*head_choices):
            dirs = [(t_i, into_i)]
            steps = [(t_i, 1)]
            for dir_part, step_part in combo:
                if dir_part is not None:
                    dirs.append(dir_part)
                steps.append(step_part)
            yield tuple(sorted(dirs)), tuple(sorted(steps))


def _rule_kind(adj: int, boundary: int, ndim: int) -> str:
    if adj == 1:
        return ("face", "face-end", "face-corner")[boundary]
    if adj == 2:
        if ndim == 2:
            return "corner"
        return "edge" if boundary == 0 else "edge-end"
    return "corner-3d"


def derive_reset_rules(boxes: Sequence[Box]) -> tuple[ResetRule, ...]:
    """Classify every exterior point adjacent to a box by the dims in which
    it is displaced from the box (adj) and the tangential dims sitting on a
    face-span boundary, and emit base clearing rules plus their pass-by
    correctives.  Locations never overlap, so rule order is irrelevant."""
    rules: list[ResetRule] = []
    for bi, box in enumerate(boxes):
        d = box.ndim
        for r in range(1, d + 1):
            for adj_dims in itertools.combinations(range(d), r):
                tangential = [t for t in range(d) if t not in adj_dims]
                for signs in itertools.product((-1, 1), repeat=r):
                    exact = [
                        (i, box.lo[i] - 1 if s < 0 else box.hi[i] + 1)
                        for i, s in zip(adj_dims, signs)
                    ]
                    dirs = [(i, 0 if s < 0 else 1) for i, s in zip(adj_dims, signs)]
                    steps = [(i, 1) for i in adj_dims]
                    choices = []
                    for t in tangential:
                        opts: list[tuple[str, int]] = [("lo", box.lo[t]), ("hi", box.hi[t])]
                        if box.hi[t] - box.lo[t] >= 2:
                            opts.append(("open", 0))
                        choices.append([(t, wh, val) for wh, val in opts])
                    for combo in itertools.product(*choices):
                        t_exact = list(exact)
                        spans = []
                        boundary = []
                        for t, where, val in combo:
                            if where == "open":
                                spans.append((t, box.lo[t] + 1, box.hi[t] - 1))
                            else:
                                t_exact.append((t, val))
                                boundary.append((t, 1 if where == "lo" else 0))
                        kind = _rule_kind(r, len(boundary), d)
                        base = ResetRule(
                            kind=kind,
                            box=bi,
                            exact=tuple(sorted(t_exact)),
                            spans=tuple(sorted(spans)),
                            dirs=tuple(sorted(dirs)),
                            steps=tuple(sorted(steps)),
                            targets=tuple(adj_dims),
                        )
                        rules.append(base)
                        for extra_dirs, extra_steps in _pass_by_patterns(boundary):
                            rules.append(ResetRule(
                                kind="re-reset",
                                box=bi,
                                exact=base.exact,
                                spans=base.spans,
                                dirs=tuple(sorted(dirs + list(extra_dirs))),
                                steps=tuple(sorted(
                                    [s for s in steps] + list(extra_steps)
                                )),
                                targets=base.targets,
                                corrective=True,
                            ))
    return tuple(rules)


def _position_controls(layout: RegisterLayout, dim: int, coord: int) -> list[Control]:
    if not 0 <= coord < layout.grid.shape[dim]:
        raise ConstructionError(f"coordinate {coord} outside dimension {DIM_NAMES[dim]}")
    return [
        (q, (coord >> b) & 1) for b, q in enumerate(layout.grid_regs[dim])
    ]


def _span_comparators(layout: RegisterLayout,
                      spans: Sequence[tuple[int, int, int]],
                      ) -> tuple[tuple[Primitive, ...], list[Control]]:
    """Comparator pair per span, ranked by dimension; returns the compute
    primitives (self-inverse, so they uncompute by reapplication) and the
    in-span flag controls."""
    if len(spans) > len(layout.cmp_pairs):
        raise ConstructionError("more spans than comparator pairs")
    prims: list[Primitive] = []
    controls: list[Control] = []
    for rank, (dim, lo, hi) in enumerate(sorted(spans)):
        lower_q, upper_q = layout.cmp_pairs[rank]
        reg = layout.grid_regs[dim]
        prims.append(compare_geq(reg, lo, lower_q))
        prims.append(compare_leq(reg, hi, upper_q))
        controls.extend(((lower_q, 1), (upper_q, 1)))
    return tuple(prims), controls


def build_wall_mark(layout: RegisterLayout, boxes: Sequence[Box],
                    active_dims: Sequence[int]) -> Primitive:
    """Set obstacle flags for every state that crossed a wall this substep."""
    children: list[Primitive] = []
    walls = [w for w in derive_walls(boxes) if w.normal_dim in active_dims]
    for (bi, n), pair in itertools.groupby(walls, key=lambda w: (w.box, w.normal_dim)):
        pair = list(pair)
        comparators, span_controls = _span_comparators(layout, pair[0].spans)
        marks: list[Gate] = []
        for wall in pair:
            controls = list(span_controls)
            controls += _position_controls(layout, n, wall.face_coord)
            controls.append((layout.vel_dir[n], wall.into_bit))
            controls.append((layout.flag_step[n], 1))
            marks.append(x(layout.flag_obstacle[n], tuple(controls)))
        children.extend(comparators)
        children.append(Primitive(
            f"cross-b{bi}-{DIM_NAMES[n]}", gates=tuple(marks),
        ))
        children.extend(comparators)
    return Primitive("wall-mark", children=tuple(children))


def build_flip(layout: RegisterLayout, active_dims: Sequence[int]) -> Primitive:
    """Reverse every flagged velocity component: one CNOT per dimension."""
    return Primitive("flip", gates=tuple(
        cnot(layout.flag_obstacle[dim], layout.vel_dir[dim]) for dim in active_dims
    ))


def build_eject(layout: RegisterLayout, active_dims: Sequence[int]) -> Primitive:
    """Move flagged coordinates one cell along their (already flipped)
    direction, back out of the box."""
    children = []
    for dim in active_dims:
        children.append(fourier_move(
            layout.grid_regs[dim],
            plus_controls=((layout.flag_obstacle[dim], 1), (layout.vel_dir[dim], 1)),
            minus_controls=((layout.flag_obstacle[dim], 1), (layout.vel_dir[dim], 0)),
            label=f"eject-{DIM_NAMES[dim]}",
        ))
    return Primitive("eject", children=tuple(children))


def _rule_alive(rule: ResetRule, active_dims: Sequence[int]) -> bool:
    """A rule is dead this substep if any control requires a stepping flag
    of 1 in a dimension that cannot step."""
    return all(dim in active_dims for dim, bit in rule.steps if bit == 1)


def build_reset(layout: RegisterLayout, boxes: Sequence[Box],
                active_dims: Sequence[int]) -> Primitive:
    """Clear the obstacle flags, grouped so rules sharing a comparator span
    signature share one compute/uncompute pair."""
    rules = [
        r for r in derive_reset_rules(boxes)
        if _rule_alive(r, active_dims) and all(i in active_dims for i in r.targets)
    ]
    groups: dict[tuple, list[ResetRule]] = {}
    for rule in rules:
        groups.setdefault((rule.box, rule.spans), []).append(rule)
    children: list[Primitive] = []
    for (bi, spans), members in sorted(groups.items()):
        comparators, span_controls = _span_comparators(layout, spans)
        gates: list[Gate] = []
        for rule in members:
            controls = list(span_controls)
            for dim, coord in rule.exact:
                controls += _position_controls(layout, dim, coord)
            for dim, bit in rule.dirs:
                controls.append((layout.vel_dir[dim], bit))
            for dim, bit in rule.steps:
                controls.append((layout.flag_step[dim], bit))
            for target in rule.targets:
                gates.append(x(layout.flag_obstacle[target], tuple(controls)))
        children.extend(comparators)
        suffix = "faces" if spans else "points"
        children.append(Primitive(f"clear-b{bi}-{suffix}", gates=tuple(gates)))
        children.extend(comparators)
    return Primitive("reset", children=tuple(children))


def build_reflection(layout: RegisterLayout, boxes: Sequence[Box],
                     active_dims: Sequence[int]) -> Primitive | None:
    """The full reflection block for one substep, or None if nothing can
    reflect (no obstacles, or no dimension steps)."""
    if not boxes or not active_dims:
        return None
    return Primitive("reflection", children=(
        build_wall_mark(layout, boxes, active_dims),
        build_flip(layout, active_dims),
        build_eject(layout, active_dims),
        build_reset(layout, boxes, active_dims),
    ))
