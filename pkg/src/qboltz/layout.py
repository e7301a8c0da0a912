"""Register layout: velocity, grid, and ancilla fields on one qubit line.

Qubit 0 is the least significant bit of a basis index.  Field order from the
LSB up: per-dimension velocity groups (magnitude bits, then the direction bit
on top of each group), per-dimension grid coordinates, then the ancillae:
one stepping flag per dim, one obstacle flag per dim, and 2*(d-1) comparator
bits arranged as (lower, upper) pairs.  Dimensions are ordered x, y, z.

Velocity encoding per dimension: magnitude index in the low bits, direction
bit 1 = positive axis direction.  The all-zeros field is therefore the most
negative speed.  When the magnitude count is not a power of two the spare
encodings are padding: they are never marked as stepping, so they neither
stream nor reflect, and the classical reference rejects them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cfl import parse_magnitude
from .errors import ConstructionError

DIM_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class GridSpec:
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        shape = tuple(int(n) for n in self.shape)
        object.__setattr__(self, "shape", shape)
        if len(shape) not in (2, 3):
            raise ConstructionError("grids must be 2- or 3-dimensional")
        for n in shape:
            if n < 2 or n & (n - 1):
                raise ConstructionError(f"grid extent {n} is not a power of two >= 2")

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def qubits_per_dim(self) -> tuple[int, ...]:
        return tuple(n.bit_length() - 1 for n in self.shape)

    def cell_count(self) -> int:
        out = 1
        for n in self.shape:
            out *= n
        return out


@dataclass(frozen=True)
class VelocityTable:
    magnitudes: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if len(self.magnitudes) not in (2, 3):
            raise ConstructionError("velocity tables must cover 2 or 3 dimensions")
        for dim, mags in enumerate(self.magnitudes):
            if not mags:
                raise ConstructionError(f"dimension {DIM_NAMES[dim]} has no magnitudes")
            if any(m <= 0 for m in mags):
                raise ConstructionError("magnitudes must be positive")
            if tuple(sorted(set(mags))) != mags:
                raise ConstructionError("magnitudes must be strictly ascending and distinct")
        maxima = [mags[-1] for mags in self.magnitudes]
        c_rel = max(maxima) / min(maxima)
        if c_rel > 1:
            raise ConstructionError(
                f"relative speed limit exceeded (c_rel = {c_rel}); "
                "every dimension must share the same maximum speed"
            )

    @classmethod
    def from_lists(cls, per_dim) -> "VelocityTable":
        return cls(tuple(
            tuple(sorted(parse_magnitude(m) for m in mags)) for mags in per_dim
        ))

    @property
    def ndim(self) -> int:
        return len(self.magnitudes)

    def mag_bits(self, dim: int) -> int:
        return max(1, (len(self.magnitudes[dim]) - 1).bit_length())

    def field_bits(self, dim: int) -> int:
        return self.mag_bits(dim) + 1

    def encode_speed(self, dim: int, speed: Fraction | int | str) -> int:
        speed = parse_magnitude(speed) if not isinstance(speed, Fraction) else speed
        if speed == 0:
            raise ConstructionError("speeds are signed and nonzero")
        direction = 1 if speed > 0 else 0
        try:
            index = self.magnitudes[dim].index(abs(speed))
        except ValueError:
            raise ConstructionError(
                f"|{speed}| is not a magnitude of dimension {DIM_NAMES[dim]}"
            ) from None
        return (direction << self.mag_bits(dim)) | index

    def decode_field(self, dim: int, field: int) -> Fraction | None:
        """Signed speed for an encoded field, or None for padding."""
        m = self.mag_bits(dim)
        index = field & ((1 << m) - 1)
        if index >= len(self.magnitudes[dim]):
            return None
        speed = self.magnitudes[dim][index]
        return speed if (field >> m) & 1 else -speed

    def field_values(self, dim: int) -> tuple[int, ...]:
        """All non-padding encodings for one dimension."""
        m = self.mag_bits(dim)
        count = len(self.magnitudes[dim])
        return tuple(
            (direction << m) | index
            for direction in (0, 1)
            for index in range(count)
        )

    def all_magnitudes(self) -> tuple[Fraction, ...]:
        out: set[Fraction] = set()
        for mags in self.magnitudes:
            out.update(mags)
        return tuple(sorted(out))


@dataclass(frozen=True)
class DecodedState:
    positions: tuple[int, ...]
    vel_fields: tuple[int, ...]
    speeds: tuple[Fraction | None, ...]
    directions: tuple[int, ...]
    step_flags: tuple[int, ...]
    obstacle_flags: tuple[int, ...]
    cmp_bits: tuple[int, ...]

    @property
    def clean(self) -> bool:
        return not (any(self.step_flags) or any(self.obstacle_flags) or any(self.cmp_bits))


@dataclass(frozen=True)
class RegisterLayout:
    grid: GridSpec
    velocity: VelocityTable
    vel_mag: tuple[tuple[int, ...], ...]
    vel_dir: tuple[int, ...]
    grid_regs: tuple[tuple[int, ...], ...]
    flag_step: tuple[int, ...]
    flag_obstacle: tuple[int, ...]
    cmp_pairs: tuple[tuple[int, int], ...]
    num_qubits: int

    @property
    def ndim(self) -> int:
        return self.grid.ndim

    @property
    def ancilla_qubits(self) -> tuple[int, ...]:
        out = list(self.flag_step) + list(self.flag_obstacle)
        for lower, upper in self.cmp_pairs:
            out.extend((lower, upper))
        return tuple(out)

    @property
    def ancilla_mask(self) -> int:
        mask = 0
        for q in self.ancilla_qubits:
            mask |= 1 << q
        return mask

    def grid_shift(self, dim: int) -> int:
        return self.grid_regs[dim][0]

    def grid_width(self, dim: int) -> int:
        return len(self.grid_regs[dim])

    def vel_field_shift(self, dim: int) -> int:
        return self.vel_mag[dim][0]

    def encode_fields(self, positions: tuple[int, ...], fields: tuple[int, ...]) -> int:
        index = 0
        for dim, pos in enumerate(positions):
            if not 0 <= pos < self.grid.shape[dim]:
                raise ConstructionError(f"position {pos} outside dimension {DIM_NAMES[dim]}")
            index |= pos << self.grid_shift(dim)
        for dim, field in enumerate(fields):
            if not 0 <= field < (1 << self.velocity.field_bits(dim)):
                raise ConstructionError(f"velocity field {field} too wide for {DIM_NAMES[dim]}")
            index |= field << self.vel_field_shift(dim)
        return index

    def encode_state(self, positions, speeds) -> int:
        fields = tuple(
            self.velocity.encode_speed(dim, speed) for dim, speed in enumerate(speeds)
        )
        return self.encode_fields(tuple(positions), fields)

    def decode(self, index: int) -> DecodedState:
        positions = tuple(
            (index >> self.grid_shift(dim)) & ((1 << self.grid_width(dim)) - 1)
            for dim in range(self.ndim)
        )
        fields = tuple(
            (index >> self.vel_field_shift(dim)) & ((1 << self.velocity.field_bits(dim)) - 1)
            for dim in range(self.ndim)
        )
        speeds = tuple(self.velocity.decode_field(d, f) for d, f in enumerate(fields))
        directions = tuple(
            (f >> self.velocity.mag_bits(d)) & 1 for d, f in enumerate(fields)
        )
        return DecodedState(
            positions=positions,
            vel_fields=fields,
            speeds=speeds,
            directions=directions,
            step_flags=tuple((index >> q) & 1 for q in self.flag_step),
            obstacle_flags=tuple((index >> q) & 1 for q in self.flag_obstacle),
            cmp_bits=tuple(
                (index >> q) & 1 for pair in self.cmp_pairs for q in pair
            ),
        )

    def qubit_roles(self) -> tuple[str, ...]:
        roles = [""] * self.num_qubits
        for dim in range(self.ndim):
            name = DIM_NAMES[dim]
            for b, q in enumerate(self.vel_mag[dim]):
                roles[q] = f"vel-{name}-mag{b}"
            roles[self.vel_dir[dim]] = f"vel-{name}-dir"
            for b, q in enumerate(self.grid_regs[dim]):
                roles[q] = f"grid-{name}-{b}"
            roles[self.flag_step[dim]] = f"flag-step-{name}"
            roles[self.flag_obstacle[dim]] = f"flag-obstacle-{name}"
        for rank, (lower, upper) in enumerate(self.cmp_pairs):
            roles[lower] = f"cmp-lower-{rank}"
            roles[upper] = f"cmp-upper-{rank}"
        return tuple(roles)

    def role_qubit(self, role: str) -> int:
        try:
            return self.qubit_roles().index(role)
        except ValueError:
            raise ConstructionError(f"unknown qubit role {role!r}") from None

    def describe(self) -> str:
        lines = [
            f"{self.num_qubits} qubits "
            f"({self.ndim}D grid {'x'.join(str(n) for n in self.grid.shape)}, "
            f"{sum(len(m) for m in self.velocity.magnitudes)} magnitudes, "
            f"{len(self.ancilla_qubits)} ancillae)"
        ]
        for q, role in enumerate(self.qubit_roles()):
            lines.append(f"  q{q:<3d} {role}")
        return "\n".join(lines)


def build_layout(grid: GridSpec, velocity: VelocityTable) -> RegisterLayout:
    if grid.ndim != velocity.ndim:
        raise ConstructionError("grid and velocity table dimensionalities differ")
    cursor = 0
    vel_mag: list[tuple[int, ...]] = []
    vel_dir: list[int] = []
    for dim in range(grid.ndim):
        m = velocity.mag_bits(dim)
        vel_mag.append(tuple(range(cursor, cursor + m)))
        cursor += m
        vel_dir.append(cursor)
        cursor += 1
    grid_regs: list[tuple[int, ...]] = []
    for width in grid.qubits_per_dim:
        grid_regs.append(tuple(range(cursor, cursor + width)))
        cursor += width
    flag_step = tuple(range(cursor, cursor + grid.ndim))
    cursor += grid.ndim
    flag_obstacle = tuple(range(cursor, cursor + grid.ndim))
    cursor += grid.ndim
    cmp_pairs = []
    for _ in range(grid.ndim - 1):
        cmp_pairs.append((cursor, cursor + 1))
        cursor += 2
    return RegisterLayout(
        grid=grid,
        velocity=velocity,
        vel_mag=tuple(vel_mag),
        vel_dir=tuple(vel_dir),
        grid_regs=tuple(grid_regs),
        flag_step=flag_step,
        flag_obstacle=flag_obstacle,
        cmp_pairs=tuple(cmp_pairs),
        num_qubits=cursor,
    )
