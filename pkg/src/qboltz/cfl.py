"""Substep scheduler: exact-rational interleaving of lattice speeds.

Every discrete speed must advance whole cells only.  The scheduler keeps a
fractional-progress counter per magnitude and always advances time by the
largest dt that brings the fastest pending counter exactly to one cell, so
no speed ever overshoots.  Counters are exact fractions; a cycle closes when
all of them return to zero simultaneously, after which the pattern repeats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ScheduleError


def parse_magnitude(value) -> Fraction:
    """Accept ints, Fractions, or 'p/q' strings; reject floats outright.

    Scheduling is exact arithmetic: a float like 0.1 is not the rational
    1/10, and silently approximating it would break cycle closure.
    """
    if isinstance(value, bool):
        raise ScheduleError("magnitudes must be rational numbers, not booleans")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise ScheduleError(
            f"magnitude {value!r} is a float; write it as an integer or a 'p/q' string"
        )
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ScheduleError(f"cannot parse magnitude {value!r}") from exc
    raise ScheduleError(f"unsupported magnitude type {type(value).__name__}")


@dataclass(frozen=True)
class Substep:
    dt: Fraction
    stepping: frozenset[Fraction]


@dataclass(frozen=True)
class Schedule:
    magnitudes: tuple[Fraction, ...]
    substeps: tuple[Substep, ...]
    cycle_time: Fraction
    cycles: int = 1

    def hops_per_cycle(self, magnitude: Fraction) -> int:
        return sum(1 for s in self.substeps if magnitude in s.stepping)

    @property
    def total_time(self) -> Fraction:
        return self.cycle_time * self.cycles

    def iter_substeps(self):
        """All substeps across every scheduled cycle, in order."""
        for _ in range(self.cycles):
            yield from self.substeps


def next_timestep(
    counters: dict[Fraction, Fraction],
) -> tuple[Fraction, frozenset[Fraction], dict[Fraction, Fraction]]:
    """Advance the progress counters by one substep.

    dt is the largest step that brings the nearest pending counter to
    exactly one cell.  Counters hitting one are reset to zero and their
    magnitudes reported as stepping this substep.
    """
    if not counters:
        raise ScheduleError("at least one magnitude is required")
    dt = min((1 - c) / m for m, c in counters.items())
    if dt <= 0:
        raise ScheduleError("scheduler stalled (zero-length substep)")
    updated: dict[Fraction, Fraction] = {}
    stepping = set()
    for m, c in counters.items():
        c = c + dt * m
        if c == 1:
            c = Fraction(0)
            stepping.add(m)
        elif c > 1:
            raise ScheduleError(f"speed {m} overshot a cell; scheduler bug")
        updated[m] = c
    if not stepping:
        raise ScheduleError("substep advanced no speed; scheduler bug")
    return dt, frozenset(stepping), updated


def build_cycle(magnitudes, max_steps: int = 100_000) -> Schedule:
    """One full cycle of substeps for a set of speed magnitudes."""
    mags = tuple(sorted({parse_magnitude(m) for m in magnitudes}))
    if not mags:
        raise ScheduleError("at least one magnitude is required")
    if any(m <= 0 for m in mags):
        raise ScheduleError("magnitudes must be positive")

    counters = {m: Fraction(0) for m in mags}
    substeps: list[Substep] = []
    elapsed = Fraction(0)
    for _ in range(max_steps):
        dt, stepping, counters = next_timestep(counters)
        elapsed += dt
        substeps.append(Substep(dt=dt, stepping=stepping))
        if all(c == 0 for c in counters.values()):
            schedule = Schedule(
                magnitudes=mags, substeps=tuple(substeps), cycle_time=elapsed
            )
            for m in mags:
                hops = elapsed * m
                if hops.denominator != 1 or schedule.hops_per_cycle(m) != hops:
                    raise ScheduleError(
                        f"cycle of length {elapsed} does not advance speed {m} "
                        "a whole number of cells; scheduler bug"
                    )
            return schedule
    raise ScheduleError(
        f"no closed cycle within {max_steps} substeps for magnitudes "
        f"{[str(m) for m in mags]}; the schedule does not terminate practically"
    )


def build_schedule(magnitudes, cycles: int = 1, max_steps: int = 100_000) -> Schedule:
    """Schedule covering a whole number of cycles.

    Counters return to zero at every cycle boundary, so the multi-cycle
    schedule is the single closed cycle repeated.
    """
    if cycles < 1:
        raise ScheduleError("cycles must be at least 1")
    base = build_cycle(magnitudes, max_steps=max_steps)
    return Schedule(
        magnitudes=base.magnitudes,
        substeps=base.substeps,
        cycle_time=base.cycle_time,
        cycles=cycles,
    )


def schedule_table(schedule: Schedule) -> str:
    """Human-readable substep listing (also used by the CLI)."""
    lines = ["substep,t_start,dt,stepping"]
    t = Fraction(0)
    for i, sub in enumerate(schedule.substeps):
        names = "+".join(str(m) for m in sorted(sub.stepping))
        lines.append(f"{i},{t},{sub.dt},{names}")
        t += sub.dt
    lines.append(f"cycle,,{schedule.cycle_time},")
    return "\n".join(lines) + "\n"
