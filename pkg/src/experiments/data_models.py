"""
Data models for experiment results and acceptance gates.
"""

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class GateSpec:
    """
    An acceptance gate evaluated across seeds.

    A gate passes when the fraction of seeds whose check passed reaches
    ``min_fraction`` (strictly exceeds it when ``strict``). Gates with
    ``asserted=False`` are reported but do not affect the exit code.
    """

    name: str
    min_fraction: float = 1.0
    strict: bool = False
    asserted: bool = True
    description: str = ""


@dataclass
class GateOutcome:
    """Result of one gate over all seeds."""

    name: str
    passed: bool | None
    asserted: bool
    n_passed: int
    n_evaluated: int
    min_fraction: float
    description: str = ""

    @property
    def fraction(self) -> float | None:
        """Fraction of evaluated seeds that passed."""
        if self.n_evaluated == 0:
            return None
        return self.n_passed / self.n_evaluated

    def to_row(self) -> dict[str, Any]:
        """Flat row for summary.csv."""
        return {
            "gate": self.name,
            "passed": self.passed,
            "asserted": self.asserted,
            "n_passed": self.n_passed,
            "n_evaluated": self.n_evaluated,
            "fraction": self.fraction,
            "min_fraction": self.min_fraction,
        }


@dataclass
class SeedResult:
    """
    Everything one seed produced.

    Attributes:
        seed: Seed owning the NoiseSource lineage
        records: Metric reports written to results.jsonl
        checks: Per-gate pass/fail for this seed (None when not evaluated)
        outputs: Files written, relative to the seed directory
        wall_time: Seconds spent on this seed
    """

    seed: int
    records: list[dict[str, Any]] = field(default_factory=list)
    checks: dict[str, bool | None] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    def add_record(self, **record: Any) -> None:
        self.records.append({"seed": self.seed, **record})

    def check(self, gate: str, passed: bool | None) -> None:
        """Record one gate check; a check evaluated twice must pass both times."""
        previous = self.checks.get(gate)
        if passed is None:
            self.checks.setdefault(gate, None)
        elif previous is None:
            self.checks[gate] = bool(passed)
        else:
            self.checks[gate] = previous and bool(passed)


@dataclass
class ExperimentSummary:
    """Gate outcomes and per-seed results of one experiment run."""

    experiment: str
    seeds: list[int]
    gates: list[GateOutcome] = field(default_factory=list)
    seed_results: list[SeedResult] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        """True iff every asserted gate passed; unevaluated gates do not fail."""
        return all(g.passed is not False for g in self.gates if g.asserted)

    @property
    def failed_gates(self) -> list[str]:
        return [g.name for g in self.gates if g.asserted and g.passed is False]

    def to_dict(self) -> dict[str, Any]:
        """Document for summary.json."""
        return {
            "experiment": self.experiment,
            "seeds": self.seeds,
            "passed": self.passed,
            "gates": [
                {**gate.to_row(), "description": gate.description} for gate in self.gates
            ],
            "wall_time_seconds": self.wall_time,
        }
