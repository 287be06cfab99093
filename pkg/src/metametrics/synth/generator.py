"""Seeded synthetic revision histories with optional regression injections."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

from metametrics.errors import InvalidConfig
from metametrics.history import (
    ArtifactHistory,
    HistorySet,
    IndicatorSample,
    RevisionRecord,
    TestOutcome,
)
from metametrics.synth.prng import MASK64, SplitMix64, derive_seed

INJECTION_KINDS = ("failure-rate", "duration-drift", "acting-variance", "indicator-spike")


@dataclass(frozen=True)
class Situation:
    id: str
    mean: float
    jitter: float


@dataclass(frozen=True)
class Injection:
    """A regression starting at revision ``start`` (inclusive).

    failure-rate     pass probability lowered by ``magnitude``
    duration-drift   duration mean scaled by ``1 + magnitude``
    acting-variance  acting jitter scaled by ``magnitude``
    indicator-spike  misra/mccabe/uncovered scaled by ``1 + magnitude``
    """

    start: int
    kind: str
    magnitude: float


@dataclass(frozen=True)
class GeneratorConfig:
    artifacts: int = 3
    revisions: int = 100
    pass_probability: float = 0.8
    seed: int = 0
    sloc_base: int = 1000
    sloc_growth: float = 2.0
    misra_rate: float = 5.0  # warnings per 1000 sloc
    mccabe_base: float = 10.0
    mccabe_drift: float = 0.01
    uncovered_rate: float = 0.1  # fraction of sloc
    duration_mean: float = 10.0
    duration_jitter: float = 0.5
    situations: tuple[Situation, ...] = (Situation("cutin", 2.0, 0.05),)
    missing_probability: float = 0.0
    injections: tuple[Injection, ...] = ()
    artifact_prefix: str = "A"

    def __post_init__(self) -> None:
        object.__setattr__(self, "situations", tuple(self.situations))
        object.__setattr__(self, "injections", tuple(self.injections))
        self.validate()

    def validate(self) -> None:
        def need(ok: bool, name: str, detail: str) -> None:
            if not ok:
                raise InvalidConfig(name, detail)

        def is_int(v: Any) -> bool:
            return isinstance(v, int) and not isinstance(v, bool)

        def is_num(v: Any) -> bool:
            return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)

        need(is_int(self.artifacts) and self.artifacts >= 1, "artifacts", "integer >= 1")
        need(is_int(self.revisions) and self.revisions >= 1, "revisions", "integer >= 1")
        need(is_num(self.pass_probability) and 0 <= self.pass_probability <= 1,
             "pass_probability", "number in [0, 1]")
        need(is_int(self.seed) and 0 <= self.seed <= MASK64, "seed", "unsigned 64-bit integer")
        need(is_int(self.sloc_base) and self.sloc_base >= 1, "sloc_base", "integer >= 1")
        for name in ("sloc_growth", "misra_rate", "mccabe_base", "mccabe_drift",
                     "uncovered_rate", "duration_mean", "duration_jitter"):
            need(is_num(getattr(self, name)) and getattr(self, name) >= 0, name, "number >= 0")
        need(is_num(self.missing_probability) and 0 <= self.missing_probability <= 1,
             "missing_probability", "number in [0, 1]")
        need(isinstance(self.artifact_prefix, str) and self.artifact_prefix.strip() != "",
             "artifact_prefix", "non-empty text")
        seen = set()
        for s in self.situations:
            need(isinstance(s, Situation), "situations", "list of {id, mean, jitter}")
            need(isinstance(s.id, str) and s.id != "" and s.id not in seen, "situations", "unique non-empty ids")
            need(is_num(s.mean) and s.mean >= 0 and is_num(s.jitter) and s.jitter >= 0,
                 "situations", "mean and jitter must be numbers >= 0")
            seen.add(s.id)
        for inj in self.injections:
            need(isinstance(inj, Injection), "injections", "list of {start, kind, magnitude}")
            need(inj.kind in INJECTION_KINDS, "injections", f"kind must be one of {INJECTION_KINDS}")
            need(is_int(inj.start) and inj.start >= 1, "injections", "start must be an integer >= 1")
            need(is_num(inj.magnitude), "injections", "magnitude must be a finite number")
            if inj.kind == "acting-variance":
                need(inj.magnitude >= 0, "injections", "acting-variance magnitude must be >= 0")
            if inj.kind in ("duration-drift", "indicator-spike"):
                need(inj.magnitude > -1, "injections", f"{inj.kind} magnitude must be > -1")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GeneratorConfig:
        if not isinstance(data, dict):
            raise InvalidConfig("<root>", "expected a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfig(unknown[0], "unknown field")
        kwargs = dict(data)
        try:
            if "situations" in kwargs:
                kwargs["situations"] = tuple(Situation(**s) for s in kwargs["situations"])
        except TypeError as exc:
            raise InvalidConfig("situations", str(exc)) from None
        try:
            if "injections" in kwargs:
                kwargs["injections"] = tuple(Injection(**j) for j in kwargs["injections"])
        except TypeError as exc:
            raise InvalidConfig("injections", str(exc)) from None
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> GeneratorConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfig("<root>", f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def artifact_name(self, index: int) -> str:
        width = max(3, len(str(self.artifacts - 1)))
        return f"{self.artifact_prefix}{index:0{width}d}"


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _generate_artifact(config: GeneratorConfig, index: int) -> ArtifactHistory:
    rng = SplitMix64(derive_seed(config.seed, index))
    name = config.artifact_name(index)
    records = []
    for i in range(1, config.revisions + 1):
        active = [inj for inj in config.injections if i >= inj.start]
        p_pass = config.pass_probability
        duration_scale = 1.0
        acting_scale = 1.0
        spike = 1.0
        for inj in active:
            if inj.kind == "failure-rate":
                p_pass -= inj.magnitude
            elif inj.kind == "duration-drift":
                duration_scale *= 1.0 + inj.magnitude
            elif inj.kind == "acting-variance":
                acting_scale *= inj.magnitude
            else:
                spike *= 1.0 + inj.magnitude
        p_pass = min(1.0, max(0.0, p_pass))

        # draw order is fixed and independent of outcomes
        passed = rng.uniform() < p_pass
        u_sloc, u_misra, u_mccabe, u_unc = (rng.uniform() for _ in range(4))
        z_duration = rng.normal()
        z_acting = [rng.normal() for _ in config.situations]

        sloc = max(1, _round_half_up(
            config.sloc_base + config.sloc_growth * (i - 1) + (u_sloc - 0.5) * 0.02 * config.sloc_base
        ))
        misra = math.floor(config.misra_rate * sloc / 1000.0 * 2.0 * u_misra * spike)
        mccabe = max(1, _round_half_up(
            (config.mccabe_base + config.mccabe_drift * (i - 1)) * (0.9 + 0.2 * u_mccabe) * spike
        ))
        uncovered = math.floor(config.uncovered_rate * sloc * (0.8 + 0.4 * u_unc) * spike)
        duration = max(0.0, config.duration_mean * duration_scale + config.duration_jitter * z_duration)
        acting = {
            s.id: max(0.0, s.mean + s.jitter * acting_scale * z)
            for s, z in zip(config.situations, z_acting)
        }

        values: dict[str, Any] = {
            "sloc": sloc,
            "misra_warnings": misra,
            "mccabe": mccabe,
            "uncovered": uncovered,
            "duration": duration,
        }
        if config.missing_probability > 0:
            for key in ("sloc", "misra_warnings", "mccabe", "uncovered", "duration"):
                if rng.uniform() < config.missing_probability:
                    values[key] = None
            for s in config.situations:
                if rng.uniform() < config.missing_probability:
                    del acting[s.id]

        records.append(RevisionRecord(
            name,
            i,
            TestOutcome.PASS if passed else TestOutcome.FAIL,
            IndicatorSample(acting=acting, **values),
        ))
    return ArtifactHistory(name, tuple(records))


def generate(config: GeneratorConfig) -> HistorySet:
    """Deterministic HistorySet for ``config``.

    Artifact ``k`` is driven by its own SplitMix64 stream seeded with the
    (k + 1)-th output of the master stream, so artifacts can be generated
    independently and in any order.
    """
    config.validate()
    return HistorySet(_generate_artifact(config, k) for k in range(config.artifacts))
