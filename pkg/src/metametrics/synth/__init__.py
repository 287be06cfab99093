from metametrics.synth.fixture import FIXTURE_ARTIFACT, FIXTURE_REVISIONS, paper_fixture
from metametrics.synth.generator import (
    INJECTION_KINDS,
    GeneratorConfig,
    Injection,
    Situation,
    generate,
)
from metametrics.synth.prng import SplitMix64, derive_seed

__all__ = [
    "FIXTURE_ARTIFACT",
    "FIXTURE_REVISIONS",
    "INJECTION_KINDS",
    "GeneratorConfig",
    "Injection",
    "Situation",
    "SplitMix64",
    "derive_seed",
    "generate",
    "paper_fixture",
]
