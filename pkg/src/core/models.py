"""Next-token scoring models.

A model maps (source prefix, target prefix) to a probability distribution over
its vocabulary plus the end-of-sequence symbol ``EOS``. Distributions are
plain dicts; tokens missing from a dict have probability 0.
"""


import hashlib
import json
import math
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Dict, FrozenSet, Mapping, Sequence, Tuple
import numpy as np
from src.utils.exceptions import InvalidConfigException


EOS = '</s>'

Distribution = Dict[str, float]

DISTRIBUTION_TOLERANCE = 1e-6


def is_valid_distribution(dist: Mapping[str, float], tolerance: float = DISTRIBUTION_TOLERANCE) -> bool:
    """True if all probabilities are finite, non-negative and sum to 1."""
    values = list(dist.values())
    if any((not math.isfinite(p)) or p < 0 for p in values):
        return False
    return abs(math.fsum(values) - 1.0) <= tolerance


class ScoringModel(ABC):
    """Interface for anything that scores the next target token.

    Implementations must be deterministic and safe for concurrent read-only
    use.
    """

    @property
    @abstractmethod
    def vocabulary(self) -> FrozenSet[str]:
        """Known target tokens, EOS excluded."""

    @abstractmethod
    def next_distribution(self, source_prefix: Sequence[str], target_prefix: Sequence[str]) -> Distribution:
        """Distribution over the next target token, EOS included."""

    def describe(self) -> dict:
        """Configuration summary written into run manifests."""
        return {'type': type(self).__name__}

    def close(self) -> None:
        """Releases external resources; in-process models hold none."""


class LexicalTableModel(ScoringModel):
    """Monotone word-for-word translator driven by per-source-token tables.

    Target position t is translated from source token t. Source tokens
    without a table are copied. Once the target is as long as the source
    prefix, EOS gets probability 1 (``eos_when_covered``) or the model turns
    uniform over its vocabulary and EOS.

    Parameters
    ----------
    tables : dict
        ``{source_token: {target_token: weight, ...}}``; weights are normalized.

    eos_when_covered : bool, default True
        Emit EOS once every source token has been translated.

    """

    def __init__(self, tables: Mapping[str, Mapping[str, float]], eos_when_covered: bool = True):
        self.eos_when_covered = eos_when_covered
        self.tables = {}
        for src_token, row in tables.items():
            if EOS in row:
                raise InvalidConfigException(f"Table for '{src_token}' must not list the EOS symbol.")
            if any((not math.isfinite(w)) or w < 0 for w in row.values()):
                raise InvalidConfigException(f"Table for '{src_token}' has negative or non-finite weights.")
            total = math.fsum(row.values())
            if total <= 0:
                raise InvalidConfigException(f"Table for '{src_token}' has no positive weight.")
            self.tables[src_token] = {tgt: w / total for tgt, w in sorted(row.items())}

        self._vocabulary = frozenset(tgt for row in self.tables.values() for tgt in row)

    @classmethod
    def from_config(cls, config: dict) -> 'LexicalTableModel':
        if not isinstance(config.get('tables'), dict):
            raise InvalidConfigException("Lexical table model config needs a 'tables' object.")
        return cls(tables=config['tables'], eos_when_covered=bool(config.get('eos_when_covered', True)))

    @property
    def vocabulary(self) -> FrozenSet[str]:
        return self._vocabulary

    def next_distribution(self, source_prefix, target_prefix) -> Distribution:
        position = len(target_prefix)

        if position >= len(source_prefix):
            if self.eos_when_covered or len(self._vocabulary) == 0:
                return {EOS: 1.0}
            support = sorted(self._vocabulary) + [EOS]
            return {token: 1.0 / len(support) for token in support}

        src_token = source_prefix[position]
        if src_token not in self.tables:
            return {src_token: 1.0}
        return dict(self.tables[src_token])

    def describe(self) -> dict:
        return {'type': 'lexical_table', 'tables': self.tables, 'eos_when_covered': self.eos_when_covered}


@lru_cache(maxsize=200_000)
def _seeded_probabilities(seed: int, n_tokens: int, temperature: float, eos_slope: float,
                          source_prefix: Tuple[str, ...], target_prefix: Tuple[str, ...]) -> Tuple[float, ...]:
    key = json.dumps([seed, list(source_prefix), list(target_prefix)], ensure_ascii=False)
    digest = hashlib.blake2b(key.encode('utf-8'), digest_size=16).digest()
    rng = np.random.default_rng(int.from_bytes(digest, 'little'))

    logits = rng.standard_normal(n_tokens + 1) * temperature
    logits[-1] += eos_slope * (len(target_prefix) - len(source_prefix))

    weights = np.exp(logits - logits.max())
    return tuple((weights / weights.sum()).tolist())


class SeededRandomModel(ScoringModel):
    """Pseudo-random model whose distributions are a pure function of its inputs.

    Logits are standard normal draws scaled by ``temperature``, seeded from a
    hash of (seed, source prefix, target prefix). The EOS logit moves by
    ``eos_slope`` per target token relative to the source prefix length, so
    outputs end near the source length.

    Parameters
    ----------
    seed : int
        Model seed.

    vocab : list of str
        Target vocabulary (EOS excluded).

    """

    def __init__(self, seed: int, vocab: Sequence[str], temperature: float = 2.0, eos_slope: float = 1.5):
        vocab = tuple(sorted(set(vocab)))
        if len(vocab) == 0:
            raise InvalidConfigException('Seeded random model needs a non-empty vocabulary.')
        if EOS in vocab:
            raise InvalidConfigException('The vocabulary must not contain the EOS symbol.')
        self.seed = int(seed)
        self.temperature = float(temperature)
        self.eos_slope = float(eos_slope)
        self._tokens = vocab

    @classmethod
    def from_config(cls, config: dict) -> 'SeededRandomModel':
        if 'seed' not in config or not isinstance(config.get('vocab'), list):
            raise InvalidConfigException("Seeded random model config needs 'seed' and a 'vocab' list.")
        return cls(seed=config['seed'], vocab=config['vocab'],
                   temperature=config.get('temperature', 2.0),
                   eos_slope=config.get('eos_slope', 1.5))

    @property
    def vocabulary(self) -> FrozenSet[str]:
        return frozenset(self._tokens)

    def next_distribution(self, source_prefix, target_prefix) -> Distribution:
        probs = _seeded_probabilities(self.seed, len(self._tokens), self.temperature, self.eos_slope,
                                      tuple(source_prefix), tuple(target_prefix))
        return dict(zip(self._tokens + (EOS,), probs))

    def describe(self) -> dict:
        return {'type': 'seeded_random', 'seed': self.seed, 'vocab': list(self._tokens),
                'temperature': self.temperature, 'eos_slope': self.eos_slope}
