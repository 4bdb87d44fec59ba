"""Prefix-pair data augmentation for parallel corpora"""


from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple
import numpy as np
from src.core.ptl import SentencePair
from src.utils.exceptions import InvalidConfigException, MissingAlignmentException, ValidationException
from src import logger


PROPORTIONAL = 'proportional'
ALIGNED = 'aligned'
MODES = [PROPORTIONAL, ALIGNED]

STOCHASTIC = 'stochastic'
DUPLICATE = 'duplicate'
MIXES = [STOCHASTIC, DUPLICATE]


@dataclass(frozen=True)
class AlignmentSet:
    """0-based (source_index, target_index) word links for one sentence pair."""

    links: FrozenSet[Tuple[int, int]]

    def __init__(self, links: Iterable[Tuple[int, int]]):
        object.__setattr__(self, 'links', frozenset((int(i), int(j)) for i, j in links))

    def check_bounds(self, source_length: int, target_length: int) -> None:
        for i, j in sorted(self.links):
            if not (0 <= i < source_length and 0 <= j < target_length):
                raise ValidationException(f'Alignment link {i}-{j} lies outside a '
                                          f'{source_length}x{target_length} sentence pair.')


@dataclass(frozen=True)
class AugmentConfig:
    """Augmentation settings.

    Parameters
    ----------
    mode : str, default 'proportional'
        How the target prefix length is chosen: 'proportional' or 'aligned'.

    mix : str, default 'stochastic'
        'stochastic' replaces each pair by a prefix pair with probability p;
        'duplicate' emits every full pair followed by one prefix pair.

    p : float, default 0.5
        Truncation probability for the stochastic mix.

    seed : int, default 0
        Non-negative seed; pair n draws from the stream seeded with (seed, n).

    force_source_len : int, default None
        Fixes the source prefix length (clipped to the sentence length)
        instead of drawing it. Truncation decisions are unaffected.

    """

    mode: str = PROPORTIONAL
    mix: str = STOCHASTIC
    p: float = 0.5
    seed: int = 0
    force_source_len: Optional[int] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidConfigException(f"Unknown augmentation mode '{self.mode}'; expected one of {MODES}.")
        if self.mix not in MIXES:
            raise InvalidConfigException(f"Unknown mix '{self.mix}'; expected one of {MIXES}.")
        if not 0.0 <= self.p <= 1.0:
            raise InvalidConfigException(f'Truncation probability must lie in [0, 1], got {self.p}.')
        if self.seed < 0:
            raise InvalidConfigException(f'Seed must be non-negative, got {self.seed}.')
        if self.force_source_len is not None and self.force_source_len < 1:
            raise InvalidConfigException('A forced source prefix length must be at least 1.')


def _check_prefix_length(pair: SentencePair, source_prefix_len: int) -> None:
    if not 1 <= source_prefix_len <= len(pair.source):
        raise InvalidConfigException(f'Source prefix length {source_prefix_len} is outside '
                                     f'1..{len(pair.source)}.')


def proportional_prefix(pair: SentencePair, source_prefix_len: int) -> SentencePair:
    """Truncates both sides to the same fraction of their lengths.

    Parameters
    ----------
    pair : SentencePair
        The full sentence pair, with I source and J target tokens.

    source_prefix_len : int
        L_s, between 1 and I.

    Returns
    -------
    prefix_pair : SentencePair
        ``source[:L_s]`` and ``target[:L_t]`` with ``L_t = max(1, round(L_s / I * J))``,
        rounding halves up.

    """

    _check_prefix_length(pair, source_prefix_len)

    I, J = len(pair.source), len(pair.target)
    target_prefix_len = max(1, (2 * source_prefix_len * J + I) // (2 * I))

    return SentencePair(pair.source[:source_prefix_len], pair.target[:target_prefix_len])


def aligned_prefix(pair: SentencePair, alignments: AlignmentSet, source_prefix_len: int) -> Optional[SentencePair]:
    """Finds the shortest self-contained target prefix for a source prefix.

    Parameters
    ----------
    pair : SentencePair
        The full sentence pair.

    alignments : AlignmentSet
        Word links of the pair.

    source_prefix_len : int
        L_s, between 1 and I.

    Returns
    -------
    prefix_pair : SentencePair or None
        The pair cut at the minimal L_t >= 1 such that every link (i, j)
        satisfies ``i < L_s`` exactly when ``j < L_t``; None if no L_t in 1..J
        qualifies. Unlinked tokens impose no constraint.

    """

    _check_prefix_length(pair, source_prefix_len)
    alignments.check_bounds(len(pair.source), len(pair.target))

    lowest = 1
    highest = len(pair.target)
    for i, j in alignments.links:
        if i < source_prefix_len:
            lowest = max(lowest, j + 1)
        else:
            highest = min(highest, j)

    if lowest > highest:
        return None

    return SentencePair(pair.source[:source_prefix_len], pair.target[:lowest])


def draw_prefix_lengths(source_lengths: Sequence[int], config: AugmentConfig) -> List[Optional[int]]:
    """Seeded truncation plan: one source prefix length per pair, None to keep it whole."""

    plan = []
    for idx, length in enumerate(source_lengths):
        rng = np.random.default_rng([config.seed, idx])

        if config.mix == STOCHASTIC and not rng.random() < config.p:
            plan.append(None)
            continue

        source_prefix_len = int(rng.integers(1, length + 1))
        if config.force_source_len is not None:
            source_prefix_len = min(config.force_source_len, length)
        plan.append(source_prefix_len)

    return plan


def augment_corpus(corpus: Sequence[SentencePair], config: AugmentConfig,
                   alignments: Optional[Sequence[Optional[AlignmentSet]]] = None) -> List[SentencePair]:
    """Mixes prefix pairs into a parallel corpus.

    Parameters
    ----------
    corpus : list of SentencePair
        The full-sentence corpus.

    config : AugmentConfig
        Mode, mix, probability and seed.

    alignments : list of AlignmentSet, default None
        Required in aligned mode, one per pair.

    Returns
    -------
    augmented : list of SentencePair
        Deterministic given the seed. In aligned mode a pair without a
        self-contained prefix is emitted whole, once.

    """

    if config.mode == ALIGNED:
        if alignments is None:
            raise MissingAlignmentException(1)
        for idx in range(len(corpus)):
            if idx >= len(alignments) or alignments[idx] is None:
                raise MissingAlignmentException(idx + 1)

    plan = draw_prefix_lengths([len(pair.source) for pair in corpus], config)

    augmented = []
    n_truncated = 0
    n_unaligned = 0
    for idx, (pair, source_prefix_len) in enumerate(zip(corpus, plan)):
        if source_prefix_len is None:
            augmented.append(pair)
            continue

        if config.mode == PROPORTIONAL:
            prefix_pair = proportional_prefix(pair, source_prefix_len)
        else:
            prefix_pair = aligned_prefix(pair, alignments[idx], source_prefix_len)

        if prefix_pair is None:
            n_unaligned += 1
            augmented.append(pair)
            continue

        n_truncated += 1
        if config.mix == DUPLICATE:
            augmented.extend([pair, prefix_pair])
        else:
            augmented.append(prefix_pair)

    if n_unaligned > 0:
        logger.warning(f'{n_unaligned} pairs had no self-contained prefix and were kept whole.')
    logger.info(f'Augmented {len(corpus)} pairs into {len(augmented)} ({n_truncated} prefix pairs).')

    return augmented
