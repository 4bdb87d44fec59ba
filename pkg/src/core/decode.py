"""Greedy, beam and biased beam search over a ScoringModel, plus wait-k truncation"""


import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple
from src.core.models import EOS, Distribution, ScoringModel
from src.core.ptl import TokenSeq
from src.utils.exceptions import InvalidConfigException


DEFAULT_MAX_LEN_FACTOR = 2.0
DEFAULT_MAX_LEN_SLACK = 5


@dataclass(frozen=True)
class DecodeConfig:
    """One policy configuration.

    Parameters
    ----------
    beta : float, default 0.0
        Bias weight in [0, 1] towards the previously displayed output.

    k : int, default 0
        Wait-k lag used to truncate intermediate displays.

    beam : int, default 1
        Beam size; 1 is greedy search.

    max_len_factor : float, default 2.0
    max_len_slack : int, default 5
        Output length cap is ``ceil(max_len_factor * |source|) + max_len_slack``.

    """

    beta: float = 0.0
    k: int = 0
    beam: int = 1
    max_len_factor: float = DEFAULT_MAX_LEN_FACTOR
    max_len_slack: int = DEFAULT_MAX_LEN_SLACK

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise InvalidConfigException(f'beta must lie in [0, 1], got {self.beta}.')
        if int(self.k) != self.k or self.k < 0:
            raise InvalidConfigException(f'k must be a non-negative integer, got {self.k}.')
        if int(self.beam) != self.beam or self.beam < 1:
            raise InvalidConfigException(f'beam must be a positive integer, got {self.beam}.')
        if self.max_len_factor <= 0 or self.max_len_slack < 0:
            raise InvalidConfigException('The length cap needs max_len_factor > 0 and max_len_slack >= 0.')
        object.__setattr__(self, 'beta', float(self.beta))
        object.__setattr__(self, 'k', int(self.k))
        object.__setattr__(self, 'beam', int(self.beam))

    @property
    def label(self) -> str:
        return f'beta={self.beta:g},k={self.k},beam={self.beam}'

    def max_length(self, source_length: int) -> int:
        return max_output_length(source_length, self.max_len_factor, self.max_len_slack)


@dataclass(frozen=True)
class Hypothesis:
    """A partial or finished search result.

    ``following`` stays True while every token so far matched the bias target
    and the target still has tokens left.
    """

    tokens: TokenSeq
    score: float
    following: bool = False


class _Candidate(NamedTuple):
    score: float
    rank_tokens: Tuple[str, ...]
    hypothesis: Hypothesis
    ended: bool


def max_output_length(source_length: int, factor: float = DEFAULT_MAX_LEN_FACTOR,
                      slack: int = DEFAULT_MAX_LEN_SLACK) -> int:
    return math.ceil(factor * source_length) + slack


def _rank_key(score: float, tokens: Sequence[str]):
    # Higher score first, then lexicographic token order (a prefix sorts first)
    return (-score, tuple(tokens))


def bias_distribution(model_dist: Distribution, forced_token: Optional[str], beta: float) -> Distribution:
    """Interpolates a model distribution with a one-hot on the forced token.

    Parameters
    ----------
    model_dist : dict
        The model's next-token distribution.

    forced_token : str or None
        Token of the previous output at this position; None disables biasing.

    beta : float
        Weight of the one-hot distribution, in [0, 1].

    Returns
    -------
    biased : dict
        ``(1 - beta) * p(y) + beta * [y == forced_token]`` in probability
        space. A forced token outside the model's support gets probability
        ``beta``.

    """

    if not 0.0 <= beta <= 1.0:
        raise InvalidConfigException(f'beta must lie in [0, 1], got {beta}.')
    if forced_token is None:
        return dict(model_dist)

    biased = {token: (1.0 - beta) * p for token, p in model_dist.items()}
    biased[forced_token] = biased.get(forced_token, 0.0) + beta
    return biased


def greedy_extend(model: ScoringModel, source: Sequence[str], prefix: Sequence[str] = (),
                  max_new: Optional[int] = None, max_length: Optional[int] = None) -> Tuple[TokenSeq, bool]:
    """Greedily appends tokens to a fixed target prefix.

    Parameters
    ----------
    model : ScoringModel
        The scoring model.

    source : sequence of str
        Source tokens visible to the model.

    prefix : sequence of str, default ()
        Committed target tokens; they are not rescored.

    max_new : int, default None
        Stop after this many new tokens.

    max_length : int, default None
        Cap on the total target length; defaults to the standard cap for
        ``len(source)``.

    Returns
    -------
    new_tokens : TokenSeq
        The appended tokens.

    ended : bool
        True if the model chose EOS.

    """

    if max_length is None:
        max_length = max_output_length(len(source))

    tokens = list(prefix)
    new_tokens = []
    score = 0.0

    while len(tokens) < max_length and (max_new is None or len(new_tokens) < max_new):
        dist = model.next_distribution(source, tuple(tokens))
        key, token = min((_rank_key(score + math.log(p), (token,)), token) for token, p in dist.items() if p > 0)
        if token == EOS:
            return tuple(new_tokens), True
        score = -key[0]
        tokens.append(token)
        new_tokens.append(token)

    return tuple(new_tokens), False


def greedy_decode(model: ScoringModel, source: Sequence[str],
                  max_len_factor: float = DEFAULT_MAX_LEN_FACTOR,
                  max_len_slack: int = DEFAULT_MAX_LEN_SLACK) -> TokenSeq:
    """Argmax decoding until EOS or the length cap; ties go to the smaller token."""
    if len(source) == 0:
        raise InvalidConfigException('Cannot decode an empty source.')
    tokens, _ = greedy_extend(model, source, max_length=max_output_length(len(source), max_len_factor, max_len_slack))
    return tokens


def _beam_search(model: ScoringModel, source: Sequence[str], beam: int, max_length: int,
                 previous_output: Sequence[str] = (), beta: float = 0.0) -> TokenSeq:
    """Beam search without length normalization.

    Each step ranks every expansion of every live hypothesis and keeps the top
    ``beam - len(finished)``; expansions ending in EOS move to the finished
    pool. Search stops when nothing is live, when the best finished score
    beats every live score, or at the length cap (live hypotheses then finish
    without an EOS cost).
    """

    previous_output = tuple(previous_output)
    live = [Hypothesis(tokens=(), score=0.0, following=len(previous_output) > 0)]
    finished: List[Hypothesis] = []

    while live:
        if len(live[0].tokens) >= max_length:
            finished.extend(live)
            break

        candidates = []
        for hyp in live:
            position = len(hyp.tokens)
            dist = model.next_distribution(source, hyp.tokens)

            forced = previous_output[position] if hyp.following else None
            if forced is not None:
                dist = bias_distribution(dist, forced, beta)

            for token, p in dist.items():
                if p <= 0:
                    continue
                score = hyp.score + math.log(p)
                if token == EOS:
                    candidates.append(_Candidate(score, hyp.tokens + (EOS,),
                                                 Hypothesis(hyp.tokens, score), True))
                else:
                    tokens = hyp.tokens + (token,)
                    following = forced is not None and token == forced and len(tokens) < len(previous_output)
                    candidates.append(_Candidate(score, tokens, Hypothesis(tokens, score, following), False))

        candidates.sort(key=lambda c: _rank_key(c.score, c.rank_tokens))

        live = []
        for candidate in candidates[:beam - len(finished)]:
            if candidate.ended:
                finished.append(candidate.hypothesis)
            else:
                live.append(candidate.hypothesis)

        if finished and live and max(h.score for h in finished) > max(h.score for h in live):
            break

    best = min(finished, key=lambda h: _rank_key(h.score, h.tokens))
    return best.tokens


def beam_decode(model: ScoringModel, source: Sequence[str], beam: int,
                max_len_factor: float = DEFAULT_MAX_LEN_FACTOR,
                max_len_slack: int = DEFAULT_MAX_LEN_SLACK) -> TokenSeq:
    """Beam search over summed log-probabilities.

    Parameters
    ----------
    model : ScoringModel
        The scoring model.

    source : sequence of str
        Non-empty source tokens.

    beam : int
        Beam size; 1 reproduces ``greedy_decode``.

    Returns
    -------
    tokens : TokenSeq
        The best finished hypothesis, EOS stripped. Equal scores go to the
        lexicographically smaller sequence, then the shorter one.

    """

    if len(source) == 0:
        raise InvalidConfigException('Cannot decode an empty source.')
    if int(beam) != beam or beam < 1:
        raise InvalidConfigException(f'beam must be a positive integer, got {beam}.')
    return _beam_search(model, source, int(beam), max_output_length(len(source), max_len_factor, max_len_slack))


def biased_beam_decode(model: ScoringModel, source: Sequence[str], previous_output: Sequence[str],
                       config: DecodeConfig) -> TokenSeq:
    """Beam search biased towards a previous output.

    While a hypothesis strictly follows ``previous_output`` its next-token
    distribution is ``bias_distribution(p, previous_output[t], config.beta)``
    and its score accumulates the log of the interpolated probability. From
    its first divergence, or once ``previous_output`` is used up, it is scored
    by the model alone. With beta = 1 the forced tokens cost nothing even
    where the model gives them probability 0.
    """

    if len(source) == 0:
        raise InvalidConfigException('Cannot decode an empty source.')
    return _beam_search(model, source, config.beam, config.max_length(len(source)),
                        previous_output=previous_output, beta=config.beta)


def waitk_truncate(output: Sequence[str], source_prefix_len: int, k: int) -> TokenSeq:
    """Keeps the first ``max(source_prefix_len - k, 0)`` tokens of the output."""
    return tuple(output[:max(source_prefix_len - k, 0)])
