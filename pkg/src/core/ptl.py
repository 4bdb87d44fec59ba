"""Token sequences, prefix translation lists and their structural checks"""


from dataclasses import dataclass, field
from itertools import takewhile
from typing import Iterable, List, Sequence, Tuple
from src.utils.exceptions import InvalidTokensException, ValidationException
from src import logger


TokenSeq = Tuple[str, ...]

DEFAULT_SUBWORD_MARKER = '@@'


def is_valid_token(token: str) -> bool:
    """True if the token is a non-empty string without whitespace."""
    return isinstance(token, str) and len(token) > 0 and not any(ch.isspace() for ch in token)


def to_tokens(tokens: Iterable[str]) -> TokenSeq:
    """Builds a TokenSeq, rejecting empty or whitespace-bearing tokens.

    Parameters
    ----------
    tokens : iterable of str
        The tokens, in order.

    Returns
    -------
    seq : TokenSeq
        An immutable tuple of the same tokens.

    """

    seq = tuple(tokens)
    for token in seq:
        if not is_valid_token(token):
            raise InvalidTokensException(token)
    return seq


@dataclass(frozen=True)
class PrefixTranslationList:
    """One displayed output per source prefix.

    ``outputs[i]`` is what was on display after reading ``i+1`` source tokens.
    Construction does not validate; see ``validate_ptl``.

    """

    source: TokenSeq
    outputs: Tuple[TokenSeq, ...]
    sentence_id: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'source', tuple(self.source))
        object.__setattr__(self, 'outputs', tuple(tuple(o) for o in self.outputs))

    @property
    def I(self) -> int:
        return len(self.source)

    @property
    def final(self) -> TokenSeq:
        return self.outputs[-1] if self.outputs else ()

    @property
    def J(self) -> int:
        return len(self.final)


@dataclass(frozen=True)
class SentencePair:
    """A source sentence and its reference translation."""

    source: TokenSeq
    target: TokenSeq

    def __post_init__(self):
        object.__setattr__(self, 'source', to_tokens(self.source))
        object.__setattr__(self, 'target', to_tokens(self.target))
        if len(self.source) == 0 or len(self.target) == 0:
            raise ValidationException('Sentence pairs need a non-empty source and target.')


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of ``validate_ptl``."""

    sentence_id: str
    valid: bool
    append_only: bool
    violations: List[str] = field(default_factory=list)


def merge_subwords(seq: Sequence[str], marker: str = DEFAULT_SUBWORD_MARKER, warn_trailing: bool = True) -> TokenSeq:
    """Merges suffix-marked subword units into whole tokens.

    A token ending in ``marker`` continues into the following token, e.g.
    ``['Arz@@', 'neimittel']`` becomes ``['Arzneimittel']``.

    Parameters
    ----------
    seq : sequence of str
        The (possibly) segmented tokens.

    marker : str, default '@@'
        The continuation marker suffix.

    warn_trailing : bool, default True
        Whether a dangling continuation is logged.

    Returns
    -------
    merged : TokenSeq
        The merged tokens. A dangling continuation at the end of the sequence
        is kept with its marker stripped.

    """

    if not marker:
        raise ValidationException('The subword marker must be a non-empty string.')

    merged = []
    pending = ''
    for token in seq:
        if token.endswith(marker):
            pending += token[:-len(marker)]
        else:
            merged.append(pending + token)
            pending = ''

    # Dangling continuation
    if pending or (len(seq) > 0 and seq[-1].endswith(marker)):
        if warn_trailing:
            logger.warning(f"Trailing subword continuation in {' '.join(seq)!r}; merged without its marker.")
        while pending.endswith(marker):
            pending = pending[:-len(marker)]
        if pending:
            merged.append(pending)

    return tuple(merged)


def merge_ptl(ptl: PrefixTranslationList, marker: str = DEFAULT_SUBWORD_MARKER) -> PrefixTranslationList:
    """Merges subwords in every output independently.

    Intermediate displays routinely end mid-word, so only a dangling
    continuation in the final output is logged.

    The source is left as recorded: it counts reads, one output per source
    unit, so merging it would break the PTL's shape.
    """
    return PrefixTranslationList(source=ptl.source,
                                 outputs=[merge_subwords(o, marker, warn_trailing=(n == len(ptl.outputs) - 1))
                                          for n, o in enumerate(ptl.outputs)],
                                 sentence_id=ptl.sentence_id)


def lcp_len(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common prefix of two token sequences."""
    return sum(1 for _ in takewhile(lambda pair: pair[0] == pair[1], zip(a, b)))


def is_append_only(outputs: Sequence[Sequence[str]]) -> bool:
    """True if every output extends the one before it."""
    return all(lcp_len(curr, prev) == len(prev) for prev, curr in zip(outputs, outputs[1:]))


def validate_ptl(ptl: PrefixTranslationList) -> ValidationReport:
    """Checks the structural invariants of a PTL.

    Parameters
    ----------
    ptl : PrefixTranslationList
        The list to check.

    Returns
    -------
    report : ValidationReport
        Whether the PTL is valid, the violations found, and whether its
        outputs are append-only.

    """

    violations = []

    if ptl.I < 1:
        violations.append('source is empty')

    if len(ptl.outputs) != ptl.I:
        violations.append(f'{ptl.I} source tokens but {len(ptl.outputs)} outputs')

    bad_source = [t for t in ptl.source if not is_valid_token(t)]
    if bad_source:
        violations.append(f'invalid source tokens {bad_source!r}')

    for idx, output in enumerate(ptl.outputs):
        bad_output = [t for t in output if not is_valid_token(t)]
        if bad_output:
            violations.append(f'invalid tokens {bad_output!r} in output {idx + 1}')

    return ValidationReport(sentence_id=ptl.sentence_id,
                            valid=len(violations) == 0,
                            append_only=is_append_only(ptl.outputs),
                            violations=violations)
