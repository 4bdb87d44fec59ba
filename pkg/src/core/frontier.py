"""Configuration sweeps, NE filtering, Pareto frontiers and dev-to-test projection"""


from dataclasses import dataclass, astuple
from itertools import product
from typing import List, Optional, Sequence, Tuple
import pandas as pd
from src.core.decode import DecodeConfig, DEFAULT_MAX_LEN_FACTOR, DEFAULT_MAX_LEN_SLACK
from src.core.metrics import evaluate_corpus
from src.core.models import ScoringModel
from src.core.ptl import SentencePair
from src.core.simulate import RETRANSLATE, simulate_corpus
from src.utils.exceptions import (InvalidConfigException, MissingTestPointException, SweepConfigException,
                                  ValidationException)
from src.utils.multithreading import parallel_execute
from src import logger


DEV = 'dev'
TEST = 'test'
SPLITS = [DEV, TEST]

DEFAULT_BETAS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
DEFAULT_KS = (1, 2, 4, 6, 8, 10, 15, 20, 30)
DEFAULT_BEAMS = (1,)
DEFAULT_NE_THRESHOLD = 0.2

CONFIG_COLUMNS = ['beta', 'k', 'beam']
SWEEP_COLUMNS = ['beta', 'k', 'beam', 'split', 'bleu', 'dal', 'ne']
SWEEP_DTYPES = {'beta': 'float64', 'k': 'int64', 'beam': 'int64', 'split': 'object',
                'bleu': 'float64', 'dal': 'float64', 'ne': 'float64'}

GridConfig = Tuple[float, int, int]


@dataclass(frozen=True)
class SweepPoint:
    """Metrics of one (beta, k, beam) configuration on one split."""

    beta: float
    k: int
    beam: int
    split: str
    bleu: float
    dal: float
    ne: float

    @property
    def config(self) -> GridConfig:
        return (self.beta, self.k, self.beam)


@dataclass(frozen=True)
class FrontierCurve:
    """Dev-optimal configurations in ascending dev DAL, with their test metrics.

    ``dev[n]`` and ``test[n]`` describe the same configuration.
    """

    dev: Tuple[SweepPoint, ...]
    test: Tuple[SweepPoint, ...]

    def __len__(self):
        return len(self.dev)


def points_to_frame(points: Sequence[SweepPoint]) -> pd.DataFrame:
    """Sweep points as a DataFrame with the sweep CSV columns."""
    df = pd.DataFrame([astuple(p) for p in points], columns=SWEEP_COLUMNS)
    return df.astype(SWEEP_DTYPES)


def frame_to_points(df: pd.DataFrame) -> List[SweepPoint]:
    """Inverse of ``points_to_frame``."""
    return [SweepPoint(beta=float(row.beta), k=int(row.k), beam=int(row.beam), split=str(row.split),
                       bleu=float(row.bleu), dal=float(row.dal), ne=float(row.ne))
            for row in df.itertuples(index=False)]


def default_grid(betas: Sequence[float] = DEFAULT_BETAS, ks: Sequence[int] = DEFAULT_KS,
                 beams: Sequence[int] = DEFAULT_BEAMS) -> List[GridConfig]:
    """Cartesian product of bias weights, wait-k lags and beam sizes."""
    return [(float(beta), int(k), int(beam)) for beta, k, beam in product(betas, ks, beams)]


def sweep(model: ScoringModel, dev_corpus: Sequence[SentencePair], test_corpus: Sequence[SentencePair],
          grid: Optional[Sequence[GridConfig]] = None, num_threads: int = 1,
          max_len_factor: float = DEFAULT_MAX_LEN_FACTOR,
          max_len_slack: int = DEFAULT_MAX_LEN_SLACK) -> List[SweepPoint]:
    """Evaluates re-translation over a grid of configurations on dev and test.

    Parameters
    ----------
    model : ScoringModel
        The scoring model.

    dev_corpus, test_corpus : list of SentencePair
        Sources with their references.

    grid : list of (beta, k, beam), default None
        Configurations to run; defaults to ``default_grid()``.

    num_threads : int, default 1
        (config, split) jobs evaluated in parallel.

    Returns
    -------
    points : list of SweepPoint
        One point per configuration and split, ordered by (beta, k, beam, split).

    """

    if grid is None:
        grid = default_grid()
    grid = sorted(set((float(b), int(k), int(w)) for b, k, w in grid))
    if len(grid) == 0:
        raise InvalidConfigException('The sweep grid is empty.')
    if len(dev_corpus) == 0 or len(test_corpus) == 0:
        raise InvalidConfigException('Sweeps need non-empty dev and test corpora.')

    corpora = {DEV: dev_corpus, TEST: test_corpus}
    jobs = [(config, split) for config in grid for split in SPLITS]

    def evaluate_job(job):
        (beta, k, beam), split = job
        config = DecodeConfig(beta=beta, k=k, beam=beam, max_len_factor=max_len_factor,
                              max_len_slack=max_len_slack)
        corpus = corpora[split]
        try:
            ptls = simulate_corpus(model, [pair.source for pair in corpus], RETRANSLATE, config)
            report = evaluate_corpus(ptls, [pair.target for pair in corpus])
        except ValidationException as e:
            raise SweepConfigException(f'{config.label} ({split})', e) from e

        logger.info(f'{config.label:24s} | {split:4s} | BLEU={report.bleu:6.2f}  DAL={report.dal:6.3f}  NE={report.ne:6.3f}')
        return SweepPoint(beta=beta, k=k, beam=beam, split=split, bleu=report.bleu, dal=report.dal, ne=report.ne)

    logger.info(f'Sweeping {len(grid)} configs over {len(dev_corpus)} dev and {len(test_corpus)} test sentences.')
    return parallel_execute(func=evaluate_job, args=jobs, num_threads=num_threads)


def split_points(points: Sequence[SweepPoint], split: str) -> List[SweepPoint]:
    return [p for p in points if p.split == split]


def filter_by_ne(points: Sequence[SweepPoint], threshold: float) -> List[SweepPoint]:
    """Keeps the points whose configuration has dev NE strictly below the threshold.

    Parameters
    ----------
    points : list of SweepPoint
        Candidate points; each configuration needs a dev point.

    threshold : float
        NE bound; ``float('inf')`` keeps everything.

    Returns
    -------
    kept : list of SweepPoint
        Points of either split whose configuration passed, in input order.

    """

    dev_ne = {p.config: p.ne for p in points if p.split == DEV}
    return [p for p in points if p.config in dev_ne and dev_ne[p.config] < threshold]


def filter_no_revision(points: Sequence[SweepPoint]) -> List[SweepPoint]:
    """Keeps the beta = 1 configurations, which never revise their output."""
    return [p for p in points if p.beta == 1.0]


def pareto_frontier(points: Sequence[SweepPoint]) -> List[SweepPoint]:
    """Points not dominated in (lower DAL, higher BLEU), by ascending DAL.

    Among points with identical DAL and BLEU only the smallest
    (beta, k, beam) survives.
    """

    if len(set(p.split for p in points)) > 1:
        raise InvalidConfigException('pareto_frontier expects points from a single split.')

    frontier = []
    best_bleu = float('-inf')
    for p in sorted(points, key=lambda p: (p.dal, -p.bleu, p.config)):
        if p.bleu > best_bleu:
            frontier.append(p)
            best_bleu = p.bleu

    return frontier


def project(frontier_dev: Sequence[SweepPoint], all_points: Sequence[SweepPoint]) -> FrontierCurve:
    """Attaches test metrics to each dev-optimal configuration.

    Parameters
    ----------
    frontier_dev : list of SweepPoint
        Dev frontier points.

    all_points : list of SweepPoint
        A sweep containing a test point for every frontier configuration.

    Returns
    -------
    curve : FrontierCurve
        Ordered by dev DAL.

    """

    dev_df = points_to_frame(frontier_dev).sort_values(['dal'] + CONFIG_COLUMNS, kind='mergesort')
    test_df = points_to_frame(split_points(all_points, TEST)).drop_duplicates(subset=CONFIG_COLUMNS)

    merged = dev_df.merge(test_df, on=CONFIG_COLUMNS, how='left', suffixes=('_dev', '_test'))

    missing = merged[merged['split_test'].isna()]
    if missing.shape[0] > 0:
        row = missing.iloc[0]
        raise MissingTestPointException((float(row['beta']), int(row['k']), int(row['beam'])))

    dev, test = [], []
    for row in merged.itertuples(index=False):
        dev.append(SweepPoint(float(row.beta), int(row.k), int(row.beam), DEV,
                              float(row.bleu_dev), float(row.dal_dev), float(row.ne_dev)))
        test.append(SweepPoint(float(row.beta), int(row.k), int(row.beam), TEST,
                               float(row.bleu_test), float(row.dal_test), float(row.ne_test)))

    return FrontierCurve(dev=tuple(dev), test=tuple(test))


def ne_stability(dev_points: Sequence[SweepPoint], test_points: Sequence[SweepPoint]) -> float:
    """Mean |dev NE - test NE| over configurations measured on both splits.

    beta = 1 configurations are left out since their NE is 0 by construction.
    """

    dev_df = points_to_frame(split_points(dev_points, DEV))
    test_df = points_to_frame(split_points(test_points, TEST))

    merged = dev_df.merge(test_df, on=CONFIG_COLUMNS, suffixes=('_dev', '_test'))
    merged = merged[merged['beta'] != 1.0]

    if merged.shape[0] == 0:
        raise ValidationException('No configurations with non-zero erasure are measured on both dev and test.')

    return float((merged['ne_dev'] - merged['ne_test']).abs().mean())
