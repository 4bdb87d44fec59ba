"""Configuration sweeps and dev-to-test frontier curves"""


from typing import Dict, List, Optional
from src.core.decode import DEFAULT_MAX_LEN_FACTOR, DEFAULT_MAX_LEN_SLACK
from src.core.frontier import (DEFAULT_BEAMS, DEFAULT_BETAS, DEFAULT_KS, DEFAULT_NE_THRESHOLD, DEV, FrontierCurve,
                               SweepPoint, default_grid, filter_by_ne, filter_no_revision, ne_stability,
                               pareto_frontier, project, split_points, sweep)
from src.utils.exceptions import InvalidConfigException, ValidationException
from src.utils.io import RunManifest, load_model, read_corpus, read_sweep_csv, write_frontier_json, write_sweep_csv
from src import logger


LOW_REVISION = 'low_revision'
NO_REVISION = 'no_revision'

GRID_KEYS = {'beta': float, 'k': int, 'beam': int}


def parse_grid(spec: str):
    """Parses a grid such as ``"beta=0,0.5,1;k=1,4;beam=1"``.

    Keys left out take their default values; an empty string gives the default grid.
    """

    values = {'beta': DEFAULT_BETAS, 'k': DEFAULT_KS, 'beam': DEFAULT_BEAMS}
    for part in spec.split(';'):
        if not part.strip():
            continue
        key, sep, items = part.partition('=')
        key = key.strip()
        if not sep or key not in GRID_KEYS:
            raise InvalidConfigException(f"Bad grid entry {part!r}; expected e.g. 'beta=0,0.2'.")
        try:
            values[key] = [GRID_KEYS[key](item) for item in items.split(',') if item.strip()]
        except ValueError:
            raise InvalidConfigException(f'Bad {key} values in grid entry {part!r}.')
        if len(values[key]) == 0:
            raise InvalidConfigException(f'The grid lists no {key} values.')

    return default_grid(values['beta'], values['k'], values['beam'])


def frontier_curves(points: List[SweepPoint], ne_threshold: float = DEFAULT_NE_THRESHOLD) -> Dict[str, FrontierCurve]:
    """Low-revision and no-revision frontiers, chosen on dev and projected to test.

    The NE filter is applied before the frontier is taken.
    """

    low_revision = pareto_frontier(split_points(filter_by_ne(points, ne_threshold), DEV))
    no_revision = pareto_frontier(split_points(filter_no_revision(points), DEV))

    return {LOW_REVISION: project(low_revision, points),
            NO_REVISION: project(no_revision, points)}


def _ne_stability_or_none(points: List[SweepPoint]) -> Optional[float]:
    try:
        return ne_stability(points, points)
    except ValidationException as e:
        logger.warning(f'NE stability unavailable: {e}')
        return None


def write_frontier(points: List[SweepPoint], out_json: str, ne_threshold: float = DEFAULT_NE_THRESHOLD,
                   input_paths: Optional[List[str]] = None) -> Dict[str, FrontierCurve]:
    curves = frontier_curves(points, ne_threshold)
    stability = _ne_stability_or_none(points)

    for name, curve in curves.items():
        logger.info(f'{name}: {len(curve)} frontier points')
    if stability is not None:
        print(f'NE stability (mean |dev NE - test NE|): {stability:.6f}')

    write_frontier_json(out_json, curves, ne_threshold, stability)
    RunManifest.for_inputs('frontier', {'ne_threshold': str(ne_threshold)}, input_paths or []).write(out_json)

    return curves


def run_sweep(model_config: str, dev_src: str, dev_ref: str, test_src: str, test_ref: str, out_csv: str,
              grid_spec: str = '', frontier_out: Optional[str] = None,
              ne_threshold: float = DEFAULT_NE_THRESHOLD, max_len_factor: float = DEFAULT_MAX_LEN_FACTOR,
              max_len_slack: int = DEFAULT_MAX_LEN_SLACK, num_threads: int = 1) -> List[SweepPoint]:
    """Sweeps re-translation configurations and writes the sweep CSV.

    Parameters
    ----------
    model_config : str
        Path to a model config JSON.

    dev_src, dev_ref, test_src, test_ref : str
        Line-aligned dev and test corpora.

    out_csv : str
        Sweep CSV path.

    grid_spec : str, default ''
        Grid in ``parse_grid`` syntax; empty means the default grid.

    frontier_out : str, default None
        If given, also write the frontier JSON here.

    ne_threshold : float, default 0.2
        Dev NE bound of the low-revision curve.

    num_threads : int, default 1
        (config, split) jobs run in parallel.

    Returns
    -------
    points : list of SweepPoint

    """

    grid = parse_grid(grid_spec)
    dev_corpus = read_corpus(dev_src, dev_ref)
    test_corpus = read_corpus(test_src, test_ref)

    model = load_model(model_config)
    try:
        points = sweep(model, dev_corpus, test_corpus, grid, num_threads=num_threads,
                       max_len_factor=max_len_factor, max_len_slack=max_len_slack)
    finally:
        model.close()

    write_sweep_csv(out_csv, points)
    inputs = [model_config, dev_src, dev_ref, test_src, test_ref]
    manifest_config = {'grid': grid_spec, 'max_len_factor': max_len_factor, 'max_len_slack': max_len_slack,
                       'model': model.describe()}
    RunManifest.for_inputs('sweep', manifest_config, inputs, seed=model.describe().get('seed')).write(out_csv)

    if frontier_out:
        write_frontier(points, frontier_out, ne_threshold, input_paths=inputs)

    return points


def build_frontier(sweep_csv: str, out_json: str,
                   ne_threshold: float = DEFAULT_NE_THRESHOLD) -> Dict[str, FrontierCurve]:
    """Frontier curves and NE stability from an existing sweep CSV."""
    points = read_sweep_csv(sweep_csv)
    logger.info(f'Read {len(points)} sweep points from {sweep_csv}')
    return write_frontier(points, out_json, ne_threshold, input_paths=[sweep_csv])
