"""Runs a translation policy over a source file and records the PTLs"""


from typing import List
from src.core.decode import DecodeConfig, DEFAULT_MAX_LEN_FACTOR, DEFAULT_MAX_LEN_SLACK
from src.core.ptl import PrefixTranslationList
from src.core.simulate import simulate_corpus
from src.utils.exceptions import ParseException
from src.utils.io import RunManifest, load_model, read_token_lines, write_ptl_file
from src import logger


def simulate(src_file: str, model_config: str, policy: str, out: str, beta: float = 0.0, k: int = 0,
             beam: int = 1, max_len_factor: float = DEFAULT_MAX_LEN_FACTOR,
             max_len_slack: int = DEFAULT_MAX_LEN_SLACK, num_threads: int = 1) -> List[PrefixTranslationList]:
    """Simulates ``policy`` on every line of ``src_file`` and writes PTL JSON lines to ``out``.

    Parameters
    ----------
    src_file : str
        Source sentences, one per line.

    model_config : str
        Path to a model config JSON.

    policy : str
        'retranslate' or 'stream'.

    out : str
        Output PTL file; the run manifest goes next to it.

    beta, k, beam : float, int, int
        The policy configuration. Streaming ignores beta and beam.

    num_threads : int, default 1
        Sentences simulated in parallel.

    Returns
    -------
    ptls : list of PrefixTranslationList

    """

    config = DecodeConfig(beta=beta, k=k, beam=beam, max_len_factor=max_len_factor, max_len_slack=max_len_slack)

    sources = read_token_lines(src_file)
    for line_number, source in enumerate(sources, start=1):
        if len(source) == 0:
            raise ParseException(src_file, line_number, 'empty sentence')

    model = load_model(model_config)
    try:
        logger.info(f'Simulating {len(sources)} sentences: policy={policy}, {config.label}')
        ptls = simulate_corpus(model, sources, policy, config, num_threads=num_threads)
    finally:
        model.close()

    write_ptl_file(out, ptls)

    manifest_config = {'policy': policy, 'beta': config.beta, 'k': config.k, 'beam': config.beam,
                       'max_len_factor': config.max_len_factor, 'max_len_slack': config.max_len_slack,
                       'model': model.describe()}
    RunManifest.for_inputs('simulate', manifest_config, [src_file, model_config],
                           seed=model.describe().get('seed')).write(out)

    return ptls
