"""Prefix-pair augmentation of a parallel corpus on disk"""


from typing import List, Optional
from src.core.augment import AugmentConfig, augment_corpus
from src.core.ptl import SentencePair
from src.utils.exceptions import CountMismatchException, ParseException, ValidationException
from src.utils.io import RunManifest, read_alignment_file, read_corpus, write_token_lines
from src import logger


def augment(src_file: str, tgt_file: str, out_src: str, out_tgt: str, config: AugmentConfig,
            align_file: Optional[str] = None) -> List[SentencePair]:
    """Writes the augmented corpus to ``out_src`` / ``out_tgt``.

    Parameters
    ----------
    src_file, tgt_file : str
        Line-aligned source and target files.

    out_src, out_tgt : str
        Output files, line-aligned.

    config : AugmentConfig
        Mode, mix, probability, seed and optional forced source length.

    align_file : str, default None
        Pharaoh alignments, one line per pair; required in aligned mode.

    Returns
    -------
    augmented : list of SentencePair

    """

    corpus = read_corpus(src_file, tgt_file)

    alignments = None
    if align_file:
        alignments = read_alignment_file(align_file)
        if len(alignments) != len(corpus):
            raise CountMismatchException(align_file, len(alignments), src_file, len(corpus))
        for line_number, (pair, alignment) in enumerate(zip(corpus, alignments), start=1):
            try:
                alignment.check_bounds(len(pair.source), len(pair.target))
            except ValidationException as e:
                raise ParseException(align_file, line_number, str(e))

    augmented = augment_corpus(corpus, config, alignments)

    write_token_lines(out_src, [pair.source for pair in augmented])
    write_token_lines(out_tgt, [pair.target for pair in augmented])
    logger.info(f'Wrote {len(augmented)} pairs to {out_src} and {out_tgt}')

    manifest_config = {'mode': config.mode, 'mix': config.mix, 'p': config.p,
                       'force_source_len': config.force_source_len}
    manifest = RunManifest.for_inputs('augment', manifest_config, [src_file, tgt_file, align_file], seed=config.seed)
    manifest.write(out_src)
    manifest.write(out_tgt)

    return augmented
