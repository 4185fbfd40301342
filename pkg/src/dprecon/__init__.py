"""Dropped-pronoun aware neural machine translation with reconstruction.

Subpackages and modules:

``autodiff``       tape-based reverse-mode differentiation over numpy arrays
``seq2seq``        attention GRU encoder-decoder
``reconstructor``  encoder-side and decoder-side reconstructors, joint loss
``training``       Adadelta training with two-stage initialisation
``decoding``       beam search and reconstruction reranking
``annotation``     alignment, pronoun projection, monolingual generator
``corpus``         synthetic corpora, statistics, BLEU and sign test
``experiment``     the end-to-end synthetic pipeline
``cli``            command-line entry point
"""

__version__ = "0.1.0"
