from .base import BaseChainModel, PosteriorMarginals
from .crf import CrfModel
from .hmc import HmcModel

__all__ = ["BaseChainModel", "PosteriorMarginals", "CrfModel", "HmcModel"]
