"""Dual-axis stance scoring over frozen language-model embeddings."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401


def pipeline(corpus, store, anchors=None, layer=0, config=None):
    """Train, optionally orient with anchor embeddings, and score.

    Returns (params, scores) where scores is a list of ScoredMeeting.
    """
    config = config or TrainConfig()  # noqa: F405
    data = build_pairs(corpus, store, layer)  # noqa: F405
    params = train(data, config).params  # noqa: F405
    if anchors is not None:
        params = anchor_orientation(params, AnchorSet.from_store(anchors, layer)).params  # noqa: F405
    return params, score(data, params, config.tau)  # noqa: F405
