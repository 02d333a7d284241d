import json as _json

from ._tubedetr import (
    ConfigError,
    DimensionError,
    FormatError,
    Model,
    NumericError,
    ValidationError,
    box_iou,
    complexity,
    decode_span,
    generate_sample,
    siou,
    target_distribution,
    tiou,
    viou,
)


def make_model(**config):
    """Model from keyword overrides of the run configuration."""
    return Model(_json.dumps(config))


def sample_loss(model, video, annotation):
    return model.loss(video, _json.dumps(annotation))
