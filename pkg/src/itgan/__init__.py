"""Insider-threat log analysis toolkit with conditional-GAN augmentation."""

__version__ = "0.1.0"

CLASS_NAMES = ("NonMalicious", "S1", "S2", "S3")
CLASS_INDEX = {name: i for i, name in enumerate(CLASS_NAMES)}
